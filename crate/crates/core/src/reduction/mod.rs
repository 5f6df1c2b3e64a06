//! Min-Mon-SAT instances and their compilation to levels.

pub mod canonical;
pub mod compile;
pub mod equivalence;
pub mod formula;

pub use canonical::{canonical_layout, extract_assignment, nearest_canonical_layout, CanonicalError};
pub use compile::{compile, CompileError, Geometry, PlacedGadget, ReductionPlan};
pub use formula::{
    clause_witnesses, dominating_set_to_mms, normalize_assignment, oracle_solve, Assignment, Formula, FormulaError,
    Graph, MmsInstance,
};
