//! Trainyard puzzle model, simulator, gadget catalog and the Min-Mon-SAT
//! level compiler.

pub mod engine;
pub mod gadgets;
pub mod io;
pub mod model;
pub mod reduction;
pub mod testkit;

pub use engine::{
    simulate, step, validate_layout, Outcome, RailLayout, SimResult, SimState, Status, Trace,
    Train,
};
pub use model::{Color, Direction, Level, Position, RailKind, RailPiece, Tile};
