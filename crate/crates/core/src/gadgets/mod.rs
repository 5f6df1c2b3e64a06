//! The gadget catalog, its contracts, and the isolated-run verifier.

pub mod catalog;
pub mod contract;
pub mod harness;
pub mod verify;

pub use catalog::{designs, stamp, Design, GadgetError, GadgetKind, GadgetStamp, Polarity, Port};
pub use contract::{contract, Contract, Expect, Injection, Scenario, ScenarioKind};
pub use verify::{verify, VerificationReport, VerifyError, VerifyMode, DEFAULT_EXHAUSTIVE_BOUND};
