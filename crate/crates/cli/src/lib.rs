//! Command line and HTTP front ends.

pub mod commands;
pub mod service;

pub use commands::run;
