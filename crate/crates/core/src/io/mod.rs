//! File formats shared by the command line and the HTTP service.

pub mod level;
pub mod text;
pub mod trace;

pub use crate::engine::RailEntry;
pub use level::{
    layout_from_entries, parse_document, parse_layout, parse_level, parse_level_bytes, rail_entries, serialize_level,
    DocumentError, Fill, LevelDocument, LoadedLevel, PlanAnnotations, TileEntry, DOCUMENT_VERSION,
};
pub use text::{
    parse_formula, parse_formula_bytes, parse_graph, parse_graph_bytes, write_formula, write_graph, TextError,
    TextErrorKind,
};
pub use trace::{StepSnapshot, TraceDocument};
