//! JSON level documents.
//!
//! A document lists the cells that differ from its `fill` tile, an optional
//! rail layout and optional reduction-plan annotations:
//!
//! ```json
//! {
//!   "version": 1,
//!   "width": 3,
//!   "height": 1,
//!   "fill": "empty",
//!   "tiles": [
//!     {"pos":{"row":0,"col":0},"tile":{"type":"departure","color":"red","trains":1,"out_dir":"east"}}
//!   ],
//!   "layout": [
//!     {"pos":{"row":0,"col":1},"piece":{"kind":"straight","rotation":1,"active_branch":0}}
//!   ]
//! }
//! ```
//!
//! The canonical form picks the more frequent of rock and empty as `fill`,
//! sorts entries by position and writes one entry per line.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{validate_layout, PlacementError, RailEntry, RailLayout};
use crate::model::{Level, LevelError, Position, Tile};
use crate::reduction::{Geometry, MmsInstance, PlacedGadget, ReductionPlan};

pub const DOCUMENT_VERSION: u32 = 1;
/// Largest board a document may describe.
pub const MAX_CELLS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    #[default]
    Empty,
    Rock,
}

impl Fill {
    fn tile(self) -> Tile {
        match self {
            Fill::Empty => Tile::Empty,
            Fill::Rock => Tile::Rock,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileEntry {
    pub pos: Position,
    pub tile: Tile,
}

pub fn rail_entries(layout: &RailLayout) -> Vec<RailEntry> {
    layout.clone().into()
}

/// Reduction metadata carried alongside a compiled level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanAnnotations {
    pub instance: MmsInstance,
    pub geometry: Geometry,
    pub row_bands: Vec<i32>,
    pub column_bands: Vec<i32>,
    pub gadgets: Vec<PlacedGadget>,
    pub row_entries: Vec<Position>,
    pub replicator_input: Option<Position>,
    pub and_inputs: Vec<(Position, Position)>,
    pub fixed_rails: Vec<RailEntry>,
}

impl PlanAnnotations {
    pub fn from_plan(plan: &ReductionPlan) -> Self {
        Self {
            instance: plan.instance.clone(),
            geometry: plan.geometry,
            row_bands: plan.row_bands.clone(),
            column_bands: plan.column_bands.clone(),
            gadgets: plan.gadgets.clone(),
            row_entries: plan.row_entries.clone(),
            replicator_input: plan.replicator_input,
            and_inputs: plan.and_inputs.clone(),
            fixed_rails: rail_entries(&plan.fixed_rails),
        }
    }

    pub fn into_plan(self, level: Level) -> ReductionPlan {
        ReductionPlan {
            instance: self.instance,
            level,
            geometry: self.geometry,
            row_bands: self.row_bands,
            column_bands: self.column_bands,
            gadgets: self.gadgets,
            row_entries: self.row_entries,
            replicator_input: self.replicator_input,
            and_inputs: self.and_inputs,
            fixed_rails: self.fixed_rails.iter().map(|e| (e.pos, e.piece)).collect(),
        }
    }
}

/// The on-disk shape, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDocument {
    pub version: u32,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub fill: Fill,
    pub tiles: Vec<TileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<RailEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanAnnotations>,
}

/// A validated document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedLevel {
    pub level: Level,
    pub layout: Option<RailLayout>,
    pub plan: Option<PlanAnnotations>,
}

impl LoadedLevel {
    pub fn new(level: Level) -> Self {
        Self {
            level,
            layout: None,
            plan: None,
        }
    }

    pub fn from_plan(plan: &ReductionPlan, layout: Option<RailLayout>) -> Self {
        Self {
            level: plan.level.clone(),
            layout,
            plan: Some(PlanAnnotations::from_plan(plan)),
        }
    }

    pub fn reduction_plan(&self) -> Option<ReductionPlan> {
        self.plan.clone().map(|p| p.into_plan(self.level.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("board of {cells} cells exceeds the document limit")]
    TooLarge { cells: u64 },
    #[error("unsupported document version {0}")]
    Version(u32),
    #[error("tile at {0} lies outside the board")]
    OutOfRange(Position),
    #[error("two tiles at {0}")]
    Overlap(Position),
    #[error("two rails at {0}")]
    RailOverlap(Position),
    #[error("rail at {0} has an invalid rotation or switch state")]
    BadPiece(Position),
    #[error("{} rail(s) not on empty cells", .0.len())]
    Placement(Vec<PlacementError>),
    #[error(transparent)]
    Level(#[from] LevelError),
}

impl DocumentError {
    fn json(e: serde_json::Error) -> Self {
        DocumentError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl LevelDocument {
    pub fn validate(self) -> Result<LoadedLevel, DocumentError> {
        if self.version != DOCUMENT_VERSION {
            return Err(DocumentError::Version(self.version));
        }
        let cells = self.width as u64 * self.height as u64;
        if cells > MAX_CELLS {
            return Err(DocumentError::TooLarge { cells });
        }
        let (w, h) = (self.width as i32, self.height as i32);
        let mut level_tiles = vec![self.fill.tile(); cells as usize];
        let mut seen = BTreeSet::new();
        for e in &self.tiles {
            let p = e.pos;
            if p.row < 0 || p.col < 0 || p.row >= h || p.col >= w {
                return Err(DocumentError::OutOfRange(p));
            }
            let i = p.row as usize * w as usize + p.col as usize;
            if !seen.insert(e.pos) {
                return Err(DocumentError::Overlap(e.pos));
            }
            level_tiles[i] = e.tile;
        }
        let level = Level::new(self.width, self.height, level_tiles)?;
        let layout = match self.layout {
            None => None,
            Some(entries) => Some(layout_from_entries(&level, &entries)?),
        };
        Ok(LoadedLevel {
            level,
            layout,
            plan: self.plan,
        })
    }

    /// The canonical document for `loaded`.
    pub fn from_loaded(loaded: &LoadedLevel) -> Self {
        let level = &loaded.level;
        let rocks = level.tiles().iter().filter(|t| **t == Tile::Rock).count();
        let empties = level.tiles().iter().filter(|t| t.is_empty()).count();
        let fill = if rocks > empties { Fill::Rock } else { Fill::Empty };
        let tiles = level
            .iter()
            .filter(|(_, t)| **t != fill.tile())
            .map(|(pos, tile)| TileEntry { pos, tile: *tile })
            .collect();
        Self {
            version: DOCUMENT_VERSION,
            width: level.width(),
            height: level.height(),
            fill,
            tiles,
            layout: loaded.layout.as_ref().map(rail_entries),
            plan: loaded.plan.clone(),
        }
    }

    /// Canonical text: fixed key order, one tile or rail entry per line.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::from("{\n");
        s.push_str(&format!("  \"version\": {},\n", self.version));
        s.push_str(&format!("  \"width\": {},\n", self.width));
        s.push_str(&format!("  \"height\": {},\n", self.height));
        s.push_str(&format!("  \"fill\": {},\n", json(&self.fill)));
        s.push_str("  \"tiles\": ");
        push_list(&mut s, self.tiles.iter().map(json));
        if let Some(layout) = &self.layout {
            s.push_str(",\n  \"layout\": ");
            push_list(&mut s, layout.iter().map(json));
        }
        if let Some(plan) = &self.plan {
            s.push_str(",\n  \"plan\": ");
            let pretty = serde_json::to_string_pretty(plan).expect("plan serializes");
            s.push_str(&pretty.replace('\n', "\n  "));
        }
        s.push_str("\n}\n");
        s
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("document values serialize")
}

fn push_list(s: &mut String, items: impl Iterator<Item = String>) {
    let items: Vec<String> = items.collect();
    if items.is_empty() {
        s.push_str("[]");
        return;
    }
    s.push_str("[\n    ");
    s.push_str(&items.join(",\n    "));
    s.push_str("\n  ]");
}

/// Builds a layout from entries, rejecting duplicates, malformed pieces and
/// pieces off empty cells. Placement problems are reported all at once.
pub fn layout_from_entries(level: &Level, entries: &[RailEntry]) -> Result<RailLayout, DocumentError> {
    let mut layout = RailLayout::new();
    for e in entries {
        let p = e.piece;
        if p.rotation > 3 || p.active_branch > 1 || (!p.kind.is_switch() && p.active_branch != 0) {
            return Err(DocumentError::BadPiece(e.pos));
        }
        if layout.insert(e.pos, p).is_some() {
            return Err(DocumentError::RailOverlap(e.pos));
        }
    }
    let errors = validate_layout(level, &layout);
    if !errors.is_empty() {
        return Err(DocumentError::Placement(errors));
    }
    Ok(layout)
}

pub fn parse_document(text: &str) -> Result<LevelDocument, DocumentError> {
    serde_json::from_str(text).map_err(DocumentError::json)
}

pub fn parse_level(text: &str) -> Result<LoadedLevel, DocumentError> {
    parse_document(text)?.validate()
}

pub fn parse_level_bytes(bytes: &[u8]) -> Result<LoadedLevel, DocumentError> {
    serde_json::from_slice::<LevelDocument>(bytes)
        .map_err(DocumentError::json)?
        .validate()
}

pub fn serialize_level(loaded: &LoadedLevel) -> String {
    LevelDocument::from_loaded(loaded).to_canonical_string()
}

/// Parses a layout given as a bare JSON list of rail entries.
pub fn parse_layout(level: &Level, text: &str) -> Result<RailLayout, DocumentError> {
    let entries: Vec<RailEntry> = serde_json::from_str(text).map_err(DocumentError::json)?;
    layout_from_entries(level, &entries)
}
