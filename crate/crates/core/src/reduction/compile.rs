//! Lays out the level for a Min-Mon-SAT instance.
//!
//! Working coordinates are signed; the level is the bounding box of every
//! non-rock cell. With `n` variables and `m` clauses:
//!
//! * the matrix has one 7x8 cell per (variable, clause), variable 1 at the
//!   bottom; a cell holds a cross-satisfy gadget when the variable occurs in
//!   the clause and a cross-ignore gadget (plus straight lanes) otherwise;
//! * each matrix row is entered from the left through a one-time-pass and
//!   ends in a terminus;
//! * left of the rows lies the open routing area, fed from below by `k`
//!   departures and by the `n - k` replicator outputs;
//! * the clause columns leave the matrix at the top and are combined by a
//!   staircase of `m - 1` AND gadgets whose final output drives the
//!   replicator (or a terminus when `k = n`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadgets::catalog::{
    and2_delay_capacity, arrival, designs, painter, stamp, GadgetKind, GadgetStamp, AND_LEFT_COL,
    AND_RIGHT_COL,
};
use crate::engine::RailLayout;
use crate::model::{Axis, Color, Direction, Level, Position, RailKind, RailPiece, Tile};

use super::formula::{FormulaError, MmsInstance};

use Direction::*;

pub const CELL_H: i64 = 7;
pub const CELL_W: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("formula has no clauses")]
    NoClauses,
    #[error("board of {width}x{height} is too large")]
    TooLarge { width: i64, height: i64 },
}

/// Grid geometry shared by the compiler and the canonical layout builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub n: i64,
    pub m: i64,
    pub k: i64,
    /// Delay slots per AND gadget.
    pub slots: i64,
    /// Working coordinates of level cell (0, 0).
    pub origin_row: i64,
    pub origin_col: i64,
}

pub(crate) type Rc = (i64, i64);

impl Geometry {
    fn new(n: u32, m: usize, k: u32) -> Self {
        let (n, m, k) = (n as i64, m as i64, k as i64);
        let mut g = Self {
            n,
            m,
            k,
            slots: and_slots(n, m, k),
            origin_row: 0,
            origin_col: 0,
        };
        let (r0, c0) = g.bounding_min();
        g.origin_row = r0;
        g.origin_col = c0;
        g
    }

    pub fn pos(&self, (r, c): Rc) -> Position {
        Position::new((r - self.origin_row) as i32, (c - self.origin_col) as i32)
    }

    pub fn cell_origin(&self, var: i64, clause: i64) -> Rc {
        ((self.n - var) * CELL_H, (clause - 1) * CELL_W)
    }

    /// Row of the horizontal lane of variable `var`.
    pub fn row_y(&self, var: i64) -> i64 {
        (self.n - var) * CELL_H + 5
    }

    /// Column of the vertical lane of clause `j`.
    pub fn col_x(&self, clause: i64) -> i64 {
        (clause - 1) * CELL_W + 5
    }

    pub fn green_cols(&self) -> (i64, i64) {
        (-4 - 2 * self.n, -5)
    }

    pub fn green_rows(&self) -> (i64, i64) {
        (self.row_y(self.n), CELL_H * self.n - 1)
    }

    pub fn source_col(&self, q: i64) -> i64 {
        self.green_cols().0 + 2 * q
    }

    pub fn departure(&self, q: i64) -> Rc {
        (self.green_rows().1 + 1, self.source_col(q))
    }

    pub fn otp_splitter(&self, var: i64) -> Rc {
        (self.row_y(var), -3)
    }

    pub fn and_height(&self) -> i64 {
        5 + 2 * self.slots
    }

    /// Top-left corner of AND gadget `j` (1-based), which combines the
    /// running conjunction with clause `j + 1`.
    pub fn and_origin(&self, j: i64) -> Rc {
        let h = self.and_height();
        let top1 = -2 - h;
        (top1 - (j - 1) * (h + 2), CELL_W * j - 2)
    }

    /// Cell just above the final conjunction output, heading north.
    pub fn final_exit(&self) -> Rc {
        if self.m >= 2 {
            let (r, c) = self.and_origin(self.m - 1);
            (r - 1, c + 4)
        } else {
            (-1, self.col_x(1))
        }
    }

    pub fn top_row(&self) -> i64 {
        self.final_exit().0 - 2
    }

    pub fn replicator_outputs(&self) -> i64 {
        self.n - self.k
    }

    pub fn replicator_width(&self) -> i64 {
        let q = self.replicator_outputs();
        if q <= 1 {
            1
        } else {
            4 * q - 3
        }
    }

    pub fn replicator_origin(&self) -> Rc {
        let rx = self.green_cols().0 - 1 - self.replicator_width();
        (self.top_row() + 2, rx)
    }

    /// Row on which replicator output `t` runs east under the board.
    pub fn return_row(&self, t: i64) -> i64 {
        self.green_rows().1 + 3 + 2 * (self.replicator_outputs() - 1 - t)
    }

    fn bounding_min(&self) -> Rc {
        let mut r = self.top_row();
        let mut c = self.green_cols().0;
        if self.replicator_outputs() > 0 {
            c = c.min(self.replicator_origin().1);
        }
        r = r.min(self.final_exit().0 - 1);
        (r, c)
    }
}

/// Delay slots per AND gadget: enough to absorb any arrival-time spread the
/// clause columns can show, whatever the assignment.
fn and_slots(n: i64, m: i64, k: i64) -> i64 {
    let spread = 18 * (n - 1) + 2 * (k - 1).max(0) + 2 * (m - 1) + 8;
    let needed = spread + 10 * m + 8;
    ((needed + 5) / 6).max(1)
}

/// What sits where, for display and for mapping traces back to the formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedGadget {
    pub kind: GadgetKind,
    pub role: String,
    pub origin: Position,
    pub width: u32,
    pub height: u32,
}

impl PlacedGadget {
    pub fn contains(&self, p: Position) -> bool {
        p.row >= self.origin.row
            && p.col >= self.origin.col
            && p.row < self.origin.row + self.height as i32
            && p.col < self.origin.col + self.width as i32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionPlan {
    pub instance: MmsInstance,
    pub level: Level,
    pub geometry: Geometry,
    /// Level row of each variable's horizontal lane, index 0 = variable 1.
    pub row_bands: Vec<i32>,
    /// Level column of each clause's vertical lane.
    pub column_bands: Vec<i32>,
    pub gadgets: Vec<PlacedGadget>,
    /// One-time-pass splitter per variable row.
    pub row_entries: Vec<Position>,
    /// Replicator input cell, absent when `k = n`.
    pub replicator_input: Option<Position>,
    /// AND gadget input painters `(left, right)` in chain order.
    pub and_inputs: Vec<(Position, Position)>,
    /// Rails every canonical layout shares (lanes and forced gadget rails).
    pub fixed_rails: RailLayout,
}

impl ReductionPlan {
    pub fn gadget_at(&self, p: Position) -> Option<&PlacedGadget> {
        self.gadgets.iter().find(|g| g.contains(p))
    }
}

pub(crate) struct Canvas {
    pub tiles: BTreeMap<Rc, Tile>,
    pub rails: BTreeMap<Rc, RailPiece>,
    pub gadgets: Vec<(GadgetKind, String, Rc, u32, u32)>,
}

impl Canvas {
    fn new() -> Self {
        Self {
            tiles: BTreeMap::new(),
            rails: BTreeMap::new(),
            gadgets: Vec::new(),
        }
    }

    fn put(&mut self, at: Rc, t: Tile) {
        let prev = self.tiles.insert(at, t);
        assert!(prev.is_none() || prev == Some(t), "overlap at {at:?}: {prev:?} vs {t:?}");
    }

    fn stamp(&mut self, s: &GadgetStamp, o: Rc, role: String) {
        for r in 0..s.height as i64 {
            for c in 0..s.width as i64 {
                let t = *s.tile(Position::new(r as i32, c as i32)).unwrap();
                if t != Tile::Rock {
                    self.put((o.0 + r, o.1 + c), t);
                }
            }
        }
        self.gadgets.push((s.kind, role, o, s.width, s.height));
    }

    fn stamp_rails(&mut self, layout: &RailLayout, o: Rc) {
        for (p, piece) in layout.iter() {
            self.rails.insert((o.0 + p.row as i64, o.1 + p.col as i64), piece);
        }
    }

    /// Opens a path of cells and lays rails along it. `entry` is the side
    /// the first cell is entered from, `exit` the side the last one leaves by.
    pub fn path(&mut self, cells: &[Rc], entry: Direction, exit: Direction) {
        for &cell in cells {
            self.put(cell, Tile::Empty);
        }
        lay_path(&mut self.rails, cells, entry, exit);
    }

    fn open(&mut self, cell: Rc) {
        self.put(cell, Tile::Empty);
    }
}

/// Lays rails along a path of cells. Where two paths meet straight across
/// each other the cell becomes a crossing.
pub(crate) fn lay_path(rails: &mut BTreeMap<Rc, RailPiece>, cells: &[Rc], entry: Direction, exit: Direction) {
    for (i, &cell) in cells.iter().enumerate() {
        let from = if i == 0 { entry } else { side_towards(cell, cells[i - 1]) };
        let to = if i + 1 == cells.len() { exit } else { side_towards(cell, cells[i + 1]) };
        let piece = RailPiece::connecting(from, to);
        let merged = match rails.get(&cell) {
            Some(prev) if *prev != piece => {
                assert!(
                    prev.kind == RailKind::Straight && piece.kind == RailKind::Straight,
                    "paths may only cross straight through at {cell:?}"
                );
                RailPiece::crossing()
            }
            _ => piece,
        };
        rails.insert(cell, merged);
    }
}

fn side_towards(from: Rc, to: Rc) -> Direction {
    match (to.0 - from.0, to.1 - from.1) {
        (-1, 0) => North,
        (1, 0) => South,
        (0, 1) => East,
        (0, -1) => West,
        d => panic!("cells {from:?} and {to:?} are not adjacent ({d:?})"),
    }
}

/// Straight run of cells from `a` to `b` inclusive along a row or column.
pub(crate) fn run(a: Rc, b: Rc) -> Vec<Rc> {
    if a.0 == b.0 {
        let step = if b.1 >= a.1 { 1 } else { -1 };
        (0..=(b.1 - a.1).abs()).map(|i| (a.0, a.1 + step * i)).collect()
    } else {
        assert_eq!(a.1, b.1, "run must be axis aligned");
        let step = if b.0 >= a.0 { 1 } else { -1 };
        (0..=(b.0 - a.0).abs()).map(|i| (a.0 + step * i, a.1)).collect()
    }
}

/// Concatenates runs, dropping the repeated corner cells.
pub(crate) fn polyline(corners: &[Rc]) -> Vec<Rc> {
    let mut out: Vec<Rc> = vec![corners[0]];
    for w in corners.windows(2) {
        out.extend(run(w[0], w[1]).into_iter().skip(1));
    }
    out
}

const MAX_SIDE: i64 = 4096;

pub fn compile(inst: &MmsInstance) -> Result<ReductionPlan, CompileError> {
    let f = &inst.formula;
    if f.num_clauses() == 0 {
        return Err(CompileError::NoClauses);
    }
    if inst.k > f.num_vars() {
        return Err(FormulaError::KTooLarge { k: inst.k, n: f.num_vars() }.into());
    }
    let g = Geometry::new(f.num_vars(), f.num_clauses(), inst.k);
    let (n, m, k) = (g.n, g.m, g.k);
    let mut cv = Canvas::new();

    // matrix
    let ci = stamp(GadgetKind::CrossIgnore).unwrap();
    let cs = stamp(GadgetKind::CrossSatisfy).unwrap();
    let ci_rails = designs(GadgetKind::CrossIgnore).remove(0).layout;
    for var in 1..=n {
        for j in 1..=m {
            let o = g.cell_origin(var, j);
            let role = format!("cell x{var} c{j}");
            if f.contains((j - 1) as usize, var as u32) {
                cv.stamp(&cs, o, role);
            } else {
                cv.stamp(&ci, (o.0 + 2, o.1 + 4), role);
                cv.stamp_rails(&ci_rails, (o.0 + 2, o.1 + 4));
                cv.path(&run((o.0 + 5, o.1), (o.0 + 5, o.1 + 3)), West, East);
                cv.path(&run((o.0 + 1, o.1 + 5), (o.0, o.1 + 5)), South, North);
            }
        }
    }

    // row entries and ends
    let otp = stamp(GadgetKind::OneTimePass).unwrap();
    let otp_rails = designs(GadgetKind::OneTimePass).remove(0).layout;
    let term = stamp(GadgetKind::Terminus).unwrap();
    for var in 1..=n {
        let y = g.row_y(var);
        let o = (y - 2, -3);
        cv.stamp(&otp, o, format!("one-time-pass x{var}"));
        cv.stamp_rails(&otp_rails, o);
        cv.path(&[(y, -1)], West, East);
        cv.path(&[(y, -4)], West, East);
        cv.stamp(&term, (y, CELL_W * m), format!("terminus x{var}"));
    }

    // routing area and departures
    let (gx0, gx1) = g.green_cols();
    let (gy0, gy1) = g.green_rows();
    for r in gy0..=gy1 {
        for c in gx0..=gx1 {
            cv.open((r, c));
        }
    }
    for q in 0..k {
        cv.put(
            g.departure(q),
            Tile::Departure {
                color: Color::Red,
                trains: 1,
                out_dir: North,
            },
        );
    }

    // clause columns and the AND staircase
    let mut and_inputs = Vec::new();
    if m >= 2 {
        let and_kind = GadgetKind::And2 {
            buffer_slots: g.slots as u32,
        };
        let and = stamp(and_kind).unwrap();
        let h = g.and_height();
        for j in 1..m {
            let o = g.and_origin(j);
            cv.stamp(&and, o, format!("and {j}"));
            let bottom = o.0 + h - 1;
            let left = (bottom, o.1 + AND_LEFT_COL as i64);
            let right = (bottom, o.1 + AND_RIGHT_COL as i64);
            and_inputs.push((g.pos(left), g.pos(right)));
            // clause j + 1 straight up into the right painter
            cv.path(&run((-1, g.col_x(j + 1)), (bottom + 1, g.col_x(j + 1))), South, North);
            // left input: clause 1, or the previous conjunction
            let from = if j == 1 {
                (-1, g.col_x(1))
            } else {
                let p = g.and_origin(j - 1);
                (p.0 - 1, p.1 + 4)
            };
            let jog = from.0 - 1;
            let corners = if j == 1 {
                vec![from, (jog, from.1), (jog, left.1), (bottom + 1, left.1)]
            } else {
                vec![from, (from.0, left.1), (bottom + 1, left.1)]
            };
            cv.path(&polyline(&corners), South, North);
        }
    }

    // final output: to the replicator, or absorbed when every row is true
    let fx = g.final_exit();
    let top = g.top_row();
    let q_r = g.replicator_outputs();
    if q_r == 0 {
        cv.put(fx, painter(Color::Red, Axis::Vertical));
        cv.put((fx.0 - 1, fx.1), arrival(Color::Red, South));
        cv.gadgets.push((GadgetKind::Terminus, "terminus final".into(), (fx.0 - 1, fx.1), 1, 2));
    } else {
        let (ry, rx) = g.replicator_origin();
        let corners = vec![fx, (top, fx.1), (top, rx), (ry - 1, rx)];
        cv.path(&polyline(&corners), South, South);
        let rep = stamp(GadgetKind::Replicator { outputs: q_r as u32 }).unwrap();
        let rep_rails = designs(rep.kind).remove(0).layout;
        cv.stamp(&rep, (ry, rx), "replicator".into());
        cv.stamp_rails(&rep_rails, (ry, rx));
        for (t, port) in rep.outputs().enumerate() {
            let t = t as i64;
            let x = rx + port.pos.col as i64;
            let b = g.return_row(t);
            let sc = g.source_col(n - 1 - t);
            let corners = vec![(ry + 4, x), (b, x), (b, sc), (gy1 + 1, sc)];
            cv.path(&polyline(&corners), North, North);
        }
    }

    // the level
    let (r0, c0) = (g.origin_row, g.origin_col);
    let r1 = cv.tiles.keys().map(|p| p.0).max().unwrap();
    let c1 = cv.tiles.keys().map(|p| p.1).max().unwrap();
    debug_assert!(cv.tiles.keys().all(|p| p.0 >= r0 && p.1 >= c0));
    let (height, width) = (r1 - r0 + 1, c1 - c0 + 1);
    if height > MAX_SIDE || width > MAX_SIDE {
        return Err(CompileError::TooLarge { width, height });
    }
    let mut tiles = vec![Tile::Rock; (width * height) as usize];
    for (&(r, c), &t) in &cv.tiles {
        tiles[((r - r0) * width + (c - c0)) as usize] = t;
    }
    let level = Level::new(width as u32, height as u32, tiles).expect("compiled level is valid");
    let fixed_rails = cv.rails.iter().map(|(&rc, &p)| (g.pos(rc), p)).collect();
    let gadgets = cv
        .gadgets
        .into_iter()
        .map(|(kind, role, o, w, h)| PlacedGadget {
            kind,
            role,
            origin: g.pos(o),
            width: w,
            height: h,
        })
        .collect();
    Ok(ReductionPlan {
        instance: inst.clone(),
        level,
        geometry: g,
        row_bands: (1..=n).map(|v| g.pos((g.row_y(v), 0)).row).collect(),
        column_bands: (1..=m).map(|j| g.pos((0, g.col_x(j))).col).collect(),
        gadgets,
        row_entries: (1..=n).map(|v| g.pos(g.otp_splitter(v))).collect(),
        replicator_input: (q_r > 0).then(|| g.pos(g.replicator_origin())),
        and_inputs,
        fixed_rails,
    })
}

/// Extra steps an AND side can absorb in this plan.
pub fn and_capacity(g: &Geometry) -> u64 {
    and2_delay_capacity(g.slots as u32)
}
