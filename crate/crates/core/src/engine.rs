//! Deterministic discrete-step simulator.
//!
//! One call to [`advance`] performs a full time step in this order:
//!
//! 1. departures with trains left push one train out of the station cell,
//!    and splitter children queued on the previous step are released;
//! 2. every train moves one cell along its heading (facing trains that swap
//!    cells touch);
//! 3. each train is routed by the content of its new cell (rails, painter,
//!    splitter intake, or a crash);
//! 4. trains sharing a cell and a track interact: equal exit headings merge,
//!    different headings touch;
//! 5. trains entering arrival stations are absorbed or crash;
//! 6. traversed switches flip once;
//! 7. the status is recomputed.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{route_fast, Color, Direction, Level, Position, RailPiece, Tile, TrackId};

pub const DEFAULT_STEP_CAP: u64 = 10_000;

pub type TrainId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Train {
    pub id: TrainId,
    pub pos: Position,
    pub heading: Direction,
    pub color: Color,
    /// `(row + col + step) mod 2`, fixed at creation.
    pub phase: u8,
}

/// The player's rails, keyed by cell.
/// One placed piece; the serialized form of a layout is a list of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RailEntry {
    pub pos: Position,
    pub piece: RailPiece,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<RailEntry>", from = "Vec<RailEntry>")]
pub struct RailLayout {
    pieces: BTreeMap<Position, RailPiece>,
}

impl RailLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pos: Position, piece: RailPiece) -> Option<RailPiece> {
        self.pieces.insert(pos, piece)
    }

    pub fn remove(&mut self, pos: Position) -> Option<RailPiece> {
        self.pieces.remove(&pos)
    }

    pub fn get(&self, pos: Position) -> Option<RailPiece> {
        self.pieces.get(&pos).copied()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Position, RailPiece)> + '_ {
        self.pieces.iter().map(|(p, r)| (*p, *r))
    }
}

impl From<RailLayout> for Vec<RailEntry> {
    fn from(l: RailLayout) -> Self {
        l.iter().map(|(pos, piece)| RailEntry { pos, piece }).collect()
    }
}

impl From<Vec<RailEntry>> for RailLayout {
    fn from(v: Vec<RailEntry>) -> Self {
        v.into_iter().map(|e| (e.pos, e.piece)).collect()
    }
}

impl FromIterator<(Position, RailPiece)> for RailLayout {
    fn from_iter<I: IntoIterator<Item = (Position, RailPiece)>>(iter: I) -> Self {
        Self {
            pieces: iter.into_iter().collect(),
        }
    }
}

/// Supplies the rail piece at an empty cell when a train enters it.
///
/// The entry side is passed so lazy sources (layout enumeration and sampling)
/// can decide a piece on first use.
pub trait RailSource {
    fn piece_at(&mut self, pos: Position, entry: Direction) -> Option<RailPiece>;
}

impl RailSource for &RailLayout {
    fn piece_at(&mut self, pos: Position, _entry: Direction) -> Option<RailPiece> {
        self.get(pos)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlacementError {
    OutOfBounds { pos: Position },
    NotEmpty { pos: Position, tile: Tile },
}

/// Lists every placed piece that does not sit on an in-bounds empty cell.
pub fn validate_layout(level: &Level, layout: &RailLayout) -> Vec<PlacementError> {
    layout
        .iter()
        .filter_map(|(pos, _)| match level.tile(pos) {
            None => Some(PlacementError::OutOfBounds { pos }),
            Some(Tile::Empty) => None,
            Some(t) => Some(PlacementError::NotEmpty { pos, tile: *t }),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrashReason {
    OffBoard,
    Rock,
    NoRail,
    MisplacedRail,
    WrongSide,
    ColorMismatch,
    ArrivalFull,
    EnteredDeparture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    Running,
    Won,
    Crashed { pos: Position, reason: CrashReason },
    Deadlocked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimState {
    pub step: u64,
    pub trains: Vec<Train>,
    /// Splitter children released at the start of the next step.
    pub pending: Vec<Train>,
    pub switch_states: BTreeMap<Position, u8>,
    pub departures_remaining: BTreeMap<Position, u32>,
    pub arrivals_received: BTreeMap<Position, u32>,
    pub status: Status,
    pub next_id: TrainId,
}

impl SimState {
    pub fn new(level: &Level) -> Self {
        let departures_remaining = level
            .departures()
            .map(|(p, t)| match t {
                Tile::Departure { trains, .. } => (p, *trains),
                _ => unreachable!(),
            })
            .collect();
        let arrivals_received = level.arrivals().map(|(p, _)| (p, 0)).collect();
        let mut st = Self {
            step: 0,
            trains: Vec::new(),
            pending: Vec::new(),
            switch_states: BTreeMap::new(),
            departures_remaining,
            arrivals_received,
            status: Status::Running,
            next_id: 0,
        };
        st.refresh_status(level);
        st
    }

    /// Places a train at `pos` at the current step; it moves on the next step.
    pub fn spawn(&mut self, pos: Position, heading: Direction, color: Color) -> TrainId {
        let id = self.next_id;
        self.next_id += 1;
        self.trains.push(Train {
            id,
            pos,
            heading,
            color,
            phase: ((pos.parity() as u64 + self.step) % 2) as u8,
        });
        if matches!(self.status, Status::Won | Status::Deadlocked) {
            self.status = Status::Running;
        }
        id
    }

    pub fn remove_train(&mut self, id: TrainId) -> Option<Train> {
        let i = self.trains.iter().position(|t| t.id == id)?;
        Some(self.trains.remove(i))
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    /// Recomputes the win/deadlock predicate; crashes are sticky.
    pub fn refresh_status(&mut self, level: &Level) {
        if matches!(self.status, Status::Crashed { .. }) {
            return;
        }
        self.status = Status::Running;
        let idle = self.trains.is_empty()
            && self.pending.is_empty()
            && self.departures_remaining.values().all(|&n| n == 0);
        if !idle {
            return;
        }
        let full = level.arrivals().all(|(p, t)| match t {
            Tile::Arrival { capacity, .. } => self.arrivals_received.get(&p) == Some(capacity),
            _ => unreachable!(),
        });
        self.status = if full { Status::Won } else { Status::Deadlocked };
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Emit {
        step: u64,
        pos: Position,
        train: TrainId,
    },
    Merge {
        step: u64,
        pos: Position,
        into: TrainId,
        merged: Vec<TrainId>,
        phases: Vec<u8>,
        color: Color,
        order_sensitive: bool,
    },
    Touch {
        step: u64,
        pos: Position,
        trains: Vec<TrainId>,
        color: Color,
    },
    Split {
        step: u64,
        pos: Position,
        parent: TrainId,
        children: [TrainId; 2],
    },
    Paint {
        step: u64,
        pos: Position,
        train: TrainId,
        from: Color,
        to: Color,
    },
    Absorb {
        step: u64,
        pos: Position,
        train: TrainId,
    },
    Crash {
        step: u64,
        pos: Position,
        train: TrainId,
        reason: CrashReason,
    },
}

impl Event {
    pub fn step(&self) -> u64 {
        match self {
            Event::Emit { step, .. }
            | Event::Merge { step, .. }
            | Event::Touch { step, .. }
            | Event::Split { step, .. }
            | Event::Paint { step, .. }
            | Event::Absorb { step, .. }
            | Event::Crash { step, .. } => *step,
        }
    }
}

/// What happens to trains that crash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrashPolicy {
    /// The level is lost and the simulation stops.
    #[default]
    Halt,
    /// The train is removed and the simulation continues. Used for timing
    /// probes while constructing layouts.
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("cannot step a finished simulation (status {0:?})")]
    NotRunning(Status),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid layout: {} misplaced piece(s)", .0.len())]
    InvalidLayout(Vec<PlacementError>),
}

fn fold_colors(colors: &[Color]) -> Color {
    colors.iter().copied().reduce(Color::mix).expect("non-empty group")
}

fn fold_is_order_sensitive(colors: &[Color]) -> bool {
    if colors.len() < 3 {
        return false;
    }
    if colors.len() > 6 {
        return true;
    }
    let first = fold_colors(colors);
    colors
        .iter()
        .copied()
        .permutations(colors.len())
        .any(|p| fold_colors(&p) != first)
}

/// Advances `st` by one step in place, appending events to `events`.
pub fn advance<R: RailSource>(
    level: &Level,
    rails: &mut R,
    st: &mut SimState,
    policy: CrashPolicy,
    events: &mut Vec<Event>,
) -> Result<(), StepError> {
    if !st.is_running() {
        return Err(StepError::NotRunning(st.status));
    }
    st.step += 1;
    let t = st.step;

    let mut moving = std::mem::take(&mut st.trains);
    moving.append(&mut st.pending);
    for (pos, remaining) in st.departures_remaining.iter_mut() {
        if *remaining == 0 {
            continue;
        }
        let Some(&Tile::Departure { color, out_dir, .. }) = level.tile(*pos) else {
            continue;
        };
        *remaining -= 1;
        let id = st.next_id;
        st.next_id += 1;
        moving.push(Train {
            id,
            pos: *pos,
            heading: out_dir,
            color,
            phase: ((pos.parity() as u64 + t - 1) % 2) as u8,
        });
        events.push(Event::Emit {
            step: t,
            pos: *pos,
            train: id,
        });
    }

    let prev: Vec<Position> = moving.iter().map(|tr| tr.pos).collect();
    for tr in moving.iter_mut() {
        tr.pos = tr.pos.step(tr.heading);
    }
    for i in 0..moving.len() {
        for j in i + 1..moving.len() {
            if moving[i].pos == prev[j]
                && moving[j].pos == prev[i]
                && moving[i].heading == moving[j].heading.opposite()
            {
                let c = moving[i].color.mix(moving[j].color);
                moving[i].color = c;
                moving[j].color = c;
                events.push(Event::Touch {
                    step: t,
                    pos: moving[i].pos,
                    trains: vec![moving[i].id, moving[j].id],
                    color: c,
                });
            }
        }
    }

    let mut crashes: Vec<(Train, CrashReason)> = Vec::new();
    let mut routed: Vec<(Train, TrackId)> = Vec::with_capacity(moving.len());
    let mut arriving: Vec<(Train, Direction)> = Vec::new();
    let mut switch_hits: Vec<Position> = Vec::new();
    for mut tr in moving {
        let Some(tile) = level.tile(tr.pos) else {
            crashes.push((tr, CrashReason::OffBoard));
            continue;
        };
        let entry = tr.heading.opposite();
        match *tile {
            Tile::Empty => {
                let Some(mut piece) = rails.piece_at(tr.pos, entry) else {
                    crashes.push((tr, CrashReason::NoRail));
                    continue;
                };
                let is_switch = piece.kind.is_switch();
                if is_switch {
                    if let Some(&s) = st.switch_states.get(&tr.pos) {
                        piece.active_branch = s;
                    }
                }
                match route_fast(piece, entry) {
                    Some((exit, track)) => {
                        if is_switch {
                            switch_hits.push(tr.pos);
                            st.switch_states.entry(tr.pos).or_insert(piece.active_branch);
                        }
                        tr.heading = exit;
                        routed.push((tr, track));
                    }
                    None => crashes.push((tr, CrashReason::MisplacedRail)),
                }
            }
            Tile::Rock => crashes.push((tr, CrashReason::Rock)),
            Tile::Departure { .. } => crashes.push((tr, CrashReason::EnteredDeparture)),
            Tile::Arrival { .. } => arriving.push((tr, entry)),
            Tile::Painter { color, axis } => {
                if axis.contains(entry) {
                    if tr.color != color {
                        events.push(Event::Paint {
                            step: t,
                            pos: tr.pos,
                            train: tr.id,
                            from: tr.color,
                            to: color,
                        });
                        tr.color = color;
                    }
                    routed.push((tr, TrackId::MAIN));
                } else {
                    crashes.push((tr, CrashReason::WrongSide));
                }
            }
            Tile::Splitter { in_dir } => {
                if entry != in_dir {
                    crashes.push((tr, CrashReason::WrongSide));
                    continue;
                }
                let (red, blue) = tr.color.split();
                let mut ids = [0; 2];
                for (k, (side, color)) in [(in_dir.cw(), red), (in_dir.ccw(), blue)]
                    .into_iter()
                    .enumerate()
                {
                    ids[k] = st.next_id;
                    st.next_id += 1;
                    st.pending.push(Train {
                        id: ids[k],
                        pos: tr.pos,
                        heading: side,
                        color,
                        phase: tr.phase,
                    });
                }
                events.push(Event::Split {
                    step: t,
                    pos: tr.pos,
                    parent: tr.id,
                    children: ids,
                });
            }
        }
    }

    // interactions between trains on the same cell and track
    routed.sort_by_key(|(tr, track)| (tr.pos, *track, tr.id));
    let mut survivors: Vec<Train> = Vec::with_capacity(routed.len());
    let mut i = 0;
    while i < routed.len() {
        let mut j = i + 1;
        while j < routed.len() && routed[j].0.pos == routed[i].0.pos && routed[j].1 == routed[i].1 {
            j += 1;
        }
        let group: Vec<Train> = routed[i..j].iter().map(|(tr, _)| *tr).collect();
        i = j;
        if group.len() == 1 {
            survivors.push(group[0]);
            continue;
        }
        let colors: Vec<Color> = group.iter().map(|tr| tr.color).collect();
        let color = fold_colors(&colors);
        let order_sensitive = fold_is_order_sensitive(&colors);
        let pos = group[0].pos;
        let headings: Vec<Direction> = group.iter().map(|tr| tr.heading).unique().collect();
        if headings.len() > 1 {
            events.push(Event::Touch {
                step: t,
                pos,
                trains: group.iter().map(|tr| tr.id).collect(),
                color,
            });
        }
        for h in headings {
            let same: Vec<&Train> = group.iter().filter(|tr| tr.heading == h).collect();
            let mut keep = *same[0];
            keep.color = color;
            if same.len() > 1 {
                events.push(Event::Merge {
                    step: t,
                    pos,
                    into: keep.id,
                    merged: same.iter().map(|tr| tr.id).collect(),
                    phases: same.iter().map(|tr| tr.phase).collect(),
                    color,
                    order_sensitive,
                });
            }
            survivors.push(keep);
        }
    }
    survivors.sort_by_key(|tr| tr.id);

    for (tr, entry) in arriving {
        let Some(&Tile::Arrival {
            color,
            capacity,
            in_dir,
        }) = level.tile(tr.pos)
        else {
            unreachable!()
        };
        let received = st.arrivals_received.entry(tr.pos).or_insert(0);
        let reason = if entry != in_dir {
            Some(CrashReason::WrongSide)
        } else if tr.color != color {
            Some(CrashReason::ColorMismatch)
        } else if *received >= capacity {
            Some(CrashReason::ArrivalFull)
        } else {
            None
        };
        match reason {
            Some(r) => crashes.push((tr, r)),
            None => {
                *received += 1;
                events.push(Event::Absorb {
                    step: t,
                    pos: tr.pos,
                    train: tr.id,
                });
            }
        }
    }

    switch_hits.sort();
    switch_hits.dedup();
    for pos in switch_hits {
        let s = st.switch_states.get_mut(&pos).expect("recorded on traversal");
        *s = 1 - *s;
    }

    st.trains = survivors;
    crashes.sort_by_key(|(tr, _)| tr.id);
    for (tr, reason) in &crashes {
        events.push(Event::Crash {
            step: t,
            pos: tr.pos,
            train: tr.id,
            reason: *reason,
        });
    }
    if let (CrashPolicy::Halt, Some((tr, reason))) = (policy, crashes.first()) {
        st.status = Status::Crashed {
            pos: tr.pos,
            reason: *reason,
        };
    } else {
        st.refresh_status(level);
    }
    Ok(())
}

/// Pure single step: returns the successor state and the events it produced.
pub fn step(
    level: &Level,
    layout: &RailLayout,
    s: &SimState,
) -> Result<(SimState, Vec<Event>), StepError> {
    let mut next = s.clone();
    let mut events = Vec::new();
    advance(level, &mut &*layout, &mut next, CrashPolicy::Halt, &mut events)?;
    Ok((next, events))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Won,
    Crashed,
    Deadlocked,
    Timeout,
}

/// Every state from the initial one to the last, plus the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub states: Vec<SimState>,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn last(&self) -> &SimState {
        self.states.last().expect("trace holds the initial state")
    }

    /// First step at which some train occupies `pos`. Splitter children
    /// waiting to leave count, so a splitter is visited the step it splits.
    pub fn first_visit(&self, pos: Position) -> Option<u64> {
        self.states
            .iter()
            .find(|s| s.trains.iter().chain(&s.pending).any(|t| t.pos == pos))
            .map(|s| s.step)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    pub outcome: Outcome,
    pub trace: Trace,
}

pub fn outcome_of(status: Status) -> Outcome {
    match status {
        Status::Running => Outcome::Timeout,
        Status::Won => Outcome::Won,
        Status::Crashed { .. } => Outcome::Crashed,
        Status::Deadlocked => Outcome::Deadlocked,
    }
}

/// Runs from the initial state until a terminal status or `cap` steps.
pub fn simulate(level: &Level, layout: &RailLayout, cap: u64) -> Result<SimResult, SimError> {
    simulate_with(level, layout, cap, CrashPolicy::Halt)
}

/// Runs like [`simulate`] without keeping the trace.
pub fn run_outcome(level: &Level, layout: &RailLayout, cap: u64) -> Result<Outcome, SimError> {
    let errors = validate_layout(level, layout);
    if !errors.is_empty() {
        return Err(SimError::InvalidLayout(errors));
    }
    let mut st = SimState::new(level);
    let mut events = Vec::new();
    let mut rails = layout;
    while st.is_running() && st.step < cap {
        events.clear();
        advance(level, &mut rails, &mut st, CrashPolicy::Halt, &mut events).expect("running");
    }
    Ok(outcome_of(st.status))
}

pub fn simulate_with(
    level: &Level,
    layout: &RailLayout,
    cap: u64,
    policy: CrashPolicy,
) -> Result<SimResult, SimError> {
    let errors = validate_layout(level, layout);
    if !errors.is_empty() {
        return Err(SimError::InvalidLayout(errors));
    }
    let mut st = SimState::new(level);
    let mut states = vec![st.clone()];
    let mut events = Vec::new();
    let mut rails = layout;
    while st.is_running() && st.step < cap {
        advance(level, &mut rails, &mut st, policy, &mut events).expect("running");
        states.push(st.clone());
    }
    Ok(SimResult {
        outcome: outcome_of(st.status),
        trace: Trace { states, events },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Axis, RailKind};
    use Direction::*;

    fn level_from(rows: &[&str], specials: &[(Position, Tile)]) -> Level {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        let mut tiles: Vec<Tile> = rows
            .iter()
            .flat_map(|r| {
                r.chars().map(|c| match c {
                    '#' => Tile::Rock,
                    _ => Tile::Empty,
                })
            })
            .collect();
        for (p, t) in specials {
            tiles[(p.row as u32 * w + p.col as u32) as usize] = *t;
        }
        Level::new(w, h, tiles).unwrap()
    }

    fn dep(color: Color, dir: Direction) -> Tile {
        Tile::Departure {
            color,
            trains: 1,
            out_dir: dir,
        }
    }

    fn arr(color: Color, dir: Direction) -> Tile {
        Tile::Arrival {
            color,
            capacity: 1,
            in_dir: dir,
        }
    }

    fn straight_h() -> RailPiece {
        RailPiece::connecting(West, East)
    }

    #[test]
    fn validate_layout_examples() {
        let level = level_from(&["..#"], &[]);
        assert!(validate_layout(&level, &RailLayout::new()).is_empty());
        let mut l = RailLayout::new();
        l.insert(Position::new(0, 2), straight_h());
        assert!(matches!(
            validate_layout(&level, &l)[..],
            [PlacementError::NotEmpty { .. }]
        ));
        let mut l = RailLayout::new();
        l.insert(Position::new(5, 5), straight_h());
        assert!(matches!(
            validate_layout(&level, &l)[..],
            [PlacementError::OutOfBounds { .. }]
        ));
    }

    #[test]
    fn empty_level_wins_immediately() {
        let level = level_from(&["..", ".."], &[]);
        let r = simulate(&level, &RailLayout::new(), 100).unwrap();
        assert_eq!(r.outcome, Outcome::Won);
        assert_eq!(r.trace.last().step, 0);
    }

    #[test]
    fn departure_into_bare_cell_crashes_on_first_step() {
        let level = level_from(&[".."], &[(Position::new(0, 0), dep(Color::Red, East))]);
        let r = simulate(&level, &RailLayout::new(), 100).unwrap();
        assert_eq!(r.outcome, Outcome::Crashed);
        assert_eq!(r.trace.last().step, 1);
        assert_eq!(
            r.trace.last().status,
            Status::Crashed {
                pos: Position::new(0, 1),
                reason: CrashReason::NoRail
            }
        );
    }

    #[test]
    fn closed_loop_times_out() {
        let level = level_from(&["...", "..."], &[(Position::new(0, 0), dep(Color::Red, East))]);
        let mut l = RailLayout::new();
        // straight-turn switch with base east, straight branch west, turn branch south
        l.insert(Position::new(0, 1), RailPiece::new(RailKind::SwitchStraightTurn, 3));
        l.insert(Position::new(0, 2), RailPiece::connecting(West, South));
        l.insert(Position::new(1, 2), RailPiece::connecting(North, West));
        l.insert(Position::new(1, 1), RailPiece::connecting(East, North));
        let r = simulate(&level, &l, 50).unwrap();
        assert_eq!(r.outcome, Outcome::Timeout);
        assert_eq!(r.trace.last().step, 50);
        assert_eq!(r.trace.last().trains.len(), 1);
    }

    #[test]
    fn train_advances_along_corridor() {
        let level = level_from(&["....."], &[]);
        let l: RailLayout = (0..5).map(|c| (Position::new(0, c), straight_h())).collect();
        let mut st = SimState::new(&level);
        st.spawn(Position::new(0, 1), East, Color::Red);
        let (next, _) = step(&level, &l, &st).unwrap();
        assert_eq!(next.step, 1);
        assert_eq!(next.trains.len(), 1);
        assert_eq!(next.trains[0].pos, Position::new(0, 2));
        assert_eq!(next.trains[0].heading, East);
    }

    #[test]
    fn rock_crashes() {
        let level = level_from(&[".#"], &[]);
        let l: RailLayout = [(Position::new(0, 0), straight_h())].into_iter().collect();
        let mut st = SimState::new(&level);
        st.spawn(Position::new(0, 0), East, Color::Red);
        let (next, _) = step(&level, &l, &st).unwrap();
        assert_eq!(
            next.status,
            Status::Crashed {
                pos: Position::new(0, 1),
                reason: CrashReason::Rock
            }
        );
        assert!(step(&level, &l, &next).is_err());
    }

    #[test]
    fn red_and_blue_merge_into_purple() {
        // two trains reach a join switch from both sides in the same step
        let level = level_from(&["...", "...", "..."], &[]);
        let mut l = RailLayout::new();
        l.insert(Position::new(1, 1), RailPiece::join(North));
        l.insert(Position::new(0, 1), RailPiece::connecting(South, North));
        let mut st = SimState::new(&level);
        st.spawn(Position::new(1, 0), East, Color::Red);
        st.spawn(Position::new(1, 2), West, Color::Blue);
        let (next, events) = step(&level, &l, &st).unwrap();
        assert_eq!(next.trains.len(), 1);
        assert_eq!(next.trains[0].color, Color::Purple);
        assert_eq!(next.trains[0].heading, North);
        assert!(events.iter().any(|e| matches!(e, Event::Merge { .. })));
        assert_eq!(next.switch_states[&Position::new(1, 1)], 1);
    }

    #[test]
    fn head_on_trains_touch_and_pass() {
        let level = level_from(&["...."], &[]);
        let l: RailLayout = (0..4).map(|c| (Position::new(0, c), straight_h())).collect();
        let mut st = SimState::new(&level);
        st.spawn(Position::new(0, 0), East, Color::Red);
        st.spawn(Position::new(0, 2), West, Color::Blue);
        let (next, events) = step(&level, &l, &st).unwrap();
        assert_eq!(next.trains.len(), 2);
        assert!(next.trains.iter().all(|t| t.color == Color::Purple));
        assert!(events.iter().any(|e| matches!(e, Event::Touch { .. })));
        // swapping neighbours also touch
        let mut st = SimState::new(&level);
        st.spawn(Position::new(0, 1), East, Color::Red);
        st.spawn(Position::new(0, 2), West, Color::Red);
        let (next, events) = step(&level, &l, &st).unwrap();
        assert_eq!(next.trains.len(), 2);
        assert!(events.iter().any(|e| matches!(e, Event::Touch { .. })));
    }

    #[test]
    fn crossing_tracks_do_not_interact() {
        let level = level_from(&["...", "...", "..."], &[]);
        let mut l = RailLayout::new();
        l.insert(Position::new(1, 1), RailPiece::crossing());
        l.insert(Position::new(1, 2), straight_h());
        l.insert(Position::new(0, 1), RailPiece::connecting(South, North));
        let mut st = SimState::new(&level);
        st.spawn(Position::new(1, 0), East, Color::Red);
        st.spawn(Position::new(2, 1), North, Color::Blue);
        let (next, events) = step(&level, &l, &st).unwrap();
        assert_eq!(next.trains.len(), 2);
        assert!(events.is_empty());
        assert_eq!(next.trains[0].color, Color::Red);
        assert_eq!(next.trains[1].color, Color::Blue);
    }

    #[test]
    fn purple_splits_next_step() {
        let level = level_from(
            &["...", "...", "..."],
            &[(Position::new(1, 1), Tile::Splitter { in_dir: West })],
        );
        let mut l = RailLayout::new();
        l.insert(Position::new(0, 1), RailPiece::connecting(South, North));
        l.insert(Position::new(2, 1), RailPiece::connecting(North, South));
        let mut st = SimState::new(&level);
        st.spawn(Position::new(1, 0), East, Color::Purple);
        let (s1, ev1) = step(&level, &l, &st).unwrap();
        assert!(s1.trains.is_empty());
        assert_eq!(s1.pending.len(), 2);
        assert!(matches!(ev1[..], [Event::Split { .. }]));
        let (s2, _) = step(&level, &l, &s1).unwrap();
        let north = s2.trains.iter().find(|t| t.pos == Position::new(0, 1)).unwrap();
        let south = s2.trains.iter().find(|t| t.pos == Position::new(2, 1)).unwrap();
        // red port is clockwise from the west input, i.e. north
        assert_eq!(north.color, Color::Red);
        assert_eq!(south.color, Color::Blue);
        for t in &s2.trains {
            assert_eq!((t.pos.parity() as u64 + s2.step) % 2, t.phase as u64);
        }
    }

    #[test]
    fn painter_and_arrival() {
        let level = level_from(
            &["..."],
            &[
                (
                    Position::new(0, 1),
                    Tile::Painter {
                        color: Color::Blue,
                        axis: Axis::Horizontal,
                    },
                ),
                (Position::new(0, 2), arr(Color::Blue, West)),
                (Position::new(0, 0), dep(Color::Red, East)),
            ],
        );
        let r = simulate(&level, &RailLayout::new(), 10).unwrap();
        assert_eq!(r.outcome, Outcome::Won);
        assert_eq!(r.trace.last().step, 2);
    }

    #[test]
    fn arrival_rejects_wrong_color() {
        let level = level_from(
            &[".."],
            &[
                (Position::new(0, 1), arr(Color::Blue, West)),
                (Position::new(0, 0), dep(Color::Red, East)),
            ],
        );
        let r = simulate(&level, &RailLayout::new(), 10).unwrap();
        assert_eq!(
            r.trace.last().status,
            Status::Crashed {
                pos: Position::new(0, 1),
                reason: CrashReason::ColorMismatch
            }
        );
    }

    #[test]
    fn unfilled_arrival_deadlocks() {
        let level = level_from(&[".."], &[(Position::new(0, 1), arr(Color::Blue, West))]);
        let r = simulate(&level, &RailLayout::new(), 10).unwrap();
        assert_eq!(r.outcome, Outcome::Deadlocked);
    }
}
