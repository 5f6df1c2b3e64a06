//! Runs a gadget stamp in isolation.
//!
//! The stamp is framed by a one-cell rock margin. Each port's exterior cell
//! is opened and injected trains are spawned there. Output exteriors carry
//! a fixed straight rail, and trains reaching one heading outward are
//! collected as exits and removed. Input exteriors carry no rail, so a train
//! backing out through an input crashes, as it would on the full board
//! against rock or the one-way output of the neighbouring gadget.
//!
//! Rails on the stamp's free cells come from a [`Chooser`], which is asked
//! once per cell, the first time a train enters.

use rand::Rng;

use crate::engine::{advance, CrashPolicy, Event, RailLayout, RailSource, SimState, Status};
use crate::model::{Color, Direction, Level, Position, RailPiece, Tile};

use super::catalog::{GadgetStamp, Polarity};
use super::contract::{Expect, Injection, Scenario};

/// Decides the piece on a free cell when it is first entered.
pub trait Chooser {
    /// `cell` indexes the stamp's free cells.
    fn choose(&mut self, cell: usize, entry: Direction) -> Option<RailPiece>;
}

/// A fixed design in stamp-local coordinates.
pub struct DesignChooser<'a> {
    pub layout: &'a RailLayout,
    pub free_cells: &'a [Position],
}

impl Chooser for DesignChooser<'_> {
    fn choose(&mut self, cell: usize, _entry: Direction) -> Option<RailPiece> {
        self.layout.get(self.free_cells[cell])
    }
}

/// Pieces with a track through each entry side, indexed by `Direction as usize`.
pub fn connected_options() -> [Vec<RailPiece>; 4] {
    let all = RailPiece::catalog();
    Direction::ALL.map(|d| {
        all.iter()
            .copied()
            .filter(|p| matches!(p.route(d), crate::model::Route::Exit { .. }))
            .collect()
    })
}

/// Uniform choice among pieces connected to the entry side.
pub struct RandomChooser<'a, R: Rng> {
    pub rng: &'a mut R,
    pub options: &'a [Vec<RailPiece>; 4],
}

impl<R: Rng> Chooser for RandomChooser<'_, R> {
    fn choose(&mut self, _cell: usize, entry: Direction) -> Option<RailPiece> {
        let opts = &self.options[entry as usize];
        Some(opts[self.rng.gen_range(0..opts.len())])
    }
}

/// Replays a prefix of option indices and extends it with zeros; used for
/// depth-first enumeration.
pub struct ReplayChooser<'a> {
    pub options: &'a [Vec<RailPiece>; 4],
    /// `(chosen index, number of options)` per decision, in decision order.
    pub trail: Vec<(u8, u8)>,
    pub depth: usize,
}

impl Chooser for ReplayChooser<'_> {
    fn choose(&mut self, _cell: usize, entry: Direction) -> Option<RailPiece> {
        let opts = &self.options[entry as usize];
        if self.depth == self.trail.len() {
            self.trail.push((0, opts.len() as u8));
        }
        let (k, n) = self.trail[self.depth];
        debug_assert_eq!(n as usize, opts.len(), "replay diverged");
        self.depth += 1;
        Some(opts[k as usize])
    }
}

impl ReplayChooser<'_> {
    /// Moves to the next leaf. Returns false when the tree is exhausted.
    pub fn backtrack(&mut self) -> bool {
        self.trail.truncate(self.depth);
        while let Some(&(k, n)) = self.trail.last() {
            if k + 1 < n {
                self.trail.last_mut().unwrap().0 = k + 1;
                self.depth = 0;
                return true;
            }
            self.trail.pop();
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Won,
    Crashed,
    Deadlocked,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exit {
    pub port: usize,
    pub color: Color,
    pub step: u64,
    pub phase: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub status: RunStatus,
    pub exits: Vec<Exit>,
    pub steps: u64,
}

/// A stamp mounted for isolated runs.
pub struct Harness {
    pub stamp: GadgetStamp,
    level: Level,
    /// Board cell index -> free-cell index.
    free_index: Vec<Option<u16>>,
    /// Board exterior cell per port, in port order.
    exteriors: Vec<Position>,
    exterior_rails: Vec<Option<RailPiece>>,
    options: [Vec<RailPiece>; 4],
    /// Piece decided per free cell for the current layout.
    assigned: Vec<Option<Option<RailPiece>>>,
}

const MARGIN: i32 = 1;

fn to_board(p: Position) -> Position {
    p.offset(MARGIN, MARGIN)
}

fn to_local(p: Position) -> Position {
    p.offset(-MARGIN, -MARGIN)
}

struct Source<'a, C: Chooser> {
    width: u32,
    free_index: &'a [Option<u16>],
    exteriors: &'a [Position],
    exterior_rails: &'a [Option<RailPiece>],
    assigned: &'a mut [Option<Option<RailPiece>>],
    chooser: &'a mut C,
}

impl<C: Chooser> RailSource for Source<'_, C> {
    fn piece_at(&mut self, pos: Position, entry: Direction) -> Option<RailPiece> {
        let idx = (pos.row as u32 * self.width + pos.col as u32) as usize;
        match self.free_index[idx] {
            Some(cell) => {
                let slot = &mut self.assigned[cell as usize];
                *slot.get_or_insert_with(|| self.chooser.choose(cell as usize, entry))
            }
            None => self
                .exteriors
                .iter()
                .position(|&e| e == pos)
                .and_then(|i| self.exterior_rails[i]),
        }
    }
}

impl Harness {
    pub fn new(stamp: GadgetStamp) -> Self {
        let w = stamp.width + 2 * MARGIN as u32;
        let h = stamp.height + 2 * MARGIN as u32;
        let mut tiles = vec![Tile::Rock; (w * h) as usize];
        let mut free_index = vec![None; (w * h) as usize];
        for r in 0..stamp.height as i32 {
            for c in 0..stamp.width as i32 {
                let local = Position::new(r, c);
                let b = to_board(local);
                let i = (b.row as u32 * w + b.col as u32) as usize;
                tiles[i] = *stamp.tile(local).unwrap();
            }
        }
        for (k, &cell) in stamp.free_cells.iter().enumerate() {
            let b = to_board(cell);
            free_index[(b.row as u32 * w + b.col as u32) as usize] = Some(k as u16);
        }
        let mut exteriors = Vec::new();
        let mut exterior_rails = Vec::new();
        for port in &stamp.ports {
            let e = to_board(port.exterior());
            tiles[(e.row as u32 * w + e.col as u32) as usize] = Tile::Empty;
            exteriors.push(e);
            exterior_rails.push(
                (port.polarity == Polarity::Output).then(|| RailPiece::connecting(port.dir, port.dir.opposite())),
            );
        }
        let level = Level::new(w, h, tiles).expect("harness board is well formed");
        let n = stamp.free_cells.len();
        Self {
            stamp,
            level,
            free_index,
            exteriors,
            exterior_rails,
            options: connected_options(),
            assigned: vec![None; n],
        }
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn options(&self) -> &[Vec<RailPiece>; 4] {
        &self.options
    }

    /// Forgets every decided piece; the next run starts a fresh layout.
    pub fn reset_layout(&mut self) {
        self.assigned.iter_mut().for_each(|a| *a = None);
    }

    /// The pieces decided so far, in stamp-local coordinates.
    pub fn decided_layout(&self) -> RailLayout {
        self.stamp
            .free_cells
            .iter()
            .zip(&self.assigned)
            .filter_map(|(&p, a)| a.flatten().map(|piece| (p, piece)))
            .collect()
    }

    /// Step cap for a scenario: generous enough for any loop-free traversal.
    pub fn cap_for(&self, scenario: &Scenario) -> u64 {
        let last = scenario.inputs.iter().map(|i| i.at).max().unwrap_or(0);
        last + 4 * (self.stamp.width as u64 * self.stamp.height as u64) + 16
    }

    fn spawn_point(&self, inj: &Injection) -> (Position, Direction) {
        let (k, port) = self
            .stamp
            .ports
            .iter()
            .enumerate()
            .find(|(_, p)| p.name == inj.port)
            .expect("scenario names a known port");
        (self.exteriors[k], port.outward().opposite())
    }

    /// Runs one scenario, deciding undecided cells through `chooser`.
    pub fn run<C: Chooser>(&mut self, scenario: &Scenario, chooser: &mut C) -> RunResult {
        self.run_inner(scenario, chooser, None)
    }

    /// As [`Harness::run`], also collecting the event log.
    pub fn run_logged<C: Chooser>(&mut self, scenario: &Scenario, chooser: &mut C, log: &mut Vec<Event>) -> RunResult {
        self.run_inner(scenario, chooser, Some(log))
    }

    fn run_inner<C: Chooser>(
        &mut self,
        scenario: &Scenario,
        chooser: &mut C,
        mut log: Option<&mut Vec<Event>>,
    ) -> RunResult {
        let cap = self.cap_for(scenario);
        let mut injections: Vec<(u64, Position, Direction, Color)> = scenario
            .inputs
            .iter()
            .map(|inj| {
                let (pos, dir) = self.spawn_point(inj);
                (inj.at, pos, dir, inj.color)
            })
            .collect();
        injections.sort_by_key(|i| i.0);
        let mut next_inj = 0;
        let mut st = SimState::new(&self.level);
        let mut exits = Vec::new();
        let mut scratch = Vec::new();
        let width = self.level.width();
        loop {
            while next_inj < injections.len() && injections[next_inj].0 <= st.step {
                let (_, pos, dir, color) = injections[next_inj];
                st.spawn(pos, dir, color);
                next_inj += 1;
            }
            if matches!(st.status, Status::Crashed { .. }) {
                break;
            }
            if !st.is_running() {
                if next_inj < injections.len() {
                    st.status = Status::Running;
                } else {
                    break;
                }
            }
            if st.step >= cap {
                break;
            }
            let mut source = Source {
                width,
                free_index: &self.free_index,
                exteriors: &self.exteriors,
                exterior_rails: &self.exterior_rails,
                assigned: &mut self.assigned,
                chooser,
            };
            let events = match log.as_deref_mut() {
                Some(l) => l,
                None => {
                    scratch.clear();
                    &mut scratch
                }
            };
            advance(&self.level, &mut source, &mut st, CrashPolicy::Halt, events).expect("running");
            if matches!(st.status, Status::Crashed { .. }) {
                continue;
            }
            let mut removed = false;
            let mut i = 0;
            while i < st.trains.len() {
                let tr = st.trains[i];
                let hit = self
                    .exteriors
                    .iter()
                    .position(|&e| e == tr.pos)
                    .filter(|&k| tr.heading == self.stamp.ports[k].outward());
                match hit {
                    Some(k) => {
                        exits.push(Exit {
                            port: k,
                            color: tr.color,
                            step: st.step,
                            phase: tr.phase,
                        });
                        st.trains.remove(i);
                        removed = true;
                    }
                    None => i += 1,
                }
            }
            if removed {
                st.refresh_status(&self.level);
            }
        }
        let status = match st.status {
            Status::Won => RunStatus::Won,
            Status::Crashed { .. } => RunStatus::Crashed,
            Status::Deadlocked => RunStatus::Deadlocked,
            Status::Running => RunStatus::Timeout,
        };
        RunResult {
            status,
            exits,
            steps: st.step,
        }
    }

    /// Whether a run outcome meets the scenario's expectation.
    pub fn satisfies(&self, scenario: &Scenario, result: &RunResult) -> bool {
        if result.status != RunStatus::Won {
            return false;
        }
        let exits: Vec<(&str, Color)> = result
            .exits
            .iter()
            .map(|e| (self.stamp.ports[e.port].name.as_str(), e.color))
            .collect();
        match &scenario.expect {
            Expect::Any => true,
            Expect::Exact(spec) => super::contract::exits_match(spec, &exits),
            Expect::AnyExcept(allowed) => !allowed.iter().any(|spec| super::contract::exits_match(spec, &exits)),
        }
    }

    /// Maps a board position back to stamp-local coordinates.
    pub fn local(&self, p: Position) -> Position {
        to_local(p)
    }
}

#[cfg(test)]
mod tests {
    use super::super::catalog::{designs, stamp, GadgetKind};
    use super::super::contract::{contract, ScenarioKind};
    use super::*;

    fn run_design(kind: GadgetKind, design: &str, scenario: &Scenario) -> (RunResult, bool) {
        let s = stamp(kind).unwrap();
        let d = designs(kind).into_iter().find(|d| d.name == design).unwrap();
        let mut h = Harness::new(s.clone());
        let mut c = DesignChooser {
            layout: &d.layout,
            free_cells: &s.free_cells,
        };
        let r = h.run(scenario, &mut c);
        let ok = h.satisfies(scenario, &r);
        (r, ok)
    }

    #[test]
    fn one_way_passes_every_color() {
        let c = contract(GadgetKind::OneWay);
        for color in Color::ALL {
            let sc = Scenario::viable(
                "pass",
                vec![Injection::at("in", color, 0)],
                Expect::exact(&[("out", Some(color))]),
            );
            let (r, ok) = run_design(GadgetKind::OneWay, "split_rejoin", &sc);
            assert!(ok, "{color}: {r:?}");
            assert_eq!(r.exits[0].step, 5, "splitter at 1, rejoin at 4, exterior at 5");
        }
        let reverse = c.scenarios.iter().find(|s| s.name == "reverse").unwrap();
        assert_eq!(reverse.kind, ScenarioKind::Forbidden);
        let (r, ok) = run_design(GadgetKind::OneWay, "split_rejoin", reverse);
        assert!(!ok);
        assert_eq!(r.status, RunStatus::Crashed);
    }

    #[test]
    fn replay_enumerates_all_leaves_of_a_lane() {
        let s = stamp(GadgetKind::Lane { length: 2 }).unwrap();
        let sc = Scenario::viable(
            "pass",
            vec![Injection::at("in", Color::Red, 0)],
            Expect::exact(&[("out", Some(Color::Red))]),
        );
        let mut h = Harness::new(s);
        let opts = connected_options();
        let mut rc = ReplayChooser {
            options: &opts,
            trail: Vec::new(),
            depth: 0,
        };
        let (mut leaves, mut wins) = (0, 0);
        loop {
            h.reset_layout();
            let r = h.run(&sc, &mut rc);
            leaves += 1;
            if h.satisfies(&sc, &r) {
                wins += 1;
            }
            if !rc.backtrack() {
                break;
            }
        }
        // first cell: every piece with a west track; second cell likewise
        let west = opts[Direction::West as usize].len();
        assert!(leaves > west);
        // straight, straight with any west-east routing piece: straight,
        // crossing, and the two straight-turn switches whose straight leg is
        // horizontal in either branch state, entering from a leg
        assert!(wins >= 4, "wins {wins}");
    }
}
