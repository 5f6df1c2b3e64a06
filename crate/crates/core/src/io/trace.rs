//! JSON form of a simulation trace.
//!
//! Every step carries its full train list. Switch states and station
//! counters are delta encoded: the first snapshot lists them all, later ones
//! only the entries that changed. [`TraceDocument::states`] rebuilds the
//! engine states exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{Event, Outcome, SimResult, SimState, Status, Train, TrainId};
use crate::model::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counter {
    pub pos: Position,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSnapshot {
    pub step: u64,
    pub status: Status,
    pub trains: Vec<Train>,
    /// Splitter children that leave on the next step.
    pub pending: Vec<Train>,
    pub next_id: TrainId,
    pub switches: Vec<Counter>,
    pub departures: Vec<Counter>,
    pub arrivals: Vec<Counter>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalCounters {
    pub departures_remaining: Vec<Counter>,
    pub arrivals_received: Vec<Counter>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub outcome: Outcome,
    pub steps: Vec<StepSnapshot>,
    pub events: Vec<Event>,
    pub final_counters: FinalCounters,
}

fn delta<V: Copy + PartialEq + Into<u32>>(prev: Option<&BTreeMap<Position, V>>, cur: &BTreeMap<Position, V>) -> Vec<Counter> {
    cur.iter()
        .filter(|(p, v)| prev.and_then(|m| m.get(p)) != Some(v))
        .map(|(p, v)| Counter {
            pos: *p,
            value: (*v).into(),
        })
        .collect()
}

fn counters(m: &BTreeMap<Position, u32>) -> Vec<Counter> {
    delta(None, m)
}

impl TraceDocument {
    pub fn from_result(r: &SimResult) -> Self {
        let states = &r.trace.states;
        let steps = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let prev = i.checked_sub(1).map(|j| &states[j]);
                StepSnapshot {
                    step: s.step,
                    status: s.status,
                    trains: s.trains.clone(),
                    pending: s.pending.clone(),
                    next_id: s.next_id,
                    switches: delta(prev.map(|p| &p.switch_states), &s.switch_states),
                    departures: delta(prev.map(|p| &p.departures_remaining), &s.departures_remaining),
                    arrivals: delta(prev.map(|p| &p.arrivals_received), &s.arrivals_received),
                }
            })
            .collect();
        let last = r.trace.last();
        Self {
            outcome: r.outcome,
            steps,
            events: r.trace.events.clone(),
            final_counters: FinalCounters {
                departures_remaining: counters(&last.departures_remaining),
                arrivals_received: counters(&last.arrivals_received),
            },
        }
    }

    /// The engine states this document encodes.
    pub fn states(&self) -> Vec<SimState> {
        let mut out: Vec<SimState> = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            let mut st = match out.last() {
                Some(prev) => prev.clone(),
                None => SimState {
                    step: 0,
                    trains: Vec::new(),
                    pending: Vec::new(),
                    switch_states: BTreeMap::new(),
                    departures_remaining: BTreeMap::new(),
                    arrivals_received: BTreeMap::new(),
                    status: Status::Running,
                    next_id: 0,
                },
            };
            st.step = s.step;
            st.status = s.status;
            st.trains = s.trains.clone();
            st.pending = s.pending.clone();
            st.next_id = s.next_id;
            for c in &s.switches {
                st.switch_states.insert(c.pos, c.value as u8);
            }
            for c in &s.departures {
                st.departures_remaining.insert(c.pos, c.value);
            }
            for c in &s.arrivals {
                st.arrivals_received.insert(c.pos, c.value);
            }
            out.push(st);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::engine::RailLayout;
    use crate::model::{Color, Direction, Level, RailKind, RailPiece, Tile};

    #[test]
    fn states_rebuild_exactly() {
        let mut tiles = vec![Tile::Empty; 4];
        tiles[0] = Tile::Departure {
            color: Color::Blue,
            trains: 2,
            out_dir: Direction::East,
        };
        tiles[3] = Tile::Arrival {
            color: Color::Blue,
            capacity: 2,
            in_dir: Direction::West,
        };
        let level = Level::new(4, 1, tiles).unwrap();
        let layout: RailLayout = (1..3)
            .map(|c| (Position::new(0, c), RailPiece::new(RailKind::Straight, 1)))
            .collect();
        let r = simulate(&level, &layout, 100).unwrap();
        assert_eq!(r.outcome, Outcome::Won);
        let doc = TraceDocument::from_result(&r);
        assert_eq!(doc.states(), r.trace.states);
        let text = serde_json::to_string(&doc).unwrap();
        let back: TraceDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert!(doc.steps[1].departures.len() == 1 && doc.steps[1].arrivals.is_empty());
    }
}
