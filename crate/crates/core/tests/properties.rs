use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use trainyard::engine::{simulate_with, CrashPolicy, Event, RailLayout};
use trainyard::io::{parse_formula, parse_formula_bytes, parse_graph_bytes, parse_level, serialize_level, write_formula, LoadedLevel};
use trainyard::model::{mix_colors, splitter_colors, route, Axis, Route};
use trainyard::reduction::{Formula, MmsInstance};
use trainyard::testkit::{random_corridor_level, random_loop_level};
use trainyard::{Color, Direction, Level, Position, RailPiece, Tile};

fn color() -> impl Strategy<Value = Color> {
    prop::sample::select(Color::ALL.to_vec())
}

fn dir() -> impl Strategy<Value = Direction> {
    prop::sample::select(Direction::ALL.to_vec())
}

fn piece() -> impl Strategy<Value = RailPiece> {
    prop::sample::select(RailPiece::catalog())
}

fn unordered(p: (Direction, Direction)) -> (Direction, Direction) {
    if p.0 <= p.1 {
        p
    } else {
        (p.1, p.0)
    }
}

proptest! {
    #[test]
    fn mixing_is_commutative_and_idempotent(a in color(), b in color()) {
        prop_assert_eq!(mix_colors(a, b), mix_colors(b, a));
        prop_assert_eq!(mix_colors(a, a), a);
        prop_assert_eq!(mix_colors(Color::Brown, a), Color::Brown);
    }

    #[test]
    fn splitting_then_mixing_restores(c in color()) {
        let (r, b) = splitter_colors(c);
        prop_assert_eq!(mix_colors(r, b), c);
    }

    #[test]
    fn routing_is_symmetric_per_track(p in piece(), entry in dir()) {
        if let Route::Exit { exit, track, updated } = route(p, entry) {
            prop_assert_eq!(updated.kind, p.kind);
            prop_assert_eq!(updated.rotation, p.rotation);
            if !p.kind.is_switch() {
                prop_assert_eq!(updated, p);
            }
            // the reverse trip uses the switch state that selects this track
            let q = match p.switch_sides() {
                Some((base, br)) if exit == base => RailPiece { active_branch: br.iter().position(|&b| b == entry).unwrap() as u8, ..p },
                _ => p,
            };
            match route(q, exit) {
                Route::Exit { exit: back, track: t2, .. } => {
                    prop_assert_eq!(back, entry);
                    prop_assert_eq!(t2, track);
                }
                Route::NoTrack => prop_assert!(false, "{p:?} has no way back from {exit:?}"),
            }
        }
    }

    #[test]
    fn rotations_compose(p in piece(), a in 0u8..4, b in 0u8..4) {
        prop_assert_eq!(p.rotated(a).rotated(b), p.rotated((a + b) % 4));
        let rigid: BTreeSet<_> = p.tracks().into_iter().map(|(x, y)| unordered((x.rotate(a), y.rotate(a)))).collect();
        let turned: BTreeSet<_> = p.rotated(a).tracks().into_iter().map(unordered).collect();
        prop_assert_eq!(rigid, turned);
    }

    #[test]
    fn phase_is_conserved(seed in any::<u64>(), ring in any::<bool>()) {
        let (level, layout) = if ring { random_loop_level(seed) } else { random_corridor_level(seed) };
        let r = simulate_with(&level, &layout, 150, CrashPolicy::Remove).unwrap();
        let mut phase: BTreeMap<u32, u64> = BTreeMap::new();
        for s in &r.trace.states {
            for t in s.trains.iter().chain(&s.pending) {
                let p = (t.pos.parity() as u64 + s.step) % 2;
                prop_assert_eq!(p, t.phase as u64);
                prop_assert_eq!(*phase.entry(t.id).or_insert(p), p);
            }
        }
        for e in &r.trace.events {
            if let Event::Merge { phases, .. } = e {
                prop_assert!(phases.iter().all(|&x| x == phases[0]));
            }
        }
    }

    #[test]
    fn train_count_ledger(seed in any::<u64>(), ring in any::<bool>()) {
        let (level, layout) = if ring { random_loop_level(seed) } else { random_corridor_level(seed) };
        let r = simulate_with(&level, &layout, 150, CrashPolicy::Remove).unwrap();
        let mut delta: BTreeMap<u64, i64> = BTreeMap::new();
        for e in &r.trace.events {
            let d = match e {
                Event::Emit { .. } => 1,
                Event::Split { .. } => 1,
                Event::Merge { merged, .. } => 1 - merged.len() as i64,
                Event::Absorb { .. } | Event::Crash { .. } => -1,
                Event::Touch { .. } | Event::Paint { .. } => 0,
            };
            *delta.entry(e.step()).or_default() += d;
        }
        for w in r.trace.states.windows(2) {
            let count = |s: &trainyard::SimState| (s.trains.len() + s.pending.len()) as i64;
            prop_assert_eq!(count(&w[1]) - count(&w[0]), delta.get(&w[1].step).copied().unwrap_or(0));
        }
    }
}

fn tile() -> impl Strategy<Value = Tile> {
    prop_oneof![
        4 => Just(Tile::Empty),
        3 => Just(Tile::Rock),
        1 => (color(), 1u32..4, dir()).prop_map(|(color, trains, out_dir)| Tile::Departure { color, trains, out_dir }),
        1 => (color(), 1u32..4, dir()).prop_map(|(color, capacity, in_dir)| Tile::Arrival { color, capacity, in_dir }),
        1 => (prop::bool::ANY, prop::bool::ANY).prop_map(|(red, h)| Tile::Painter {
            color: if red { Color::Red } else { Color::Blue },
            axis: if h { Axis::Horizontal } else { Axis::Vertical },
        }),
        1 => dir().prop_map(|in_dir| Tile::Splitter { in_dir }),
    ]
}

fn loaded_level() -> impl Strategy<Value = LoadedLevel> {
    (1u32..7, 1u32..7)
        .prop_flat_map(|(w, h)| {
            (
                Just((w, h)),
                prop::collection::vec(tile(), (w * h) as usize),
                prop::collection::vec(prop::option::of(piece()), (w * h) as usize),
                prop::bool::ANY,
            )
        })
        .prop_filter_map("stations must face the board", |((w, h), tiles, rails, with_layout)| {
            let level = Level::new(w, h, tiles).ok()?;
            let layout: RailLayout = level
                .iter()
                .zip(rails)
                .filter(|((_, t), _)| t.is_empty())
                .filter_map(|((p, _), r)| r.map(|r| (p, r)))
                .collect();
            Some(LoadedLevel { level, layout: with_layout.then_some(layout), plan: None })
        })
}

fn formula() -> impl Strategy<Value = MmsInstance> {
    (1u32..6).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::btree_set(1..=n, 1..=n as usize), 0..5),
            0..=n,
        )
            .prop_map(move |(clauses, k)| {
                let f = Formula::new(n, clauses.into_iter().map(|c| c.into_iter().collect()).collect()).unwrap();
                MmsInstance::new(f, k).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn level_documents_round_trip(l in loaded_level()) {
        let text = serialize_level(&l);
        let back = parse_level(&text).unwrap();
        prop_assert_eq!(&back, &l);
        prop_assert_eq!(serialize_level(&back), text);
    }

    #[test]
    fn formulas_round_trip(inst in formula()) {
        let text = write_formula(&inst);
        prop_assert_eq!(parse_formula(&text).unwrap(), inst);
    }

    #[test]
    fn parsers_are_total(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_formula_bytes(&bytes);
        let _ = parse_graph_bytes(&bytes);
        let _ = trainyard::io::parse_level_bytes(&bytes);
    }

    #[test]
    fn formula_errors_are_positioned(lines in prop::collection::vec("[ 0-9x-]{0,12}", 0..6)) {
        let text = format!("mms 4 {} 2\n{}", lines.len(), lines.join("\n"));
        if let Err(e) = parse_formula(&text) {
            prop_assert!(e.line >= 1 && e.column >= 1);
            prop_assert!(e.line <= lines.len() + 1);
        }
    }
}

#[test]
fn position_serializes_as_row_col() {
    let v = serde_json::to_value(Position::new(3, 4)).unwrap();
    assert_eq!(v, serde_json::json!({"row": 3, "col": 4}));
}
