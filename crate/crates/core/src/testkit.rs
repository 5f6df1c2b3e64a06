//! Seeded random levels for property tests and fuzzing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::RailLayout;
use crate::model::{Axis, Color, Direction, Level, Position, RailPiece, Tile};

fn random_color(rng: &mut impl Rng) -> Color {
    Color::ALL[rng.gen_range(0..4)]
}

fn random_dir(rng: &mut impl Rng) -> Direction {
    Direction::ALL[rng.gen_range(0..4)]
}

/// A switch from the catalog with the given base and branch sides.
fn switch_for(base: Direction, a: Direction, b: Direction, rng: &mut impl Rng) -> Option<RailPiece> {
    let fits: Vec<RailPiece> = RailPiece::catalog()
        .into_iter()
        .filter(|p| match p.switch_sides() {
            Some((s, br)) => s == base && br.contains(&a) && br.contains(&b),
            None => false,
        })
        .collect();
    fits.choose(rng).copied()
}

/// A clockwise ring of rails with departures feeding in through switches,
/// switches letting trains out towards arrivals, and painters on the ring.
/// Trains that miss an exit keep circling, so merges and touches are common.
pub fn random_loop_level(seed: u64) -> (Level, RailLayout) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rh, rw) = (rng.gen_range(4..=8), rng.gen_range(4..=9));
    let (r0, c0) = (2, 2);
    let (r1, c1) = (r0 + rh - 1, c0 + rw - 1);
    let (h, w) = (r1 + 3, c1 + 3);
    let mut tiles = vec![Tile::Empty; (h * w) as usize];
    let idx = |p: Position| (p.row * w + p.col) as usize;
    for (i, t) in tiles.iter_mut().enumerate() {
        if rng.gen_bool(0.1) {
            *t = Tile::Rock;
        }
        let p = Position::new(i as i32 / w, i as i32 % w);
        let on_ring = (p.row == r0 || p.row == r1) && (c0..=c1).contains(&p.col)
            || (p.col == c0 || p.col == c1) && (r0..=r1).contains(&p.row);
        if on_ring {
            *t = Tile::Empty;
        }
    }

    let mut ring = Vec::new();
    ring.extend((c0..c1).map(|c| Position::new(r0, c)));
    ring.extend((r0..r1).map(|r| Position::new(r, c1)));
    ring.extend((c0 + 1..=c1).rev().map(|c| Position::new(r1, c)));
    ring.extend((r0 + 1..=r1).rev().map(|r| Position::new(r, c0)));
    let dir_to = |a: Position, b: Position| {
        Direction::ALL
            .into_iter()
            .find(|d| a.step(*d) == b)
            .expect("ring cells are adjacent")
    };

    let mut layout = RailLayout::new();
    let mut used: Vec<Position> = ring.clone();
    let n = ring.len();
    for i in 0..n {
        let p = ring[i];
        let entry = dir_to(p, ring[(i + n - 1) % n]);
        let exit = dir_to(p, ring[(i + 1) % n]);
        let straight = entry.opposite() == exit;
        let side = if rng.gen_bool(0.5) { exit.cw() } else { exit.ccw() };
        let outside = p.step(side);
        let free = !used.contains(&outside) && outside.row >= 0 && outside.col >= 0 && outside.row < h && outside.col < w;
        let roll = rng.gen_range(0..10);
        if straight && free && roll < 3 {
            // feeder: a departure joins the ring here
            if let Some(piece) = switch_for(exit, entry, side, &mut rng) {
                layout.insert(p, piece);
                tiles[idx(outside)] = Tile::Departure {
                    color: random_color(&mut rng),
                    trains: rng.gen_range(1..=3),
                    out_dir: side.opposite(),
                };
                used.push(outside);
                continue;
            }
        }
        if straight && free && roll < 5 {
            // exit towards an arrival, an empty cell or a rock
            if let Some(piece) = switch_for(entry, exit, side, &mut rng) {
                layout.insert(p, piece);
                tiles[idx(outside)] = match rng.gen_range(0..3) {
                    0 => Tile::Empty,
                    1 => Tile::Rock,
                    _ => Tile::Arrival {
                        color: random_color(&mut rng),
                        capacity: rng.gen_range(1..=3),
                        in_dir: side,
                    },
                };
                used.push(outside);
                continue;
            }
        }
        if straight && roll < 6 {
            tiles[idx(p)] = Tile::Painter {
                color: if rng.gen_bool(0.5) { Color::Red } else { Color::Blue },
                axis: if exit.is_horizontal() { Axis::Horizontal } else { Axis::Vertical },
            };
            continue;
        }
        layout.insert(p, RailPiece::connecting(entry, exit));
    }
    let level = Level::new(w as u32, h as u32, tiles).expect("generated level is valid");
    (level, layout)
}

/// A small board of random tiles with a random piece on every empty cell.
pub fn random_corridor_level(seed: u64) -> (Level, RailLayout) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = (rng.gen_range(3..=9), rng.gen_range(3..=9));
    let inside = |p: Position| p.row >= 0 && p.col >= 0 && p.row < h && p.col < w;
    let mut tiles = Vec::with_capacity((h * w) as usize);
    for i in 0..h * w {
        let p = Position::new(i / w, i % w);
        let roll = rng.gen_range(0..100);
        let dir = random_dir(&mut rng);
        let t = match roll {
            0..=7 => Tile::Rock,
            8..=12 => Tile::Painter {
                color: if rng.gen_bool(0.5) { Color::Red } else { Color::Blue },
                axis: if rng.gen_bool(0.5) { Axis::Horizontal } else { Axis::Vertical },
            },
            13..=15 => Tile::Splitter { in_dir: dir },
            16..=20 if inside(p.step(dir)) => Tile::Departure {
                color: random_color(&mut rng),
                trains: rng.gen_range(1..=3),
                out_dir: dir,
            },
            21..=23 if inside(p.step(dir)) => Tile::Arrival {
                color: random_color(&mut rng),
                capacity: rng.gen_range(1..=2),
                in_dir: dir,
            },
            _ => Tile::Empty,
        };
        tiles.push(t);
    }
    let level = Level::new(w as u32, h as u32, tiles).expect("generated level is valid");
    let catalog = RailPiece::catalog();
    let mut layout = RailLayout::new();
    for p in level.empty_cells() {
        if rng.gen_bool(0.9) {
            layout.insert(p, *catalog.choose(&mut rng).unwrap());
        }
    }
    (level, layout)
}
