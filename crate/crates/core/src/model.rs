//! Board vocabulary: colors, directions, rail pieces and tiles.
//!
//! Rotations are clockwise quarter turns. Canonical (rotation 0) geometry:
//!
//! | kind                 | tracks at rotation 0                         |
//! |----------------------|----------------------------------------------|
//! | `Straight`           | N-S                                          |
//! | `Turn`               | S-E                                          |
//! | `DoubleTurn`         | S-E (turn A), N-W (turn B)                   |
//! | `Crossing`           | N-S (vertical), E-W (horizontal)             |
//! | `SwitchTurnTurn`     | base S, branch 0 = W (left), branch 1 = E    |
//! | `SwitchStraightTurn` | base S, branch 0 = N (straight), 1 = W (left)|

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
    Purple,
    Brown,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Blue, Color::Purple, Color::Brown];

    /// Color produced when two trains touch or merge.
    pub fn mix(self, other: Color) -> Color {
        use Color::*;
        match (self, other) {
            (a, b) if a == b => a,
            (Red, Blue) | (Blue, Red) => Purple,
            _ => Brown,
        }
    }

    /// Colors of the two trains leaving a splitter: `(red_port, blue_port)`.
    pub fn split(self) -> (Color, Color) {
        match self {
            Color::Purple => (Color::Red, Color::Blue),
            c => (c, c),
        }
    }
}

/// Free-function form of [`Color::mix`].
pub fn mix_colors(a: Color, b: Color) -> Color {
    a.mix(b)
}

/// Free-function form of [`Color::split`].
pub fn splitter_colors(c: Color) -> (Color, Color) {
    c.split()
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Purple => "purple",
            Color::Brown => "brown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    fn index(self) -> u8 {
        self as u8
    }

    fn from_index(i: u8) -> Direction {
        Direction::ALL[(i % 4) as usize]
    }

    pub fn opposite(self) -> Direction {
        self.rotate(2)
    }

    /// Rotates clockwise by `quarter_turns`.
    pub fn rotate(self, quarter_turns: u8) -> Direction {
        Direction::from_index(self.index() + quarter_turns % 4)
    }

    pub fn cw(self) -> Direction {
        self.rotate(1)
    }

    pub fn ccw(self) -> Direction {
        self.rotate(3)
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::East | Direction::West)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub row: i32,
    pub col: i32,
}

impl Position {
    pub const fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn step(self, dir: Direction) -> Position {
        let (dr, dc) = dir.delta();
        Position::new(self.row + dr, self.col + dc)
    }

    pub fn offset(self, dr: i32, dc: i32) -> Position {
        Position::new(self.row + dr, self.col + dc)
    }

    pub fn parity(self) -> u8 {
        (self.row + self.col).rem_euclid(2) as u8
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RailKind {
    Straight,
    Turn,
    DoubleTurn,
    Crossing,
    SwitchTurnTurn,
    SwitchStraightTurn,
}

impl RailKind {
    pub const ALL: [RailKind; 6] = [
        RailKind::Straight,
        RailKind::Turn,
        RailKind::DoubleTurn,
        RailKind::Crossing,
        RailKind::SwitchTurnTurn,
        RailKind::SwitchStraightTurn,
    ];

    pub fn is_switch(self) -> bool {
        matches!(self, RailKind::SwitchTurnTurn | RailKind::SwitchStraightTurn)
    }

    /// Number of rotations producing distinct track geometry.
    pub fn distinct_rotations(self) -> u8 {
        match self {
            RailKind::Straight | RailKind::DoubleTurn => 2,
            RailKind::Crossing => 1,
            _ => 4,
        }
    }
}

/// Identifier of a track inside a piece; trains only interact on the same track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrackId(pub u8);

impl TrackId {
    pub const MAIN: TrackId = TrackId(0);
    pub const HORIZONTAL: TrackId = TrackId(0);
    pub const VERTICAL: TrackId = TrackId(1);
    pub const TURN_A: TrackId = TrackId(0);
    pub const TURN_B: TrackId = TrackId(1);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RailPiece {
    pub kind: RailKind,
    pub rotation: u8,
    #[serde(default)]
    pub active_branch: u8,
}

/// Result of routing a train through a rail piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Exit {
        exit: Direction,
        updated: RailPiece,
        track: TrackId,
    },
    NoTrack,
}

impl RailPiece {
    pub fn new(kind: RailKind, rotation: u8) -> Self {
        Self {
            kind,
            rotation: rotation % 4,
            active_branch: 0,
        }
    }

    /// A switch with the given initial branch; non-switch kinds ignore it.
    pub fn with_branch(kind: RailKind, rotation: u8, active_branch: u8) -> Self {
        let mut p = Self::new(kind, rotation);
        if kind.is_switch() {
            p.active_branch = active_branch % 2;
        }
        p
    }

    pub fn rotated(self, quarter_turns: u8) -> Self {
        Self {
            rotation: (self.rotation + quarter_turns) % 4,
            ..self
        }
    }

    /// Straight or turn connecting two distinct sides.
    pub fn connecting(a: Direction, b: Direction) -> RailPiece {
        assert_ne!(a, b, "a rail cannot connect a side to itself");
        if a.opposite() == b {
            let rot = if a.is_horizontal() { 1 } else { 0 };
            return RailPiece::new(RailKind::Straight, rot);
        }
        (0..4)
            .map(|r| RailPiece::new(RailKind::Turn, r))
            .find(|p| {
                let t = p.tracks();
                let (x, y) = t[0];
                (x == a && y == b) || (x == b && y == a)
            })
            .expect("every perpendicular pair is a turn rotation")
    }

    /// Turn-turn switch whose common side is `base`; trains entering from
    /// either branch leave through `base`.
    pub fn join(base: Direction) -> RailPiece {
        // rotation 0 has its base on the south side
        let rot = (base as u8 + 4 - Direction::South as u8) % 4;
        RailPiece::new(RailKind::SwitchTurnTurn, rot)
    }

    pub fn crossing() -> RailPiece {
        RailPiece::new(RailKind::Crossing, 0)
    }

    /// Base side and the two branch sides of a switch.
    pub fn switch_sides(self) -> Option<(Direction, [Direction; 2])> {
        let r = self.rotation;
        match self.kind {
            RailKind::SwitchTurnTurn => Some((
                Direction::South.rotate(r),
                [Direction::West.rotate(r), Direction::East.rotate(r)],
            )),
            RailKind::SwitchStraightTurn => Some((
                Direction::South.rotate(r),
                [Direction::North.rotate(r), Direction::West.rotate(r)],
            )),
            _ => None,
        }
    }

    /// All side pairs a train could use, indexed by track. Switches report
    /// both branches on the main track.
    pub fn tracks(self) -> Vec<(Direction, Direction)> {
        use Direction::*;
        let r = self.rotation;
        let rot = |(a, b): (Direction, Direction)| (a.rotate(r), b.rotate(r));
        match self.kind {
            RailKind::Straight => vec![rot((North, South))],
            RailKind::Turn => vec![rot((South, East))],
            RailKind::DoubleTurn => vec![rot((South, East)), rot((North, West))],
            RailKind::Crossing => vec![(East, West), (North, South)],
            RailKind::SwitchTurnTurn | RailKind::SwitchStraightTurn => {
                let (base, br) = self.switch_sides().unwrap();
                vec![(base, br[0]), (base, br[1])]
            }
        }
    }

    /// Routes a train entering through side `entry`.
    pub fn route(self, entry: Direction) -> Route {
        if let Some((base, branches)) = self.switch_sides() {
            let exit = if entry == base {
                branches[(self.active_branch % 2) as usize]
            } else if branches.contains(&entry) {
                base
            } else {
                return Route::NoTrack;
            };
            let updated = RailPiece {
                active_branch: 1 - (self.active_branch % 2),
                ..self
            };
            return Route::Exit {
                exit,
                updated,
                track: TrackId::MAIN,
            };
        }
        for (i, (a, b)) in self.tracks().into_iter().enumerate() {
            let exit = if entry == a {
                b
            } else if entry == b {
                a
            } else {
                continue;
            };
            return Route::Exit {
                exit,
                updated: self,
                track: TrackId(i as u8),
            };
        }
        Route::NoTrack
    }

    /// Every functionally distinct piece, switch initial states included.
    pub fn catalog() -> Vec<RailPiece> {
        let mut out = Vec::new();
        for kind in RailKind::ALL {
            for rot in 0..kind.distinct_rotations() {
                if kind.is_switch() {
                    out.push(RailPiece::with_branch(kind, rot, 0));
                    out.push(RailPiece::with_branch(kind, rot, 1));
                } else {
                    out.push(RailPiece::new(kind, rot));
                }
            }
        }
        out
    }
}

/// Fast per-piece routing table used by the hot simulation loop.
pub(crate) fn route_fast(piece: RailPiece, entry: Direction) -> Option<(Direction, TrackId)> {
    match piece.route(entry) {
        Route::Exit { exit, track, .. } => Some((exit, track)),
        Route::NoTrack => None,
    }
}

/// Free-function form of [`RailPiece::route`].
pub fn route(piece: RailPiece, entry: Direction) -> Route {
    piece.route(entry)
}

/// Free-function form of [`RailPiece::rotated`].
pub fn rotate_piece(piece: RailPiece, quarter_turns: u8) -> RailPiece {
    piece.rotated(quarter_turns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn contains(self, side: Direction) -> bool {
        match self {
            Axis::Horizontal => side.is_horizontal(),
            Axis::Vertical => !side.is_horizontal(),
        }
    }
}

/// Static content of a board cell. Station and splitter directions name the
/// side a train passes through: `out_dir` for departures, `in_dir` for
/// arrivals and splitter inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Tile {
    Empty,
    Rock,
    Departure {
        color: Color,
        trains: u32,
        out_dir: Direction,
    },
    Arrival {
        color: Color,
        capacity: u32,
        in_dir: Direction,
    },
    Painter {
        color: Color,
        axis: Axis,
    },
    Splitter {
        in_dir: Direction,
    },
}

impl Tile {
    pub fn is_empty(&self) -> bool {
        matches!(self, Tile::Empty)
    }

    pub fn is_special(&self) -> bool {
        !matches!(self, Tile::Empty | Tile::Rock)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("grid has {got} tiles, expected {expected}")]
    Size { expected: usize, got: usize },
    #[error("station at {0} points off the board")]
    StationOffBoard(Position),
    #[error("painter at {0} must be red or blue")]
    PainterColor(Position),
    #[error("station at {0} needs a positive count")]
    ZeroCount(Position),
}

/// Immutable puzzle definition: a rectangle of tiles, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    width: u32,
    height: u32,
    tiles: Vec<Tile>,
}

impl Level {
    pub fn new(width: u32, height: u32, tiles: Vec<Tile>) -> Result<Self, LevelError> {
        let expected = (width as usize) * (height as usize);
        if tiles.len() != expected {
            return Err(LevelError::Size {
                expected,
                got: tiles.len(),
            });
        }
        let level = Self {
            width,
            height,
            tiles,
        };
        for (pos, tile) in level.iter() {
            match *tile {
                Tile::Departure {
                    out_dir: d,
                    trains: c,
                    ..
                }
                | Tile::Arrival {
                    in_dir: d,
                    capacity: c,
                    ..
                } => {
                    if c == 0 {
                        return Err(LevelError::ZeroCount(pos));
                    }
                    if !level.in_bounds(pos.step(d)) {
                        return Err(LevelError::StationOffBoard(pos));
                    }
                }
                Tile::Painter { color, .. } if !matches!(color, Color::Red | Color::Blue) => {
                    return Err(LevelError::PainterColor(pos));
                }
                _ => {}
            }
        }
        Ok(level)
    }

    /// A level filled with one tile kind.
    pub fn filled(width: u32, height: u32, tile: Tile) -> Self {
        Self {
            width,
            height,
            tiles: vec![tile; (width * height) as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.row >= 0 && p.col >= 0 && (p.row as u32) < self.height && (p.col as u32) < self.width
    }

    pub fn index(&self, p: Position) -> Option<usize> {
        self.in_bounds(p)
            .then(|| p.row as usize * self.width as usize + p.col as usize)
    }

    pub fn position(&self, index: usize) -> Position {
        let w = self.width as usize;
        Position::new((index / w) as i32, (index % w) as i32)
    }

    pub fn tile(&self, p: Position) -> Option<&Tile> {
        self.index(p).map(|i| &self.tiles[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Position, &Tile)> + '_ {
        self.tiles
            .iter()
            .enumerate()
            .map(|(i, t)| (self.position(i), t))
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn departures(&self) -> impl Iterator<Item = (Position, &Tile)> + '_ {
        self.iter()
            .filter(|(_, t)| matches!(t, Tile::Departure { .. }))
    }

    pub fn arrivals(&self) -> impl Iterator<Item = (Position, &Tile)> + '_ {
        self.iter().filter(|(_, t)| matches!(t, Tile::Arrival { .. }))
    }

    pub fn empty_cells(&self) -> impl Iterator<Item = Position> + '_ {
        self.iter().filter(|(_, t)| t.is_empty()).map(|(p, _)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::*;

    #[test]
    fn mix_examples() {
        assert_eq!(mix_colors(Color::Red, Color::Blue), Color::Purple);
        assert_eq!(mix_colors(Color::Red, Color::Red), Color::Red);
        assert_eq!(mix_colors(Color::Purple, Color::Blue), Color::Brown);
        assert_eq!(mix_colors(Color::Brown, Color::Red), Color::Brown);
    }

    #[test]
    fn splitter_examples() {
        assert_eq!(splitter_colors(Color::Purple), (Color::Red, Color::Blue));
        assert_eq!(splitter_colors(Color::Red), (Color::Red, Color::Red));
        assert_eq!(splitter_colors(Color::Brown), (Color::Brown, Color::Brown));
    }

    #[test]
    fn color_algebra_laws() {
        for a in Color::ALL {
            assert_eq!(a.mix(a), a);
            assert_eq!(a.mix(Color::Brown), Color::Brown);
            let (r, b) = a.split();
            assert_eq!(r.mix(b), a);
            for b in Color::ALL {
                assert_eq!(a.mix(b), b.mix(a));
            }
        }
    }

    #[test]
    fn direction_laws() {
        for d in Direction::ALL {
            assert_eq!(d.opposite().opposite(), d);
            assert_eq!(d.rotate(1).rotate(1).rotate(1).rotate(1), d);
            assert_eq!(d.cw().ccw(), d);
        }
        assert_eq!(West.cw(), North);
    }

    #[test]
    fn straight_routes_through() {
        let p = RailPiece::new(RailKind::Straight, 0);
        assert_eq!(
            p.route(South),
            Route::Exit {
                exit: North,
                updated: p,
                track: TrackId(0)
            }
        );
    }

    #[test]
    fn switch_takes_active_branch_and_flips() {
        let p = RailPiece::with_branch(RailKind::SwitchTurnTurn, 0, 0);
        match p.route(South) {
            Route::Exit { exit, updated, .. } => {
                assert_eq!(exit, West);
                assert_eq!(updated.active_branch, 1);
                assert_eq!(updated.route(South), Route::Exit {
                    exit: East,
                    updated: p,
                    track: TrackId::MAIN
                });
            }
            Route::NoTrack => panic!("switch base must route"),
        }
    }

    #[test]
    fn switch_branch_entry_ignores_state_but_flips() {
        for branch in 0..2 {
            let p = RailPiece::with_branch(RailKind::SwitchStraightTurn, 0, branch);
            for entry in [North, West] {
                let Route::Exit { exit, updated, .. } = p.route(entry) else {
                    panic!("branch entry must route");
                };
                assert_eq!(exit, South);
                assert_eq!(updated.active_branch, 1 - branch);
            }
            assert_eq!(p.route(East), Route::NoTrack);
        }
    }

    #[test]
    fn crossing_keeps_tracks_apart() {
        let p = RailPiece::crossing();
        assert_eq!(
            p.route(West),
            Route::Exit {
                exit: East,
                updated: p,
                track: TrackId::HORIZONTAL
            }
        );
        let Route::Exit { track, .. } = p.route(North) else {
            panic!()
        };
        assert_eq!(track, TrackId::VERTICAL);
    }

    #[test]
    fn turn_without_track_on_side() {
        assert_eq!(RailPiece::new(RailKind::Turn, 0).route(North), Route::NoTrack);
    }

    #[test]
    fn rotation_examples() {
        let s = RailPiece::new(RailKind::Straight, 0);
        assert_eq!(rotate_piece(s, 1).tracks(), vec![(East, West)]);
        assert_eq!(rotate_piece(s, 0), s);
        let t = rotate_piece(RailPiece::new(RailKind::Turn, 0), 2);
        assert_eq!(t.tracks(), vec![(North, West)]);
    }

    #[test]
    fn connecting_and_join_helpers() {
        for a in Direction::ALL {
            for b in Direction::ALL {
                if a == b {
                    continue;
                }
                let p = RailPiece::connecting(a, b);
                assert!(matches!(p.route(a), Route::Exit { exit, .. } if exit == b));
            }
            let j = RailPiece::join(a);
            assert_eq!(j.switch_sides().unwrap().0, a);
        }
    }

    #[test]
    fn catalog_is_deduplicated() {
        let cat = RailPiece::catalog();
        assert_eq!(cat.len(), 25);
        let mut seen = std::collections::HashSet::new();
        for p in &cat {
            let mut sig: Vec<_> = Direction::ALL
                .iter()
                .map(|&d| match p.route(d) {
                    Route::Exit { exit, .. } => Some(exit),
                    Route::NoTrack => None,
                })
                .collect();
            sig.push(p.switch_sides().map(|_| Direction::North));
            assert!(seen.insert((sig, p.active_branch, p.kind)));
        }
    }

    #[test]
    fn level_rejects_station_off_board() {
        let tiles = vec![Tile::Departure {
            color: Color::Red,
            trains: 1,
            out_dir: North,
        }];
        assert_eq!(
            Level::new(1, 1, tiles),
            Err(LevelError::StationOffBoard(Position::new(0, 0)))
        );
    }
}
