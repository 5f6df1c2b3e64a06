//! Tile stamps for every gadget of the construction, with their ports and the
//! rail designs that make them work.
//!
//! Maps use `#` for rock and `.` for a free cell; special tiles are listed
//! separately. Rows grow downward.
//!
//! ```text
//! Lane(3)    Terminus   OneWay   OneTimePass   CrossIgnore
//! ...        PA         ..       A#            ...#
//!                       S.       P#            .S.#
//!                       ..       S.            #.A#
//!                                ..            P.S.
//!                                              #P..
//!
//! CrossSatisfy   And2 (buffer_slots = 1)   Replicator(3)
//! ####..##       ####.######               .########
//! #.P...##       ####SSA####               .#...#...
//! ...#...#       ####A.#####               ..S#..S#.
//! .S.#.S.#       ...........               ##.###.#.
//! #..##.A#       ...........
//! .S..P.S.       ...........
//! #..##P..       ###P###P###
//! ```
//!
//! Replicator(q) is a chain of `q - 1` splitters along row 2, each sending
//! one child down to an output and the other over a hump on row 1 to the
//! next splitter. Humps are separated by rock.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RailLayout;
use crate::model::{Axis, Color, Direction, Position, RailPiece, Tile};

use Direction::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GadgetKind {
    Lane { length: u32 },
    Terminus,
    OneWay,
    OneTimePass,
    CrossIgnore,
    CrossSatisfy,
    And2 { buffer_slots: u32 },
    Replicator { outputs: u32 },
}

impl GadgetKind {
    /// The catalog as exercised by `verify-gadgets`.
    pub fn catalog() -> Vec<GadgetKind> {
        vec![
            GadgetKind::Lane { length: 3 },
            GadgetKind::Terminus,
            GadgetKind::OneWay,
            GadgetKind::OneTimePass,
            GadgetKind::CrossIgnore,
            GadgetKind::CrossSatisfy,
            GadgetKind::And2 { buffer_slots: 2 },
            GadgetKind::Replicator { outputs: 2 },
            GadgetKind::Replicator { outputs: 3 },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            GadgetKind::Lane { length } => format!("lane{length}"),
            GadgetKind::Terminus => "terminus".into(),
            GadgetKind::OneWay => "one_way".into(),
            GadgetKind::OneTimePass => "one_time_pass".into(),
            GadgetKind::CrossIgnore => "cross_ignore".into(),
            GadgetKind::CrossSatisfy => "cross_satisfy".into(),
            GadgetKind::And2 { .. } => "and2".into(),
            GadgetKind::Replicator { outputs } => format!("replicator{outputs}"),
        }
    }

    /// Parses names such as `one_way`, `replicator3`, `and2`, `lane4`.
    pub fn parse(s: &str) -> Option<GadgetKind> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        Some(match s.as_str() {
            "terminus" => GadgetKind::Terminus,
            "one_way" | "oneway" => GadgetKind::OneWay,
            "one_time_pass" | "onetimepass" => GadgetKind::OneTimePass,
            "cross_ignore" | "crossignore" => GadgetKind::CrossIgnore,
            "cross_satisfy" | "crosssatisfy" => GadgetKind::CrossSatisfy,
            "and2" | "and" => GadgetKind::And2 { buffer_slots: 2 },
            "lane" => GadgetKind::Lane { length: 3 },
            _ => {
                if let Some(n) = s.strip_prefix("replicator") {
                    GadgetKind::Replicator {
                        outputs: n.parse().ok()?,
                    }
                } else {
                    GadgetKind::Lane {
                        length: s.strip_prefix("lane")?.parse().ok()?,
                    }
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Input,
    Output,
}

/// A boundary cell through which trains enter or leave a stamp. `dir` is the
/// heading of a train passing through the port in its normal direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub pos: Position,
    pub dir: Direction,
    pub polarity: Polarity,
    pub lane_color: Option<Color>,
}

impl Port {
    fn new(name: &str, pos: Position, dir: Direction, polarity: Polarity, color: Option<Color>) -> Self {
        Self {
            name: name.to_string(),
            pos,
            dir,
            polarity,
            lane_color: color,
        }
    }

    /// The cell just outside the stamp on this port's side.
    pub fn exterior(&self) -> Position {
        match self.polarity {
            Polarity::Input => self.pos.step(self.dir.opposite()),
            Polarity::Output => self.pos.step(self.dir),
        }
    }

    /// Side of the stamp this port opens onto.
    pub fn outward(&self) -> Direction {
        match self.polarity {
            Polarity::Input => self.dir.opposite(),
            Polarity::Output => self.dir,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetStamp {
    pub kind: GadgetKind,
    pub width: u32,
    pub height: u32,
    pub tiles: Vec<Tile>,
    pub ports: Vec<Port>,
    pub free_cells: Vec<Position>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("replicator needs at least one output")]
    NoOutputs,
    #[error("lane needs a positive length")]
    EmptyLane,
    #[error("and gadget needs at least one buffer slot")]
    NoBuffer,
    #[error("no port named {0}")]
    UnknownPort(String),
    #[error("buffer delay {needed} exceeds capacity {capacity}")]
    DelayTooLarge { needed: u64, capacity: u64 },
    #[error("odd buffer delay {0}")]
    OddDelay(u64),
}

impl GadgetStamp {
    fn from_ascii(kind: GadgetKind, rows: &[&str], specials: &[(Position, Tile)], ports: Vec<Port>) -> Self {
        let height = rows.len() as u32;
        let width = rows[0].len() as u32;
        let mut tiles: Vec<Tile> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len() as u32, width, "ragged stamp map");
                r.chars().map(|c| if c == '.' { Tile::Empty } else { Tile::Rock })
            })
            .collect();
        for &(p, t) in specials {
            let i = (p.row as u32 * width + p.col as u32) as usize;
            assert_eq!(tiles[i], Tile::Rock, "special tile must sit on a non-free mark");
            tiles[i] = t;
        }
        let free_cells = tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_empty())
            .map(|(i, _)| Position::new((i as u32 / width) as i32, (i as u32 % width) as i32))
            .collect();
        Self {
            kind,
            width,
            height,
            tiles,
            ports,
            free_cells,
        }
    }

    pub fn tile(&self, p: Position) -> Option<&Tile> {
        if p.row < 0 || p.col < 0 || p.row as u32 >= self.height || p.col as u32 >= self.width {
            return None;
        }
        self.tiles.get((p.row as u32 * self.width + p.col as u32) as usize)
    }

    pub fn port(&self, name: &str) -> Result<&Port, GadgetError> {
        self.ports
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| GadgetError::UnknownPort(name.to_string()))
    }

    pub fn inputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.polarity == Polarity::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.polarity == Polarity::Output)
    }

    /// Special tiles as a sorted multiset of short labels.
    pub fn special_tiles(&self) -> Vec<&'static str> {
        let mut v: Vec<&'static str> = self
            .tiles
            .iter()
            .filter_map(|t| match t {
                Tile::Departure { .. } => Some("departure"),
                Tile::Arrival { .. } => Some("arrival"),
                Tile::Painter { .. } => Some("painter"),
                Tile::Splitter { .. } => Some("splitter"),
                _ => None,
            })
            .collect();
        v.sort();
        v
    }

    /// ASCII rendering: `#` rock, `.` free, `S` splitter, `P` painter,
    /// `A` arrival, `D` departure.
    pub fn ascii(&self) -> String {
        let mut s = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                let ch = match self.tiles[(r * self.width + c) as usize] {
                    Tile::Empty => '.',
                    Tile::Rock => '#',
                    Tile::Departure { .. } => 'D',
                    Tile::Arrival { .. } => 'A',
                    Tile::Painter { .. } => 'P',
                    Tile::Splitter { .. } => 'S',
                };
                s.push(ch);
            }
            s.push('\n');
        }
        s
    }
}

pub(crate) fn painter(color: Color, axis: Axis) -> Tile {
    Tile::Painter { color, axis }
}

pub(crate) fn arrival(color: Color, in_dir: Direction) -> Tile {
    Tile::Arrival {
        color,
        capacity: 1,
        in_dir,
    }
}

pub(crate) fn splitter(in_dir: Direction) -> Tile {
    Tile::Splitter { in_dir }
}

fn p(row: i32, col: i32) -> Position {
    Position::new(row, col)
}

/// Builds the stamp for `kind`.
pub fn stamp(kind: GadgetKind) -> Result<GadgetStamp, GadgetError> {
    use Polarity::*;
    Ok(match kind {
        GadgetKind::Lane { length } => {
            if length == 0 {
                return Err(GadgetError::EmptyLane);
            }
            let row = ".".repeat(length as usize);
            GadgetStamp::from_ascii(
                kind,
                &[&row],
                &[],
                vec![
                    Port::new("in", p(0, 0), East, Input, None),
                    Port::new("out", p(0, length as i32 - 1), East, Output, None),
                ],
            )
        }
        GadgetKind::Terminus => GadgetStamp::from_ascii(
            kind,
            &["##"],
            &[
                (p(0, 0), painter(Color::Red, Axis::Horizontal)),
                (p(0, 1), arrival(Color::Red, West)),
            ],
            vec![Port::new("in", p(0, 0), East, Input, None)],
        ),
        GadgetKind::OneWay => GadgetStamp::from_ascii(
            kind,
            &["..", "#.", ".."],
            &[(p(1, 0), splitter(West))],
            vec![
                Port::new("in", p(1, 0), East, Input, None),
                Port::new("out", p(1, 1), East, Output, None),
            ],
        ),
        GadgetKind::OneTimePass => GadgetStamp::from_ascii(
            kind,
            &["##", "##", "#.", ".."],
            &[
                (p(0, 0), arrival(Color::Red, South)),
                (p(1, 0), painter(Color::Red, Axis::Vertical)),
                (p(2, 0), splitter(West)),
            ],
            vec![
                Port::new("in", p(2, 0), East, Input, None),
                Port::new("out", p(2, 1), East, Output, None),
            ],
        ),
        GadgetKind::CrossIgnore => GadgetStamp::from_ascii(
            kind,
            &["...#", ".#.#", "#.##", "#.#.", "##.."],
            &[
                (p(1, 1), splitter(South)),
                (p(2, 2), arrival(Color::Red, South)),
                (p(3, 0), painter(Color::Red, Axis::Horizontal)),
                (p(3, 2), splitter(West)),
                (p(4, 1), painter(Color::Blue, Axis::Vertical)),
            ],
            cross_ports(p(0, 0)),
        ),
        GadgetKind::CrossSatisfy => {
            let mut ports = cross_ports(p(2, 4));
            // the satisfy gadget widens the cross-ignore core to the left
            // and lifts its top exit by two rows
            for port in ports.iter_mut() {
                match port.name.as_str() {
                    "left" => port.pos = p(5, 0),
                    "top" => port.pos = p(0, 5),
                    _ => {}
                }
            }
            GadgetStamp::from_ascii(
                kind,
                &[
                    "####..##", //
                    "#.#...##", //
                    "...#...#", //
                    ".#.#.#.#", //
                    "#..##.##", //
                    ".#..#.#.", //
                    "#..###..", //
                ],
                &[
                    (p(1, 2), painter(Color::Blue, Axis::Horizontal)),
                    (p(3, 1), splitter(South)),
                    (p(3, 5), splitter(South)),
                    (p(4, 6), arrival(Color::Red, South)),
                    (p(5, 1), splitter(West)),
                    (p(5, 4), painter(Color::Red, Axis::Horizontal)),
                    (p(5, 6), splitter(West)),
                    (p(6, 5), painter(Color::Blue, Axis::Vertical)),
                ],
                ports,
            )
        }
        GadgetKind::And2 { buffer_slots } => {
            if buffer_slots == 0 {
                return Err(GadgetError::NoBuffer);
            }
            let e = buffer_slots as i32;
            let mut rows: Vec<String> = vec![
                "####.######".into(),
                "###########".into(),
                "#####.#####".into(),
            ];
            for _ in 0..(2 * e + 1) {
                rows.push("...........".into());
            }
            rows.push("###########".into());
            let rows_ref: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
            let bottom = 4 + 2 * e;
            GadgetStamp::from_ascii(
                kind,
                &rows_ref,
                &[
                    (p(1, 4), splitter(East)),
                    (p(1, 5), splitter(South)),
                    (p(1, 6), arrival(Color::Blue, West)),
                    (p(2, 4), arrival(Color::Red, North)),
                    (p(bottom, AND_LEFT_COL), painter(Color::Red, Axis::Vertical)),
                    (p(bottom, AND_RIGHT_COL), painter(Color::Blue, Axis::Vertical)),
                ],
                vec![
                    Port::new("left", p(bottom, AND_LEFT_COL), North, Input, None),
                    Port::new("right", p(bottom, AND_RIGHT_COL), North, Input, None),
                    Port::new("top", p(0, 4), North, Output, Some(Color::Red)),
                ],
            )
        }
        GadgetKind::Replicator { outputs } => replicator(outputs)?,
    })
}

pub const AND_LEFT_COL: i32 = 3;
pub const AND_RIGHT_COL: i32 = 7;
pub const AND_MERGE_COL: i32 = 5;
/// Widest excursion a buffer path may take to either side.
pub const AND_EXCURSION: i32 = 3;

fn cross_ports(origin: Position) -> Vec<Port> {
    use Polarity::*;
    vec![
        Port::new("left", origin.offset(3, 0), East, Input, Some(Color::Red)),
        Port::new("bottom", origin.offset(4, 1), North, Input, Some(Color::Blue)),
        Port::new("right", origin.offset(3, 3), East, Output, Some(Color::Red)),
        Port::new("top", origin.offset(0, 1), North, Output, Some(Color::Blue)),
    ]
}

fn replicator(q: u32) -> Result<GadgetStamp, GadgetError> {
    use Polarity::*;
    let kind = GadgetKind::Replicator { outputs: q };
    if q == 0 {
        return Err(GadgetError::NoOutputs);
    }
    if q == 1 {
        return Ok(GadgetStamp::from_ascii(
            kind,
            &[".", ".", ".", "."],
            &[],
            vec![
                Port::new("in", p(0, 0), South, Input, None),
                Port::new("out0", p(3, 0), South, Output, None),
            ],
        ));
    }
    let q = q as i32;
    let width = (4 * q - 3) as usize;
    let mut grid = vec![vec!['#'; width]; 4];
    let mut specials = Vec::new();
    let mut ports = vec![Port::new("in", p(0, 0), South, Input, None)];
    grid[0][0] = '.';
    grid[1][0] = '.';
    grid[2][0] = '.';
    grid[2][1] = '.';
    for t in 0..q - 1 {
        let c = (2 + 4 * t) as usize;
        specials.push((p(2, c as i32), splitter(West)));
        grid[1][c] = '.';
        grid[1][c + 1] = '.';
        grid[1][c + 2] = '.';
        grid[2][c + 2] = '.';
        if t < q - 2 {
            // humps must not touch, or a train could skip the next splitter
            grid[2][c + 3] = '.';
        }
        grid[3][c] = '.';
        ports.push(Port::new(&format!("out{t}"), p(3, c as i32), South, Output, None));
    }
    let last = (4 * q - 4) as usize;
    grid[3][last] = '.';
    ports.push(Port::new(&format!("out{}", q - 1), p(3, last as i32), South, Output, None));
    let rows: Vec<String> = grid.into_iter().map(|r| r.into_iter().collect()).collect();
    let rows_ref: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
    Ok(GadgetStamp::from_ascii(kind, &rows_ref, &specials, ports))
}

/// A named rail design for a stamp, in stamp-local coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub name: &'static str,
    pub layout: RailLayout,
}

fn rails(cells: &[(i32, i32, Direction, Direction)]) -> RailLayout {
    cells
        .iter()
        .map(|&(r, c, a, b)| (p(r, c), RailPiece::connecting(a, b)))
        .collect()
}

/// Rails of the cross-ignore core placed with its top-left corner at `o`.
fn cross_ignore_rails(o: Position) -> RailLayout {
    let mut l = rails(&[
        (o.row + 2, o.col + 1, South, North),
        (o.row + 1, o.col, East, North),
        (o.row, o.col, South, East),
        (o.row + 1, o.col + 2, West, North),
        (o.row, o.col + 2, South, West),
        (o.row + 4, o.col + 2, North, East),
        (o.row + 4, o.col + 3, West, North),
        (o.row + 3, o.col + 3, South, East),
    ]);
    l.insert(o.offset(0, 1), RailPiece::join(North));
    l.insert(o.offset(3, 1), RailPiece::crossing());
    l
}

/// The designs the construction relies on. Cross-satisfy has two
/// (`pass_through` and `duplicate`); the others have one.
pub fn designs(kind: GadgetKind) -> Vec<Design> {
    match kind {
        GadgetKind::Lane { length } => vec![Design {
            name: "straight",
            layout: (0..length as i32)
                .map(|c| (p(0, c), RailPiece::connecting(West, East)))
                .collect(),
        }],
        GadgetKind::Terminus => vec![Design {
            name: "forced",
            layout: RailLayout::new(),
        }],
        GadgetKind::OneWay => {
            let mut l = rails(&[
                (0, 0, South, East),
                (0, 1, West, South),
                (2, 0, North, East),
                (2, 1, West, North),
            ]);
            l.insert(p(1, 1), RailPiece::join(East));
            vec![Design {
                name: "split_rejoin",
                layout: l,
            }]
        }
        GadgetKind::OneTimePass => vec![Design {
            name: "forced",
            layout: rails(&[(3, 0, North, East), (3, 1, West, North), (2, 1, South, East)]),
        }],
        GadgetKind::CrossIgnore => vec![Design {
            name: "crossing",
            layout: cross_ignore_rails(p(0, 0)),
        }],
        GadgetKind::CrossSatisfy => {
            let mut common = cross_ignore_rails(p(2, 4));
            for (pos, piece) in rails(&[
                (5, 0, West, East),
                (6, 1, North, East),
                (6, 2, West, North),
                (5, 3, West, East),
                (1, 5, South, West),
                (0, 4, South, East),
                (0, 5, West, North),
            ])
            .iter()
            {
                common.insert(pos, piece);
            }
            common.insert(p(1, 4), RailPiece::join(North));
            common.insert(p(5, 2), RailPiece::join(East));

            let mut pass = common.clone();
            for (pos, piece) in rails(&[(4, 1, South, East), (4, 2, West, South)]).iter() {
                pass.insert(pos, piece);
            }
            let mut dup = common;
            for (pos, piece) in rails(&[
                (4, 1, South, North),
                (3, 0, East, North),
                (2, 0, South, East),
                (3, 2, West, North),
                (2, 2, South, West),
                (1, 1, South, East),
                (1, 3, West, East),
            ])
            .iter()
            {
                dup.insert(pos, piece);
            }
            dup.insert(p(2, 1), RailPiece::join(North));
            vec![
                Design {
                    name: "pass_through",
                    layout: pass,
                },
                Design {
                    name: "duplicate",
                    layout: dup,
                },
            ]
        }
        GadgetKind::And2 { buffer_slots } => vec![Design {
            name: "synchronous",
            layout: and2_design(buffer_slots, 0, 0).expect("zero delay always fits"),
        }],
        GadgetKind::Replicator { outputs } => vec![Design {
            name: "forced",
            layout: replicator_design(outputs),
        }],
    }
}

fn replicator_design(q: u32) -> RailLayout {
    if q <= 1 {
        return (0..4).map(|r| (p(r, 0), RailPiece::connecting(North, South))).collect();
    }
    let q = q as i32;
    let mut cells = vec![(0, 0, North, South), (1, 0, North, South), (2, 0, North, East), (2, 1, West, East)];
    for t in 0..q - 1 {
        let c = 2 + 4 * t;
        cells.push((1, c, South, East));
        cells.push((1, c + 1, West, East));
        cells.push((1, c + 2, West, South));
        cells.push((3, c, North, South));
        if t < q - 2 {
            cells.push((2, c + 2, North, East));
            cells.push((2, c + 3, West, East));
        } else {
            cells.push((2, c + 2, North, South));
            cells.push((3, c + 2, North, South));
        }
    }
    rails(&cells)
}

/// Extra path length (beyond the straight route) a buffer side can absorb.
pub fn and2_delay_capacity(buffer_slots: u32) -> u64 {
    2 * AND_EXCURSION as u64 * buffer_slots as u64
}

/// Buffer and upper-area rails for an AND gadget when the left input is to
/// be held back by `delay_left` steps and the right by `delay_right`.
pub fn and2_design(buffer_slots: u32, delay_left: u64, delay_right: u64) -> Result<RailLayout, GadgetError> {
    let e = buffer_slots as i32;
    let mut l = RailLayout::new();
    l.insert(p(0, 4), RailPiece::connecting(South, North));
    l.insert(p(2, AND_MERGE_COL), RailPiece::connecting(South, North));
    l.insert(p(3, AND_MERGE_COL), RailPiece::join(North));
    for (col, outward, delay) in [(AND_LEFT_COL, West, delay_left), (AND_RIGHT_COL, East, delay_right)] {
        if delay % 2 == 1 {
            return Err(GadgetError::OddDelay(delay));
        }
        let capacity = and2_delay_capacity(buffer_slots);
        if delay > capacity {
            return Err(GadgetError::DelayTooLarge { needed: delay, capacity });
        }
        let inward = outward.opposite();
        let step = if outward == West { -1 } else { 1 };
        let mut remaining = (delay / 2) as i32;
        for s in 0..e {
            let lower = 3 + 2 * e - 2 * s;
            let upper = lower - 1;
            let w = remaining.min(AND_EXCURSION);
            remaining -= w;
            if w == 0 {
                l.insert(p(lower, col), RailPiece::connecting(South, North));
                l.insert(p(upper, col), RailPiece::connecting(South, North));
                continue;
            }
            let far = col + step * w;
            l.insert(p(lower, col), RailPiece::connecting(South, outward));
            l.insert(p(upper, col), RailPiece::connecting(outward, North));
            for k in 1..w {
                l.insert(p(lower, col + step * k), RailPiece::connecting(inward, outward));
                l.insert(p(upper, col + step * k), RailPiece::connecting(inward, outward));
            }
            l.insert(p(lower, far), RailPiece::connecting(inward, North));
            l.insert(p(upper, far), RailPiece::connecting(South, inward));
        }
        // merge row: turn toward the join, one straight, then the join itself
        l.insert(p(3, col), RailPiece::connecting(South, inward));
        l.insert(p(3, col - step), RailPiece::connecting(West, East));
    }
    Ok(l)
}

/// Distinct special-tile multiset per kind, as drawn.
pub fn expected_specials(kind: GadgetKind) -> Vec<&'static str> {
    let mut v: Vec<&'static str> = match kind {
        GadgetKind::Lane { .. } => vec![],
        GadgetKind::Terminus => vec!["painter", "arrival"],
        GadgetKind::OneWay => vec!["splitter"],
        GadgetKind::OneTimePass => vec!["splitter", "arrival", "painter"],
        GadgetKind::CrossIgnore => vec!["painter", "painter", "splitter", "splitter", "arrival"],
        GadgetKind::CrossSatisfy => vec![
            "painter", "painter", "painter", "splitter", "splitter", "splitter", "splitter", "arrival",
        ],
        GadgetKind::And2 { .. } => vec!["painter", "painter", "splitter", "splitter", "arrival", "arrival"],
        GadgetKind::Replicator { outputs } => vec!["splitter"; outputs.saturating_sub(1) as usize],
    };
    v.sort();
    v
}

/// Free cells touched by a design, for coverage checks.
pub fn design_cells(design: &Design) -> BTreeSet<Position> {
    design.layout.iter().map(|(p, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_stamp_builds_and_designs_use_free_cells() {
        for kind in GadgetKind::catalog() {
            let s = stamp(kind).unwrap();
            assert_eq!(s.special_tiles(), expected_specials(kind), "{kind:?}");
            for d in designs(kind) {
                for (pos, _) in d.layout.iter() {
                    assert_eq!(s.tile(pos), Some(&Tile::Empty), "{kind:?} {} at {pos}", d.name);
                }
            }
            for port in &s.ports {
                let on_edge = port.pos.row == 0
                    || port.pos.col == 0
                    || port.pos.row as u32 == s.height - 1
                    || port.pos.col as u32 == s.width - 1;
                assert!(on_edge, "{kind:?} port {} not on the boundary", port.name);
            }
        }
    }

    #[test]
    fn stamp_examples() {
        assert_eq!(stamp(GadgetKind::OneWay).unwrap().special_tiles(), vec!["splitter"]);
        let t = stamp(GadgetKind::Terminus).unwrap();
        assert!(matches!(t.tiles[0], Tile::Painter { .. }));
        assert!(matches!(t.tiles[1], Tile::Arrival { capacity: 1, .. }));
        let r = stamp(GadgetKind::Replicator { outputs: 3 }).unwrap();
        assert_eq!(r.inputs().count(), 1);
        assert_eq!(r.outputs().count(), 3);
        assert_eq!(stamp(GadgetKind::Replicator { outputs: 0 }), Err(GadgetError::NoOutputs));
    }

    #[test]
    fn one_time_pass_extends_one_way() {
        let mut ow = stamp(GadgetKind::OneWay).unwrap().special_tiles();
        ow.extend(["arrival", "painter"]);
        ow.sort();
        assert_eq!(stamp(GadgetKind::OneTimePass).unwrap().special_tiles(), ow);
    }

    #[test]
    fn and2_delay_rejects_overflow() {
        assert!(and2_design(1, 6, 0).is_ok());
        assert_eq!(
            and2_design(1, 8, 0),
            Err(GadgetError::DelayTooLarge { needed: 8, capacity: 6 })
        );
        assert_eq!(and2_design(1, 3, 0), Err(GadgetError::OddDelay(3)));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in GadgetKind::catalog() {
            assert_eq!(GadgetKind::parse(&kind.name()).map(|k| k.name()), Some(kind.name()));
        }
    }
}
