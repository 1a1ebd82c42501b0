//! Regions of the square lattice, domino spaces, tilings and height functions.
//!
//! A square is named by its lower-left corner `(i, j)`; its centre is
//! `(i + 1/2, j + 1/2)`.  Vertices are integer points.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::exact::LatticeLocation;

/// A unit lattice square, named by its lower-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridSquare {
    pub i: i32,
    pub j: i32,
}

impl GridSquare {
    pub const fn new(i: i32, j: i32) -> Self {
        GridSquare { i, j }
    }

    /// Builds a square from its centre, which must have half-integer coordinates.
    pub fn from_center(cx: f64, cy: f64) -> Result<Self> {
        let (i, j) = (cx - 0.5, cy - 0.5);
        if i.fract() != 0.0 || j.fract() != 0.0 {
            return domain(format!("({cx}, {cy}) is not a square centre"));
        }
        Ok(GridSquare::new(i as i32, j as i32))
    }

    pub fn center(&self) -> (f64, f64) {
        (self.i as f64 + 0.5, self.j as f64 + 0.5)
    }

    /// Image under the quarter turn `(x, y) -> (y, -x)`.
    pub fn rotate_cw(&self) -> Self {
        GridSquare::new(self.j, -self.i - 1)
    }

    pub fn is_adjacent(&self, other: &GridSquare) -> bool {
        (self.i - other.i).abs() + (self.j - other.j).abs() == 1
    }
}

impl fmt::Display for GridSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.center();
        write!(f, "[{x}, {y}]")
    }
}

/// A lattice point.
pub type Vertex = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    Black,
    White,
}

/// Checkerboard coloring: a square is white iff `i + j` has the given parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coloring {
    white_parity: u8,
}

impl Coloring {
    pub fn new(white_parity: u8) -> Self {
        Coloring {
            white_parity: white_parity & 1,
        }
    }

    /// The coloring of the order-`n` diamond, in which the leftmost square of
    /// each row in the top half is white.
    pub fn aztec(n: i64) -> Self {
        Coloring::new(n.rem_euclid(2) as u8)
    }

    pub fn white_parity(&self) -> u8 {
        self.white_parity
    }

    pub fn color(&self, sq: GridSquare) -> Color {
        if (sq.i + sq.j).rem_euclid(2) as u8 == self.white_parity {
            Color::White
        } else {
            Color::Black
        }
    }

    pub fn flipped(&self) -> Self {
        Coloring::new(self.white_parity ^ 1)
    }

    /// Classifies the space formed by two adjacent squares.
    pub fn classify(&self, a: GridSquare, b: GridSquare) -> Result<DominoClass> {
        Ok(DominoSpace::from_squares(a, b, *self)?.class)
    }
}

/// The four kinds of domino space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DominoClass {
    North,
    East,
    South,
    West,
}

impl DominoClass {
    pub const ALL: [DominoClass; 4] = [
        DominoClass::North,
        DominoClass::East,
        DominoClass::South,
        DominoClass::West,
    ];

    pub fn is_horizontal(&self) -> bool {
        matches!(self, DominoClass::North | DominoClass::South)
    }

    /// Class after a clockwise quarter turn.
    pub fn rotate_cw(&self) -> Self {
        match self {
            DominoClass::North => DominoClass::East,
            DominoClass::East => DominoClass::South,
            DominoClass::South => DominoClass::West,
            DominoClass::West => DominoClass::North,
        }
    }

    pub fn letter(&self) -> char {
        match self {
            DominoClass::North => 'N',
            DominoClass::East => 'E',
            DominoClass::South => 'S',
            DominoClass::West => 'W',
        }
    }

    pub fn from_letter(c: &str) -> Option<Self> {
        match c {
            "N" => Some(DominoClass::North),
            "E" => Some(DominoClass::East),
            "S" => Some(DominoClass::South),
            "W" => Some(DominoClass::West),
            _ => None,
        }
    }
}

impl fmt::Display for DominoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Two adjacent squares with their class.  `first` is the left square of a
/// horizontal space and the lower square of a vertical one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DominoSpace {
    pub first: GridSquare,
    pub horizontal: bool,
    pub class: DominoClass,
}

impl DominoSpace {
    pub fn from_squares(a: GridSquare, b: GridSquare, coloring: Coloring) -> Result<Self> {
        if !a.is_adjacent(&b) {
            return domain(format!("squares {a} and {b} are not adjacent"));
        }
        let first = a.min(b);
        let horizontal = a.j == b.j;
        Ok(Self::at(first, horizontal, coloring))
    }

    /// The space whose left (horizontal) or lower (vertical) square is `first`.
    pub fn at(first: GridSquare, horizontal: bool, coloring: Coloring) -> Self {
        let class = if horizontal {
            match coloring.color(first) {
                Color::White => DominoClass::North,
                Color::Black => DominoClass::South,
            }
        } else {
            match coloring.color(GridSquare::new(first.i, first.j + 1)) {
                Color::White => DominoClass::West,
                Color::Black => DominoClass::East,
            }
        };
        DominoSpace {
            first,
            horizontal,
            class,
        }
    }

    pub fn second(&self) -> GridSquare {
        if self.horizontal {
            GridSquare::new(self.first.i + 1, self.first.j)
        } else {
            GridSquare::new(self.first.i, self.first.j + 1)
        }
    }

    pub fn squares(&self) -> [GridSquare; 2] {
        [self.first, self.second()]
    }

    /// Midpoint of the bottom edge (horizontal) or of the left edge (vertical).
    pub fn anchor_point(&self) -> Vertex {
        if self.horizontal {
            (self.first.i + 1, self.first.j)
        } else {
            (self.first.i, self.first.j + 1)
        }
    }

    /// Inverse of [`DominoSpace::anchor_point`].
    pub fn from_anchor(point: Vertex, class: DominoClass, coloring: Coloring) -> Result<Self> {
        let (x, y) = point;
        let space = if class.is_horizontal() {
            DominoSpace::at(GridSquare::new(x - 1, y), true, coloring)
        } else {
            DominoSpace::at(GridSquare::new(x, y - 1), false, coloring)
        };
        if space.class != class {
            return domain(format!(
                "a {} space at ({x}, {y}) is {} under this coloring",
                class, space.class
            ));
        }
        Ok(space)
    }

    /// Image under the clockwise quarter turn about the origin, classified
    /// with the same coloring.  The turn sends white squares of a diamond to
    /// black ones, so the class advances one step around N, E, S, W.
    pub fn rotate_cw(&self, coloring: Coloring) -> Self {
        let [a, b] = self.squares();
        DominoSpace::from_squares(a.rotate_cw(), b.rotate_cw(), coloring).expect("rotation preserves adjacency")
    }

    /// The six unit edges on the perimeter of the space.
    fn perimeter_neighbors(&self) -> [GridSquare; 6] {
        let GridSquare { i, j } = self.first;
        if self.horizontal {
            [
                GridSquare::new(i - 1, j),
                GridSquare::new(i + 2, j),
                GridSquare::new(i, j + 1),
                GridSquare::new(i + 1, j + 1),
                GridSquare::new(i, j - 1),
                GridSquare::new(i + 1, j - 1),
            ]
        } else {
            [
                GridSquare::new(i, j - 1),
                GridSquare::new(i, j + 2),
                GridSquare::new(i - 1, j),
                GridSquare::new(i - 1, j + 1),
                GridSquare::new(i + 1, j),
                GridSquare::new(i + 1, j + 1),
            ]
        }
    }

    /// Corner vertices of the space (six of them).
    pub fn vertices(&self) -> [Vertex; 6] {
        let GridSquare { i, j } = self.first;
        if self.horizontal {
            [
                (i, j),
                (i + 1, j),
                (i + 2, j),
                (i, j + 1),
                (i + 1, j + 1),
                (i + 2, j + 1),
            ]
        } else {
            [
                (i, j),
                (i + 1, j),
                (i, j + 1),
                (i + 1, j + 1),
                (i, j + 2),
                (i + 1, j + 2),
            ]
        }
    }
}

/// Location `(ell, m)` of a north-going space of the order-`n` diamond.
pub fn space_location(space: &DominoSpace, n: i64) -> Result<LatticeLocation> {
    if space.class != DominoClass::North {
        return domain(format!(
            "space_location takes north-going spaces, got {}; rotate first",
            space.class
        ));
    }
    let (x, y) = space.anchor_point();
    Ok(LatticeLocation::new(x as i64, y as i64, n))
}

/// Location of every class of space, by rotating it to north-going.
/// Returns the number of clockwise quarter turns used and the location.
pub fn north_equivalent(space: &DominoSpace, n: i64) -> (u8, LatticeLocation) {
    let coloring = Coloring::aztec(n);
    let mut s = *space;
    let mut turns = 0u8;
    while s.class != DominoClass::North {
        s = s.rotate_cw(coloring);
        turns += 1;
    }
    let (x, y) = s.anchor_point();
    (turns, LatticeLocation::new(x as i64, y as i64, n))
}

/// A finite, simply connected union of lattice squares with a checkerboard
/// coloring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    squares: Vec<GridSquare>,
    mask: Vec<bool>,
    i0: i32,
    j0: i32,
    width: i32,
    height: i32,
    coloring: Coloring,
    order_hint: Option<i64>,
}

impl Region {
    /// Builds a region, rejecting empty, disconnected or holed square sets.
    pub fn new(squares: impl IntoIterator<Item = GridSquare>, coloring: Coloring) -> Result<Self> {
        let r = Self::build(squares.into_iter().collect(), coloring, None)?;
        r.check_simply_connected()?;
        Ok(r)
    }

    fn build(mut squares: Vec<GridSquare>, coloring: Coloring, order_hint: Option<i64>) -> Result<Self> {
        if squares.is_empty() {
            return domain("a region needs at least one square");
        }
        squares.sort_by_key(|s| (s.j, s.i));
        squares.dedup();
        let i0 = squares.iter().map(|s| s.i).min().unwrap();
        let i1 = squares.iter().map(|s| s.i).max().unwrap();
        let j0 = squares.first().unwrap().j;
        let j1 = squares.last().unwrap().j;
        let (width, height) = (i1 - i0 + 1, j1 - j0 + 1);
        let mut mask = vec![false; (width * height) as usize];
        for s in &squares {
            mask[((s.j - j0) * width + (s.i - i0)) as usize] = true;
        }
        Ok(Region {
            squares,
            mask,
            i0,
            j0,
            width,
            height,
            coloring,
            order_hint,
        })
    }

    fn check_simply_connected(&self) -> Result<()> {
        // squares: 4-connected
        let mut seen = vec![false; self.mask.len()];
        let mut queue = VecDeque::from([self.squares[0]]);
        seen[self.index(self.squares[0]).unwrap()] = true;
        let mut count = 0;
        while let Some(s) = queue.pop_front() {
            count += 1;
            for t in neighbors4(s) {
                if let Some(k) = self.index(t) {
                    if !seen[k] {
                        seen[k] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        if count != self.squares.len() {
            return domain("region is not connected");
        }
        // complement inside a padded box: 4-connected, so no holes
        let (w, h) = (self.width + 2, self.height + 2);
        let mut outside = vec![false; (w * h) as usize];
        let at = |i: i32, j: i32| ((j - self.j0 + 1) * w + (i - self.i0 + 1)) as usize;
        let start = GridSquare::new(self.i0 - 1, self.j0 - 1);
        outside[at(start.i, start.j)] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some(s) = queue.pop_front() {
            for t in neighbors4(s) {
                if t.i < self.i0 - 1 || t.i > self.i0 + self.width || t.j < self.j0 - 1 || t.j > self.j0 + self.height {
                    continue;
                }
                let k = at(t.i, t.j);
                if !outside[k] && !self.contains(t) {
                    outside[k] = true;
                    reached += 1;
                    queue.push_back(t);
                }
            }
        }
        if reached + self.squares.len() != (w * h) as usize {
            return domain("region has a hole; only simply connected regions are supported");
        }
        Ok(())
    }

    fn index(&self, s: GridSquare) -> Option<usize> {
        let (di, dj) = (s.i - self.i0, s.j - self.j0);
        if di < 0 || dj < 0 || di >= self.width || dj >= self.height {
            return None;
        }
        let k = (dj * self.width + di) as usize;
        self.mask[k].then_some(k)
    }

    pub fn contains(&self, s: GridSquare) -> bool {
        self.index(s).is_some()
    }

    /// Squares in row-major order, bottom row first.
    pub fn squares(&self) -> &[GridSquare] {
        &self.squares
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn coloring(&self) -> Coloring {
        self.coloring
    }

    pub fn order_hint(&self) -> Option<i64> {
        self.order_hint
    }

    pub fn color(&self, s: GridSquare) -> Color {
        self.coloring.color(s)
    }

    /// `(black, white)` square counts.
    pub fn color_counts(&self) -> (usize, usize) {
        let white = self.squares.iter().filter(|s| self.color(**s) == Color::White).count();
        (self.squares.len() - white, white)
    }

    /// Lower-left corner and size of the bounding box, in squares.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        (self.i0, self.j0, self.width, self.height)
    }

    /// Every domino space inside the region.
    pub fn spaces(&self) -> Vec<DominoSpace> {
        let mut out = Vec::new();
        for &s in &self.squares {
            if self.contains(GridSquare::new(s.i + 1, s.j)) {
                out.push(DominoSpace::at(s, true, self.coloring));
            }
            if self.contains(GridSquare::new(s.i, s.j + 1)) {
                out.push(DominoSpace::at(s, false, self.coloring));
            }
        }
        out
    }

    pub fn has_vertex(&self, v: Vertex) -> bool {
        let (x, y) = v;
        [(x, y), (x - 1, y), (x, y - 1), (x - 1, y - 1)]
            .iter()
            .any(|&(i, j)| self.contains(GridSquare::new(i, j)))
    }

    /// Vertices in row-major order, bottom row first.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        for y in self.j0..=self.j0 + self.height {
            for x in self.i0..=self.i0 + self.width {
                if self.has_vertex((x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Every unit edge with at least one adjacent square in the region,
    /// oriented so the black square lies on its left.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for y in self.j0..=self.j0 + self.height {
            for x in self.i0..=self.i0 + self.width {
                // horizontal edge (x,y)-(x+1,y): square above is on the left going east
                let above = GridSquare::new(x, y);
                let below = GridSquare::new(x, y - 1);
                let (ia, ib) = (self.contains(above), self.contains(below));
                if ia || ib {
                    let (from, to) = if self.color(above) == Color::Black {
                        ((x, y), (x + 1, y))
                    } else {
                        ((x + 1, y), (x, y))
                    };
                    out.push(Edge {
                        from,
                        to,
                        squares: [above, below],
                        interior: ia && ib,
                    });
                }
                // vertical edge (x,y)-(x,y+1): square to the west is on the left going north
                let west = GridSquare::new(x - 1, y);
                let east = GridSquare::new(x, y);
                let (iw, ie) = (self.contains(west), self.contains(east));
                if iw || ie {
                    let (from, to) = if self.color(west) == Color::Black {
                        ((x, y), (x, y + 1))
                    } else {
                        ((x, y + 1), (x, y))
                    };
                    out.push(Edge {
                        from,
                        to,
                        squares: [west, east],
                        interior: iw && ie,
                    });
                }
            }
        }
        out
    }

    /// The vertices on the region's boundary.
    pub fn boundary_vertices(&self) -> Vec<Vertex> {
        let mut seen = std::collections::BTreeSet::new();
        for e in self.edges().iter().filter(|e| !e.interior) {
            seen.insert((e.from.1, e.from.0));
            seen.insert((e.to.1, e.to.0));
        }
        seen.into_iter().map(|(y, x)| (x, y)).collect()
    }

    fn vertex_index(&self, v: Vertex) -> Option<usize> {
        let (dx, dy) = (v.0 - self.i0, v.1 - self.j0);
        if dx < 0 || dy < 0 || dx > self.width || dy > self.height {
            return None;
        }
        Some((dy * (self.width + 1) + dx) as usize)
    }

    fn vertex_slots(&self) -> usize {
        ((self.width + 1) * (self.height + 1)) as usize
    }

    fn vertex_at(&self, k: usize) -> Vertex {
        let w = (self.width + 1) as usize;
        (self.i0 + (k % w) as i32, self.j0 + (k / w) as i32)
    }
}

fn neighbors4(s: GridSquare) -> [GridSquare; 4] {
    [
        GridSquare::new(s.i + 1, s.j),
        GridSquare::new(s.i - 1, s.j),
        GridSquare::new(s.i, s.j + 1),
        GridSquare::new(s.i, s.j - 1),
    ]
}

/// A unit edge of a region, oriented with its black square on the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
    /// The two squares sharing the edge (either may lie outside the region).
    pub squares: [GridSquare; 2],
    pub interior: bool,
}

/// The order-`n` Aztec diamond: squares with `|cx| + |cy| <= n`.
pub fn aztec_diamond(n: i64) -> Result<Region> {
    if n < 1 {
        return domain(format!("Aztec diamond order must be at least 1, got {n}"));
    }
    if n > 1 << 20 {
        return Err(Error::Resource(format!("order {n} is too large")));
    }
    let n32 = n as i32;
    let mut squares = Vec::with_capacity((2 * n * (n + 1)) as usize);
    for j in -n32..n32 {
        // |2i+1| + |2j+1| <= 2n
        let half = n32 - if j >= 0 { j } else { -j - 1 };
        for i in -half..half {
            squares.push(GridSquare::new(i, j));
        }
    }
    Region::build(squares, Coloring::aztec(n), Some(n))
}

/// Color of a square of the order-`n` diamond.
pub fn square_color(sq: GridSquare, n: i64) -> Color {
    Coloring::aztec(n).color(sq)
}

/// Class of the space formed by two adjacent squares of the order-`n` diamond.
pub fn classify_space(a: GridSquare, b: GridSquare, n: i64) -> Result<DominoClass> {
    Coloring::aztec(n).classify(a, b)
}

/// The order-`n` diamond with its top-half middle row deleted and the rows
/// above it moved down one unit.  Its only tiling is horizontal brickwork.
pub fn aztec_diamond_without_row(n: i64) -> Result<Region> {
    let d = aztec_diamond(n)?;
    let squares = d
        .squares()
        .iter()
        .filter(|s| s.j != 0)
        .map(|s| if s.j > 0 { GridSquare::new(s.i, s.j - 1) } else { *s });
    Region::new(squares, Coloring::aztec(n))
}

/// A set of domino spaces partitioning a region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tiling {
    region: Region,
    dominos: Vec<DominoSpace>,
    // domino index of each square, keyed like the region mask
    owner: Vec<u32>,
}

const NO_OWNER: u32 = u32::MAX;

impl Tiling {
    pub fn new(region: Region, dominos: Vec<DominoSpace>) -> Result<Self> {
        let mut owner = vec![NO_OWNER; region.mask.len()];
        for (k, d) in dominos.iter().enumerate() {
            let expected = DominoSpace::at(d.first, d.horizontal, region.coloring);
            if expected.class != d.class {
                return Err(Error::Integrity(format!(
                    "domino at {} is labelled {} but the coloring makes it {}",
                    d.first, d.class, expected.class
                )));
            }
            for s in d.squares() {
                let idx = region
                    .index(s)
                    .ok_or_else(|| Error::Integrity(format!("domino covers {s} outside the region")))?;
                if owner[idx] != NO_OWNER {
                    return Err(Error::Integrity(format!("square {s} is covered twice")));
                }
                owner[idx] = k as u32;
            }
        }
        if dominos.len() * 2 != region.len() {
            return Err(Error::Integrity(format!(
                "{} dominos cannot cover {} squares",
                dominos.len(),
                region.len()
            )));
        }
        Ok(Tiling { region, dominos, owner })
    }

    /// Builds a tiling from `(first square, horizontal)` pairs.
    pub fn from_placements(region: Region, placements: impl IntoIterator<Item = (GridSquare, bool)>) -> Result<Self> {
        let c = region.coloring;
        let dominos = placements.into_iter().map(|(s, h)| DominoSpace::at(s, h, c)).collect();
        Tiling::new(region, dominos)
    }

    /// The all-horizontal brickwork tiling of the order-`n` diamond.
    pub fn all_horizontal(n: i64) -> Result<Self> {
        let region = aztec_diamond(n)?;
        let placements: Vec<_> = region
            .squares()
            .iter()
            .filter(|s| {
                let half = n as i32 - if s.j >= 0 { s.j } else { -s.j - 1 };
                (s.i + half).rem_euclid(2) == 0
            })
            .map(|s| (*s, true))
            .collect();
        Tiling::from_placements(region, placements)
    }

    /// The all-vertical tiling of the order-`n` diamond.
    pub fn all_vertical(n: i64) -> Result<Self> {
        let region = aztec_diamond(n)?;
        let placements: Vec<_> = region
            .squares()
            .iter()
            .filter(|s| {
                let half = n as i32 - if s.i >= 0 { s.i } else { -s.i - 1 };
                (s.j + half).rem_euclid(2) == 0
            })
            .map(|s| (*s, false))
            .collect();
        Tiling::from_placements(region, placements)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dominos(&self) -> &[DominoSpace] {
        &self.dominos
    }

    pub fn order(&self) -> Option<i64> {
        self.region.order_hint
    }

    /// Index into [`Tiling::dominos`] of the domino covering `s`.
    pub fn domino_index(&self, s: GridSquare) -> Option<usize> {
        let k = self.region.index(s)?;
        Some(self.owner[k] as usize)
    }

    pub fn domino_at(&self, s: GridSquare) -> Option<&DominoSpace> {
        self.domino_index(s).map(|k| &self.dominos[k])
    }

    pub fn contains_space(&self, space: &DominoSpace) -> bool {
        self.domino_at(space.first).is_some_and(|d| d == space)
    }

    pub fn count_class(&self, class: DominoClass) -> usize {
        self.dominos.iter().filter(|d| d.class == class).count()
    }

    pub fn horizontal_count(&self) -> usize {
        self.dominos.iter().filter(|d| d.horizontal).count()
    }

    /// Dominos sorted into a canonical order, for comparisons and hashing.
    pub fn canonical_dominos(&self) -> Vec<DominoSpace> {
        let mut d = self.dominos.clone();
        d.sort_by_key(|s| (s.first.j, s.first.i, !s.horizontal));
        d
    }

    /// Serializes in the tiling text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", crate::VERSION);
        match self.region.order_hint {
            Some(n) => out.push_str(&format!("aztec {n}\n")),
            None => out.push_str(&format!("region {}\n", self.dominos.len())),
        }
        for d in self.canonical_dominos() {
            let (x, y) = d.anchor_point();
            out.push_str(&format!("{x} {y} {}\n", d.class));
        }
        out
    }

    /// Parses the tiling text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let mut parts = header.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let count: i64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(hline, format!("bad header '{header}'")))?;
        let mut entries = Vec::new();
        for (k, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(k, format!("expected 'ell m K', got '{line}'")));
            }
            let x: i32 = f[0]
                .parse()
                .map_err(|_| parse_err(k, format!("bad integer '{}'", f[0])))?;
            let y: i32 = f[1]
                .parse()
                .map_err(|_| parse_err(k, format!("bad integer '{}'", f[1])))?;
            let class = DominoClass::from_letter(f[2]).ok_or_else(|| parse_err(k, format!("bad class '{}'", f[2])))?;
            entries.push((k, (x, y), class));
        }
        match kind {
            "aztec" => {
                let region = aztec_diamond(count).map_err(|e| parse_err(hline, e.to_string()))?;
                let c = region.coloring;
                let mut dominos = Vec::with_capacity(entries.len());
                for (k, p, class) in entries {
                    dominos.push(DominoSpace::from_anchor(p, class, c).map_err(|e| parse_err(k, e.to_string()))?);
                }
                Tiling::new(region, dominos)
            }
            "region" => {
                if entries.len() as i64 != count {
                    return Err(parse_err(
                        hline,
                        format!("header promises {count} dominos, found {}", entries.len()),
                    ));
                }
                let Some(&(_, (x, y), class)) = entries.first() else {
                    return Err(parse_err(hline, "region has no dominos".into()));
                };
                // the first domino fixes which checkerboard is meant
                let probe = if class.is_horizontal() {
                    GridSquare::new(x - 1, y)
                } else {
                    GridSquare::new(x, y)
                };
                let white_first = matches!(class, DominoClass::North | DominoClass::West);
                let parity = ((probe.i + probe.j).rem_euclid(2) as u8) ^ u8::from(!white_first);
                let c = Coloring::new(parity);
                let mut dominos = Vec::with_capacity(entries.len());
                for (k, p, class) in entries {
                    dominos.push(DominoSpace::from_anchor(p, class, c).map_err(|e| parse_err(k, e.to_string()))?);
                }
                let region = Region::new(dominos.iter().flat_map(|d| d.squares()), c)?;
                Tiling::new(region, dominos)
            }
            other => Err(parse_err(hline, format!("unknown header kind '{other}'"))),
        }
    }
}

/// Parses a region file.  Accepted headers: `aztec n`, `aztec-without-row n`,
/// `squares k` followed by `k` lines `i j` (lower-left corners, coloured so
/// the first square is white), or a whole tiling file, whose region is used.
pub fn region_from_text(text: &str) -> Result<Region> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let mut parts = header.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let count: i64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(hline, format!("bad header '{header}'")))?;
    let rest: Vec<(usize, &str)> = lines.collect();
    match kind {
        "aztec" if rest.is_empty() => aztec_diamond(count),
        "aztec" | "region" => Ok(Tiling::from_text(text)?.region().clone()),
        "aztec-without-row" => aztec_diamond_without_row(count),
        "squares" => {
            if rest.len() as i64 != count {
                return Err(parse_err(
                    hline,
                    format!("header promises {count} squares, found {}", rest.len()),
                ));
            }
            let mut squares = Vec::with_capacity(rest.len());
            for (k, line) in rest {
                let f: Vec<i32> = line
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| parse_err(k, format!("bad integer in '{line}'"))))
                    .collect::<Result<_>>()?;
                if f.len() != 2 {
                    return Err(parse_err(k, format!("expected 'i j', got '{line}'")));
                }
                squares.push(GridSquare::new(f[0], f[1]));
            }
            let parity = squares.first().map_or(0, |s| (s.i + s.j).rem_euclid(2) as u8);
            Region::new(squares, Coloring::new(parity))
        }
        other => Err(parse_err(hline, format!("unknown region kind '{other}'"))),
    }
}

/// Integer heights on the vertices of a region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightFunction {
    region: Region,
    heights: Vec<i32>,
    anchor: (Vertex, i32),
}

const UNSET: i32 = i32::MIN;

/// Default anchor: the middle of the west edge (height 0) for a diamond,
/// otherwise the lowest-leftmost vertex.
pub fn default_anchor(region: &Region) -> (Vertex, i32) {
    match region.order_hint {
        Some(n) => ((-(n as i32), 0), 0),
        None => (region.vertices()[0], 0),
    }
}

/// Height function of a tiling, with the given or default anchor.
pub fn height_from_tiling(t: &Tiling, anchor: Option<(Vertex, i32)>) -> Result<HeightFunction> {
    let region = &t.region;
    let anchor = anchor.unwrap_or_else(|| default_anchor(region));
    if !region.has_vertex(anchor.0) {
        return domain(format!("anchor {:?} is not a vertex of the region", anchor.0));
    }
    let slots = region.vertex_slots();
    let mut heights = vec![UNSET; slots];
    // adjacency: per vertex up to four (neighbor, increment) pairs
    let mut adj: Vec<Vec<(usize, i32)>> = vec![Vec::new(); slots];
    let edges = region.edges();
    for e in &edges {
        let bisected = e.interior && t.domino_index(e.squares[0]) == t.domino_index(e.squares[1]);
        let inc = if bisected { -3 } else { 1 };
        let (a, b) = (region.vertex_index(e.from).unwrap(), region.vertex_index(e.to).unwrap());
        adj[a].push((b, inc));
        adj[b].push((a, -inc));
    }
    let start = region.vertex_index(anchor.0).unwrap();
    heights[start] = anchor.1;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &(v, inc) in &adj[u] {
            let h = heights[u] + inc;
            if heights[v] == UNSET {
                heights[v] = h;
                queue.push_back(v);
            } else if heights[v] != h {
                return Err(Error::Integrity(format!(
                    "inconsistent heights at {:?}",
                    region.vertex_at(v)
                )));
            }
        }
    }
    Ok(HeightFunction {
        region: region.clone(),
        heights,
        anchor,
    })
}

/// Recovers the tiling whose dominos straddle exactly the edges where the
/// height jumps by 3.
pub fn tiling_from_height(h: &HeightFunction) -> Result<Tiling> {
    h.check_local()?;
    let region = &h.region;
    let mut placements = Vec::new();
    for e in region.edges() {
        if e.interior && h.get(e.to).unwrap() - h.get(e.from).unwrap() == -3 {
            let [a, b] = e.squares;
            let first = a.min(b);
            placements.push((first, a.j == b.j));
        }
    }
    Tiling::from_placements(region.clone(), placements)
}

impl HeightFunction {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn anchor(&self) -> (Vertex, i32) {
        self.anchor
    }

    pub fn get(&self, v: Vertex) -> Option<i32> {
        let k = self.region.vertex_index(v)?;
        let h = self.heights[k];
        (h != UNSET).then_some(h)
    }

    /// `(vertex, height)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Vertex, i32)> + '_ {
        self.heights
            .iter()
            .enumerate()
            .filter(|(_, h)| **h != UNSET)
            .map(|(k, h)| (self.region.vertex_at(k), *h))
    }

    /// Checks that every edge increment is legal: `+1` or `-3` along the
    /// orientation, and `+1` on the boundary.
    pub fn check_local(&self) -> Result<()> {
        for e in self.region.edges() {
            let (a, b) = match (self.get(e.from), self.get(e.to)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Integrity(format!(
                        "missing height on edge {:?}-{:?}",
                        e.from, e.to
                    )))
                }
            };
            let d = b - a;
            let ok = if e.interior { d == 1 || d == -3 } else { d == 1 };
            if !ok {
                return Err(Error::Integrity(format!(
                    "increment {d} along {:?}->{:?} is not allowed",
                    e.from, e.to
                )));
            }
        }
        Ok(())
    }

    /// First pair `(u, v)` with `|h(u) - h(v)| > 2d + 1`, `d` the sup
    /// distance, scanning every `stride`-th vertex as `u` against all `v`.
    pub fn lipschitz_violation(&self, stride: usize) -> Option<(Vertex, Vertex)> {
        let pts: Vec<(Vertex, i32)> = self.iter().collect();
        for &(u, hu) in pts.iter().step_by(stride.max(1)) {
            for &(v, hv) in &pts {
                let d = (u.0 - v.0).abs().max((u.1 - v.1).abs());
                if (hu - hv).abs() > 2 * d + 1 {
                    return Some((u, v));
                }
            }
        }
        None
    }

    /// Whether both functions agree modulo 4 at every common vertex.
    pub fn agrees_mod4(&self, other: &HeightFunction) -> bool {
        self.iter()
            .all(|(v, h)| other.get(v).is_none_or(|g| (h - g).rem_euclid(4) == 0))
    }

    /// `h <= other` at every vertex.
    pub fn le(&self, other: &HeightFunction) -> bool {
        self.iter().all(|(v, h)| other.get(v).is_some_and(|g| h <= g))
    }

    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "vx,vy,h")?;
        for ((x, y), h) in self.iter() {
            writeln!(w, "{x},{y},{h}")?;
        }
        Ok(())
    }
}

/// Heights prescribed on a vertex subset that contains the whole boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialHeightFunction {
    region: Region,
    values: HashMap<Vertex, i32>,
}

impl PartialHeightFunction {
    pub fn new(region: Region, values: HashMap<Vertex, i32>) -> Result<Self> {
        for v in region.boundary_vertices() {
            if !values.contains_key(&v) {
                return domain(format!("boundary vertex {v:?} has no prescribed height"));
            }
        }
        for v in values.keys() {
            if !region.has_vertex(*v) {
                return domain(format!("{v:?} is not a vertex of the region"));
            }
        }
        Ok(PartialHeightFunction { region, values })
    }

    /// Restriction of a complete height function to the boundary.
    pub fn boundary_of(h: &HeightFunction) -> Self {
        let values = h
            .region
            .boundary_vertices()
            .into_iter()
            .map(|v| (v, h.get(v).unwrap()))
            .collect();
        PartialHeightFunction {
            region: h.region.clone(),
            values,
        }
    }

    /// Boundary heights forced by the region alone: they step by `+1` along
    /// each boundary edge orientation.
    pub fn boundary(region: &Region, anchor: Option<(Vertex, i32)>) -> Result<Self> {
        let anchor = anchor.unwrap_or_else(|| default_anchor(region));
        let mut adj: HashMap<Vertex, Vec<(Vertex, i32)>> = HashMap::new();
        for e in region.edges().into_iter().filter(|e| !e.interior) {
            adj.entry(e.from).or_default().push((e.to, 1));
            adj.entry(e.to).or_default().push((e.from, -1));
        }
        if !adj.contains_key(&anchor.0) {
            return domain(format!("anchor {:?} is not on the boundary", anchor.0));
        }
        let mut values = HashMap::from([anchor]);
        let mut queue = VecDeque::from([anchor.0]);
        while let Some(u) = queue.pop_front() {
            let hu = values[&u];
            for &(v, inc) in &adj[&u] {
                match values.get(&v) {
                    None => {
                        values.insert(v, hu + inc);
                        queue.push_back(v);
                    }
                    Some(&hv) if hv != hu + inc => {
                        return Err(Error::Infeasible { cycle: vec![u, v] });
                    }
                    _ => {}
                }
            }
        }
        PartialHeightFunction::new(region.clone(), values)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn get(&self, v: Vertex) -> Option<i32> {
        self.values.get(&v).copied()
    }

    pub fn set(&mut self, v: Vertex, h: i32) -> Result<()> {
        if !self.region.has_vertex(v) {
            return domain(format!("{v:?} is not a vertex of the region"));
        }
        self.values.insert(v, h);
        Ok(())
    }
}

/// Largest height function extending `f`.
pub fn max_extension(f: &PartialHeightFunction) -> Result<HeightFunction> {
    extension(f, false)
}

/// Smallest height function extending `f`.
pub fn min_extension(f: &PartialHeightFunction) -> Result<HeightFunction> {
    extension(f, true)
}

// Difference constraints: along an oriented edge u->v, h(v) <= h(u) + 1 and
// h(u) <= h(v) + 3 (or h(v) - 1 on the boundary).  The largest solution is a
// shortest-path distance from the prescribed vertices; the smallest one is
// the same computation on the reversed graph with negated data.
fn extension(f: &PartialHeightFunction, lowest: bool) -> Result<HeightFunction> {
    let region = &f.region;
    let slots = region.vertex_slots();
    let source = slots;
    let mut arcs: Vec<Vec<(usize, i64)>> = vec![Vec::new(); slots + 1];
    let mut push = |a: usize, b: usize, w: i64| {
        if lowest {
            arcs[b].push((a, w));
        } else {
            arcs[a].push((b, w));
        }
    };
    for e in region.edges() {
        let (u, v) = (region.vertex_index(e.from).unwrap(), region.vertex_index(e.to).unwrap());
        push(u, v, 1);
        push(v, u, if e.interior { 3 } else { -1 });
    }
    let sign = if lowest { -1 } else { 1 };
    for (&v, &h) in &f.values {
        let k = region.vertex_index(v).unwrap();
        let h = sign * h as i64;
        // the source arcs are their own reverses, so they bypass `push`
        arcs[source].push((k, h));
        arcs[k].push((source, -h));
    }
    let dist = shortest_paths(&arcs, source, region)?;
    let heights = (0..slots)
        .map(|k| {
            if region.has_vertex(region.vertex_at(k)) {
                (sign * dist[k]) as i32
            } else {
                UNSET
            }
        })
        .collect();
    let anchor = f
        .values
        .iter()
        .min_by_key(|(v, _)| (v.1, v.0))
        .map(|(v, h)| (*v, *h))
        .unwrap();
    let h = HeightFunction {
        region: region.clone(),
        heights,
        anchor,
    };
    h.check_local()?;
    Ok(h)
}

// Queue-based Bellman-Ford; a vertex relaxed more than |V| times lies on or
// behind a negative cycle, which is then recovered through the predecessors.
fn shortest_paths(arcs: &[Vec<(usize, i64)>], source: usize, region: &Region) -> Result<Vec<i64>> {
    let n = arcs.len();
    let mut dist = vec![i64::MAX; n];
    let mut pred = vec![usize::MAX; n];
    let mut count = vec![0usize; n];
    let mut in_queue = vec![false; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    in_queue[source] = true;
    while let Some(u) = queue.pop_front() {
        in_queue[u] = false;
        for &(v, w) in &arcs[u] {
            let nd = dist[u] + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                count[v] += 1;
                if count[v] > n {
                    return Err(Error::Infeasible {
                        cycle: negative_cycle(&pred, v, source, region),
                    });
                }
                if !in_queue[v] {
                    in_queue[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(dist)
}

fn negative_cycle(pred: &[usize], start: usize, source: usize, region: &Region) -> Vec<Vertex> {
    let mut v = start;
    for _ in 0..pred.len() {
        v = pred[v];
    }
    let mut cycle = Vec::new();
    let mut u = v;
    loop {
        if u != source {
            cycle.push(region.vertex_at(u));
        }
        u = pred[u];
        if u == v || cycle.len() > pred.len() {
            break;
        }
    }
    cycle.reverse();
    cycle
}

/// Polar region or temperate zone of a domino.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolarLabel {
    Polar(DominoClass),
    Temperate,
}

/// One label per domino, indexed like [`Tiling::dominos`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarClassification {
    pub labels: Vec<PolarLabel>,
}

impl PolarClassification {
    pub fn temperate_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == PolarLabel::Temperate).count()
    }
}

/// A domino of class K is K-polar iff a chain of edge-adjacent K dominos
/// joins it to one touching the boundary.
pub fn polar_classify(t: &Tiling) -> PolarClassification {
    let mut labels = vec![PolarLabel::Temperate; t.dominos.len()];
    let mut queue = VecDeque::new();
    for (k, d) in t.dominos.iter().enumerate() {
        if d.perimeter_neighbors().iter().any(|s| !t.region.contains(*s)) {
            labels[k] = PolarLabel::Polar(d.class);
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let d = t.dominos[k];
        for s in d.perimeter_neighbors() {
            if let Some(j) = t.domino_index(s) {
                if labels[j] == PolarLabel::Temperate && t.dominos[j].class == d.class {
                    labels[j] = PolarLabel::Polar(d.class);
                    queue.push_back(j);
                }
            }
        }
    }
    PolarClassification { labels }
}

/// The same classification read off heights: a horizontal domino is polar
/// iff its corner heights equal those of the all-horizontal tiling, and a
/// vertical one iff they equal those of the all-vertical tiling.
pub fn polar_classify_by_heights(t: &Tiling) -> Result<PolarClassification> {
    let n = t
        .order()
        .ok_or_else(|| Error::Domain("height-based polar classification needs an Aztec diamond".into()))?;
    let h = height_from_tiling(t, None)?;
    let low = height_from_tiling(&Tiling::all_horizontal(n)?, None)?;
    let high = height_from_tiling(&Tiling::all_vertical(n)?, None)?;
    let labels = t
        .dominos
        .iter()
        .map(|d| {
            let reference = if d.horizontal { &low } else { &high };
            if d.vertices().iter().all(|v| h.get(*v) == reference.get(*v)) {
                PolarLabel::Polar(d.class)
            } else {
                PolarLabel::Temperate
            }
        })
        .collect();
    Ok(PolarClassification { labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_tilings;

    #[test]
    fn diamond_sizes() {
        assert_eq!(aztec_diamond(1).unwrap().len(), 4);
        assert_eq!(aztec_diamond(2).unwrap().len(), 12);
        assert_eq!(aztec_diamond(64).unwrap().len(), 8320);
        assert!(aztec_diamond(0).is_err());
        for n in 1..8 {
            let d = aztec_diamond(n).unwrap();
            for s in d.squares() {
                let (cx, cy) = s.center();
                assert!(cx.abs() + cy.abs() <= n as f64);
            }
            assert_eq!(d.color_counts().0, d.color_counts().1);
        }
    }

    #[test]
    fn coloring_examples() {
        assert_eq!(
            square_color(GridSquare::from_center(-0.5, 0.5).unwrap(), 1),
            Color::White
        );
        assert_eq!(
            square_color(GridSquare::from_center(-0.5, 1.5).unwrap(), 2),
            Color::White
        );
        for n in 1..=6 {
            let d = aztec_diamond(n).unwrap();
            for j in 0..n as i32 {
                let leftmost = d.squares().iter().filter(|s| s.j == j).min_by_key(|s| s.i).unwrap();
                assert_eq!(d.color(*leftmost), Color::White, "n={n} row {j}");
            }
            for s in d.squares() {
                for t in neighbors4(*s) {
                    assert_ne!(d.color(*s), d.color(t));
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let n = 1;
        let c = |a, b| classify_space(a, b, n).unwrap();
        assert_eq!(c(GridSquare::new(-1, 0), GridSquare::new(0, 0)), DominoClass::North);
        assert_eq!(c(GridSquare::new(-1, -1), GridSquare::new(-1, 0)), DominoClass::West);
        assert_eq!(c(GridSquare::new(0, -1), GridSquare::new(0, 0)), DominoClass::East);
        assert_eq!(c(GridSquare::new(-1, -1), GridSquare::new(0, -1)), DominoClass::South);
        assert!(classify_space(GridSquare::new(0, 0), GridSquare::new(1, 1), 1).is_err());
    }

    #[test]
    fn rotation_cycles_classes() {
        for n in 1..=3 {
            let d = aztec_diamond(n).unwrap();
            for s in d.spaces() {
                let r = s.rotate_cw(d.coloring());
                assert_eq!(r.class, s.class.rotate_cw());
                assert!(d.contains(r.first) && d.contains(r.second()));
            }
        }
    }

    #[test]
    fn space_locations() {
        let d = aztec_diamond(1).unwrap();
        let north: Vec<_> = d
            .spaces()
            .into_iter()
            .filter(|s| s.class == DominoClass::North)
            .collect();
        assert_eq!(north.len(), 1);
        assert_eq!(space_location(&north[0], 1).unwrap(), LatticeLocation::new(0, 0, 1));
        let d = aztec_diamond(2).unwrap();
        let mut locs: Vec<_> = d
            .spaces()
            .into_iter()
            .filter(|s| s.class == DominoClass::North)
            .map(|s| {
                let l = space_location(&s, 2).unwrap();
                (l.ell, l.m)
            })
            .collect();
        locs.sort();
        assert_eq!(locs, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        for n in 1..=6 {
            for s in aztec_diamond(n).unwrap().spaces() {
                if s.class == DominoClass::North {
                    let l = space_location(&s, n).unwrap();
                    assert!(l.is_occupiable(), "{l}");
                } else {
                    assert!(space_location(&s, n).is_err());
                    let (_, l) = north_equivalent(&s, n);
                    assert!(l.is_occupiable(), "{s:?} -> {l}");
                }
            }
        }
    }

    #[test]
    fn extremal_tilings_are_valid() {
        for n in 1..=6 {
            let h = Tiling::all_horizontal(n).unwrap();
            assert_eq!(h.horizontal_count() as i64, n * (n + 1));
            let v = Tiling::all_vertical(n).unwrap();
            assert_eq!(v.horizontal_count(), 0);
        }
    }

    #[test]
    fn text_round_trip() {
        for t in enumerate_tilings(&aztec_diamond(2).unwrap()).unwrap() {
            let back = Tiling::from_text(&t.to_text()).unwrap();
            assert_eq!(back.canonical_dominos(), t.canonical_dominos());
        }
        let r = aztec_diamond_without_row(3).unwrap();
        let t = enumerate_tilings(&r).unwrap().next().unwrap();
        let back = Tiling::from_text(&t.to_text()).unwrap();
        assert_eq!(back.canonical_dominos(), t.canonical_dominos());
        assert!(matches!(
            Tiling::from_text("aztec 1\n0 0 Q\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(Tiling::from_text("aztec 1\n0 0 N\n").is_err());
    }

    #[test]
    fn rejects_holes_and_gaps() {
        let c = Coloring::new(0);
        let ring: Vec<_> = (0..3)
            .flat_map(|i| (0..3).map(move |j| GridSquare::new(i, j)))
            .filter(|s| *s != GridSquare::new(1, 1))
            .collect();
        assert!(Region::new(ring, c).is_err());
        assert!(Region::new([GridSquare::new(0, 0), GridSquare::new(2, 0)], c).is_err());
    }

    #[test]
    fn heights_anchor_and_boundary() {
        for n in 1..=4 {
            let tilings: Vec<_> = enumerate_tilings(&aztec_diamond(n).unwrap()).unwrap().collect();
            let reference = PartialHeightFunction::boundary(tilings[0].region(), None).unwrap();
            for t in &tilings {
                let h = height_from_tiling(t, None).unwrap();
                let n32 = n as i32;
                assert_eq!(h.get((-n32, 0)), Some(0));
                assert_eq!(h.get((0, n32)), Some(2 * n32));
                for v in t.region().boundary_vertices() {
                    assert_eq!(h.get(v), reference.get(v));
                }
                h.check_local().unwrap();
            }
        }
    }

    #[test]
    fn height_round_trips() {
        let mut total = 0;
        for n in 1..=3 {
            for t in enumerate_tilings(&aztec_diamond(n).unwrap()).unwrap() {
                let h = height_from_tiling(&t, None).unwrap();
                let back = tiling_from_height(&h).unwrap();
                assert_eq!(back.canonical_dominos(), t.canonical_dominos());
                total += 1;
            }
        }
        assert_eq!(total, 74);
    }

    #[test]
    fn small_region_round_trips() {
        let c = Coloring::new(0);
        let shapes: Vec<Vec<GridSquare>> = vec![
            (0..2)
                .flat_map(|i| (0..2).map(move |j| GridSquare::new(i, j)))
                .collect(),
            (0..3)
                .flat_map(|i| (0..2).map(move |j| GridSquare::new(i, j)))
                .collect(),
            (0..4)
                .flat_map(|i| (0..3).map(move |j| GridSquare::new(i, j)))
                .collect(),
        ];
        for sq in shapes {
            let r = Region::new(sq, c).unwrap();
            for t in enumerate_tilings(&r).unwrap() {
                let h = height_from_tiling(&t, None).unwrap();
                assert_eq!(
                    tiling_from_height(&h).unwrap().canonical_dominos(),
                    t.canonical_dominos()
                );
            }
        }
    }

    #[test]
    fn invariants_across_tilings() {
        for n in 1..=4 {
            let tilings: Vec<_> = enumerate_tilings(&aztec_diamond(n).unwrap()).unwrap().collect();
            let hs: Vec<_> = tilings.iter().map(|t| height_from_tiling(t, None).unwrap()).collect();
            for h in &hs {
                assert!(h.agrees_mod4(&hs[0]));
                assert_eq!(h.lipschitz_violation(1), None);
            }
        }
    }

    #[test]
    fn extensions_are_extremal_tilings() {
        for n in 1..=6 {
            let region = aztec_diamond(n).unwrap();
            let f = PartialHeightFunction::boundary(&region, None).unwrap();
            let lo = min_extension(&f).unwrap();
            let hi = max_extension(&f).unwrap();
            let horizontal = Tiling::all_horizontal(n).unwrap();
            let vertical = Tiling::all_vertical(n).unwrap();
            assert_eq!(
                tiling_from_height(&lo).unwrap().canonical_dominos(),
                horizontal.canonical_dominos()
            );
            assert_eq!(
                tiling_from_height(&hi).unwrap().canonical_dominos(),
                vertical.canonical_dominos()
            );
            if n <= 3 {
                for t in enumerate_tilings(&region).unwrap() {
                    let h = height_from_tiling(&t, None).unwrap();
                    assert!(lo.le(&h) && h.le(&hi));
                }
            }
        }
    }

    #[test]
    fn removed_row_has_unique_extension() {
        for n in 2..=5 {
            let r = aztec_diamond_without_row(n).unwrap();
            let f = PartialHeightFunction::boundary(&r, Some((r.boundary_vertices()[0], 0))).unwrap();
            let lo = min_extension(&f).unwrap();
            let hi = max_extension(&f).unwrap();
            assert_eq!(lo, hi);
            let t = tiling_from_height(&lo).unwrap();
            assert_eq!(t.horizontal_count(), t.dominos().len());
            assert_eq!(crate::oracle::enumerate_tilings_with_cap(&r, 128).unwrap().count(), 1);
        }
    }

    #[test]
    fn infeasible_data_names_a_cycle() {
        let region = aztec_diamond(2).unwrap();
        let mut f = PartialHeightFunction::boundary(&region, None).unwrap();
        f.set((0, 0), 40).unwrap();
        match max_extension(&f) {
            Err(Error::Infeasible { cycle }) => assert!(!cycle.is_empty()),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn polar_examples() {
        for n in 1..=4 {
            let t = Tiling::all_horizontal(n).unwrap();
            let p = polar_classify(&t);
            assert_eq!(p.temperate_count(), 0);
            for (d, l) in t.dominos().iter().zip(&p.labels) {
                let expect = if d.first.j >= 0 {
                    DominoClass::North
                } else {
                    DominoClass::South
                };
                assert_eq!(*l, PolarLabel::Polar(expect));
            }
            assert_eq!(polar_classify(&Tiling::all_vertical(n).unwrap()).temperate_count(), 0);
        }
    }

    #[test]
    fn polar_definitions_agree() {
        for n in 1..=4 {
            for t in enumerate_tilings(&aztec_diamond(n).unwrap()).unwrap() {
                assert_eq!(
                    polar_classify(&t),
                    polar_classify_by_heights(&t).unwrap(),
                    "{}",
                    t.to_text()
                );
            }
        }
    }

    #[test]
    fn region_files() {
        assert_eq!(region_from_text("aztec 3\n").unwrap().len(), 24);
        let r = region_from_text("# 2x2\nsquares 4\n0 0\n1 0\n0 1\n1 1\n").unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.color(GridSquare::new(0, 0)), Color::White);
        let t = Tiling::all_vertical(2).unwrap();
        assert_eq!(region_from_text(&t.to_text()).unwrap().len(), 12);
        assert!(matches!(
            region_from_text("squares 2\n0 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(region_from_text("blob 2").is_err());
    }
}
