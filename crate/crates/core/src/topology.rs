//! Mesh coordinates, link directions and dimension-ordered routing.

use std::fmt;

use serde::Serialize;

use crate::error::SimError;

/// Cell coordinate. `x` grows east, `y` grows south; row 0 is the north edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Link direction. The discriminant doubles as the input-port index used
/// for arbitration; the local staging buffer comes after all four links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChipTopology {
    pub width: u32,
    pub height: u32,
    pub link_fifo_depth: usize,
}

impl ChipTopology {
    pub fn new(width: u32, height: u32, link_fifo_depth: usize) -> Result<Self, SimError> {
        if width == 0 || height == 0 {
            return Err(SimError::Config(format!(
                "grid {width}x{height} must be at least 1x1"
            )));
        }
        if width > u32::from(u16::MAX) || height > u32::from(u16::MAX) {
            return Err(SimError::Config(format!(
                "grid {width}x{height} exceeds the 16-bit coordinate field"
            )));
        }
        if link_fifo_depth == 0 {
            return Err(SimError::Config(
                "link FIFO depth must be at least 1".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            link_fifo_depth,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Row-major index.
    pub fn index(&self, c: Coord) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn coord(&self, index: usize) -> Coord {
        let w = self.width as usize;
        Coord::new((index % w) as u32, (index / w) as u32)
    }

    /// Neighbor across `dir`, or `None` at the border.
    pub fn neighbor(&self, c: Coord, dir: Direction) -> Option<Coord> {
        let n = match dir {
            Direction::North => Coord::new(c.x, c.y.checked_sub(1)?),
            Direction::South => Coord::new(c.x, c.y + 1),
            Direction::East => Coord::new(c.x + 1, c.y),
            Direction::West => Coord::new(c.x.checked_sub(1)?, c.y),
        };
        self.contains(n).then_some(n)
    }

    pub fn links(&self, c: Coord) -> impl Iterator<Item = Direction> + '_ {
        Direction::ALL
            .into_iter()
            .filter(move |&d| self.neighbor(c, d).is_some())
    }

    /// Largest hop distance between two cells.
    pub fn diameter(&self) -> u32 {
        (self.width - 1) + (self.height - 1)
    }
}

/// X-then-Y dimension-ordered routing. Fails with
/// [`SimError::AlreadyDelivered`] when `current == dst`.
pub fn route_next_hop(current: Coord, dst: Coord) -> Result<Direction, SimError> {
    use std::cmp::Ordering::*;
    match (current.x.cmp(&dst.x), current.y.cmp(&dst.y)) {
        (Less, _) => Ok(Direction::East),
        (Greater, _) => Ok(Direction::West),
        (Equal, Less) => Ok(Direction::South),
        (Equal, Greater) => Ok(Direction::North),
        (Equal, Equal) => Err(SimError::AlreadyDelivered(current)),
    }
}
