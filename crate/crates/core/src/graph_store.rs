//! In-fabric graph storage.
//!
//! Each vertex is a chain of objects: a root object, which is the address
//! the rest of the program uses for the vertex, followed by ghost objects
//! that hold edges once the root's chunk is full. Objects are bump-allocated
//! from the owning cell's memory and never freed.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::SimError;
use crate::scalar::LevelWord;
use crate::topology::{ChipTopology, Coord, Direction};
use crate::VertexId;

pub const DEFAULT_CHUNK_CAP: usize = 8;
/// vertex id, level, next pointer and edge count.
pub const OBJECT_HEADER_BYTES: u64 = 16;
/// Packed target address plus weight.
pub const EDGE_ENTRY_BYTES: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ObjectAddress {
    pub cc: Coord,
    pub slot: u32,
}

impl fmt::Display for ObjectAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.cc, self.slot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Root object of the destination vertex.
    pub target: ObjectAddress,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexObject<L> {
    /// Owning vertex. Ghosts carry their root's id.
    pub vertex_id: VertexId,
    /// Meaningful on roots only.
    pub level: L,
    pub edges: Vec<Edge>,
    pub next: Option<ObjectAddress>,
    pub is_root: bool,
    /// Last object of the chain; kept on roots so appends skip the walk.
    tail: Option<ObjectAddress>,
}

impl<L: LevelWord> VertexObject<L> {
    fn new(vertex_id: VertexId, is_root: bool, chunk_cap: usize) -> Self {
        Self {
            vertex_id,
            level: L::unreached(),
            edges: Vec::with_capacity(chunk_cap.min(16)),
            next: None,
            is_root,
            tail: None,
        }
    }
}

/// Where ghost objects go when a chain grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhostPlacement {
    /// The root's cell first; on out-of-memory, round-robin over its mesh neighbors.
    #[default]
    LocalThenNeighbors,
    /// Always the root's cell. Chains are then walked by one cell only.
    AlwaysLocal,
}

#[derive(Debug, Clone)]
pub struct CellMemory<L> {
    objects: Vec<VertexObject<L>>,
    used_bytes: u64,
    directory: BTreeMap<VertexId, u32>,
    next_neighbor: usize,
}

impl<L> CellMemory<L> {
    pub fn used_bytes(&self) -> u64 {
        self.used_bytes
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn roots(&self) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.directory.iter().map(|(&v, &s)| (v, s))
    }
}

/// Cell that owns the root object of `vertex_id`: row-major decode of
/// `vertex_id mod (width × height)`.
pub fn place_vertex(vertex_id: VertexId, topo: &ChipTopology) -> Coord {
    topo.coord(vertex_id as usize % topo.cell_count())
}

#[derive(Debug, Clone)]
pub struct GraphStore<L> {
    topo: ChipTopology,
    chunk_cap: usize,
    bytes_per_cell: u64,
    placement: GhostPlacement,
    cells: Vec<CellMemory<L>>,
}

impl<L: LevelWord> GraphStore<L> {
    pub fn new(
        topo: ChipTopology,
        chunk_cap: usize,
        bytes_per_cell: u64,
        placement: GhostPlacement,
    ) -> Result<Self, SimError> {
        if chunk_cap == 0 {
            return Err(SimError::Config("chunk capacity must be at least 1".into()));
        }
        let store = Self {
            topo,
            chunk_cap,
            bytes_per_cell,
            placement,
            cells: (0..topo.cell_count())
                .map(|_| CellMemory {
                    objects: Vec::new(),
                    used_bytes: 0,
                    directory: BTreeMap::new(),
                    next_neighbor: 0,
                })
                .collect(),
        };
        if store.object_bytes() > bytes_per_cell {
            return Err(SimError::Config(format!(
                "a {}-byte vertex object does not fit in {} bytes of cell memory",
                store.object_bytes(),
                bytes_per_cell
            )));
        }
        Ok(store)
    }

    pub fn topology(&self) -> &ChipTopology {
        &self.topo
    }

    pub fn chunk_cap(&self) -> usize {
        self.chunk_cap
    }

    pub fn object_bytes(&self) -> u64 {
        OBJECT_HEADER_BYTES + self.chunk_cap as u64 * EDGE_ENTRY_BYTES
    }

    pub fn cell(&self, cc: Coord) -> &CellMemory<L> {
        &self.cells[self.topo.index(cc)]
    }

    pub fn place_vertex(&self, vertex_id: VertexId) -> Coord {
        place_vertex(vertex_id, &self.topo)
    }

    fn allocate(&mut self, cc: Coord, obj: VertexObject<L>) -> Result<ObjectAddress, SimError> {
        let size = self.object_bytes();
        let capacity = self.bytes_per_cell;
        let cell = &mut self.cells[self.topo.index(cc)];
        if cell.used_bytes + size > capacity {
            return Err(SimError::OutOfMemory {
                cell: cc,
                used: cell.used_bytes,
                capacity,
                requested: size,
            });
        }
        cell.used_bytes += size;
        let slot = cell.objects.len() as u32;
        cell.objects.push(obj);
        Ok(ObjectAddress { cc, slot })
    }

    pub fn create_root(
        &mut self,
        cc: Coord,
        vertex_id: VertexId,
    ) -> Result<ObjectAddress, SimError> {
        if !self.topo.contains(cc) {
            return Err(SimError::OutsideGrid(cc));
        }
        if self.cell(cc).directory.contains_key(&vertex_id) {
            return Err(SimError::DuplicateVertex(vertex_id));
        }
        let addr = self.allocate(cc, VertexObject::new(vertex_id, true, self.chunk_cap))?;
        let idx = self.topo.index(cc);
        self.cells[idx].directory.insert(vertex_id, addr.slot);
        Ok(addr)
    }

    pub fn lookup(&self, vertex_id: VertexId) -> Option<ObjectAddress> {
        let cc = self.place_vertex(vertex_id);
        self.cell(cc)
            .directory
            .get(&vertex_id)
            .map(|&slot| ObjectAddress { cc, slot })
    }

    /// Root address of `vertex_id`, creating the root on its placed cell
    /// when `auto_create` is set.
    pub fn resolve(
        &mut self,
        vertex_id: VertexId,
        auto_create: bool,
    ) -> Result<ObjectAddress, SimError> {
        match self.lookup(vertex_id) {
            Some(addr) => Ok(addr),
            None if auto_create => self.create_root(self.place_vertex(vertex_id), vertex_id),
            None => Err(SimError::UnknownVertex(vertex_id)),
        }
    }

    pub fn object(&self, addr: ObjectAddress) -> Result<&VertexObject<L>, SimError> {
        if !self.topo.contains(addr.cc) {
            return Err(SimError::BadAddress(addr));
        }
        self.cell(addr.cc)
            .objects
            .get(addr.slot as usize)
            .ok_or(SimError::BadAddress(addr))
    }

    pub fn object_mut(&mut self, addr: ObjectAddress) -> Result<&mut VertexObject<L>, SimError> {
        if !self.topo.contains(addr.cc) {
            return Err(SimError::BadAddress(addr));
        }
        let idx = self.topo.index(addr.cc);
        self.cells[idx]
            .objects
            .get_mut(addr.slot as usize)
            .ok_or(SimError::BadAddress(addr))
    }

    fn root(&self, addr: ObjectAddress) -> Result<&VertexObject<L>, SimError> {
        let obj = self.object(addr)?;
        if !obj.is_root {
            return Err(SimError::NotRoot(addr));
        }
        Ok(obj)
    }

    /// Candidate cells for a new ghost of a chain rooted on `home`.
    fn ghost_candidates(&mut self, home: Coord) -> Vec<Coord> {
        let mut out = vec![home];
        if self.placement == GhostPlacement::AlwaysLocal {
            return out;
        }
        let neighbors: Vec<Coord> = Direction::ALL
            .iter()
            .filter_map(|&d| self.topo.neighbor(home, d))
            .collect();
        if neighbors.is_empty() {
            return out;
        }
        let idx = self.topo.index(home);
        let start = self.cells[idx].next_neighbor % neighbors.len();
        self.cells[idx].next_neighbor = start + 1;
        out.extend((0..neighbors.len()).map(|i| neighbors[(start + i) % neighbors.len()]));
        out
    }

    /// Append an edge to the vertex rooted at `root_addr`: into the first
    /// object of the chain with room, else into a freshly linked ghost.
    /// Returns the address of the object that took the edge.
    pub fn insert_edge_local(
        &mut self,
        root_addr: ObjectAddress,
        dst_root_addr: ObjectAddress,
        weight: u32,
    ) -> Result<ObjectAddress, SimError> {
        let root = self.root(root_addr)?;
        let vertex_id = root.vertex_id;
        // Every object before the tail is full, so the tail is the first with room.
        let tail_addr = root.tail.unwrap_or(root_addr);
        let edge = Edge {
            target: dst_root_addr,
            weight,
        };
        let cap = self.chunk_cap;
        let tail = self.object_mut(tail_addr)?;
        if tail.edges.len() < cap {
            tail.edges.push(edge);
            return Ok(tail_addr);
        }

        let mut last_err = None;
        let mut ghost_addr = None;
        for cc in self.ghost_candidates(root_addr.cc) {
            let mut ghost = VertexObject::new(vertex_id, false, cap);
            ghost.edges.push(edge);
            match self.allocate(cc, ghost) {
                Ok(a) => {
                    ghost_addr = Some(a);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        let ghost_addr = match ghost_addr {
            Some(a) => a,
            None => {
                return Err(match last_err {
                    Some(SimError::OutOfMemory {
                        used,
                        capacity,
                        requested,
                        ..
                    }) => SimError::OutOfMemory {
                        cell: root_addr.cc,
                        used,
                        capacity,
                        requested,
                    },
                    Some(e) => e,
                    None => unreachable!("at least the home cell is tried"),
                })
            }
        };
        self.object_mut(tail_addr)?.next = Some(ghost_addr);
        self.object_mut(root_addr)?.tail = Some(ghost_addr);
        Ok(ghost_addr)
    }

    /// Addresses of the chain starting at `root_addr`, root first.
    pub fn chain(&self, root_addr: ObjectAddress) -> Result<Vec<ObjectAddress>, SimError> {
        let mut out = vec![root_addr];
        let mut cur = self.object(root_addr)?.next;
        while let Some(a) = cur {
            out.push(a);
            cur = self.object(a)?.next;
        }
        Ok(out)
    }

    pub fn edge_count(&self, root_addr: ObjectAddress) -> Result<usize, SimError> {
        self.chain(root_addr)?
            .into_iter()
            .map(|a| self.object(a).map(|o| o.edges.len()))
            .sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.cells.iter().map(|c| c.directory.len()).sum()
    }

    pub fn level(&self, vertex_id: VertexId) -> Option<L> {
        self.lookup(vertex_id)
            .and_then(|a| self.object(a).ok())
            .map(|o| o.level)
    }

    /// Level of every root, ordered by vertex id.
    pub fn levels(&self) -> BTreeMap<VertexId, L> {
        let mut out = BTreeMap::new();
        for cell in &self.cells {
            for (&v, &slot) in &cell.directory {
                out.insert(v, cell.objects[slot as usize].level);
            }
        }
        out
    }

    pub fn reset_levels(&mut self) {
        for cell in &mut self.cells {
            for obj in &mut cell.objects {
                obj.level = L::unreached();
            }
        }
    }
}
