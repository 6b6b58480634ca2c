//! Operons: the routed unit that carries one action invocation across the
//! mesh. Each operon is a single 256-bit flit.

use crate::error::SimError;
use crate::graph_store::ObjectAddress;
use crate::scalar::LevelWord;
use crate::topology::Coord;
use crate::VertexId;

pub const FLIT_BITS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Opcode {
    /// Propose a BFS level to a vertex. Sent to a ghost object it means
    /// "diffuse your chunk for this already-accepted level".
    Bfs = 1,
    /// Germinated by an edge insertion: push the source level along the new edge only.
    BfsNewEdge = 2,
    InsertEdge = 3,
    /// Level-0 proposal at the BFS root.
    Seed = 4,
}

impl Opcode {
    fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            1 => Opcode::Bfs,
            2 => Opcode::BfsNewEdge,
            3 => Opcode::InsertEdge,
            4 => Opcode::Seed,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand<L> {
    Level(L),
    Insert {
        dst_vertex: VertexId,
        weight: u32,
    },
    /// Root address of the newly inserted edge's destination.
    NewEdge {
        target: ObjectAddress,
        weight: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Operon<L> {
    pub dst_object: ObjectAddress,
    pub opcode: Opcode,
    pub operand: Operand<L>,
}

impl<L: LevelWord> Operon<L> {
    pub fn bfs(dst_object: ObjectAddress, proposed: L) -> Self {
        Self {
            dst_object,
            opcode: Opcode::Bfs,
            operand: Operand::Level(proposed),
        }
    }

    pub fn seed(root: ObjectAddress) -> Self {
        Self {
            dst_object: root,
            opcode: Opcode::Seed,
            operand: Operand::Level(L::zero()),
        }
    }

    pub fn insert_edge(src_root: ObjectAddress, dst_vertex: VertexId, weight: u32) -> Self {
        Self {
            dst_object: src_root,
            opcode: Opcode::InsertEdge,
            operand: Operand::Insert { dst_vertex, weight },
        }
    }

    pub fn dst_cc(&self) -> Coord {
        self.dst_object.cc
    }

    /// Pack into one flit.
    ///
    /// word 0: opcode(8) | operand tag(8) | x(16) | y(16) | unused(16)
    /// word 1: object slot(32) | unused(32)
    /// words 2-3: operand payload
    pub fn encode(&self) -> Flit {
        let (tag, a, b) = match self.operand {
            Operand::Level(l) => (1u64, l.to_u64().expect("level fits in 64 bits"), 0),
            Operand::Insert { dst_vertex, weight } => (2, u64::from(dst_vertex), u64::from(weight)),
            Operand::NewEdge { target, weight } => (3, pack_address(target), u64::from(weight)),
        };
        let w0 = u64::from(self.opcode as u8)
            | tag << 8
            | u64::from(self.dst_object.cc.x & 0xFFFF) << 16
            | u64::from(self.dst_object.cc.y & 0xFFFF) << 32;
        Flit([w0, u64::from(self.dst_object.slot), a, b])
    }

    pub fn decode(flit: Flit) -> Result<Self, SimError> {
        let [w0, w1, a, b] = flit.0;
        let opcode = Opcode::from_u8((w0 & 0xFF) as u8)
            .ok_or_else(|| SimError::Decode(format!("bad opcode {}", w0 & 0xFF)))?;
        let dst_object = ObjectAddress {
            cc: Coord::new(((w0 >> 16) & 0xFFFF) as u32, ((w0 >> 32) & 0xFFFF) as u32),
            slot: u32::try_from(w1).map_err(|_| SimError::Decode("slot overflow".into()))?,
        };
        let small = |v: u64, what: &str| {
            u32::try_from(v).map_err(|_| SimError::Decode(format!("{what} overflow")))
        };
        let operand = match (w0 >> 8) & 0xFF {
            1 => Operand::Level(
                L::from_u64(a).ok_or_else(|| SimError::Decode("level overflow".into()))?,
            ),
            2 => Operand::Insert {
                dst_vertex: small(a, "vertex id")?,
                weight: small(b, "weight")?,
            },
            3 => Operand::NewEdge {
                target: unpack_address(a),
                weight: small(b, "weight")?,
            },
            t => return Err(SimError::Decode(format!("bad operand tag {t}"))),
        };
        Ok(Self {
            dst_object,
            opcode,
            operand,
        })
    }
}

fn pack_address(a: ObjectAddress) -> u64 {
    u64::from(a.cc.x & 0xFFFF) | u64::from(a.cc.y & 0xFFFF) << 16 | u64::from(a.slot) << 32
}

fn unpack_address(v: u64) -> ObjectAddress {
    ObjectAddress {
        cc: Coord::new((v & 0xFFFF) as u32, ((v >> 16) & 0xFFFF) as u32),
        slot: (v >> 32) as u32,
    }
}

/// One 256-bit link transfer unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flit(pub [u64; 4]);

const _: () = assert!(std::mem::size_of::<Flit>() * 8 == FLIT_BITS as usize);
