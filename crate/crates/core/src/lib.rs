//! Cycle-level simulator of a message-driven mesh of compute cells running
//! batched dynamic BFS, plus a transistor-budget explorer for the chip.
//!
//! * [`dse`]: per-cell transistor model and square-chip sizing under a die budget.
//! * [`fabric`]: the mesh, its link FIFOs, XY routing and the two-phase cycle loop.
//! * [`graph_store`]: vertex objects (root plus ghost chain) in cell memory.
//! * [`actions`]: predicate/work/diffuse execution and the BFS and insert-edge actions.
//! * [`workloads`]: TSV edge-list increments and edge/snowball samplers.
//! * [`harness`]: static and dynamic BFS runs, the reference BFS and report files.
//!
//! The cycle engine is generic over the level word ([`LevelWord`]) and the
//! transistor model over its scalar ([`Scalar`]); the aliases below pick
//! the usual instantiations.

pub mod actions;
pub mod dse;
pub mod error;
pub mod fabric;
pub mod graph_store;
pub mod harness;
pub mod operon;
pub mod scalar;
pub mod topology;
pub mod workloads;

pub use error::SimError;
pub use scalar::{LevelWord, Scalar};

pub type VertexId = u32;

/// Chip with 32-bit BFS levels.
pub type StandardChip = fabric::Chip<u32>;
/// Chip with 16-bit BFS levels (graphs of depth below 65535).
pub type CompactChip = fabric::Chip<u16>;

/// Exact integer transistor model.
pub type ExactModel = dse::TransistorModel<u64>;
pub type ExactProcess = dse::ProcessParams<u64>;
pub type ExactDesignPoint = dse::DesignPoint<u64>;
/// Floating-point transistor model, for fractional coefficients.
pub type FloatModel = dse::TransistorModel<f64>;
pub type FloatProcess = dse::ProcessParams<f64>;
pub type FloatDesignPoint = dse::DesignPoint<f64>;
