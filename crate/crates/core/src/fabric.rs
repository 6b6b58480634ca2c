//! The cycle-level chip: a mesh of compute cells exchanging operons over
//! bounded per-link FIFOs.
//!
//! Every cycle has two phases.
//!
//! 1. Transport. Each cell offers the head of each input FIFO (N, E, S, W)
//!    and of its local staging buffer, in that priority order, to the
//!    output link chosen by XY routing. A link carries at most one operon
//!    per cycle. An operon moves only if the downstream FIFO had space at
//!    the start of the cycle; an operon whose next hop is its destination
//!    is ejected straight into that cell's action queue.
//! 2. Execute. Each cell with work advances its in-flight action by one
//!    cycle, first popping a new one from its queue if idle.
//!
//! Cells are visited in row-major order in both phases, so a run is a pure
//! function of its inputs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::actions::{execute_cycle, ActionContext, ActionCosts, ActionInstance, Progress};
use crate::error::SimError;
use crate::graph_store::{GhostPlacement, GraphStore, DEFAULT_CHUNK_CAP};
use crate::operon::Operon;
use crate::scalar::LevelWord;
use crate::topology::{route_next_hop, ChipTopology, Coord, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChipConfig {
    pub width: u32,
    pub height: u32,
    pub link_fifo_depth: usize,
    /// Capacity of each cell's outgoing staging buffer.
    pub staging_depth: usize,
    pub chunk_cap: usize,
    pub mem_per_cell: u64,
    pub costs: ActionCosts,
    pub ghost_placement: GhostPlacement,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            width: 32,
            height: 32,
            link_fifo_depth: 4,
            staging_depth: 4,
            chunk_cap: DEFAULT_CHUNK_CAP,
            mem_per_cell: 64 * 1024,
            costs: ActionCosts::default(),
            ghost_placement: GhostPlacement::default(),
        }
    }
}

impl ChipConfig {
    pub fn grid(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CycleStats {
    pub cycle: u64,
    pub active_cells: u64,
    pub operons_in_flight: u64,
    pub actions_enqueued_total: u64,
}

pub const TRACE_CSV_HEADER: &str = "cycle,active_cells,operons_in_flight,actions_enqueued_total";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellCounters {
    pub actions_created: u64,
    pub actions_executed: u64,
    pub cycles_active: u64,
}

/// Chip-wide counters, cumulative since construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ChipCounters {
    /// Operons emitted by diffuse phases plus germinated instances.
    pub actions_created: u64,
    /// Action instances that started executing.
    pub actions_executed: u64,
    /// Everything pushed into any action queue.
    pub actions_enqueued_total: u64,
    /// Injected plus emitted operons.
    pub operons_created: u64,
    pub operons_delivered: u64,
}

#[derive(Debug, Clone)]
pub struct ComputeCellState<L> {
    pub coord: Coord,
    action_queue: VecDeque<ActionInstance<L>>,
    in_flight: Option<ActionInstance<L>>,
    link_in: [VecDeque<Operon<L>>; 4],
    staging: VecDeque<Operon<L>>,
    pub counters: CellCounters,
}

impl<L> ComputeCellState<L> {
    fn new(coord: Coord) -> Self {
        Self {
            coord,
            action_queue: VecDeque::new(),
            in_flight: None,
            link_in: Default::default(),
            staging: VecDeque::new(),
            counters: CellCounters::default(),
        }
    }

    fn is_idle(&self) -> bool {
        self.action_queue.is_empty()
            && self.in_flight.is_none()
            && self.staging.is_empty()
            && self.link_in.iter().all(VecDeque::is_empty)
    }

    pub fn queue_len(&self) -> usize {
        self.action_queue.len()
    }

    pub fn has_in_flight(&self) -> bool {
        self.in_flight.is_some()
    }

    pub fn buffered_operons(&self) -> usize {
        self.staging.len() + self.link_in.iter().map(VecDeque::len).sum::<usize>()
    }
}

#[derive(Debug, Clone)]
pub struct Chip<L> {
    cfg: ChipConfig,
    topo: ChipTopology,
    store: GraphStore<L>,
    cells: Vec<ComputeCellState<L>>,
    /// Cells that may hold work; every other cell is idle.
    awake: BTreeSet<usize>,
    cycle: u64,
    operons_in_flight: u64,
    counters: ChipCounters,
    trace: Option<Vec<CycleStats>>,
}

enum Hop {
    Deliver(usize),
    Forward(usize, Direction),
}

/// Execute-phase view of one cell.
struct CellContext<'a, L> {
    here: Coord,
    staging_depth: usize,
    queue: &'a mut VecDeque<ActionInstance<L>>,
    staging: &'a mut VecDeque<Operon<L>>,
    cell_counters: &'a mut CellCounters,
    counters: &'a mut ChipCounters,
    in_flight: &'a mut u64,
}

impl<L: LevelWord> ActionContext<L> for CellContext<'_, L> {
    fn here(&self) -> Coord {
        self.here
    }

    fn send(&mut self, operon: Operon<L>) -> bool {
        if operon.dst_cc() == self.here {
            self.queue.push_back(ActionInstance::from_operon(operon));
            self.counters.operons_delivered += 1;
            self.counters.actions_enqueued_total += 1;
        } else if self.staging.len() < self.staging_depth {
            self.staging.push_back(operon);
            *self.in_flight += 1;
        } else {
            return false;
        }
        self.counters.operons_created += 1;
        self.counters.actions_created += 1;
        self.cell_counters.actions_created += 1;
        true
    }

    fn germinate(&mut self, action: ActionInstance<L>) {
        self.queue.push_back(action);
        self.counters.actions_created += 1;
        self.counters.actions_enqueued_total += 1;
        self.cell_counters.actions_created += 1;
    }
}

impl<L: LevelWord> Chip<L> {
    pub fn new(cfg: ChipConfig) -> Result<Self, SimError> {
        let topo = ChipTopology::new(cfg.width, cfg.height, cfg.link_fifo_depth)?;
        if cfg.staging_depth == 0 {
            return Err(SimError::Config("staging depth must be at least 1".into()));
        }
        cfg.costs.validate()?;
        let store = GraphStore::new(topo, cfg.chunk_cap, cfg.mem_per_cell, cfg.ghost_placement)?;
        Ok(Self {
            cfg,
            topo,
            store,
            cells: (0..topo.cell_count())
                .map(|i| ComputeCellState::new(topo.coord(i)))
                .collect(),
            awake: BTreeSet::new(),
            cycle: 0,
            operons_in_flight: 0,
            counters: ChipCounters::default(),
            trace: None,
        })
    }

    pub fn config(&self) -> &ChipConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &ChipTopology {
        &self.topo
    }

    pub fn store(&self) -> &GraphStore<L> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut GraphStore<L> {
        &mut self.store
    }

    pub fn counters(&self) -> ChipCounters {
        self.counters
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn cell(&self, c: Coord) -> &ComputeCellState<L> {
        &self.cells[self.topo.index(c)]
    }

    pub fn operons_in_flight(&self) -> u64 {
        self.operons_in_flight
    }

    /// Start (or restart) recording one [`CycleStats`] row per step.
    pub fn record_trace(&mut self, on: bool) {
        self.trace = on.then(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<CycleStats> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Put an operon into the network at `at`. An operon injected at its
    /// destination goes straight to that cell's queue. A full staging
    /// buffer returns [`SimError::Backpressure`]; the caller retries.
    pub fn inject(&mut self, operon: Operon<L>, at: Coord) -> Result<(), SimError> {
        if !self.topo.contains(at) {
            return Err(SimError::OutsideGrid(at));
        }
        if !self.topo.contains(operon.dst_cc()) {
            return Err(SimError::OutsideGrid(operon.dst_cc()));
        }
        let idx = self.topo.index(at);
        if operon.dst_cc() == at {
            self.cells[idx]
                .action_queue
                .push_back(ActionInstance::from_operon(operon));
            self.counters.operons_delivered += 1;
            self.counters.actions_enqueued_total += 1;
        } else {
            if self.cells[idx].staging.len() >= self.cfg.staging_depth {
                return Err(SimError::Backpressure(at));
            }
            self.cells[idx].staging.push_back(operon);
            self.operons_in_flight += 1;
        }
        self.counters.operons_created += 1;
        self.awake.insert(idx);
        Ok(())
    }

    /// Queue an action directly at the cell owning its target, bypassing
    /// the network.
    pub fn enqueue_local(&mut self, action: ActionInstance<L>) -> Result<(), SimError> {
        let cc = action.target.cc;
        if !self.topo.contains(cc) {
            return Err(SimError::OutsideGrid(cc));
        }
        let idx = self.topo.index(cc);
        self.cells[idx].action_queue.push_back(action);
        self.counters.actions_enqueued_total += 1;
        self.awake.insert(idx);
        Ok(())
    }

    pub fn is_quiescent(&self) -> bool {
        debug_assert_eq!(
            self.awake.is_empty(),
            self.cells.iter().all(ComputeCellState::is_idle)
        );
        self.awake.is_empty()
    }

    fn transport(&mut self) {
        let depth = self.topo.link_fifo_depth;
        let mut moves: Vec<(usize, usize, Hop)> = Vec::new();
        for &i in &self.awake {
            let cell = &self.cells[i];
            let here = cell.coord;
            let mut link_used = [false; 4];
            for port in 0..5 {
                let head = if port < 4 {
                    cell.link_in[port].front()
                } else {
                    cell.staging.front()
                };
                let Some(op) = head else { continue };
                let dir = route_next_hop(here, op.dst_cc())
                    .expect("buffered operons are never at their destination");
                if link_used[dir.index()] {
                    continue;
                }
                let next = self
                    .topo
                    .neighbor(here, dir)
                    .expect("XY routing stays inside the grid");
                let j = self.topo.index(next);
                let hop = if next == op.dst_cc() {
                    Hop::Deliver(j)
                } else if self.cells[j].link_in[dir.opposite().index()].len() < depth {
                    Hop::Forward(j, dir.opposite())
                } else {
                    continue;
                };
                link_used[dir.index()] = true;
                moves.push((i, port, hop));
            }
        }
        for (i, port, hop) in moves {
            let src = &mut self.cells[i];
            let op = if port < 4 {
                src.link_in[port].pop_front()
            } else {
                src.staging.pop_front()
            }
            .expect("head was present when the move was planned");
            match hop {
                Hop::Deliver(j) => {
                    self.cells[j]
                        .action_queue
                        .push_back(ActionInstance::from_operon(op));
                    self.counters.operons_delivered += 1;
                    self.counters.actions_enqueued_total += 1;
                    self.operons_in_flight -= 1;
                    self.awake.insert(j);
                }
                Hop::Forward(j, port_in) => {
                    self.cells[j].link_in[port_in.index()].push_back(op);
                    self.awake.insert(j);
                }
            }
        }
    }

    fn execute(&mut self) -> Result<u64, SimError> {
        let mut active = 0;
        let Chip {
            cfg,
            store,
            cells,
            awake,
            counters,
            operons_in_flight,
            ..
        } = self;
        for &i in awake.iter() {
            let cell = &mut cells[i];
            if cell.in_flight.is_none() {
                if let Some(mut next) = cell.action_queue.pop_front() {
                    next.begin(store)?;
                    cell.in_flight = Some(next);
                    cell.counters.actions_executed += 1;
                    counters.actions_executed += 1;
                }
            }
            let Some(action) = cell.in_flight.as_mut() else {
                continue;
            };
            let mut ctx = CellContext {
                here: cell.coord,
                staging_depth: cfg.staging_depth,
                queue: &mut cell.action_queue,
                staging: &mut cell.staging,
                cell_counters: &mut cell.counters,
                counters,
                in_flight: operons_in_flight,
            };
            match execute_cycle(action, store, &cfg.costs, &mut ctx)? {
                Progress::Continue => {}
                Progress::Done => cell.in_flight = None,
                Progress::Stalled => continue,
            }
            cell.counters.cycles_active += 1;
            active += 1;
        }
        Ok(active)
    }

    /// Advance one cycle.
    pub fn step(&mut self) -> Result<CycleStats, SimError> {
        self.transport();
        let active = self.execute()?;
        let cells = &self.cells;
        self.awake.retain(|&i| !cells[i].is_idle());
        self.cycle += 1;
        let stats = CycleStats {
            cycle: self.cycle,
            active_cells: active,
            operons_in_flight: self.operons_in_flight,
            actions_enqueued_total: self.counters.actions_enqueued_total,
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(stats);
        }
        Ok(stats)
    }

    /// Step until quiescent. Returns the number of cycles taken.
    pub fn run_until_quiescent(&mut self, max_cycles: u64) -> Result<u64, SimError> {
        if max_cycles == 0 {
            return Err(SimError::Config("max_cycles must be positive".into()));
        }
        let mut elapsed = 0;
        while !self.is_quiescent() {
            if elapsed >= max_cycles {
                return Err(SimError::NonTermination {
                    cycles: elapsed,
                    dump: self.dump(),
                });
            }
            self.step()?;
            elapsed += 1;
        }
        Ok(elapsed)
    }

    /// Human-readable summary of the busy cells.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "cycle {} | {} busy cells | {} operons in flight | {:?}",
            self.cycle,
            self.awake.len(),
            self.operons_in_flight,
            self.counters
        );
        for &i in self.awake.iter().take(32) {
            let c = &self.cells[i];
            let _ = writeln!(
                out,
                "  cell {}: queue={} in_flight={:?} staging={} link_in={:?}",
                c.coord,
                c.action_queue.len(),
                c.in_flight.as_ref().map(|a| (a.opcode, a.phase)),
                c.staging.len(),
                c.link_in.iter().map(VecDeque::len).collect::<Vec<_>>()
            );
        }
        if self.awake.len() > 32 {
            let _ = writeln!(out, "  ... {} more", self.awake.len() - 32);
        }
        out
    }

    /// Operons sitting in FIFOs and staging buffers, counted by scanning.
    pub fn count_buffered_operons(&self) -> u64 {
        self.cells.iter().map(|c| c.buffered_operons() as u64).sum()
    }
}
