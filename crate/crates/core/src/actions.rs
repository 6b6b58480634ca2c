//! Action execution: predicate, work and diffuse phases with per-phase
//! cycle costs, and the BFS, germinated-BFS, insert-edge and seed actions.
//!
//! Cost contract (defaults): a failed predicate occupies the cell for one
//! cycle; a successful BFS action occupies it for `1 + 1 + d` cycles on a
//! vertex with `d` local edges, one emitted operon per diffuse cycle.
//! An insert-edge action is a single work phase that also germinates a
//! `BfsNewEdge` instance into the local queue. That germinated instance
//! costs a predicate cycle plus at most one diffuse cycle.
//!
//! Diffusion walks the vertex chain in order. When the next chain object
//! lives on another cell, the walker sends one `Bfs` operon to that ghost
//! and stops; the ghost's cell diffuses the remainder.

use crate::error::SimError;
use crate::graph_store::{GraphStore, ObjectAddress, VertexObject};
use crate::operon::{Opcode, Operand, Operon};
use crate::scalar::LevelWord;
use crate::topology::Coord;
use crate::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionCosts {
    pub predicate_cycles: u32,
    pub work_cycles: u32,
}

impl Default for ActionCosts {
    fn default() -> Self {
        Self {
            predicate_cycles: 1,
            work_cycles: 1,
        }
    }
}

impl ActionCosts {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.predicate_cycles == 0 || self.work_cycles == 0 {
            return Err(SimError::Config(
                "predicate and work costs must be at least one cycle".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Predicate,
    Work,
    Diffuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    /// Walk the chain from `object`, starting at edge `index`.
    Chain {
        object: ObjectAddress,
        index: usize,
    },
    /// Exactly one edge.
    Single {
        target: ObjectAddress,
    },
    Exhausted,
}

/// One queued or executing action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionInstance<L> {
    pub opcode: Opcode,
    pub target: ObjectAddress,
    pub operand: Operand<L>,
    pub phase: Phase,
    elapsed: u32,
    /// Level the target accepted; diffusion proposes its successor.
    accepted: Option<L>,
    scope: Scope,
}

/// Outcome of one execute cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    Continue,
    Done,
    /// Emission blocked by a full staging buffer; nothing happened.
    Stalled,
}

/// What an executing action can do to its cell.
pub trait ActionContext<L> {
    fn here(&self) -> Coord;
    /// Emit one operon. `false` means backpressure: retry next cycle.
    fn send(&mut self, operon: Operon<L>) -> bool;
    /// Append an action to this cell's queue.
    fn germinate(&mut self, action: ActionInstance<L>);
}

impl<L: LevelWord> ActionInstance<L> {
    pub fn from_operon(op: Operon<L>) -> Self {
        Self {
            opcode: op.opcode,
            target: op.dst_object,
            operand: op.operand,
            phase: Phase::Predicate,
            elapsed: 0,
            accepted: None,
            scope: Scope::Exhausted,
        }
    }

    pub fn germinated(target_root: ObjectAddress, edge_target: ObjectAddress, weight: u32) -> Self {
        Self::from_operon(Operon {
            dst_object: target_root,
            opcode: Opcode::BfsNewEdge,
            operand: Operand::NewEdge {
                target: edge_target,
                weight,
            },
        })
    }

    /// Prepare to run: pick the entry phase from the opcode and whether the
    /// target is a ghost.
    pub fn begin(&mut self, store: &GraphStore<L>) -> Result<(), SimError> {
        self.elapsed = 0;
        self.phase = match self.opcode {
            Opcode::InsertEdge => Phase::Work,
            Opcode::Bfs | Opcode::Seed if !store.object(self.target)?.is_root => {
                self.accepted = Some(self.proposed()?);
                self.scope = Scope::Chain {
                    object: self.target,
                    index: 0,
                };
                Phase::Diffuse
            }
            _ => Phase::Predicate,
        };
        Ok(())
    }

    fn proposed(&self) -> Result<L, SimError> {
        match self.operand {
            Operand::Level(l) => Ok(l),
            _ => Err(SimError::Decode(format!(
                "{:?} carries no level",
                self.opcode
            ))),
        }
    }
}

/// `proposed < vertex.level`.
pub fn bfs_predicate<L: LevelWord>(vertex: &VertexObject<L>, proposed: L) -> bool {
    proposed < vertex.level
}

pub fn bfs_work<L: LevelWord>(vertex: &mut VertexObject<L>, proposed: L) {
    vertex.level = proposed;
}

/// Every operon a full diffusion of `root` at `new_level` sends, in chain
/// order, assuming the whole chain is local to the root's cell.
pub fn bfs_diffuse<L: LevelWord>(
    store: &GraphStore<L>,
    root: ObjectAddress,
    new_level: L,
) -> Result<Vec<Operon<L>>, SimError> {
    let Some(next) = new_level.successor() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for addr in store.chain(root)? {
        for e in &store.object(addr)?.edges {
            out.push(Operon::bfs(e.target, next));
        }
    }
    Ok(out)
}

/// The single operon a germinated action sends along a new edge, if the
/// source has been reached.
pub fn germinated_bfs<L: LevelWord>(
    vertex: &VertexObject<L>,
    new_edge_target: ObjectAddress,
) -> Option<Operon<L>> {
    vertex
        .level
        .successor()
        .filter(|_| !vertex.level.is_unreached())
        .map(|next| Operon::bfs(new_edge_target, next))
}

/// Insert `target_root -> dst_vertex` and build the germinated BFS
/// instance. The destination root is created on its placed cell if absent.
/// Returns the object that took the edge.
pub fn insert_edge_action<L: LevelWord>(
    store: &mut GraphStore<L>,
    target_root: ObjectAddress,
    dst_vertex: VertexId,
    weight: u32,
) -> Result<(ObjectAddress, ActionInstance<L>), SimError> {
    let dst_root = store.resolve(dst_vertex, true)?;
    let holder = store.insert_edge_local(target_root, dst_root, weight)?;
    Ok((
        holder,
        ActionInstance::germinated(target_root, dst_root, weight),
    ))
}

/// Operon that starts a from-scratch BFS at `root_vertex`.
pub fn static_bfs_seed<L: LevelWord>(
    store: &GraphStore<L>,
    root_vertex: VertexId,
) -> Result<Operon<L>, SimError> {
    store
        .lookup(root_vertex)
        .map(Operon::seed)
        .ok_or(SimError::UnknownVertex(root_vertex))
}

/// Move a chain cursor onto the next edge to emit, skipping past the end
/// of local objects.
fn settle<L: LevelWord>(
    store: &GraphStore<L>,
    here: Coord,
    mut scope: Scope,
) -> Result<Scope, SimError> {
    while let Scope::Chain { object, index } = scope {
        if object.cc != here {
            return Ok(scope);
        }
        let obj = store.object(object)?;
        if index < obj.edges.len() {
            return Ok(scope);
        }
        scope = match obj.next {
            Some(n) => Scope::Chain {
                object: n,
                index: 0,
            },
            None => Scope::Exhausted,
        };
    }
    Ok(scope)
}

/// Run one cycle of `inst` on the cell described by `ctx`.
pub fn execute_cycle<L: LevelWord, C: ActionContext<L>>(
    inst: &mut ActionInstance<L>,
    store: &mut GraphStore<L>,
    costs: &ActionCosts,
    ctx: &mut C,
) -> Result<Progress, SimError> {
    match inst.phase {
        Phase::Predicate => {
            inst.elapsed += 1;
            if inst.elapsed < costs.predicate_cycles {
                return Ok(Progress::Continue);
            }
            let vertex = store.object(inst.target)?;
            match inst.opcode {
                Opcode::Bfs | Opcode::Seed => {
                    if !bfs_predicate(vertex, inst.proposed()?) {
                        return Ok(Progress::Done);
                    }
                    inst.phase = Phase::Work;
                }
                Opcode::BfsNewEdge => {
                    let Operand::NewEdge { target, .. } = inst.operand else {
                        return Err(SimError::Decode(
                            "BfsNewEdge without an edge operand".into(),
                        ));
                    };
                    if germinated_bfs(vertex, target).is_none() {
                        return Ok(Progress::Done);
                    }
                    inst.accepted = Some(vertex.level);
                    inst.scope = Scope::Single { target };
                    inst.phase = Phase::Diffuse;
                }
                Opcode::InsertEdge => inst.phase = Phase::Work,
            }
            inst.elapsed = 0;
            Ok(Progress::Continue)
        }
        Phase::Work => {
            inst.elapsed += 1;
            if inst.elapsed < costs.work_cycles {
                return Ok(Progress::Continue);
            }
            match inst.opcode {
                Opcode::InsertEdge => {
                    let Operand::Insert { dst_vertex, weight } = inst.operand else {
                        return Err(SimError::Decode(
                            "InsertEdge without an edge operand".into(),
                        ));
                    };
                    let (_, germ) = insert_edge_action(store, inst.target, dst_vertex, weight)?;
                    ctx.germinate(germ);
                    Ok(Progress::Done)
                }
                _ => {
                    let proposed = inst.proposed()?;
                    bfs_work(store.object_mut(inst.target)?, proposed);
                    if proposed.successor().is_none() {
                        return Ok(Progress::Done);
                    }
                    inst.accepted = Some(proposed);
                    inst.scope = settle(
                        store,
                        ctx.here(),
                        Scope::Chain {
                            object: inst.target,
                            index: 0,
                        },
                    )?;
                    inst.elapsed = 0;
                    if inst.scope == Scope::Exhausted {
                        return Ok(Progress::Done);
                    }
                    inst.phase = Phase::Diffuse;
                    Ok(Progress::Continue)
                }
            }
        }
        Phase::Diffuse => {
            let accepted = inst
                .accepted
                .expect("diffuse phase always has an accepted level");
            let here = ctx.here();
            inst.scope = settle(store, here, inst.scope)?;
            let (operon, after) = match inst.scope {
                Scope::Exhausted => return Ok(Progress::Done),
                Scope::Single { target } => (
                    Operon::bfs(
                        target,
                        accepted.successor().expect("checked before diffuse"),
                    ),
                    Scope::Exhausted,
                ),
                Scope::Chain { object, .. } if object.cc != here => {
                    // Hand the rest of the chain to the ghost's cell.
                    (Operon::bfs(object, accepted), Scope::Exhausted)
                }
                Scope::Chain { object, index } => {
                    let edge = store.object(object)?.edges[index];
                    (
                        Operon::bfs(
                            edge.target,
                            accepted.successor().expect("checked before diffuse"),
                        ),
                        Scope::Chain {
                            object,
                            index: index + 1,
                        },
                    )
                }
            };
            if !ctx.send(operon) {
                return Ok(Progress::Stalled);
            }
            inst.scope = settle(store, here, after)?;
            if inst.scope == Scope::Exhausted {
                Ok(Progress::Done)
            } else {
                Ok(Progress::Continue)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_store::GhostPlacement;
    use crate::topology::ChipTopology;

    struct Recorder {
        here: Coord,
        sent: Vec<Operon<u32>>,
        germinated: Vec<ActionInstance<u32>>,
        room: usize,
    }

    impl ActionContext<u32> for Recorder {
        fn here(&self) -> Coord {
            self.here
        }
        fn send(&mut self, operon: Operon<u32>) -> bool {
            if self.room == 0 {
                return false;
            }
            self.room -= 1;
            self.sent.push(operon);
            true
        }
        fn germinate(&mut self, action: ActionInstance<u32>) {
            self.germinated.push(action);
        }
    }

    fn recorder(here: Coord) -> Recorder {
        Recorder {
            here,
            sent: Vec::new(),
            germinated: Vec::new(),
            room: usize::MAX,
        }
    }

    fn store(cap: usize) -> GraphStore<u32> {
        GraphStore::new(
            ChipTopology::new(4, 4, 4).unwrap(),
            cap,
            1 << 16,
            GhostPlacement::AlwaysLocal,
        )
        .unwrap()
    }

    /// Run to completion, counting cycles.
    fn run(inst: &mut ActionInstance<u32>, s: &mut GraphStore<u32>, ctx: &mut Recorder) -> u32 {
        inst.begin(s).unwrap();
        let mut cycles = 0;
        loop {
            cycles += 1;
            match execute_cycle(inst, s, &ActionCosts::default(), ctx).unwrap() {
                Progress::Done => return cycles,
                Progress::Continue => {}
                Progress::Stalled => panic!("unexpected stall"),
            }
        }
    }

    #[test]
    fn predicate_is_strict_less_than() {
        let mut s = store(8);
        let a = s.resolve(0, true).unwrap();
        let mut v = s.object(a).unwrap().clone();
        assert!(bfs_predicate(&v, 0));
        v.level = 2;
        assert!(!bfs_predicate(&v, 2));
        v.level = 1;
        assert!(!bfs_predicate(&v, 3));
        v.level = 5;
        bfs_work(&mut v, 2);
        assert_eq!(v.level, 2);
    }

    #[test]
    fn failed_predicate_costs_one_cycle() {
        let mut s = store(8);
        let u = s.resolve(0, true).unwrap();
        s.object_mut(u).unwrap().level = 1;
        let mut ctx = recorder(u.cc);
        let mut a = ActionInstance::from_operon(Operon::bfs(u, 3));
        assert_eq!(run(&mut a, &mut s, &mut ctx), 1);
        assert!(ctx.sent.is_empty());
    }

    #[test]
    fn bfs_costs_two_plus_degree() {
        for d in [0usize, 1, 5, 11] {
            let mut s = store(8);
            let u = s.resolve(0, true).unwrap();
            for k in 0..d {
                let v = s.resolve(1 + k as u32, true).unwrap();
                s.insert_edge_local(u, v, 1).unwrap();
            }
            let mut ctx = recorder(u.cc);
            let mut a = ActionInstance::from_operon(Operon::bfs(u, 0));
            assert_eq!(run(&mut a, &mut s, &mut ctx), 2 + d as u32);
            assert_eq!(ctx.sent, bfs_diffuse(&s, u, 0).unwrap());
            assert_eq!(ctx.sent.len(), d);
            assert!(ctx.sent.iter().all(|o| o.operand == Operand::Level(1)));
            assert_eq!(s.object(u).unwrap().level, 0);
        }
    }

    #[test]
    fn diffuse_stalls_without_skipping() {
        let mut s = store(8);
        let u = s.resolve(0, true).unwrap();
        let v = s.resolve(1, true).unwrap();
        s.insert_edge_local(u, v, 1).unwrap();
        s.insert_edge_local(u, v, 1).unwrap();
        let mut ctx = recorder(u.cc);
        ctx.room = 1;
        let mut a = ActionInstance::from_operon(Operon::bfs(u, 0));
        a.begin(&s).unwrap();
        let costs = ActionCosts::default();
        assert_eq!(
            execute_cycle(&mut a, &mut s, &costs, &mut ctx).unwrap(),
            Progress::Continue
        );
        assert_eq!(
            execute_cycle(&mut a, &mut s, &costs, &mut ctx).unwrap(),
            Progress::Continue
        );
        assert_eq!(
            execute_cycle(&mut a, &mut s, &costs, &mut ctx).unwrap(),
            Progress::Continue
        );
        assert_eq!(
            execute_cycle(&mut a, &mut s, &costs, &mut ctx).unwrap(),
            Progress::Stalled
        );
        ctx.room = 1;
        assert_eq!(
            execute_cycle(&mut a, &mut s, &costs, &mut ctx).unwrap(),
            Progress::Done
        );
        assert_eq!(ctx.sent.len(), 2);
    }

    #[test]
    fn diffuse_walks_chain_in_order() {
        let mut s = store(8);
        let u = s.resolve(0, true).unwrap();
        let targets: Vec<_> = (1..=11).map(|v| s.resolve(v, true).unwrap()).collect();
        for &t in &targets {
            s.insert_edge_local(u, t, 1).unwrap();
        }
        assert_eq!(s.chain(u).unwrap().len(), 2);
        let mut ctx = recorder(u.cc);
        let mut a = ActionInstance::from_operon(Operon::bfs(u, 4));
        assert_eq!(run(&mut a, &mut s, &mut ctx), 13);
        let got: Vec<_> = ctx.sent.iter().map(|o| o.dst_object).collect();
        assert_eq!(got, targets);
    }

    #[test]
    fn insert_edge_germinates() {
        let mut s = store(8);
        let u = s.resolve(0, true).unwrap();
        let mut ctx = recorder(u.cc);
        let mut a = ActionInstance::from_operon(Operon::insert_edge(u, 5, 1));
        assert_eq!(run(&mut a, &mut s, &mut ctx), 1);
        assert_eq!(s.edge_count(u).unwrap(), 1);
        assert_eq!(ctx.germinated.len(), 1);
        assert!(s.lookup(5).is_some());

        // Unreached source: germinated action sends nothing.
        let mut g = ctx.germinated.pop().unwrap();
        assert_eq!(run(&mut g, &mut s, &mut ctx), 1);
        assert!(ctx.sent.is_empty());

        // Reached source: exactly one operon, along the new edge only.
        for v in 6..9 {
            let mut ins = ActionInstance::from_operon(Operon::insert_edge(u, v, 1));
            run(&mut ins, &mut s, &mut ctx);
        }
        assert_eq!(ctx.germinated.len(), 3);
        s.object_mut(u).unwrap().level = 3;
        let mut g = ctx.germinated.pop().unwrap();
        assert_eq!(run(&mut g, &mut s, &mut ctx), 2);
        assert_eq!(ctx.sent, vec![Operon::bfs(s.lookup(8).unwrap(), 4)]);
    }

    #[test]
    fn remote_ghost_gets_forwarded() {
        // One object per cell: the first ghost spills to a neighbor.
        let mut s = GraphStore::<u32>::new(
            ChipTopology::new(2, 1, 4).unwrap(),
            2,
            32,
            GhostPlacement::LocalThenNeighbors,
        )
        .unwrap();
        let u = s.resolve(0, true).unwrap();
        s.insert_edge_local(u, u, 1).unwrap();
        s.insert_edge_local(u, u, 1).unwrap();
        let ghost = s.insert_edge_local(u, u, 1).unwrap();
        assert_eq!(ghost.cc, Coord::new(1, 0));

        let mut ctx = recorder(u.cc);
        let mut a = ActionInstance::from_operon(Operon::bfs(u, 0));
        // predicate + work + 2 local edges + 1 forward
        assert_eq!(run(&mut a, &mut s, &mut ctx), 5);
        assert_eq!(ctx.sent.last().unwrap(), &Operon::bfs(ghost, 0));

        let mut ctx2 = recorder(ghost.cc);
        let mut cont = ActionInstance::from_operon(Operon::bfs(ghost, 0));
        assert_eq!(run(&mut cont, &mut s, &mut ctx2), 1);
        assert_eq!(ctx2.sent, vec![Operon::bfs(u, 1)]);
    }

    #[test]
    fn seed_requires_known_root() {
        let mut s = store(8);
        assert_eq!(static_bfs_seed(&s, 3), Err(SimError::UnknownVertex(3)));
        let r = s.resolve(3, true).unwrap();
        assert_eq!(static_bfs_seed(&s, 3).unwrap(), Operon::seed(r));
    }
}
