//! Static and dynamic BFS runs over an increment schedule, the reference
//! BFS they are checked against, and the report files.
//!
//! A dynamic run seeds BFS at the root on an empty graph, then for each
//! increment queues one insert-edge action per directed edge at the owning
//! root and runs to quiescence. One idle cycle follows every increment so
//! the trace shows a pause row at each boundary. A static run rebuilds the
//! accumulated graph on a fresh chip and runs BFS from scratch.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::actions::ActionInstance;
use crate::error::SimError;
use crate::fabric::{Chip, ChipConfig, CycleStats, TRACE_CSV_HEADER};
use crate::operon::Operon;
use crate::scalar::LevelWord;
use crate::workloads::{EdgeRecord, IncrementSchedule};
use crate::VertexId;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("increment {increment} ({mode}): {source}")]
    Sim {
        increment: usize,
        mode: RunMode,
        #[source]
        source: SimError,
    },
    #[error(
        "increment {increment} ({mode}): vertex {vertex} has level {got} on the chip, reference says {expected}"
    )]
    Mismatch {
        increment: usize,
        mode: RunMode,
        vertex: VertexId,
        expected: LevelText,
        got: LevelText,
    },
    #[error("{0}")]
    Config(String),
    #[error("writing reports: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing reports: {0}")]
    Report(String),
}

impl HarnessError {
    pub fn sim_error(&self) -> Option<&SimError> {
        match self {
            HarnessError::Sim { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// A level for display; `None` is unreached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelText(pub Option<u64>);

impl std::fmt::Display for LevelText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(l) => write!(f, "{l}"),
            None => f.write_str("unreached"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Static,
    Dynamic,
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunMode::Static => "static",
            RunMode::Dynamic => "dynamic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Static,
    Dynamic,
    Both,
}

impl Mode {
    fn runs(self, m: RunMode) -> bool {
        matches!(
            (self, m),
            (Mode::Both, _) | (Mode::Static, RunMode::Static) | (Mode::Dynamic, RunMode::Dynamic)
        )
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode `{other}` (static|dynamic|both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub chip: ChipConfig,
    pub root_vertex: VertexId,
    /// Non-termination guard per increment (and for the initial seed).
    pub max_cycles: u64,
    /// Check levels against the reference BFS after every increment.
    pub verify: bool,
    pub record_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chip: ChipConfig::default(),
            root_vertex: 0,
            max_cycles: 10_000_000,
            verify: true,
            record_trace: true,
        }
    }
}

/// One row of `increments.csv`. Counters are for this increment only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncrementReport {
    /// 1-based.
    pub increment: usize,
    pub mode: RunMode,
    pub cycles: u64,
    pub actions_created: u64,
    pub actions_executed: u64,
    pub operons_delivered: u64,
    pub levels_checksum: String,
}

pub const INCREMENTS_CSV_HEADER: &str =
    "increment,mode,cycles,actions_created,actions_executed,operons_delivered,levels_checksum";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicOutcome {
    pub reports: Vec<IncrementReport>,
    /// One row per cycle after the initial seed, pause rows included.
    pub trace: Vec<CycleStats>,
    /// Index into `trace` of the pause row closing each increment.
    pub boundaries: Vec<usize>,
    pub final_levels: BTreeMap<VertexId, Option<u64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOutcome {
    pub dynamic: Option<DynamicOutcome>,
    pub static_reports: Option<Vec<IncrementReport>>,
}

impl RunOutcome {
    /// Dynamic and static rows interleaved by increment.
    pub fn report_rows(&self) -> Vec<&IncrementReport> {
        let dynamic = self
            .dynamic
            .as_ref()
            .map(|d| d.reports.as_slice())
            .unwrap_or(&[]);
        let stat = self.static_reports.as_deref().unwrap_or(&[]);
        let n = dynamic.len().max(stat.len());
        (0..n)
            .flat_map(|i| dynamic.get(i).into_iter().chain(stat.get(i)))
            .collect()
    }
}

/// Levels as plain integers, `None` for unreached.
pub fn chip_levels<L: LevelWord>(chip: &Chip<L>) -> BTreeMap<VertexId, Option<u64>> {
    chip.store()
        .levels()
        .into_iter()
        .map(|(v, l)| {
            (
                v,
                (!l.is_unreached()).then(|| l.to_u64().expect("level fits in 64 bits")),
            )
        })
        .collect()
}

/// Reference BFS over directed `edges`. Every endpoint and the root get
/// an entry.
pub fn oracle_bfs(edges: &[EdgeRecord], root: VertexId) -> BTreeMap<VertexId, Option<u64>> {
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    adj.entry(root).or_default();
    for e in edges {
        adj.entry(e.src).or_default().push(e.dst);
        adj.entry(e.dst).or_default();
    }
    let mut level: BTreeMap<VertexId, Option<u64>> = adj.keys().map(|&v| (v, None)).collect();
    level.insert(root, Some(0));
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let next = level[&u].map(|l| l + 1);
        for w in &adj[&u] {
            if level[w].is_none() {
                level.insert(*w, next);
                queue.push_back(*w);
            }
        }
    }
    level
}

/// First disagreement between `got` and `expected`, as `(vertex, expected, got)`.
pub fn compare_levels(
    got: &BTreeMap<VertexId, Option<u64>>,
    expected: &BTreeMap<VertexId, Option<u64>>,
) -> Option<(VertexId, LevelText, LevelText)> {
    let keys: BTreeSet<VertexId> = got.keys().chain(expected.keys()).copied().collect();
    keys.into_iter().find_map(|v| {
        let g = got.get(&v).copied().flatten();
        let e = expected.get(&v).copied().flatten();
        (g != e).then_some((v, LevelText(e), LevelText(g)))
    })
}

/// First 16 hex digits of SHA-256 over `(vertex, level)` pairs in vertex
/// order, unreached encoded as `u64::MAX`.
pub fn levels_checksum(levels: &BTreeMap<VertexId, Option<u64>>) -> String {
    let mut h = Sha256::new();
    for (v, l) in levels {
        h.update(v.to_le_bytes());
        h.update(l.unwrap_or(u64::MAX).to_le_bytes());
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn check(
    cfg: &RunConfig,
    increment: usize,
    mode: RunMode,
    levels: &BTreeMap<VertexId, Option<u64>>,
    accumulated: &[EdgeRecord],
) -> Result<(), HarnessError> {
    if !cfg.verify {
        return Ok(());
    }
    match compare_levels(levels, &oracle_bfs(accumulated, cfg.root_vertex)) {
        None => Ok(()),
        Some((vertex, expected, got)) => Err(HarnessError::Mismatch {
            increment,
            mode,
            vertex,
            expected,
            got,
        }),
    }
}

pub fn run_dynamic<L: LevelWord>(
    schedule: &IncrementSchedule,
    cfg: &RunConfig,
) -> Result<DynamicOutcome, HarnessError> {
    let mode = RunMode::Dynamic;
    let at = |increment: usize| {
        move |source| HarnessError::Sim {
            increment,
            mode,
            source,
        }
    };

    let mut chip = Chip::<L>::new(cfg.chip).map_err(at(0))?;
    let root = chip
        .store_mut()
        .resolve(cfg.root_vertex, true)
        .map_err(at(0))?;
    chip.inject(Operon::seed(root), root.cc).map_err(at(0))?;
    chip.run_until_quiescent(cfg.max_cycles).map_err(at(0))?;
    chip.record_trace(cfg.record_trace);

    let mut out = DynamicOutcome::default();
    let mut accumulated = Vec::new();
    for k in 0..schedule.len() {
        let increment = k + 1;
        let before = chip.counters();
        for e in schedule.directed_batch(k) {
            let src = chip
                .store_mut()
                .resolve(e.src, true)
                .map_err(at(increment))?;
            chip.enqueue_local(ActionInstance::from_operon(Operon::insert_edge(
                src, e.dst, e.weight,
            )))
            .map_err(at(increment))?;
            accumulated.push(e);
        }
        let cycles = chip
            .run_until_quiescent(cfg.max_cycles)
            .map_err(at(increment))?;
        chip.step().map_err(at(increment))?;
        if cfg.record_trace {
            out.trace.extend(chip.take_trace());
            out.boundaries.push(out.trace.len() - 1);
        }

        let levels = chip_levels(&chip);
        check(cfg, increment, mode, &levels, &accumulated)?;
        let after = chip.counters();
        out.reports.push(IncrementReport {
            increment,
            mode,
            cycles,
            actions_created: after.actions_created - before.actions_created,
            actions_executed: after.actions_executed - before.actions_executed,
            operons_delivered: after.operons_delivered - before.operons_delivered,
            levels_checksum: levels_checksum(&levels),
        });
        out.final_levels = levels;
    }
    Ok(out)
}

/// BFS from scratch on the graph accumulated through each increment.
pub fn run_static<L: LevelWord>(
    schedule: &IncrementSchedule,
    cfg: &RunConfig,
) -> Result<Vec<IncrementReport>, HarnessError> {
    let mode = RunMode::Static;
    let mut reports = Vec::with_capacity(schedule.len());
    let mut accumulated = Vec::new();
    for k in 0..schedule.len() {
        let increment = k + 1;
        let err = |source| HarnessError::Sim {
            increment,
            mode,
            source,
        };
        accumulated.extend(schedule.directed_batch(k));

        let mut chip = Chip::<L>::new(cfg.chip).map_err(err)?;
        let root = chip
            .store_mut()
            .resolve(cfg.root_vertex, true)
            .map_err(err)?;
        for e in &accumulated {
            let store = chip.store_mut();
            let s = store.resolve(e.src, true).map_err(err)?;
            let d = store.resolve(e.dst, true).map_err(err)?;
            store.insert_edge_local(s, d, e.weight).map_err(err)?;
        }
        chip.inject(Operon::seed(root), root.cc).map_err(err)?;
        let cycles = chip.run_until_quiescent(cfg.max_cycles).map_err(err)?;

        let levels = chip_levels(&chip);
        check(cfg, increment, mode, &levels, &accumulated)?;
        let c = chip.counters();
        reports.push(IncrementReport {
            increment,
            mode,
            cycles,
            actions_created: c.actions_created,
            actions_executed: c.actions_executed,
            operons_delivered: c.operons_delivered,
            levels_checksum: levels_checksum(&levels),
        });
    }
    Ok(reports)
}

pub fn run<L: LevelWord>(
    schedule: &IncrementSchedule,
    cfg: &RunConfig,
    mode: Mode,
) -> Result<RunOutcome, HarnessError> {
    if schedule.is_empty() {
        return Err(HarnessError::Config("schedule has no increments".into()));
    }
    Ok(RunOutcome {
        dynamic: mode
            .runs(RunMode::Dynamic)
            .then(|| run_dynamic::<L>(schedule, cfg))
            .transpose()?,
        static_reports: mode
            .runs(RunMode::Static)
            .then(|| run_static::<L>(schedule, cfg))
            .transpose()?,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ModeTotals {
    pub cycles: u64,
    pub actions_created: u64,
    pub actions_executed: u64,
    pub operons_delivered: u64,
}

impl ModeTotals {
    pub fn of(reports: &[IncrementReport]) -> Self {
        reports.iter().fold(Self::default(), |t, r| Self {
            cycles: t.cycles + r.cycles,
            actions_created: t.actions_created + r.actions_created,
            actions_executed: t.actions_executed + r.actions_executed,
            operons_delivered: t.operons_delivered + r.operons_delivered,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
struct Summary {
    grid_width: u32,
    grid_height: u32,
    link_fifo_depth: usize,
    staging_depth: usize,
    chunk_cap: usize,
    mem_per_cell: u64,
    root_vertex: VertexId,
    increments: usize,
    input_edges: usize,
    undirected: bool,
    verified: bool,
    dynamic: Option<ModeTotals>,
    #[serde(rename = "static")]
    static_: Option<ModeTotals>,
    final_levels_checksum: Option<String>,
    reached_vertices: Option<usize>,
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Report(e.to_string())
}

pub fn write_increments_csv<W: Write>(
    rows: &[&IncrementReport],
    out: W,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(INCREMENTS_CSV_HEADER.split(','))
            .map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(trace: &[CycleStats], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if trace.is_empty() {
        w.write_record(TRACE_CSV_HEADER.split(','))
            .map_err(csv_err)?;
    }
    for r in trace {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `increments.csv`, `trace.csv` and `summary.json` into `dir`.
pub fn emit_reports(
    dir: &Path,
    outcome: &RunOutcome,
    schedule: &IncrementSchedule,
    cfg: &RunConfig,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_increments_csv(
        &outcome.report_rows(),
        fs::File::create(dir.join("increments.csv"))?,
    )?;
    let trace = outcome
        .dynamic
        .as_ref()
        .map(|d| d.trace.as_slice())
        .unwrap_or(&[]);
    write_trace_csv(trace, fs::File::create(dir.join("trace.csv"))?)?;

    let summary = Summary {
        grid_width: cfg.chip.width,
        grid_height: cfg.chip.height,
        link_fifo_depth: cfg.chip.link_fifo_depth,
        staging_depth: cfg.chip.staging_depth,
        chunk_cap: cfg.chip.chunk_cap,
        mem_per_cell: cfg.chip.mem_per_cell,
        root_vertex: cfg.root_vertex,
        increments: schedule.len(),
        input_edges: schedule.total_edges(),
        undirected: schedule.undirected,
        verified: cfg.verify,
        dynamic: outcome.dynamic.as_ref().map(|d| ModeTotals::of(&d.reports)),
        static_: outcome.static_reports.as_deref().map(ModeTotals::of),
        final_levels_checksum: outcome
            .dynamic
            .as_ref()
            .map(|d| levels_checksum(&d.final_levels)),
        reached_vertices: outcome
            .dynamic
            .as_ref()
            .map(|d| d.final_levels.values().filter(|l| l.is_some()).count()),
    };
    let mut f = fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, &summary)
        .map_err(|e| HarnessError::Report(e.to_string()))?;
    writeln!(f)?;
    Ok(())
}
