//! Edge-list increments: TSV ingestion, edge and snowball samplers and
//! per-increment statistics.
//!
//! TSV format: one edge per line, `src<TAB>dst[<TAB>weight]`. Lines starting
//! with `#` and blank lines are skipped. Vertex ids are 0- or 1-based as
//! stated by the caller, never guessed.

use std::collections::{BTreeSet, VecDeque};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::VertexId;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{0}: no edges")]
    EmptyFile(PathBuf),
    #[error("increment index lists {listed} edges but the edge file has {actual}")]
    IndexMismatch { listed: usize, actual: usize },
    #[error("base graph has no edges")]
    EmptyBase,
    #[error("start vertex {0} does not appear in the base graph")]
    MissingStart(VertexId),
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("csv output failed: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeRecord {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: u32,
}

impl EdgeRecord {
    pub fn new(src: VertexId, dst: VertexId) -> Self {
        Self {
            src,
            dst,
            weight: 1,
        }
    }

    pub fn reversed(self) -> Self {
        Self {
            src: self.dst,
            dst: self.src,
            weight: self.weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdBase {
    #[default]
    Zero,
    One,
}

impl FromStr for IdBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(IdBase::Zero),
            "1" => Ok(IdBase::One),
            other => Err(format!("id base must be 0 or 1, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    pub id_base: IdBase,
    /// Feed every record to the simulator in both directions.
    pub undirected: bool,
}

/// Ordered edge batches. Records are kept as read; [`Self::directed_batch`]
/// applies symmetrization for undirected datasets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IncrementSchedule {
    pub increments: Vec<Vec<EdgeRecord>>,
    /// One past the largest vertex id.
    pub vertex_count_hint: u32,
    pub undirected: bool,
}

impl IncrementSchedule {
    pub fn new(increments: Vec<Vec<EdgeRecord>>, undirected: bool) -> Self {
        let vertex_count_hint = increments
            .iter()
            .flatten()
            .map(|e| e.src.max(e.dst) + 1)
            .max()
            .unwrap_or(0);
        Self {
            increments,
            vertex_count_hint,
            undirected,
        }
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn total_edges(&self) -> usize {
        self.increments.iter().map(Vec::len).sum()
    }

    /// Directed edges of increment `k` in insertion order. An undirected
    /// record `(u, v)` yields `(u, v)` then `(v, u)`.
    pub fn directed_batch(&self, k: usize) -> impl Iterator<Item = EdgeRecord> + '_ {
        let undirected = self.undirected;
        self.increments[k].iter().flat_map(move |&e| {
            let rev = (undirected && e.src != e.dst).then(|| e.reversed());
            std::iter::once(e).chain(rev)
        })
    }

    /// Directed edges of increments `0..k`.
    pub fn accumulated(&self, k: usize) -> Vec<EdgeRecord> {
        (0..k.min(self.len()))
            .flat_map(|i| self.directed_batch(i))
            .collect()
    }
}

fn parse_id(tok: &str, base: IdBase) -> Result<VertexId, String> {
    let raw: u64 = tok
        .parse()
        .map_err(|_| format!("`{tok}` is not a vertex id"))?;
    let id = match base {
        IdBase::Zero => raw,
        IdBase::One => raw
            .checked_sub(1)
            .ok_or_else(|| "vertex id 0 in a 1-based file".to_string())?,
    };
    VertexId::try_from(id).map_err(|_| format!("vertex id {raw} out of range"))
}

fn parse_weight(tok: &str) -> Result<u32, String> {
    if let Ok(w) = tok.parse::<u32>() {
        return Ok(w);
    }
    match tok.parse::<f64>() {
        Ok(w) if w >= 0.0 && w.fract() == 0.0 && w <= f64::from(u32::MAX) => Ok(w as u32),
        _ => Err(format!("`{tok}` is not a non-negative integer weight")),
    }
}

/// Parse a TSV edge list. `path` is used for error messages only.
pub fn parse_edges<R: BufRead>(
    reader: R,
    path: &Path,
    id_base: IdBase,
) -> Result<Vec<EdgeRecord>, WorkloadError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| WorkloadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| WorkloadError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!(
                "expected `src<TAB>dst[<TAB>weight]`, found {} field(s)",
                fields.len()
            )));
        }
        let src = parse_id(fields[0], id_base).map_err(err)?;
        let dst = parse_id(fields[1], id_base).map_err(err)?;
        let weight = match fields.get(2) {
            Some(w) => parse_weight(w).map_err(err)?,
            None => 1,
        };
        out.push(EdgeRecord { src, dst, weight });
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<File>, WorkloadError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| WorkloadError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_edge_file(path: &Path, id_base: IdBase) -> Result<Vec<EdgeRecord>, WorkloadError> {
    let edges = parse_edges(open(path)?, path, id_base)?;
    if edges.is_empty() {
        return Err(WorkloadError::EmptyFile(path.to_path_buf()));
    }
    Ok(edges)
}

/// One increment per file, in the given order.
pub fn load_increments<P: AsRef<Path>>(
    paths: &[P],
    opts: LoadOptions,
) -> Result<IncrementSchedule, WorkloadError> {
    let increments = paths
        .iter()
        .map(|p| load_edge_file(p.as_ref(), opts.id_base))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IncrementSchedule::new(increments, opts.undirected))
}

/// One edge file split by an index file holding one edge count per line.
pub fn load_with_index(
    edges: &Path,
    index: &Path,
    opts: LoadOptions,
) -> Result<IncrementSchedule, WorkloadError> {
    let all = load_edge_file(edges, opts.id_base)?;
    let mut counts = Vec::new();
    for (i, line) in open(index)?.lines().enumerate() {
        let line = line.map_err(|source| WorkloadError::Io {
            path: index.to_path_buf(),
            source,
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        counts.push(t.parse::<usize>().map_err(|_| WorkloadError::Parse {
            path: index.to_path_buf(),
            line: i + 1,
            msg: format!("`{t}` is not an edge count"),
        })?);
    }
    let listed: usize = counts.iter().sum();
    if listed != all.len() {
        return Err(WorkloadError::IndexMismatch {
            listed,
            actual: all.len(),
        });
    }
    let mut rest = all.as_slice();
    let increments = counts
        .into_iter()
        .map(|n| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        })
        .collect();
    Ok(IncrementSchedule::new(increments, opts.undirected))
}

pub fn write_tsv<W: Write>(edges: &[EdgeRecord], mut out: W, id_base: IdBase) -> io::Result<()> {
    let off = match id_base {
        IdBase::Zero => 0u64,
        IdBase::One => 1,
    };
    for e in edges {
        writeln!(
            out,
            "{}\t{}\t{}",
            u64::from(e.src) + off,
            u64::from(e.dst) + off,
            e.weight
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Edge,
    Snowball,
}

impl FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" => Ok(SamplerKind::Edge),
            "snowball" => Ok(SamplerKind::Snowball),
            other => Err(format!("unknown sampler `{other}` (edge|snowball)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub base_graph: Vec<EdgeRecord>,
    pub increments: usize,
    pub seed: u64,
    /// Snowball start; defaults to the source of the first base record.
    pub start_vertex: Option<VertexId>,
    pub undirected: bool,
}

impl SamplerConfig {
    fn validate(&self) -> Result<(), WorkloadError> {
        if self.increments == 0 {
            return Err(WorkloadError::Config(
                "increments must be at least 1".into(),
            ));
        }
        if self.base_graph.is_empty() {
            return Err(WorkloadError::EmptyBase);
        }
        Ok(())
    }
}

/// Split `items` into `parts` contiguous batches whose sizes differ by at most one.
pub fn split_even<T: Clone>(items: &[T], parts: usize) -> Vec<Vec<T>> {
    let (q, r) = (items.len() / parts, items.len() % parts);
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let n = q + usize::from(i < r);
            let batch = items[start..start + n].to_vec();
            start += n;
            batch
        })
        .collect()
}

/// Base edges in a seeded uniform random order, split into near-equal batches.
pub fn gen_edge_sampled(cfg: &SamplerConfig) -> Result<IncrementSchedule, WorkloadError> {
    if cfg.kind != SamplerKind::Edge {
        return Err(WorkloadError::Config(
            "edge sampler called with a snowball config".into(),
        ));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut edges = cfg.base_graph.clone();
    edges.shuffle(&mut rng);
    Ok(IncrementSchedule::new(
        split_even(&edges, cfg.increments),
        cfg.undirected,
    ))
}

/// Snowball discovery from a start vertex.
///
/// Vertices are ranked by a BFS over the base graph (records read as
/// undirected) whose neighbor order is shuffled under the seed. An edge
/// appears once its later-discovered endpoint is discovered, so it is
/// ordered by `(max rank, min rank)`. Increment `k` holds the edges whose
/// later endpoint falls in the `k`-th equal slice of discovered vertices,
/// mirroring a staged snowball sample. Records not reachable from the start
/// are dropped.
pub fn gen_snowball(cfg: &SamplerConfig) -> Result<IncrementSchedule, WorkloadError> {
    if cfg.kind != SamplerKind::Snowball {
        return Err(WorkloadError::Config(
            "snowball sampler called with an edge config".into(),
        ));
    }
    cfg.validate()?;
    let start = cfg.start_vertex.unwrap_or(cfg.base_graph[0].src);
    let n = cfg
        .base_graph
        .iter()
        .map(|e| e.src.max(e.dst) as usize + 1)
        .max()
        .unwrap_or(0);
    if start as usize >= n
        || !cfg
            .base_graph
            .iter()
            .any(|e| e.src == start || e.dst == start)
    {
        return Err(WorkloadError::MissingStart(start));
    }

    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for e in &cfg.base_graph {
        adj[e.src as usize].push(e.dst);
        if e.src != e.dst {
            adj[e.dst as usize].push(e.src);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rank = vec![usize::MAX; n];
    let mut queue = VecDeque::from([start]);
    rank[start as usize] = 0;
    let mut discovered = 1;
    while let Some(u) = queue.pop_front() {
        let mut nbrs = std::mem::take(&mut adj[u as usize]);
        nbrs.shuffle(&mut rng);
        for w in nbrs {
            if rank[w as usize] == usize::MAX {
                rank[w as usize] = discovered;
                discovered += 1;
                queue.push_back(w);
            }
        }
    }

    let mut keyed: Vec<(usize, usize, usize)> = cfg
        .base_graph
        .iter()
        .enumerate()
        .filter(|(_, e)| rank[e.src as usize] != usize::MAX)
        .map(|(i, e)| {
            let (a, b) = (rank[e.src as usize], rank[e.dst as usize]);
            (a.max(b), a.min(b), i)
        })
        .collect();
    keyed.sort_unstable();

    let parts = cfg.increments;
    let mut increments = vec![Vec::new(); parts];
    for (later, _, i) in keyed {
        // Slice k covers ranks [k*d/parts, (k+1)*d/parts).
        let k = (later * parts / discovered).min(parts - 1);
        increments[k].push(cfg.base_graph[i]);
    }
    Ok(IncrementSchedule::new(increments, cfg.undirected))
}

pub fn generate(cfg: &SamplerConfig) -> Result<IncrementSchedule, WorkloadError> {
    match cfg.kind {
        SamplerKind::Edge => gen_edge_sampled(cfg),
        SamplerKind::Snowball => gen_snowball(cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IncrementStats {
    /// 1-based.
    pub increment: usize,
    pub edges: usize,
    pub cumulative_edges: usize,
    /// Distinct endpoints over increments `1..=increment`.
    pub distinct_vertices: usize,
}

pub const STATS_CSV_HEADER: &str = "increment,edges,cumulative_edges,distinct_vertices";

/// Record counts as loaded (before symmetrization).
pub fn schedule_stats(schedule: &IncrementSchedule) -> Vec<IncrementStats> {
    let mut seen = BTreeSet::new();
    let mut cumulative = 0;
    schedule
        .increments
        .iter()
        .enumerate()
        .map(|(i, batch)| {
            cumulative += batch.len();
            for e in batch {
                seen.insert(e.src);
                seen.insert(e.dst);
            }
            IncrementStats {
                increment: i + 1,
                edges: batch.len(),
                cumulative_edges: cumulative,
                distinct_vertices: seen.len(),
            }
        })
        .collect()
}

pub fn write_stats_csv<W: Write>(stats: &[IncrementStats], out: W) -> Result<(), WorkloadError> {
    let mut wtr = csv::Writer::from_writer(out);
    if stats.is_empty() {
        wtr.write_record(STATS_CSV_HEADER.split(','))
            .map_err(|e| WorkloadError::Csv(e.to_string()))?;
    }
    for s in stats {
        wtr.serialize(s)
            .map_err(|e| WorkloadError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| WorkloadError::Csv(e.to_string()))
}
