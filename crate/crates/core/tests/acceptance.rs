//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use cellmesh::dse::{self, CellShape, ProcessParams, TransistorModel};
use cellmesh::fabric::{Chip, ChipConfig};
use cellmesh::graph_store::ObjectAddress;
use cellmesh::harness::{self, Mode, RunConfig, RunOutcome};
use cellmesh::operon::Operon;
use cellmesh::topology::Coord;
use cellmesh::workloads::{
    self, EdgeRecord, IdBase, IncrementSchedule, LoadOptions, SamplerConfig, SamplerKind,
    WorkloadError,
};
use cellmesh::SimError;

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    verdict: Verdict,
    elapsed: Duration,
}

/// Hashes of every report produced by criteria 1-4, keyed by run label,
/// so criterion 8 can rerun and compare.
#[derive(Default)]
struct Fingerprints(Vec<(String, String)>);

impl Fingerprints {
    fn add(&mut self, label: String, digest: String) {
        self.0.push((label, digest));
    }
}

fn sha(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn outcome_digest(outcome: &RunOutcome) -> String {
    let mut inc = Vec::new();
    harness::write_increments_csv(&outcome.report_rows(), &mut inc).unwrap();
    let mut trace = Vec::new();
    let rows = outcome
        .dynamic
        .as_ref()
        .map(|d| d.trace.as_slice())
        .unwrap_or(&[]);
    harness::write_trace_csv(rows, &mut trace).unwrap();
    format!("{}:{}", sha(&inc), sha(&trace))
}

// ---------------------------------------------------------------- graphs

/// Random graph with `n` vertices and `m` edges, no self loops.
fn random_graph(rng: &mut ChaCha8Rng, n: u32, m: usize) -> Vec<EdgeRecord> {
    (0..m)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let mut d = rng.gen_range(0..n - 1);
            if d >= s {
                d += 1;
            }
            EdgeRecord::new(s, d)
        })
        .collect()
}

/// Connected graph: a random spanning tree plus `extra` random edges, shuffled.
fn connected_graph(rng: &mut ChaCha8Rng, n: u32, extra: usize) -> Vec<EdgeRecord> {
    let mut order: Vec<u32> = (0..n).collect();
    order[1..].shuffle(rng);
    let mut edges: Vec<EdgeRecord> = (1..n as usize)
        .map(|i| EdgeRecord::new(order[rng.gen_range(0..i)], order[i]))
        .collect();
    edges.extend(random_graph(rng, n, extra));
    edges.shuffle(rng);
    edges
}

/// Preferential-attachment graph: each new vertex links to `k` earlier
/// vertices chosen proportionally to degree.
fn power_law_graph(rng: &mut ChaCha8Rng, n: u32, k: usize) -> Vec<EdgeRecord> {
    let mut ends: Vec<u32> = vec![0];
    let mut edges = Vec::new();
    for v in 1..n {
        for _ in 0..k.min(v as usize) {
            let u = ends[rng.gen_range(0..ends.len())];
            edges.push(EdgeRecord::new(v, u));
            ends.push(u);
            ends.push(v);
        }
    }
    edges.shuffle(rng);
    edges
}

// ------------------------------------------------------------ criteria 1,2

struct RandomRun {
    schedule: IncrementSchedule,
    cfg: RunConfig,
    /// Run with 16-bit levels.
    compact: bool,
    label: String,
}

fn random_runs(count: usize) -> Vec<RandomRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    (0..count)
        .map(|i| {
            let w = rng.gen_range(4..=32);
            let h = rng.gen_range(4..=32);
            let n = rng.gen_range(20..=2000u32);
            let undirected = rng.gen_bool(0.5);
            let max_m = if undirected { 10_000 } else { 20_000 };
            let m = rng.gen_range(n as usize..=max_m.min(n as usize * 12));
            let (shape, base) = match i % 3 {
                0 => ("random", random_graph(&mut rng, n, m)),
                1 => ("connected", connected_graph(&mut rng, n, m.saturating_sub(n as usize - 1))),
                _ => ("power-law", power_law_graph(&mut rng, n, (m / n as usize).max(1))),
            };
            let kind = if i % 2 == 0 { SamplerKind::Edge } else { SamplerKind::Snowball };
            let root = base[0].src;
            let sampler = SamplerConfig {
                kind,
                base_graph: base,
                increments: rng.gen_range(1..=10),
                seed: rng.gen(),
                start_vertex: Some(root),
                undirected,
            };
            let schedule = workloads::generate(&sampler).expect("sampler");
            let mut chip = ChipConfig::grid(w, h);
            chip.chunk_cap = [2, 4, 8, 16][i % 4];
            let cfg = RunConfig {
                chip,
                root_vertex: root,
                ..RunConfig::default()
            };
            let label = format!(
                "run {i}: {w}x{h} {shape} n={n} edges={} {kind:?} increments={} undirected={undirected} chunk={}",
                schedule.total_edges(),
                schedule.len(),
                chip.chunk_cap
            );
            RandomRun {
                schedule,
                cfg,
                compact: i % 5 == 4,
                label,
            }
        })
        .collect()
}

fn run_random(r: &RandomRun) -> Result<RunOutcome, String> {
    let res = if r.compact {
        harness::run::<u16>(&r.schedule, &r.cfg, Mode::Both)
    } else {
        harness::run::<u32>(&r.schedule, &r.cfg, Mode::Both)
    };
    res.map_err(|e| format!("{}: {e}", r.label))
}

fn criteria_1_and_2(fp: &mut Fingerprints) -> (Verdict, Verdict) {
    let runs = random_runs(60);
    let mut pause_rows = 0;
    let mut pause_err = None;
    let mut checked_increments = 0;
    for r in &runs {
        let out = match run_random(r) {
            Ok(o) => o,
            Err(e) => return (Err(e), Err("criterion 1 runs did not complete".into())),
        };
        let d = out.dynamic.as_ref().unwrap();
        let s = out.static_reports.as_ref().unwrap();
        for (a, b) in d.reports.iter().zip(s) {
            if a.levels_checksum != b.levels_checksum {
                return (
                    Err(format!(
                        "{}: increment {} dynamic and static levels differ",
                        r.label, a.increment
                    )),
                    Err("criterion 1 failed".into()),
                );
            }
        }
        checked_increments += d.reports.len();
        if d.boundaries.len() != r.schedule.len() {
            pause_err.get_or_insert(format!(
                "{}: {} boundaries for {} increments",
                r.label,
                d.boundaries.len(),
                r.schedule.len()
            ));
        }
        for &b in &d.boundaries {
            let row = d.trace[b];
            if row.active_cells != 0 || row.operons_in_flight != 0 {
                pause_err
                    .get_or_insert(format!("{}: boundary row {row:?} is not a pause", r.label));
            }
            pause_rows += 1;
        }
        fp.add(format!("c1 {}", r.label), outcome_digest(&out));
    }
    let c1 = Ok(format!(
        "{} randomized runs, {checked_increments} increments, dynamic and static levels equal to the reference BFS",
        runs.len()
    ));
    let c2 = match pause_err {
        Some(e) => Err(e),
        None => Ok(format!(
            "{pause_rows} increment boundaries, all with 0 active cells and 0 operons in flight"
        )),
    };
    (c1, c2)
}

// --------------------------------------------------------------- criterion 3

fn sampling_trial(seed: u64) -> Result<(u64, u64, RunOutcome, RunOutcome), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1000..=1500);
    let base = connected_graph(&mut rng, n, n as usize * 3);
    let root = 0;
    let cfg = RunConfig {
        chip: ChipConfig::grid(16, 16),
        root_vertex: root,
        ..RunConfig::default()
    };
    let mut totals = [0u64; 2];
    let mut outs = Vec::new();
    for (slot, kind) in [SamplerKind::Edge, SamplerKind::Snowball]
        .into_iter()
        .enumerate()
    {
        let s = workloads::generate(&SamplerConfig {
            kind,
            base_graph: base.clone(),
            increments: 10,
            seed,
            start_vertex: Some(root),
            undirected: true,
        })
        .map_err(|e| e.to_string())?;
        if s.total_edges() != base.len() {
            return Err(format!(
                "seed {seed}: {kind:?} schedule lost edges on a connected graph"
            ));
        }
        let out = harness::run::<u32>(&s, &cfg, Mode::Dynamic)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        totals[slot] = out
            .dynamic
            .as_ref()
            .unwrap()
            .reports
            .iter()
            .map(|r| r.actions_created)
            .sum();
        outs.push(out);
    }
    let snow = outs.pop().unwrap();
    let edge = outs.pop().unwrap();
    Ok((totals[0], totals[1], edge, snow))
}

fn criterion_3(fp: &mut Fingerprints) -> Verdict {
    let mut wins = 0;
    let mut ratios = Vec::new();
    for t in 0..10u64 {
        let (edge, snow, eo, so) = sampling_trial(1000 + t)?;
        if edge > snow {
            wins += 1;
        }
        ratios.push(edge as f64 / snow as f64);
        fp.add(format!("c3 trial {t} edge"), outcome_digest(&eo));
        fp.add(format!("c3 trial {t} snowball"), outcome_digest(&so));
    }
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    let msg = format!(
        "edge/snowball actions_created ratio > 1 in {wins}/10 trials [{}]",
        shown.join(" ")
    );
    if wins >= 9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// --------------------------------------------------------------- criterion 4

fn chip_with_roots(w: u32, h: u32) -> (Chip<u32>, Vec<ObjectAddress>) {
    let mut chip = Chip::new(ChipConfig::grid(w, h)).unwrap();
    let roots = (0..w * h)
        .map(|v| {
            let a = chip.store_mut().resolve(v, true).unwrap();
            // Level 0 makes every delivered proposal fail its predicate.
            chip.store_mut().object_mut(a).unwrap().level = 0;
            a
        })
        .collect();
    (chip, roots)
}

fn latency_pairs() -> Result<String, String> {
    let (w, h) = (32, 32);
    let (mut chip, roots) = chip_with_roots(w, h);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a7e);
    let mut csv = String::from("src_x,src_y,dst_x,dst_y,latency\n");
    for i in 0..1000 {
        let src = Coord::new(rng.gen_range(0..w), rng.gen_range(0..h));
        let dst = roots[rng.gen_range(0..roots.len())];
        let before = chip.counters().operons_delivered;
        chip.inject(Operon::bfs(dst, 1), src)
            .map_err(|e| e.to_string())?;
        let mut latency = 0;
        while chip.counters().operons_delivered == before {
            chip.step().map_err(|e| e.to_string())?;
            latency += 1;
            if latency > 10_000 {
                return Err(format!("pair {i} never delivered"));
            }
        }
        let expect = src.manhattan(dst.cc) as u64;
        if latency != expect {
            return Err(format!(
                "pair {i} {src}->{}: latency {latency}, distance {expect}",
                dst.cc
            ));
        }
        chip.run_until_quiescent(100).map_err(|e| e.to_string())?;
        csv.push_str(&format!(
            "{},{},{},{},{latency}\n",
            src.x, src.y, dst.cc.x, dst.cc.y
        ));
    }
    Ok(csv)
}

fn soak() -> Result<String, String> {
    let (w, h) = (16, 16);
    let (mut chip, roots) = chip_with_roots(w, h);
    chip.record_trace(true);
    let mut rng = ChaCha8Rng::seed_from_u64(0x50a4);
    let total = 10_000u64;
    let mut retries = 0u64;
    let guard = 1_000_000;
    let check = |chip: &Chip<u32>| -> Result<(), String> {
        let c = chip.counters();
        if c.operons_created != c.operons_delivered + chip.operons_in_flight()
            || chip.operons_in_flight() != chip.count_buffered_operons()
        {
            return Err(format!(
                "conservation broken at cycle {}: {c:?}",
                chip.cycle()
            ));
        }
        Ok(())
    };
    for _ in 0..total {
        // Half the traffic leaves one corner for the opposite corner, so
        // staging buffers fill and injection has to back off.
        let hot = rng.gen_bool(0.5);
        let src = if hot {
            Coord::new(rng.gen_range(0..4), rng.gen_range(0..4))
        } else {
            Coord::new(rng.gen_range(0..w), rng.gen_range(0..h))
        };
        let dst = if hot {
            roots[roots.len() - 1 - rng.gen_range(0..4)]
        } else {
            roots[rng.gen_range(0..roots.len())]
        };
        let level = rng.gen_range(1..100);
        loop {
            match chip.inject(Operon::bfs(dst, level), src) {
                Ok(()) => break,
                Err(SimError::Backpressure(_)) => {
                    retries += 1;
                    chip.step().map_err(|e| e.to_string())?;
                    check(&chip)?;
                    if chip.cycle() > guard {
                        return Err("soak exceeded the cycle guard while injecting".into());
                    }
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        if rng.gen_bool(0.05) {
            chip.step().map_err(|e| e.to_string())?;
            check(&chip)?;
        }
    }
    while !chip.is_quiescent() {
        chip.step().map_err(|e| e.to_string())?;
        check(&chip)?;
        if chip.cycle() > guard {
            return Err(format!("soak did not reach quiescence\n{}", chip.dump()));
        }
    }
    let c = chip.counters();
    if c.operons_created != total || c.operons_delivered != total || c.actions_executed != total {
        return Err(format!("lost operons: {c:?}"));
    }
    let mut trace = Vec::new();
    harness::write_trace_csv(&chip.take_trace(), &mut trace).unwrap();
    Ok(format!(
        "{total} operons delivered in {} cycles, {retries} backpressure retries, trace {}",
        chip.cycle(),
        sha(&trace)
    ))
}

fn criterion_4(fp: &mut Fingerprints) -> Verdict {
    let pairs = latency_pairs()?;
    fp.add("c4 latency".into(), sha(pairs.as_bytes()));
    let soak_msg = soak()?;
    fp.add("c4 soak".into(), soak_msg.clone());
    Ok(format!(
        "1000 random pairs at exactly Manhattan latency; {soak_msg}"
    ))
}

// --------------------------------------------------------------- criterion 5

fn criterion_5() -> Verdict {
    // Predicate failure.
    let mut chip = Chip::<u32>::new(ChipConfig::grid(4, 4)).unwrap();
    let v = chip.store_mut().resolve(0, true).unwrap();
    chip.store_mut().object_mut(v).unwrap().level = 2;
    chip.inject(Operon::bfs(v, 2), v.cc).unwrap();
    chip.run_until_quiescent(100).map_err(|e| e.to_string())?;
    let fail = chip.cell(v.cc).counters.cycles_active;
    if fail != 1 {
        return Err(format!("failed predicate occupied {fail} cycles"));
    }
    let mut seen = Vec::new();
    for d in [0u32, 1, 5, 20] {
        let mut chip = Chip::<u32>::new(ChipConfig::grid(8, 8)).unwrap();
        let src = chip.store_mut().resolve(0, true).unwrap();
        for t in 1..=d {
            let dst = chip.store_mut().resolve(t, true).unwrap();
            chip.store_mut().insert_edge_local(src, dst, 1).unwrap();
        }
        chip.inject(Operon::bfs(src, 3), src.cc).unwrap();
        chip.run_until_quiescent(1000).map_err(|e| e.to_string())?;
        let cycles = chip.cell(src.cc).counters.cycles_active;
        if cycles != 2 + u64::from(d) {
            return Err(format!(
                "successful action with {d} edges occupied {cycles} cycles"
            ));
        }
        if chip.counters().operons_delivered != 1 + u64::from(d) {
            return Err(format!("{d} edges: wrong number of deliveries"));
        }
        seen.push(format!("d={d}:{cycles}"));
    }
    Ok(format!(
        "predicate fail 1 cycle; success {}",
        seen.join(" ")
    ))
}

// --------------------------------------------------------------- criterion 6

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let sizes: Vec<u64> = (10..=20).map(|p| 1u64 << p).collect();
    let proc = ProcessParams::<u64>::new(91_000_000, 306).unwrap();
    let budget = proc.budget().unwrap();
    let model = TransistorModel::<u64>::default();
    let rows = dse::sweep(&sizes, CellShape::Square, &proc, &model).map_err(|e| e.to_string())?;
    let mut prev: Option<(u64, u64)> = None;
    for r in &rows {
        let c = &r.cell;
        if c.sram_tx + c.periph_tx + c.exec_tx + c.net_tx != c.total_tx {
            return Err(format!(
                "{} B: components do not sum to the total",
                c.mem_per_cell
            ));
        }
        let p = r
            .point
            .as_ref()
            .ok_or(format!("{} B infeasible", c.mem_per_cell))?;
        if p.cell_count * c.total_tx > budget {
            return Err(format!(
                "{} B: {} cells exceed the budget",
                c.mem_per_cell, p.cell_count
            ));
        }
        if let Some((cells, diam)) = prev {
            if p.cell_count > cells || p.diameter > diam {
                return Err(format!(
                    "{} B: cell count or diameter increased",
                    c.mem_per_cell
                ));
            }
        }
        prev = Some((p.cell_count, p.diameter));
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("sweep took {elapsed:?}"));
    }
    let first = rows[0].point.unwrap();
    let last = rows[rows.len() - 1].point.unwrap();
    Ok(format!(
        "{} points, cells {}->{}, diameter {}->{}, within budget {budget}, {elapsed:?}",
        rows.len(),
        first.cell_count,
        last.cell_count,
        first.diameter,
        last.diameter
    ))
}

// --------------------------------------------------------------- criterion 7

const EDGE_50K: [usize; 10] = [
    101682, 102012, 101772, 101916, 101634, 101254, 101809, 102076, 101645, 102239,
];
const SNOWBALL_50K: [usize; 10] = [
    37315, 29238, 47983, 68183, 87863, 108642, 129477, 149413, 169416, 190509,
];
const TOTAL_50K: usize = 1_018_039;

fn write_batch(path: &Path, rng: &mut ChaCha8Rng, n: usize) {
    let mut f = std::io::BufWriter::new(fs::File::create(path).unwrap());
    for _ in 0..n {
        writeln!(
            f,
            "{}\t{}\t1",
            rng.gen_range(1..=50_000u32),
            rng.gen_range(1..=50_000u32)
        )
        .unwrap();
    }
}

fn check_stats(label: &str, s: &IncrementSchedule, expected: &[usize]) -> Result<(), String> {
    let stats = workloads::schedule_stats(s);
    let sizes: Vec<usize> = stats.iter().map(|r| r.edges).collect();
    if sizes != expected {
        return Err(format!("{label}: batch sizes {sizes:?}"));
    }
    let total = stats.last().map(|r| r.cumulative_edges);
    if total != Some(TOTAL_50K) {
        return Err(format!("{label}: total {total:?}"));
    }
    Ok(())
}

fn criterion_7() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(50_000);
    let opts = LoadOptions {
        id_base: IdBase::One,
        undirected: false,
    };

    let files: Vec<_> = EDGE_50K
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let p = dir.path().join(format!("edge_50K_{}.tsv", i + 1));
            write_batch(&p, &mut rng, n);
            p
        })
        .collect();
    let edge = workloads::load_increments(&files, opts).map_err(|e| e.to_string())?;
    check_stats("edge-50K", &edge, &EDGE_50K)?;

    let single = dir.path().join("snowball_50K.tsv");
    write_batch(&single, &mut rng, TOTAL_50K);
    let index = dir.path().join("snowball_50K.index");
    fs::write(&index, SNOWBALL_50K.map(|n| format!("{n}\n")).concat()).unwrap();
    let snow = workloads::load_with_index(&single, &index, opts).map_err(|e| e.to_string())?;
    check_stats("snowball-50K", &snow, &SNOWBALL_50K)?;

    // Corrupt line 5000 of the third edge file.
    let text = fs::read_to_string(&files[2]).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[4999] = "17\tseventeen\t1";
    fs::write(&files[2], lines.join("\n")).unwrap();
    match workloads::load_increments(&files, opts) {
        Err(WorkloadError::Parse {
            line: 5000,
            ref path,
            ..
        }) if path == &files[2] => {}
        Err(e) => return Err(format!("corrupted file gave the wrong error: {e}")),
        Ok(_) => return Err("corrupted file was accepted".into()),
    }
    Ok(format!(
        "edge-50K (10 files) and snowball-50K (file + index) reproduce all batch sizes and total {TOTAL_50K}; corruption reported at line 5000"
    ))
}

// --------------------------------------------------------------- criterion 8

fn criterion_8(first: &Fingerprints) -> Verdict {
    let mut second = Fingerprints::default();
    let (a, b) = criteria_1_and_2(&mut second);
    a.and(b)?;
    criterion_3(&mut second)?;
    criterion_4(&mut second)?;
    if first.0.len() != second.0.len() {
        return Err(format!(
            "{} reports on the first pass, {} on the second",
            first.0.len(),
            second.0.len()
        ));
    }
    for ((la, da), (_, db)) in first.0.iter().zip(&second.0) {
        if da != db {
            return Err(format!("{la}: reports differ between identical runs"));
        }
    }
    // Reports written to disk are byte-identical as well.
    let run = &random_runs(1)[0];
    let out = run_random(run)?;
    let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
    harness::emit_reports(d1.path(), &out, &run.schedule, &run.cfg).map_err(|e| e.to_string())?;
    let out2 = run_random(run)?;
    harness::emit_reports(d2.path(), &out2, &run.schedule, &run.cfg).map_err(|e| e.to_string())?;
    for f in ["increments.csv", "trace.csv", "summary.json"] {
        if sha(&fs::read(d1.path().join(f)).unwrap()) != sha(&fs::read(d2.path().join(f)).unwrap())
        {
            return Err(format!("{f} differs between identical runs"));
        }
    }
    Ok(format!(
        "{} report hashes identical across two passes; report files byte-identical",
        first.0.len()
    ))
}

fn timed(id: u32, name: &'static str, f: impl FnOnce() -> Verdict) -> Criterion {
    let t = Instant::now();
    let verdict = f();
    Criterion {
        id,
        name,
        verdict,
        elapsed: t.elapsed(),
    }
}

fn main() -> ExitCode {
    let mut fp = Fingerprints::default();
    let t = Instant::now();
    let (c1, c2) = criteria_1_and_2(&mut fp);
    let c12 = t.elapsed();
    let c1 = c1.and_then(|m| {
        if c12 < Duration::from_secs(300) {
            Ok(m)
        } else {
            Err(format!("{m}, but took {c12:.1?}"))
        }
    });
    let mut results = vec![
        Criterion {
            id: 1,
            name: "oracle equivalence",
            verdict: c1,
            elapsed: c12,
        },
        Criterion {
            id: 2,
            name: "pause at increment boundaries",
            verdict: c2,
            elapsed: c12,
        },
    ];
    results.push(timed(
        3,
        "edge sampling creates more actions than snowball",
        || criterion_3(&mut fp),
    ));
    results.push(timed(4, "latency and deadlock-free soak", || {
        criterion_4(&mut fp)
    }));
    results.push(timed(5, "action cost contract", criterion_5));
    results.push(timed(6, "design-space sweep trend", criterion_6));
    results.push(timed(7, "increment schema validation", criterion_7));
    results.push(timed(8, "determinism", || criterion_8(&fp)));

    let mut failed = 0;
    for c in &results {
        let (tag, msg) = match &c.verdict {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!(
            "{tag} criterion {} ({}): {msg} [{:.1?}]",
            c.id, c.name, c.elapsed
        );
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
