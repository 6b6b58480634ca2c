use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use cellmesh::fabric::ChipConfig;
use cellmesh::harness::{self, HarnessError, Mode, RunConfig, RunOutcome};
use cellmesh::workloads::{
    self, IdBase, IncrementSchedule, LoadOptions, SamplerConfig, SamplerKind,
};
use cellmesh_cli::{
    harness_exit_code, internal_vertex, parse_grid, parse_size, report, EXIT_FAILURE, EXIT_RESOURCE,
};

/// Cycle-level BFS simulation on a mesh of compute cells.
#[derive(Parser)]
#[command(name = "sim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run static and/or dynamic BFS over a sequence of edge increments.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Mesh size as WxH.
    #[arg(long, default_value = "32x32", value_parser = parse_grid)]
    grid: (u32, u32),
    #[arg(long, default_value = "both")]
    mode: Mode,
    /// BFS root vertex, numbered like the input files. Defaults to the
    /// lowest id (0 or 1).
    #[arg(long)]
    root: Option<u32>,

    /// One TSV file per increment, in order.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with_all = ["edges", "generate"])]
    increments: Vec<PathBuf>,
    /// A single TSV edge file, split by --increment-index.
    #[arg(long, requires = "increment_index", conflicts_with = "generate")]
    edges: Option<PathBuf>,
    /// Edge counts per increment, one per line.
    #[arg(long)]
    increment_index: Option<PathBuf>,
    /// Sample increments from --base with this sampler (edge|snowball).
    #[arg(long, requires = "base")]
    generate: Option<SamplerKind>,
    /// Base graph for --generate.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    num_increments: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Snowball start vertex, numbered like the input files; defaults to --root.
    #[arg(long)]
    start: Option<u32>,

    /// Whether vertex ids in the input files start at 0 or 1.
    #[arg(long)]
    id_base: IdBase,
    /// Insert every record in both directions.
    #[arg(long)]
    undirected: bool,

    #[arg(long, default_value_t = 8)]
    chunk_cap: usize,
    #[arg(long, default_value_t = 4)]
    fifo_depth: usize,
    #[arg(long, default_value_t = 4)]
    staging_depth: usize,
    /// Memory per cell, e.g. 64K.
    #[arg(long, default_value = "64K", value_parser = parse_size)]
    mem_per_cell: u64,
    /// Non-termination guard per increment.
    #[arg(long, default_value_t = 10_000_000)]
    max_cycles: u64,
    /// Width of the stored BFS level: 16, 32 or 64.
    #[arg(long, default_value_t = 32)]
    level_bits: u32,
    /// Skip the reference BFS check.
    #[arg(long)]
    no_verify: bool,
    /// Directory for increments.csv, trace.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
}

/// Root vertex as an internal id.
fn root_vertex(a: &RunArgs) -> anyhow::Result<u32> {
    match a.root {
        Some(r) => internal_vertex(r, a.id_base).map_err(anyhow::Error::msg),
        None => Ok(0),
    }
}

fn load_schedule(a: &RunArgs) -> anyhow::Result<IncrementSchedule> {
    let opts = LoadOptions {
        id_base: a.id_base,
        undirected: a.undirected,
    };
    if !a.increments.is_empty() {
        return Ok(workloads::load_increments(&a.increments, opts)?);
    }
    if let (Some(edges), Some(index)) = (&a.edges, &a.increment_index) {
        return Ok(workloads::load_with_index(edges, index, opts)?);
    }
    if let (Some(kind), Some(base)) = (a.generate, &a.base) {
        let cfg = SamplerConfig {
            kind,
            base_graph: workloads::load_edge_file(base, a.id_base)?,
            increments: a.num_increments,
            seed: a.seed,
            start_vertex: Some(match a.start {
                Some(s) => internal_vertex(s, a.id_base).map_err(anyhow::Error::msg)?,
                None => root_vertex(a)?,
            }),
            undirected: a.undirected,
        };
        return Ok(workloads::generate(&cfg)?);
    }
    Err(anyhow!(
        "give --increments, --edges with --increment-index, or --generate with --base"
    ))
}

fn print_rows(outcome: &RunOutcome) {
    println!(
        "{:>9} {:>8} {:>10} {:>15} {:>16} {:>17}  checksum",
        "increment", "mode", "cycles", "actions_created", "actions_executed", "operons_delivered"
    );
    for r in outcome.report_rows() {
        println!(
            "{:>9} {:>8} {:>10} {:>15} {:>16} {:>17}  {}",
            r.increment,
            r.mode,
            r.cycles,
            r.actions_created,
            r.actions_executed,
            r.operons_delivered,
            r.levels_checksum
        );
    }
}

fn run(a: RunArgs) -> Result<(), (anyhow::Error, u8)> {
    let schedule = load_schedule(&a).map_err(|e| (e, EXIT_FAILURE))?;
    let root = root_vertex(&a).map_err(|e| (e, EXIT_RESOURCE))?;
    let cfg = RunConfig {
        chip: ChipConfig {
            width: a.grid.0,
            height: a.grid.1,
            link_fifo_depth: a.fifo_depth,
            staging_depth: a.staging_depth,
            chunk_cap: a.chunk_cap,
            mem_per_cell: a.mem_per_cell,
            ..ChipConfig::default()
        },
        root_vertex: root,
        max_cycles: a.max_cycles,
        verify: !a.no_verify,
        record_trace: true,
    };
    let result = match a.level_bits {
        16 => harness::run::<u16>(&schedule, &cfg, a.mode),
        32 => harness::run::<u32>(&schedule, &cfg, a.mode),
        64 => harness::run::<u64>(&schedule, &cfg, a.mode),
        n => Err(HarnessError::Config(format!(
            "level bits must be 16, 32 or 64, got {n}"
        ))),
    };
    let outcome = result.map_err(|e| {
        let code = harness_exit_code(&e);
        (anyhow::Error::new(e), code)
    })?;
    print_rows(&outcome);
    harness::emit_reports(&a.out, &outcome, &schedule, &cfg)
        .with_context(|| format!("writing reports to {}", a.out.display()))
        .map_err(|e| (e, EXIT_FAILURE))?;
    eprintln!("reports written to {}", a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, code)) => report(&e, code),
    }
}
