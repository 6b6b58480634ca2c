use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cellmesh::workloads::{self, IdBase, LoadOptions, SamplerConfig, SamplerKind};
use cellmesh_cli::{internal_vertex, report, EXIT_FAILURE};

/// Build and inspect edge-increment workloads.
#[derive(Parser)]
#[command(name = "workload", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a base graph into increments and write one TSV per increment.
    Gen(GenArgs),
    /// Per-increment edge and vertex counts as CSV.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: SamplerKind,
    /// Base graph TSV.
    #[arg(long)]
    base: PathBuf,
    #[arg(long, default_value_t = 10)]
    increments: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Snowball start vertex (same id base as the file).
    #[arg(long)]
    start: Option<u32>,
    #[arg(long)]
    id_base: IdBase,
    /// Output directory; files are named inc_01.tsv, inc_02.tsv, ...
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// One TSV per increment, in order.
    #[arg(long, value_delimiter = ',', num_args = 1.., required_unless_present = "edges")]
    increments: Vec<PathBuf>,
    #[arg(long, requires = "increment_index", conflicts_with = "increments")]
    edges: Option<PathBuf>,
    #[arg(long)]
    increment_index: Option<PathBuf>,
    #[arg(long)]
    id_base: IdBase,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    let cfg = SamplerConfig {
        kind: a.kind,
        base_graph: workloads::load_edge_file(&a.base, a.id_base)?,
        increments: a.increments,
        seed: a.seed,
        start_vertex: a
            .start
            .map(|s| internal_vertex(s, a.id_base))
            .transpose()
            .map_err(anyhow::Error::msg)?,
        undirected: false,
    };
    let schedule = workloads::generate(&cfg)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let width = schedule.len().to_string().len().max(2);
    for (i, batch) in schedule.increments.iter().enumerate() {
        let path = a.out.join(format!("inc_{:0width$}.tsv", i + 1));
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(f);
        workloads::write_tsv(batch, &mut w, a.id_base)?;
        w.flush()?;
    }
    let dropped = cfg.base_graph.len() - schedule.total_edges();
    eprintln!(
        "wrote {} increments ({} edges) to {}",
        schedule.len(),
        schedule.total_edges(),
        a.out.display()
    );
    if dropped > 0 {
        eprintln!("{dropped} edges unreachable from the start vertex were left out");
    }
    Ok(())
}

fn stats(a: StatsArgs) -> anyhow::Result<()> {
    let opts = LoadOptions {
        id_base: a.id_base,
        undirected: false,
    };
    let schedule = match (&a.edges, &a.increment_index) {
        (Some(e), Some(i)) => workloads::load_with_index(e, i, opts)?,
        _ => workloads::load_increments(&a.increments, opts)?,
    };
    let rows = workloads::schedule_stats(&schedule);
    match &a.out {
        Some(p) => workloads::write_stats_csv(
            &rows,
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )?,
        None => workloads::write_stats_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, EXIT_FAILURE),
    }
}
