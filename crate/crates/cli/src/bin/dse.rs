use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use cellmesh::dse::{self, CellShape, DseError, ProcessParams, SweepRow, TransistorModel};
use cellmesh::Scalar;
use cellmesh_cli::{parse_key_value, parse_size, report, EXIT_FAILURE, EXIT_RESOURCE};

/// Transistor-budget sizing of a square chip of compute cells.
#[derive(Parser)]
#[command(name = "dse", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a range of memory sizes per cell and write CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarKind {
    U64,
    F64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "306")]
    area_mm2: String,
    /// Transistor density in millions per mm².
    #[arg(long, default_value = "91")]
    density_mtx_mm2: String,
    #[arg(long, default_value = "square")]
    shape: CellShape,
    /// Memory sizes per cell. Defaults to powers of two from 1K to 1M.
    #[arg(long, value_delimiter = ',', value_parser = parse_size)]
    mem_sizes: Vec<u64>,
    /// Override a model coefficient, e.g. fifo_per_bit=20. Repeatable.
    #[arg(long = "model", value_parser = parse_key_value)]
    overrides: Vec<(String, String)>,
    /// Arithmetic used for the model; f64 allows fractional coefficients.
    #[arg(long, value_enum, default_value = "u64")]
    scalar: ScalarKind,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scalar<T: Scalar>(what: &str, s: &str) -> Result<T, DseError> {
    s.parse()
        .map_err(|_| DseError::InvalidProcess(format!("{what} `{s}` is not a valid number")))
}

fn sweep_rows<T: Scalar>(a: &SweepArgs, sizes: &[u64]) -> Result<Vec<SweepRow<T>>, DseError> {
    let area: T = parse_scalar("area", &a.area_mm2)?;
    let density: T = parse_scalar("density", &a.density_mtx_mm2)?;
    let per_mm2 = density * T::from_count(1_000_000);
    let proc = ProcessParams::new(per_mm2, area)?;
    let mut model = TransistorModel::<T>::default();
    for (k, v) in &a.overrides {
        model.set(k, v)?;
    }
    dse::sweep(sizes, a.shape, &proc, &model)
}

fn emit<T: Scalar>(rows: &[SweepRow<T>], out: &Option<PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            dse::write_sweep_csv(rows, f)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            dse::write_sweep_csv(rows, &mut lock)?;
            lock.flush()?;
        }
    }
    for r in rows.iter().filter(|r| !r.feasible()) {
        eprintln!(
            "warning: {} bytes per cell does not fit the budget ({} transistors per cell)",
            r.cell.mem_per_cell, r.cell.total_tx
        );
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), (anyhow::Error, u8)> {
    let sizes: Vec<u64> = if a.mem_sizes.is_empty() {
        (10..=20).map(|p| 1u64 << p).collect()
    } else {
        a.mem_sizes.clone()
    };
    let written = match a.scalar {
        ScalarKind::U64 => sweep_rows::<u64>(&a, &sizes).map(|r| emit(&r, &a.out)),
        ScalarKind::F64 => sweep_rows::<f64>(&a, &sizes).map(|r| emit(&r, &a.out)),
    };
    match written {
        Err(e) => Err((e.into(), EXIT_RESOURCE)),
        Ok(Err(e)) => Err((e, EXIT_FAILURE)),
        Ok(Ok(())) => Ok(()),
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().cmd {
        Cmd::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, code)) => report(&e, code),
    }
}
