//! Transistor-budget model of a single compute cell and the square chip
//! that fits a die-area budget.
//!
//! A cell is four blocks: SRAM bitcells, SRAM periphery (decoders, drivers,
//! sense amps, output registers), the execution unit and the network
//! (link FIFOs plus router). The chip is the largest `g × g` grid of
//! identical cells whose summed transistor count fits within
//! `floor(die_area × density)`.
//!
//! All arithmetic is generic over [`Scalar`]; use `u64` for exact counts
//! and `f64` when coefficients are fractional.

use std::cmp::Ordering;
use std::io::Write;
use std::str::FromStr;

use num_integer::Roots;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DseError {
    #[error("invalid memory configuration: {0}")]
    InvalidMemory(String),
    #[error("invalid process parameters: {0}")]
    InvalidProcess(String),
    #[error("invalid transistor model: {0}")]
    InvalidModel(String),
    #[error("a cell needs at least one channel")]
    NoChannels,
    #[error(
        "infeasible design point: one cell needs {cell_tx} transistors but the budget is {budget}"
    )]
    Infeasible { cell_tx: String, budget: String },
    #[error("sweep needs at least one memory size")]
    EmptySweep,
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// Tessellation shape of a compute cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellShape {
    Square,
    Triangle,
    Hexagon,
}

impl FromStr for CellShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(CellShape::Square),
            "triangle" => Ok(CellShape::Triangle),
            "hexagon" | "hex" => Ok(CellShape::Hexagon),
            other => Err(format!("unknown cell shape `{other}`")),
        }
    }
}

/// Number of neighbor channels a cell of the given shape forms.
pub fn channels_for_shape(shape: CellShape) -> u32 {
    match shape {
        CellShape::Square => 4,
        CellShape::Triangle => 3,
        CellShape::Hexagon => 6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParams<T> {
    /// Transistors per mm².
    pub transistor_density: T,
    /// mm².
    pub die_area: T,
}

impl<T: Scalar> ProcessParams<T> {
    pub fn new(transistor_density: T, die_area: T) -> Result<Self, DseError> {
        if !is_positive(transistor_density) || !is_positive(die_area) {
            return Err(DseError::InvalidProcess(format!(
                "density {transistor_density} and area {die_area} must both be positive"
            )));
        }
        Ok(Self {
            transistor_density,
            die_area,
        })
    }

    /// `floor(die_area × density)`.
    pub fn budget(&self) -> Result<T, DseError> {
        (self.die_area * self.transistor_density)
            .floor()
            .ok_or_else(|| DseError::InvalidProcess("budget does not fit in a u64".into()))
    }
}

impl ProcessParams<u64> {
    /// 7 nm-class density (91 Mtx/mm²) on a 306 mm² die.
    pub fn n7_306mm2() -> Self {
        Self {
            transistor_density: 91_000_000,
            die_area: 306,
        }
    }
}

impl ProcessParams<f64> {
    pub fn n7_306mm2() -> Self {
        Self {
            transistor_density: 91.0e6,
            die_area: 306.0,
        }
    }
}

/// Per-cell SRAM organization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryConfig {
    pub bytes_per_cell: u64,
    pub banks: u32,
    /// Data I/O width of each bank.
    pub word_bits: u32,
    pub bitcell_transistors: u32,
}

impl MemoryConfig {
    /// Four banks of 64-bit words, 8T bitcells.
    pub fn with_capacity(bytes_per_cell: u64) -> Self {
        Self {
            bytes_per_cell,
            banks: 4,
            word_bits: 64,
            bitcell_transistors: 8,
        }
    }

    pub fn validate(&self, flit_bits: u32) -> Result<(), DseError> {
        if self.banks == 0 {
            return Err(DseError::InvalidMemory("banks must be at least 1".into()));
        }
        if self.word_bits == 0 {
            return Err(DseError::InvalidMemory(
                "word width must be positive".into(),
            ));
        }
        if !self.bytes_per_cell.is_multiple_of(u64::from(self.banks)) {
            return Err(DseError::InvalidMemory(format!(
                "{} bytes do not split evenly over {} banks",
                self.bytes_per_cell, self.banks
            )));
        }
        if u64::from(self.word_bits) * u64::from(self.banks) != u64::from(flit_bits) {
            return Err(DseError::InvalidMemory(format!(
                "{} banks × {} bits must equal the {}-bit flit",
                self.banks, self.word_bits, flit_bits
            )));
        }
        Ok(())
    }

    /// Addressable words in one bank. Errors when a bank would hold zero
    /// words or a fractional word.
    pub fn words_per_bank(&self) -> Result<u64, DseError> {
        if self.banks == 0 {
            return Err(DseError::InvalidMemory("banks must be at least 1".into()));
        }
        let bank_bits = self.bytes_per_cell * 8 / u64::from(self.banks);
        if bank_bits == 0 || self.word_bits == 0 {
            return Err(DseError::InvalidMemory("zero-capacity bank".into()));
        }
        if !bank_bits.is_multiple_of(u64::from(self.word_bits))
            || !(self.bytes_per_cell * 8).is_multiple_of(u64::from(self.banks))
        {
            return Err(DseError::InvalidMemory(format!(
                "{} bytes over {} banks is not a whole number of {}-bit words",
                self.bytes_per_cell, self.banks, self.word_bits
            )));
        }
        Ok(bank_bits / u64::from(self.word_bits))
    }

    /// Word-address width of one bank.
    pub fn bank_addr_bits(&self) -> Result<u32, DseError> {
        self.words_per_bank().map(ceil_log2)
    }

    /// Byte-address width of the whole cell memory, which sets the
    /// execution unit's address register width.
    pub fn cell_addr_bits(&self) -> u32 {
        ceil_log2(self.bytes_per_cell)
    }
}

/// `ceil(log2(n))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
/// False for zero, negatives and NaN.
fn is_positive<T: Scalar>(v: T) -> bool {
    v.partial_cmp(&T::zero()) == Some(Ordering::Greater)
}

pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Coefficients of the per-cell transistor model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransistorModel<T> {
    /// Instruction queue, decoder, ALU/FPU: everything in the execution
    /// unit that does not scale with memory.
    pub exec_fixed: T,
    pub exec_per_addr_bit: T,
    pub periph_per_addr_bit_per_bank: T,
    pub periph_fixed_per_bank: T,
    pub fifo_per_bit: T,
    pub router_fixed_per_link: T,
    pub flit_bits: u32,
    pub fifo_depth: u32,
}

impl<T: Scalar> Default for TransistorModel<T> {
    fn default() -> Self {
        Self {
            exec_fixed: T::from_count(100_000),
            exec_per_addr_bit: T::from_count(2_000),
            periph_per_addr_bit_per_bank: T::from_count(1_500),
            periph_fixed_per_bank: T::from_count(20_000),
            fifo_per_bit: T::from_count(24),
            router_fixed_per_link: T::from_count(10_000),
            flit_bits: 256,
            fifo_depth: 4,
        }
    }
}

impl<T: Scalar> TransistorModel<T> {
    pub const KEYS: [&'static str; 8] = [
        "exec_fixed",
        "exec_per_addr_bit",
        "periph_per_addr_bit_per_bank",
        "periph_fixed_per_bank",
        "fifo_per_bit",
        "router_fixed_per_link",
        "flit_bits",
        "fifo_depth",
    ];

    /// Override one coefficient by name, as used by `--model key=value`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), DseError> {
        let bad = |v: &str| DseError::InvalidModel(format!("cannot parse `{v}` for `{key}`"));
        let scalar = |v: &str| v.parse::<T>().map_err(|_| bad(v));
        match key {
            "exec_fixed" => self.exec_fixed = scalar(value)?,
            "exec_per_addr_bit" => self.exec_per_addr_bit = scalar(value)?,
            "periph_per_addr_bit_per_bank" => self.periph_per_addr_bit_per_bank = scalar(value)?,
            "periph_fixed_per_bank" => self.periph_fixed_per_bank = scalar(value)?,
            "fifo_per_bit" => self.fifo_per_bit = scalar(value)?,
            "router_fixed_per_link" => self.router_fixed_per_link = scalar(value)?,
            "flit_bits" => self.flit_bits = value.parse().map_err(|_| bad(value))?,
            "fifo_depth" => self.fifo_depth = value.parse().map_err(|_| bad(value))?,
            _ => {
                return Err(DseError::InvalidModel(format!(
                    "unknown coefficient `{key}` (expected one of {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), DseError> {
        let coeffs = [
            ("exec_fixed", self.exec_fixed),
            ("exec_per_addr_bit", self.exec_per_addr_bit),
            (
                "periph_per_addr_bit_per_bank",
                self.periph_per_addr_bit_per_bank,
            ),
            ("periph_fixed_per_bank", self.periph_fixed_per_bank),
            ("fifo_per_bit", self.fifo_per_bit),
            ("router_fixed_per_link", self.router_fixed_per_link),
        ];
        for (name, v) in coeffs {
            if v.partial_cmp(&T::zero()).is_none_or(Ordering::is_lt) {
                return Err(DseError::InvalidModel(format!(
                    "{name} must be non-negative"
                )));
            }
        }
        if self.flit_bits == 0 {
            return Err(DseError::InvalidModel("flit_bits must be positive".into()));
        }
        Ok(())
    }
}

pub fn sram_transistors<T: Scalar>(mem: &MemoryConfig) -> T {
    T::from_count(mem.bytes_per_cell)
        * T::from_count(8)
        * T::from_count(u64::from(mem.bitcell_transistors))
}

pub fn periphery_transistors<T: Scalar>(
    mem: &MemoryConfig,
    model: &TransistorModel<T>,
) -> Result<T, DseError> {
    let addr_bits = mem.bank_addr_bits()?;
    let per_bank = model.periph_fixed_per_bank
        + T::from_count(u64::from(addr_bits)) * model.periph_per_addr_bit_per_bank;
    Ok(T::from_count(u64::from(mem.banks)) * per_bank)
}

pub fn execution_transistors<T: Scalar>(addr_bits: u32, model: &TransistorModel<T>) -> T {
    model.exec_fixed + T::from_count(u64::from(addr_bits)) * model.exec_per_addr_bit
}

pub fn network_transistors<T: Scalar>(
    channels: u32,
    model: &TransistorModel<T>,
) -> Result<T, DseError> {
    if channels == 0 {
        return Err(DseError::NoChannels);
    }
    let fifo_bits = T::from_count(u64::from(model.fifo_depth) * u64::from(model.flit_bits));
    let per_link = fifo_bits * model.fifo_per_bit + model.router_fixed_per_link;
    Ok(T::from_count(u64::from(channels)) * per_link)
}

/// Per-cell transistor breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBreakdown<T> {
    pub mem_per_cell: u64,
    pub sram_tx: T,
    pub periph_tx: T,
    pub exec_tx: T,
    pub net_tx: T,
    pub total_tx: T,
}

pub fn cell_breakdown<T: Scalar>(
    mem: &MemoryConfig,
    shape: CellShape,
    model: &TransistorModel<T>,
) -> Result<CellBreakdown<T>, DseError> {
    model.validate()?;
    mem.validate(model.flit_bits)?;
    let sram_tx = sram_transistors(mem);
    let periph_tx = periphery_transistors(mem, model)?;
    let exec_tx = execution_transistors(mem.cell_addr_bits(), model);
    let net_tx = network_transistors(channels_for_shape(shape), model)?;
    Ok(CellBreakdown {
        mem_per_cell: mem.bytes_per_cell,
        sram_tx,
        periph_tx,
        exec_tx,
        net_tx,
        total_tx: sram_tx + periph_tx + exec_tx + net_tx,
    })
}

/// One feasible chip configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint<T> {
    pub cell: CellBreakdown<T>,
    pub cell_count: u64,
    pub grid_w: u64,
    pub grid_h: u64,
    pub diameter: u64,
    pub total_memory: u64,
}

impl<T: Scalar> DesignPoint<T> {
    pub fn mem_per_cell(&self) -> u64 {
        self.cell.mem_per_cell
    }

    pub fn total_tx(&self) -> T {
        self.cell.total_tx
    }
}

/// Largest square grid of `cell` that fits `budget`.
fn square_grid<T: Scalar>(cell: CellBreakdown<T>, budget: T) -> Result<DesignPoint<T>, DseError> {
    let infeasible = || DseError::Infeasible {
        cell_tx: cell.total_tx.to_string(),
        budget: budget.to_string(),
    };
    if !is_positive(cell.total_tx) || cell.total_tx > budget {
        return Err(infeasible());
    }
    let max_cells = (budget / cell.total_tx)
        .floor_count()
        .ok_or_else(infeasible)?;
    let mut g = max_cells.sqrt();
    // Float division can round up across an integer boundary; step back if so.
    while g > 0 && T::from_count(g * g) * cell.total_tx > budget {
        g -= 1;
    }
    if g == 0 {
        return Err(infeasible());
    }
    Ok(DesignPoint {
        cell,
        cell_count: g * g,
        grid_w: g,
        grid_h: g,
        diameter: 2 * (g - 1),
        total_memory: g * g * cell.mem_per_cell,
    })
}

/// Design point with the default four-bank, 64-bit, 8T memory organization.
pub fn design_point<T: Scalar>(
    mem_per_cell: u64,
    shape: CellShape,
    proc: &ProcessParams<T>,
    model: &TransistorModel<T>,
) -> Result<DesignPoint<T>, DseError> {
    design_point_with(
        &MemoryConfig::with_capacity(mem_per_cell),
        shape,
        proc,
        model,
    )
}

pub fn design_point_with<T: Scalar>(
    mem: &MemoryConfig,
    shape: CellShape,
    proc: &ProcessParams<T>,
    model: &TransistorModel<T>,
) -> Result<DesignPoint<T>, DseError> {
    if mem.bytes_per_cell == 0 {
        return Err(DseError::InvalidMemory(
            "memory per cell must be positive".into(),
        ));
    }
    let cell = cell_breakdown(mem, shape, model)?;
    square_grid(cell, proc.budget()?)
}

/// One row of a sweep. Infeasible points keep their breakdown and carry
/// no layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub cell: CellBreakdown<T>,
    pub point: Option<DesignPoint<T>>,
}

impl<T: Scalar> SweepRow<T> {
    pub fn feasible(&self) -> bool {
        self.point.is_some()
    }
}

pub fn sweep<T: Scalar>(
    mem_sizes: &[u64],
    shape: CellShape,
    proc: &ProcessParams<T>,
    model: &TransistorModel<T>,
) -> Result<Vec<SweepRow<T>>, DseError> {
    if mem_sizes.is_empty() {
        return Err(DseError::EmptySweep);
    }
    let budget = proc.budget()?;
    mem_sizes
        .iter()
        .map(|&bytes| {
            if bytes == 0 {
                return Err(DseError::InvalidMemory(
                    "memory per cell must be positive".into(),
                ));
            }
            let cell = cell_breakdown(&MemoryConfig::with_capacity(bytes), shape, model)?;
            match square_grid(cell, budget) {
                Ok(point) => Ok(SweepRow {
                    cell,
                    point: Some(point),
                }),
                Err(DseError::Infeasible { .. }) => Ok(SweepRow { cell, point: None }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "mem_per_cell_bytes,sram_tx,periph_tx,exec_tx,net_tx,total_tx,cell_count,grid_w,grid_h,diameter,total_memory_bytes,feasible";

#[derive(Serialize)]
struct CsvRow<T> {
    mem_per_cell_bytes: u64,
    sram_tx: T,
    periph_tx: T,
    exec_tx: T,
    net_tx: T,
    total_tx: T,
    cell_count: u64,
    grid_w: u64,
    grid_h: u64,
    diameter: u64,
    total_memory_bytes: u64,
    feasible: bool,
}

pub fn write_sweep_csv<T: Scalar, W: Write>(rows: &[SweepRow<T>], out: W) -> Result<(), DseError> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in rows {
        let c = &row.cell;
        let (cell_count, grid_w, grid_h, diameter, total_memory_bytes) = match &row.point {
            Some(p) => (p.cell_count, p.grid_w, p.grid_h, p.diameter, p.total_memory),
            None => (0, 0, 0, 0, 0),
        };
        wtr.serialize(CsvRow {
            mem_per_cell_bytes: c.mem_per_cell,
            sram_tx: c.sram_tx,
            periph_tx: c.periph_tx,
            exec_tx: c.exec_tx,
            net_tx: c.net_tx,
            total_tx: c.total_tx,
            cell_count,
            grid_w,
            grid_h,
            diameter,
            total_memory_bytes,
            feasible: row.feasible(),
        })
        .map_err(|e| DseError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| DseError::Csv(e.to_string()))
}
