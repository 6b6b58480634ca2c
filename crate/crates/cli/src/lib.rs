//! Argument parsing helpers and exit codes shared by the `sim`, `dse` and
//! `workload` binaries.

use std::process::ExitCode;

use cellmesh::harness::HarnessError;
use cellmesh::workloads::IdBase;
use cellmesh::SimError;

pub const EXIT_FAILURE: u8 = 1;
/// Chip levels disagree with the reference BFS.
pub const EXIT_MISMATCH: u8 = 2;
pub const EXIT_NON_TERMINATION: u8 = 3;
/// Out of cell memory or invalid configuration.
pub const EXIT_RESOURCE: u8 = 4;

/// `WxH`, e.g. `32x32`.
pub fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid `{s}` is not WxH"))?;
    let w: u32 = w
        .trim()
        .parse()
        .map_err(|_| format!("bad grid width `{w}`"))?;
    let h: u32 = h
        .trim()
        .parse()
        .map_err(|_| format!("bad grid height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((w, h))
}

/// Byte size with an optional binary suffix: `4096`, `64K`, `64KiB`, `1M`.
pub fn parse_size(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let digits_end = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
    let (num, suffix) = t.split_at(digits_end);
    let n: u64 = num.parse().map_err(|_| format!("bad size `{s}`"))?;
    let mult: u64 = match suffix.to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => 1 << 10,
        "m" | "mb" | "mib" => 1 << 20,
        "g" | "gb" | "gib" => 1 << 30,
        _ => return Err(format!("bad size suffix in `{s}`")),
    };
    n.checked_mul(mult)
        .ok_or_else(|| format!("size `{s}` overflows"))
}

/// Convert a vertex id written in the input files' numbering to the
/// internal 0-based id.
pub fn internal_vertex(v: u32, base: IdBase) -> Result<u32, String> {
    match base {
        IdBase::Zero => Ok(v),
        IdBase::One => v
            .checked_sub(1)
            .ok_or_else(|| "vertex id 0 in a 1-based numbering".to_string()),
    }
}

/// `key=value`.
pub fn parse_key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

pub fn sim_exit_code(e: &SimError) -> u8 {
    match e {
        SimError::NonTermination { .. } => EXIT_NON_TERMINATION,
        SimError::OutOfMemory { .. } | SimError::Config(_) => EXIT_RESOURCE,
        _ => EXIT_FAILURE,
    }
}

pub fn harness_exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Mismatch { .. } => EXIT_MISMATCH,
        HarnessError::Sim { source, .. } => sim_exit_code(source),
        HarnessError::Config(_) => EXIT_RESOURCE,
        _ => EXIT_FAILURE,
    }
}

/// Print `err` with its cause chain and return `code`.
pub fn report(err: &anyhow::Error, code: u8) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("32x16"), Ok((32, 16)));
        assert_eq!(parse_grid("4X4"), Ok((4, 4)));
        assert!(parse_grid("0x4").is_err());
        assert!(parse_grid("4").is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_size("1024"), Ok(1024));
        assert_eq!(parse_size("64K"), Ok(65536));
        assert_eq!(parse_size("32KiB"), Ok(32768));
        assert_eq!(parse_size("1M"), Ok(1 << 20));
        assert!(parse_size("1Q").is_err());
        assert!(parse_size("K").is_err());
    }

    #[test]
    fn vertex_numbering() {
        assert_eq!(internal_vertex(5, IdBase::Zero), Ok(5));
        assert_eq!(internal_vertex(5, IdBase::One), Ok(4));
        assert!(internal_vertex(0, IdBase::One).is_err());
    }

    #[test]
    fn exit_codes() {
        let nt = SimError::NonTermination {
            cycles: 1,
            dump: String::new(),
        };
        assert_eq!(sim_exit_code(&nt), EXIT_NON_TERMINATION);
        assert_eq!(sim_exit_code(&SimError::Config("x".into())), EXIT_RESOURCE);
        let oom = SimError::OutOfMemory {
            cell: cellmesh::topology::Coord::new(0, 0),
            used: 80,
            capacity: 100,
            requested: 80,
        };
        assert_eq!(sim_exit_code(&oom), EXIT_RESOURCE);
        assert_eq!(
            harness_exit_code(&HarnessError::Config("x".into())),
            EXIT_RESOURCE
        );
    }
}
