//! On-disk cache of the two-qubit Clifford table.
//!
//! Layout (little endian): 8-byte magic `CHSHCLF\0`, `u32` format version,
//! `u32` matrix dimension, `u64` element count, then every matrix row-major
//! as `(re, im)` pairs of `f64`. Regeneration is byte-identical because the
//! closure order is deterministic.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::Matrix4;

use super::{clifford_2q, CLIFFORD_2Q_ORDER};
use crate::error::{Error, Result};
use crate::qcore::{UnitaryOp, C64, INTERNAL_TOL};

pub const MAGIC: &[u8; 8] = b"CHSHCLF\0";
pub const FORMAT_VERSION: u32 = 1;
pub const FILE_NAME: &str = "clifford2_v1.bin";
/// Overrides the cache directory.
pub const CACHE_DIR_ENV: &str = "CHSHLAB_CACHE_DIR";

const HEADER_LEN: usize = 8 + 4 + 4 + 8;

/// Directory from [`CACHE_DIR_ENV`], falling back to the system temp dir.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("chshlab"))
}

pub fn encode(table: &[UnitaryOp<4>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + table.len() * 16 * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&4u32.to_le_bytes());
    out.extend_from_slice(&(table.len() as u64).to_le_bytes());
    for u in table {
        let m = u.matrix();
        for r in 0..4 {
            for k in 0..4 {
                out.extend_from_slice(&m[(r, k)].re.to_le_bytes());
                out.extend_from_slice(&m[(r, k)].im.to_le_bytes());
            }
        }
    }
    out
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<Vec<UnitaryOp<4>>> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Cache("missing magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
    if dim != 4 {
        return Err(Error::Cache(format!("unexpected dimension {dim}")));
    }
    let count = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")) as usize;
    if bytes.len() != HEADER_LEN + count * 256 {
        return Err(Error::Cache(format!(
            "length {} does not match {count} elements",
            bytes.len()
        )));
    }
    let mut table = Vec::with_capacity(count);
    for e in 0..count {
        let base = HEADER_LEN + e * 256;
        let m = Matrix4::from_fn(|r, k| {
            let at = base + (r * 4 + k) * 16;
            C64::new(read_f64(bytes, at), read_f64(bytes, at + 8))
        });
        let u = UnitaryOp::from_matrix_unchecked(m);
        if u.unitarity_residual() > INTERNAL_TOL {
            return Err(Error::Cache(format!("element {e} is not unitary")));
        }
        table.push(u);
    }
    Ok(table)
}

pub fn write_table(path: &Path, table: &[UnitaryOp<4>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(table))?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<Vec<UnitaryOp<4>>> {
    decode(&fs::read(path)?)
}

/// Reads the cached table from `dir`, regenerating it if absent or invalid.
pub fn load_or_build(dir: &Path) -> Result<Vec<UnitaryOp<4>>> {
    let path = dir.join(FILE_NAME);
    if let Ok(table) = read_table(&path) {
        if table.len() == CLIFFORD_2Q_ORDER {
            return Ok(table);
        }
    }
    let table = clifford_2q().to_vec();
    write_table(&path, &table)?;
    Ok(table)
}
