//! Bit-exact matrix file format.
//!
//! Layout: magic bytes `MXF1` (4 ASCII bytes), row count as unsigned 64-bit
//! little-endian, column count as unsigned 64-bit little-endian, then
//! `rows * cols` IEEE 754 binary64 little-endian values in row-major order.
//! Mask files use the same layout with 0.0/1.0 values.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub const MAGIC: &[u8; 4] = b"MXF1";
const HEADER_LEN: usize = 4 + 8 + 8;

/// Reads a matrix file, rejecting bad magic, truncated or trailing payload,
/// and non-finite values.
pub fn load_matrix<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    let bytes = fs::read(path.as_ref())?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("file shorter than header".to_string()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected MXF1".to_string()));
    }
    let rows = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("matrix dimensions overflow".to_string()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < count {
        return Err(Error::Format(format!(
            "truncated payload: expected {count} bytes, found {}",
            payload.len()
        )));
    }
    if payload.len() > count {
        return Err(Error::Format(format!(
            "trailing bytes after payload: expected {count} bytes, found {}",
            payload.len()
        )));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let m = DenseMatrix::new(rows as usize, cols as usize, data)?;
    m.ensure_finite("matrix payload")?;
    Ok(m)
}

/// Writes a matrix in the `MXF1` layout. Round trips are bit-exact.
pub fn save_matrix<P: AsRef<Path>>(path: P, m: &DenseMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + m.len() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path.as_ref(), bytes)?;
    Ok(())
}
