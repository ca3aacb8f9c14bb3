//! Binary field snapshots.
//!
//! Layout (all little endian):
//!
//! ```text
//! 0..4    magic "WSAV"
//! 4       format version (1)
//! 5       dimension (2 or 3)
//! 6..8    reserved, zero
//! 8..14   three u16 axis sizes (1 for unused axes)
//! 14..16  reserved, zero
//! 16..64  lo0, hi0, lo1, hi1, lo2, hi2 as f64
//! 64..    the values as f64, row-major with x slowest
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use wsav_core::{Grid, RealField};

use crate::error::{HarnessError, Result};

pub const MAGIC: &[u8; 4] = b"WSAV";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 64;

pub fn encode(field: &RealField) -> Result<Vec<u8>> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.push(g.dim() as u8);
    buf.extend_from_slice(&[0, 0]);
    for axis in 0..3 {
        let n = u16::try_from(g.n(axis))
            .map_err(|_| HarnessError::Config(format!("axis size {} exceeds u16", g.n(axis))))?;
        buf.extend_from_slice(&n.to_le_bytes());
    }
    buf.extend_from_slice(&[0, 0]);
    for axis in 0..3 {
        let (lo, hi) = if axis < g.dim() { (g.lo(axis), g.hi(axis)) } else { (0.0, 0.0) };
        buf.extend_from_slice(&lo.to_le_bytes());
        buf.extend_from_slice(&hi.to_le_bytes());
    }
    debug_assert_eq!(buf.len(), HEADER_LEN);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode(bytes: &[u8]) -> std::result::Result<RealField, String> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err("not a snapshot file".into());
    }
    if bytes[4] != VERSION {
        return Err(format!("unsupported snapshot version {}", bytes[4]));
    }
    let dim = bytes[5] as usize;
    if !(dim == 2 || dim == 3) {
        return Err(format!("invalid dimension {dim}"));
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let sizes: Vec<usize> = (0..dim).map(|a| u16_at(8 + 2 * a)).collect();
    let extents: Vec<(f64, f64)> =
        (0..dim).map(|a| (f64_at(16 + 16 * a), f64_at(24 + 16 * a))).collect();
    let grid = Grid::new(&sizes, &extents).map_err(|e| e.to_string())?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(format!("expected {} values, found {} bytes", grid.len(), body.len()));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    RealField::from_values(grid, values).map_err(|e| e.to_string())
}

pub fn write_snapshot(field: &RealField, path: &Path) -> Result<()> {
    fs::write(path, encode(field)?).map_err(|e| HarnessError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<RealField> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    decode(&bytes).map_err(|m| HarnessError::format(path, m))
}

/// Plain-text companion: one `x,y[,z],phi` line per point.
pub fn write_sidecar_csv(field: &RealField, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut out = String::new();
    out += if g.dim() == 2 { "x,y,phi\n" } else { "x,y,z,phi\n" };
    for (i, v) in field.values().iter().enumerate() {
        let x = g.point(i);
        for c in &x[..g.dim()] {
            out += &format!("{c:.16e},");
        }
        out += &format!("{v:.16e}\n");
    }
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| HarnessError::io(path, e))
}
