//! Binary field snapshots.
//!
//! Layout, all little-endian: `b"AGGS"`, `u32` version (= 1), `u32` d,
//! `u32` n, `f64` L, then `n^d` `f64` cell values with the first axis fastest.

use std::io::{self, Read, Write};

use super::{GridSpec, ScalarField};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"AGGS";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}")]
    Magic([u8; 4]),
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("invalid grid in snapshot: {0}")]
    Grid(#[from] super::GridError),
}

pub fn write_snapshot<T: Real, W: Write>(field: &ScalarField<T>, mut w: W) -> io::Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(24 + 8 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.cells_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&g.half_width().as_f64().to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_snapshot<T: Real, R: Read>(mut r: R) -> Result<ScalarField<T>, SnapshotError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::Magic(magic));
    }
    let mut word = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> io::Result<u32> {
        r.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let mut dword = [0u8; 8];
    r.read_exact(&mut dword)?;
    let half_width = f64::from_le_bytes(dword);
    let grid = GridSpec::new(dim, T::lit(half_width), n)?;
    let mut raw = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    Ok(ScalarField::new(grid, values)?)
}
