//! Bit-exact binary snapshots of a distribution field.
//!
//! Layout (little-endian): 8-byte magic `BLTZSNAP`, u32 version, then the
//! header scalars `gamma, s, eps (f64)`, `n_v (u32)`, `box_l (f64)`,
//! `radius (f64)`, `n_x, dim_x (u32)`, `t (f64)`, followed by the payload:
//! f64 values, x-major with the velocity block contiguous per cell.

use crate::grid::{make_grids, DistributionField};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"BLTZSNAP";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error on {0}: {1}")]
    Io(String, std::io::Error),
    #[error("bad magic: not a snapshot file")]
    BadMagic,
    #[error("unsupported snapshot version {0} (reader supports {VERSION})")]
    Version(u32),
    #[error("truncated snapshot: expected {expected} payload values, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Kernel and time metadata carried by a snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotMeta {
    pub gamma: f64,
    pub s: f64,
    pub eps: f64,
    pub t: f64,
}

pub fn write_snapshot(
    path: &Path,
    field: &DistributionField,
    meta: &SnapshotMeta,
) -> Result<(), SnapshotError> {
    let mut buf = Vec::with_capacity(64 + field.values.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&meta.gamma.to_le_bytes());
    buf.extend_from_slice(&meta.s.to_le_bytes());
    buf.extend_from_slice(&meta.eps.to_le_bytes());
    buf.extend_from_slice(&(field.vgrid.n as u32).to_le_bytes());
    buf.extend_from_slice(&field.vgrid.box_l.to_le_bytes());
    buf.extend_from_slice(&field.vgrid.radius.to_le_bytes());
    buf.extend_from_slice(&(field.xgrid.n_x as u32).to_le_bytes());
    buf.extend_from_slice(&(field.xgrid.dim_x as u32).to_le_bytes());
    buf.extend_from_slice(&meta.t.to_le_bytes());
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| SnapshotError::Io(path.display().to_string(), e))?;
    file.write_all(&buf)
        .map_err(|e| SnapshotError::Io(path.display().to_string(), e))
}

pub fn read_snapshot(path: &Path) -> Result<(DistributionField, SnapshotMeta), SnapshotError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| SnapshotError::Io(path.display().to_string(), e))?;
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let mut off = 8usize;
    let mut take = |n: usize| -> Result<&[u8], SnapshotError> {
        if off + n > bytes.len() {
            return Err(SnapshotError::Truncated {
                expected: off + n,
                got: bytes.len(),
            });
        }
        let s = &bytes[off..off + n];
        off += n;
        Ok(s)
    };
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let gamma = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let s_ = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let eps = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let n_v = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let _box_l = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let radius = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let n_x = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let dim_x = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let t = f64::from_le_bytes(take(8)?.try_into().unwrap());

    let (vg, xg) = make_grids(n_v, radius, n_x, dim_x)?;
    let mut field = DistributionField::zeros(vg, xg);
    let expected = field.values.len();
    let payload = &bytes[off..];
    if payload.len() != expected * 8 {
        return Err(SnapshotError::Truncated {
            expected,
            got: payload.len() / 8,
        });
    }
    for (slot, chunk) in field.values.iter_mut().zip(payload.chunks_exact(8)) {
        *slot = f64::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok((
        field,
        SnapshotMeta {
            gamma,
            s: s_,
            eps,
            t,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let (vg, xg) = make_grids(8, 4.0, 4, 1).unwrap();
        let mut field = DistributionField::zeros(vg, xg);
        for (i, v) in field.values.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin() * 1e-3 + 1e-17 * i as f64;
        }
        let meta = SnapshotMeta {
            gamma: 1.0,
            s: 0.5,
            eps: 0.05,
            t: 0.123456789,
        };
        let dir = std::env::temp_dir().join("boltz_snap_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.snap");
        write_snapshot(&path, &field, &meta).unwrap();
        let (back, meta2) = read_snapshot(&path).unwrap();
        assert_eq!(meta, meta2);
        assert_eq!(field.values, back.values);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn magic_and_version_gates() {
        let dir = std::env::temp_dir().join("boltz_snap_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.snap");
        std::fs::write(&path, b"NOTASNAPxxxx").unwrap();
        assert!(matches!(read_snapshot(&path), Err(SnapshotError::BadMagic)));
        // wrong version
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&99u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 64]);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_snapshot(&path),
            Err(SnapshotError::Version(99))
        ));
        std::fs::remove_file(&path).ok();
    }
}
