//! Diagnostic series CSV with a fixed column order and 17 significant
//! digits, plus the per-directory writer lock.

use crate::functionals::DiagnosticsReport;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("i/o error on {0}: {1}")]
    Io(String, std::io::Error),
    #[error("output directory {0} is locked by another writer")]
    Locked(String),
}

pub const CSV_HEADER: &str = "t,mass,momentum_x,momentum_y,momentum_z,energy,\
H_rel_global,H_rel_local,D_f,min_f,norm_T_fluct,norm_u_fluct,norm_rho_fluct,M_h";

/// Writes the series; deterministic byte-for-byte for equal inputs.
pub fn emit_series(path: &Path, reports: &[DiagnosticsReport]) -> Result<(), SeriesError> {
    let mut out = String::with_capacity(64 + reports.len() * 300);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let row = [
            r.t,
            r.mass,
            r.momentum[0],
            r.momentum[1],
            r.momentum[2],
            r.energy,
            r.h_rel_global,
            r.h_rel_local,
            r.d_f,
            r.min_f,
            r.norm_t_fluct,
            r.norm_u_fluct,
            r.norm_rho_fluct,
            r.m_h,
        ];
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{v:.16e}"));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| SeriesError::Io(path.display().to_string(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| SeriesError::Io(path.display().to_string(), e))
}

/// Parses a series CSV back into reports (for replay checks).
pub fn read_series(path: &Path) -> Result<Vec<DiagnosticsReport>, SeriesError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SeriesError::Io(path.display().to_string(), e))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line
            .split(',')
            .map(|p| p.parse::<f64>().unwrap_or(f64::NAN))
            .collect();
        if f.len() != 14 {
            continue;
        }
        out.push(DiagnosticsReport {
            t: f[0],
            mass: f[1],
            momentum: [f[2], f[3], f[4]],
            energy: f[5],
            h_rel_global: f[6],
            h_rel_local: f[7],
            d_f: f[8],
            min_f: f[9],
            norm_t_fluct: f[10],
            norm_u_fluct: f[11],
            norm_rho_fluct: f[12],
            m_h: f[13],
        });
    }
    Ok(out)
}

/// Single-writer guard: an exclusive lock file per output directory,
/// released on drop.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, SeriesError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| SeriesError::Io(dir.display().to_string(), e))?;
        let path = dir.join(".boltz.lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(SeriesError::Locked(dir.display().to_string()))
            }
            Err(e) => Err(SeriesError::Io(path.display().to_string(), e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(t: f64) -> DiagnosticsReport {
        DiagnosticsReport {
            t,
            mass: 1.0 + 1e-16,
            momentum: [0.0, -3.2e-18, 4.0],
            energy: 3.0000000001,
            h_rel_global: 0.123456789012345678,
            h_rel_local: 0.1,
            d_f: f64::NAN,
            min_f: -1e-12,
            norm_t_fluct: 0.0,
            norm_u_fluct: 0.0,
            norm_rho_fluct: 0.0,
            m_h: 0.0,
        }
    }

    #[test]
    fn header_only_and_roundtrip() {
        let dir = std::env::temp_dir().join("boltz_series_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.csv");
        emit_series(&path, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);

        emit_series(&path, &[report(0.0)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);

        // 17-significant-digit round trip is exact for f64
        let rs = vec![report(0.0), report(0.125)];
        emit_series(&path, &rs).unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in rs.iter().zip(&back) {
            assert_eq!(a.mass, b.mass);
            assert_eq!(a.h_rel_global, b.h_rel_global);
            assert_eq!(a.momentum, b.momentum);
            assert!(b.d_f.is_nan());
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn lock_excludes_second_writer() {
        let dir = std::env::temp_dir().join("boltz_lock_test");
        let _l1 = DirLock::acquire(&dir).unwrap();
        assert!(matches!(DirLock::acquire(&dir), Err(SeriesError::Locked(_))));
        drop(_l1);
        let _l2 = DirLock::acquire(&dir).unwrap();
    }
}
