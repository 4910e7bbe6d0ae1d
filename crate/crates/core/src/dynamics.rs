//! Time evolution: exact spectral free transport on the torus, explicit RK2
//! collision stepping with optional conservation projection, and the
//! operator-splitting run loop with scheduled diagnostics.

use crate::collision::{CollisionError, SpectralKernelTable};
use crate::functionals::{
    self, DiagnosticsReport, DissipationOpts, FunctionalError,
};
use crate::grid::DistributionField;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("time step must be positive, got {0}")]
    BadDt(f64),
    #[error("loss-term stability violated: dt * max loss frequency = {0:.3} > 0.9")]
    StabilityViolation(f64),
    #[error("non-finite values after collision step at cell {cell}: min {min:.3e}, max {max:.3e}")]
    NonFinite { cell: usize, min: f64, max: f64 },
    #[error("table grid does not match the field grid")]
    GridMismatch,
}

/// Splitting scheme of the run loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SplitScheme {
    /// Half transport, full collision, half transport (order 2).
    Strang,
    /// Transport then collision (order 1, debugging).
    Lie,
}

/// Time-stepping state.
#[derive(Clone, Debug)]
pub struct TimeStepper {
    pub dt: f64,
    pub scheme: SplitScheme,
    pub collision_substeps: usize,
    pub t_now: f64,
}

impl TimeStepper {
    pub fn new(dt: f64, scheme: SplitScheme) -> Result<Self, DynamicsError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(DynamicsError::BadDt(dt));
        }
        Ok(Self {
            dt,
            scheme,
            collision_substeps: 1,
            t_now: 0.0,
        })
    }
}

/// Exact free transport over `dt`: every spatial mode `q` and velocity node
/// `v` is multiplied by `exp(-i 2 pi (q . v) dt)`. Phase unitarity makes
/// every v-marginal norm per x-mode magnitude exactly invariant.
pub fn advect(field: &mut DistributionField, dt: f64) {
    let xgrid = field.xgrid.clone();
    if xgrid.is_homogeneous() {
        return;
    }
    let vgrid = field.vgrid.clone();
    let nv = vgrid.len();
    let cells = xgrid.cells();
    let n_x = xgrid.n_x;
    let dim = xgrid.dim_x;

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n_x);
    let inv = planner.plan_fft_inverse(n_x);

    // Precompute per-cell-index wavevectors.
    let qvecs: Vec<[i64; 3]> = (0..cells).map(|ix| xgrid.wavevector(ix)).collect();
    let scale = 1.0 / cells as f64;
    let tau = 2.0 * std::f64::consts::PI;

    let values = std::mem::take(&mut field.values);

    // Work v-node by v-node: gather the x-series, transform, phase, invert.
    let mut out = vec![0.0; values.len()];
    let chunks: Vec<usize> = (0..nv).collect();
    let results: Vec<(usize, Vec<f64>)> = chunks
        .par_chunks(256)
        .flat_map_iter(|chunk| {
            let mut scratch =
                vec![
                    Complex64::default();
                    fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())
                ];
            let mut local = Vec::with_capacity(chunk.len());
            for &jv in chunk {
                let v = vgrid.node(jv);
                let mut buf: Vec<Complex64> = (0..cells)
                    .map(|ix| Complex64::new(values[ix * nv + jv], 0.0))
                    .collect();
                for axis in 0..dim {
                    fft_axis_cells(&mut buf, n_x, axis, &*fwd, &mut scratch);
                }
                for (ix, c) in buf.iter_mut().enumerate() {
                    let q = qvecs[ix];
                    let mut qv = 0.0;
                    for (a, qa) in q.iter().enumerate().take(dim) {
                        qv += *qa as f64 * v[a];
                    }
                    let (s, co) = (-tau * qv * dt).sin_cos();
                    *c *= Complex64::new(co, s);
                }
                for axis in 0..dim {
                    fft_axis_cells(&mut buf, n_x, axis, &*inv, &mut scratch);
                }
                local.push((jv, buf.iter().map(|c| c.re * scale).collect()));
            }
            local
        })
        .collect();
    for (jv, series) in results {
        for (ix, val) in series.into_iter().enumerate() {
            out[ix * nv + jv] = val;
        }
    }
    field.values = out;
}

fn fft_axis_cells(
    data: &mut [Complex64],
    n: usize,
    axis: usize,
    fft: &dyn rustfft::Fft<f64>,
    scratch: &mut [Complex64],
) {
    let stride = n.pow(axis as u32);
    let mut tmp = vec![Complex64::default(); n];
    let outer = data.len() / n;
    for o in 0..outer {
        let inner = o % stride;
        let rest = o / stride;
        let base = inner + rest * stride * n;
        for (t, slot) in tmp.iter_mut().enumerate() {
            *slot = data[base + t * stride];
        }
        fft.process_with_scratch(&mut tmp, scratch);
        for (t, slot) in tmp.iter().enumerate() {
            data[base + t * stride] = *slot;
        }
    }
}

/// Minimal-L2 projection of a velocity cell onto the affine space with the
/// prescribed discrete invariants (mass, momentum, energy).
pub struct ConservationProjector {
    /// Cholesky-style factor of the 5x5 Gram matrix of the invariants.
    gram_inv: [[f64; 5]; 5],
    basis: Vec<[f64; 5]>,
    dv3: f64,
}

impl ConservationProjector {
    pub fn new(grid: &crate::grid::VelocityGrid) -> Self {
        let n3 = grid.len();
        let dv3 = grid.dv().powi(3);
        let mut basis = Vec::with_capacity(n3);
        for j in 0..n3 {
            let v = grid.node(j);
            basis.push([
                1.0,
                v[0],
                v[1],
                v[2],
                v[0] * v[0] + v[1] * v[1] + v[2] * v[2],
            ]);
        }
        let mut gram = [[0.0; 5]; 5];
        for row in &basis {
            for a in 0..5 {
                for b in 0..5 {
                    gram[a][b] += row[a] * row[b];
                }
            }
        }
        for row in gram.iter_mut() {
            for x in row.iter_mut() {
                *x *= dv3;
            }
        }
        Self {
            gram_inv: invert5(gram),
            basis,
            dv3,
        }
    }

    pub fn moments(&self, cell: &[f64]) -> [f64; 5] {
        let mut m = [0.0; 5];
        for (f, row) in cell.iter().zip(&self.basis) {
            for a in 0..5 {
                m[a] += f * row[a];
            }
        }
        for x in m.iter_mut() {
            *x *= self.dv3;
        }
        m
    }

    /// Projects `cell` so its moments equal `target`.
    pub fn project(&self, cell: &mut [f64], target: &[f64; 5]) {
        let current = self.moments(cell);
        let mut r = [0.0; 5];
        for a in 0..5 {
            r[a] = target[a] - current[a];
        }
        let mut lambda = [0.0; 5];
        for a in 0..5 {
            for b in 0..5 {
                lambda[a] += self.gram_inv[a][b] * r[b];
            }
        }
        for (f, row) in cell.iter_mut().zip(&self.basis) {
            let mut corr = 0.0;
            for a in 0..5 {
                corr += lambda[a] * row[a];
            }
            *f += corr;
        }
    }
}

fn invert5(mut a: [[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let mut inv = [[0.0; 5]; 5];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..5 {
        // partial pivot
        let mut piv = col;
        for r in (col + 1)..5 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..5 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..5 {
            if r != col {
                let factor = a[r][col];
                for j in 0..5 {
                    a[r][j] -= factor * a[col][j];
                    inv[r][j] -= factor * inv[col][j];
                }
            }
        }
    }
    inv
}

/// One explicit midpoint (RK2) collision step `dt` applied cell-wise, with
/// the optional conservation projection back onto the pre-step invariants.
pub fn collide_step(
    field: &mut DistributionField,
    table: &SpectralKernelTable,
    dt: f64,
    projection: bool,
) -> Result<(), DynamicsError> {
    if !std::sync::Arc::ptr_eq(&field.vgrid, &table.grid) && field.vgrid.n != table.grid.n {
        return Err(DynamicsError::GridMismatch);
    }
    let nv = field.vgrid.len();
    let cells = field.xgrid.cells();
    let projector = projection.then(|| ConservationProjector::new(&field.vgrid));

    let homogeneous = cells == 1;
    let step_cell = |cell: &mut [f64]| -> Result<(), DynamicsError> {
        let target = projector.as_ref().map(|p| p.moments(cell));
        let k1 = table.q_spectral_opt(cell, cell, homogeneous)?;
        let mid: Vec<f64> = cell
            .iter()
            .zip(&k1)
            .map(|(f, q)| f + 0.5 * dt * q)
            .collect();
        let k2 = table.q_spectral_opt(&mid, &mid, homogeneous)?;
        for (f, q) in cell.iter_mut().zip(&k2) {
            *f += dt * q;
        }
        if let (Some(p), Some(t)) = (projector.as_ref(), target.as_ref()) {
            p.project(cell, t);
        }
        Ok(())
    };

    if homogeneous {
        step_cell(field.cell_mut(0))?;
    } else {
        let values = &mut field.values;
        let results: Vec<Result<(), DynamicsError>> = values
            .par_chunks_mut(nv)
            .map(|cell| step_cell(cell))
            .collect();
        for r in results {
            r?;
        }
    }
    // NaN/overflow detection with a diagnostic dump of the offending cell.
    for ix in 0..cells {
        let cell = field.cell(ix);
        if cell.iter().any(|v| !v.is_finite()) {
            let min = cell.iter().copied().fold(f64::INFINITY, f64::min);
            let max = cell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Err(DynamicsError::NonFinite { cell: ix, min, max });
        }
    }
    Ok(())
}

/// Suggested stable time step: `0.4 / max loss frequency` for integrable
/// cutoffs, and a fixed fraction of the collision rate `||Q||/||f||` for the
/// non-cutoff kernel.
pub fn suggest_dt(
    table: &SpectralKernelTable,
    field: &DistributionField,
) -> Result<f64, DynamicsError> {
    if table.spec.eps > 0.0 {
        let mut numax = 0.0f64;
        for ix in 0..field.xgrid.cells() {
            let nu = table.loss_frequency(field.cell(ix))?;
            numax = nu.iter().fold(numax, |a, &b| a.max(b));
        }
        Ok(0.4 / numax.max(1e-300))
    } else {
        let cell = field.cell(0);
        let q = table.q_spectral(cell, cell)?;
        let qn = norm2(&q);
        let fn_ = norm2(cell);
        Ok(0.4 * fn_ / qn.max(1e-300))
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Diagnostics schedule and content of the run loop.
#[derive(Clone, Debug)]
pub struct RunOpts {
    /// Emit diagnostics every this many steps (plus t = 0 and the end).
    pub diag_every: usize,
    /// Evaluate the brute-force entropy dissipation at each diagnostic time
    /// (expensive; oracle-scale grids only).
    pub compute_dissipation: bool,
    pub dissipation: DissipationOpts,
    pub projection: bool,
    /// Re-audit the non-cutoff dt rule every this many steps.
    pub dt_audit_every: usize,
}

impl Default for RunOpts {
    fn default() -> Self {
        Self {
            diag_every: 1,
            compute_dissipation: false,
            dissipation: DissipationOpts::default(),
            projection: false,
            dt_audit_every: 50,
        }
    }
}

pub struct RunResult {
    pub reports: Vec<DiagnosticsReport>,
    /// Human-readable run events (dt adjustments etc).
    pub events: Vec<String>,
}

/// Evaluates the scheduled diagnostics on an immutable snapshot.
pub fn diagnose(
    field: &DistributionField,
    spec: &crate::kernel::KernelSpec,
    t: f64,
    compute_dissipation: bool,
    diss: &DissipationOpts,
) -> Result<DiagnosticsReport, DynamicsError> {
    let (mass, momentum, energy) = functionals::conserved(field);
    let m_global = functionals::global_maxwellian(field)?;
    let h_rel_global = functionals::relative_entropy(field, &m_global);
    let hydro = functionals::hydro_fields(field, 1e-8)?;
    let h_rel_local = functionals::relative_entropy_local(field, &hydro)?;
    let d_f = if compute_dissipation {
        functionals::entropy_dissipation_d(field, spec, diss)
    } else {
        f64::NAN
    };
    let witness = if field.xgrid.is_homogeneous() {
        functionals::WitnessReport::default()
    } else {
        functionals::hydro_witness(field, &hydro)?
    };
    Ok(DiagnosticsReport {
        t,
        mass,
        momentum,
        energy,
        h_rel_global,
        h_rel_local,
        d_f,
        min_f: field.min_value(),
        norm_t_fluct: witness.norm_t_fluct,
        norm_u_fluct: witness.norm_u_fluct,
        norm_rho_fluct: witness.norm_rho_fluct,
        m_h: witness.m_h,
    })
}

/// Advances the field to `t_end` with the splitting scheme, emitting
/// diagnostics on schedule and snapshots through the optional sink.
/// Space-homogeneous grids skip the transport stage entirely, so the loop
/// matches a pure-collision reference trajectory bitwise.
pub fn run(
    field: &mut DistributionField,
    table: &SpectralKernelTable,
    stepper: &mut TimeStepper,
    t_end: f64,
    opts: &RunOpts,
    mut snapshot: Option<&mut dyn FnMut(usize, f64, &DistributionField)>,
) -> Result<RunResult, DynamicsError> {
    // Configuration-time stability audit for integrable cutoffs.
    if table.spec.eps > 0.0 {
        let mut numax = 0.0f64;
        for ix in 0..field.xgrid.cells() {
            let nu = table.loss_frequency(field.cell(ix))?;
            numax = nu.iter().fold(numax, |a, &b| a.max(b));
        }
        if stepper.dt * numax > 0.9 {
            return Err(DynamicsError::StabilityViolation(stepper.dt * numax));
        }
    }

    let mut events = Vec::new();
    let mut reports = Vec::new();
    reports.push(diagnose(
        field,
        &table.spec,
        stepper.t_now,
        opts.compute_dissipation,
        &opts.dissipation,
    )?);
    if let Some(sink) = snapshot.as_deref_mut() {
        sink(0, stepper.t_now, field);
    }

    let mut step = 0usize;
    while stepper.t_now < t_end - 1e-12 * t_end.max(1.0) {
        let dt = stepper.dt.min(t_end - stepper.t_now);
        match stepper.scheme {
            SplitScheme::Strang => {
                advect(field, 0.5 * dt);
                collide_substeps(field, table, dt, stepper.collision_substeps, opts.projection)?;
                advect(field, 0.5 * dt);
            }
            SplitScheme::Lie => {
                advect(field, dt);
                collide_substeps(field, table, dt, stepper.collision_substeps, opts.projection)?;
            }
        }
        stepper.t_now += dt;
        step += 1;

        if table.spec.eps == 0.0 && opts.dt_audit_every > 0 && step % opts.dt_audit_every == 0 {
            let suggested = suggest_dt(table, field)?;
            if stepper.dt > 1.5 * suggested {
                events.push(format!(
                    "step {step}: dt {:.3e} above audited rule, shrunk to {suggested:.3e}",
                    stepper.dt
                ));
                stepper.dt = suggested;
            }
        }

        if step % opts.diag_every == 0 || stepper.t_now >= t_end - 1e-12 * t_end.max(1.0) {
            reports.push(diagnose(
                field,
                &table.spec,
                stepper.t_now,
                opts.compute_dissipation,
                &opts.dissipation,
            )?);
            if let Some(sink) = snapshot.as_deref_mut() {
                sink(step, stepper.t_now, field);
            }
        }
    }
    Ok(RunResult { reports, events })
}

fn collide_substeps(
    field: &mut DistributionField,
    table: &SpectralKernelTable,
    dt: f64,
    substeps: usize,
    projection: bool,
) -> Result<(), DynamicsError> {
    let k = substeps.max(1);
    for _ in 0..k {
        collide_step(field, table, dt / k as f64, projection)?;
    }
    Ok(())
}

/// Closed-form Bobylev-Krook-Wu state for the Maxwell-molecule kernel
/// (`gamma = 0`, constant angular profile): an exact solution of the
/// homogeneous equation with unit mass and temperature,
/// `f(v,t) = (2 pi K)^(-3/2) e^(-|v|^2/(2K)) [ (5K-3)/(2K) +
/// (1-K)|v|^2/(2K^2) ]`, `K(t) = 1 - (1 - K0) e^(-lambda t)`.
pub struct BkwSolution {
    pub k0: f64,
    /// Relaxation rate `lambda = rho * Lambda / 4` with
    /// `Lambda = 2 pi int sin^3(theta) b(cos theta) d theta`.
    pub lambda: f64,
}

impl BkwSolution {
    /// Rate for the given kernel at unit density.
    pub fn new(k0: f64, spec: &crate::kernel::KernelSpec) -> Self {
        assert!((0.6..1.0).contains(&k0), "BKW requires 3/5 <= K0 < 1");
        Self {
            k0,
            lambda: spec.angular_sin2_mass() / 4.0,
        }
    }

    pub fn k_at(&self, t: f64) -> f64 {
        1.0 - (1.0 - self.k0) * (-self.lambda * t).exp()
    }

    pub fn eval(&self, v2: f64, t: f64) -> f64 {
        let k = self.k_at(t);
        let norm = (2.0 * std::f64::consts::PI * k).powf(-1.5) * (-v2 / (2.0 * k)).exp();
        norm * ((5.0 * k - 3.0) / (2.0 * k) + (1.0 - k) * v2 / (2.0 * k * k))
    }

    /// Fourth moment `int |v|^4 f dv = 15 - 15 (1 - K)^2`.
    pub fn fourth_moment(&self, t: f64) -> f64 {
        let k = self.k_at(t);
        15.0 - 15.0 * (1.0 - k) * (1.0 - k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{SpectralKernelTable, TableParams};
    use crate::grid::make_grids;
    use crate::kernel::{AngularProfile, KernelSpec};

    fn maxw(v: [f64; 3]) -> f64 {
        (2.0 * std::f64::consts::PI).powf(-1.5)
            * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 2.0).exp()
    }

    #[test]
    fn advect_identities() {
        let (vg, xg) = make_grids(8, 4.0, 8, 1).unwrap();
        // x-independent field unchanged bitwise
        let mut f = DistributionField::from_fn(vg.clone(), xg.clone(), |_, v| maxw(v));
        let before = f.values.clone();
        advect(&mut f, 0.37);
        assert_eq!(f.values, before);

        // single mode: g(v) cos(2 pi x1) -> g(v) cos(2 pi (x1 - v1 t))
        let mut f2 = DistributionField::from_fn(vg.clone(), xg.clone(), |x, v| {
            maxw(v) * (2.0 * std::f64::consts::PI * x[0]).cos()
        });
        let dt = 0.21;
        advect(&mut f2, dt);
        let want = DistributionField::from_fn(vg, xg, |x, v| {
            maxw(v) * (2.0 * std::f64::consts::PI * (x[0] - v[0] * dt)).cos()
        });
        let mut max_err = 0.0f64;
        for (a, b) in f2.values.iter().zip(&want.values) {
            max_err = max_err.max((a - b).abs());
        }
        assert!(max_err < 1e-12, "transport error {max_err}");
    }

    #[test]
    fn advect_preserves_l2() {
        let (vg, xg) = make_grids(8, 4.0, 16, 1).unwrap();
        let mut f = DistributionField::from_fn(vg, xg, |x, v| {
            maxw(v) * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * x[0]).sin())
        });
        let before = f.l2_norm();
        advect(&mut f, 0.83);
        let after = f.l2_norm();
        assert!(
            (before - after).abs() < 1e-13 * before,
            "L2 drift {}",
            (before - after).abs() / before
        );
    }

    #[test]
    fn projection_restores_invariants() {
        let (vg, _) = make_grids(16, 5.0, 1, 1).unwrap();
        let proj = ConservationProjector::new(&vg);
        let mut cell: Vec<f64> = (0..vg.len()).map(|j| maxw(vg.node(j))).collect();
        let target = proj.moments(&cell);
        // perturb
        for (j, f) in cell.iter_mut().enumerate() {
            *f += 1e-3 * ((j % 7) as f64 - 3.0) * maxw(vg.node(j));
        }
        proj.project(&mut cell, &target);
        let after = proj.moments(&cell);
        for (a, b) in after.iter().zip(&target) {
            assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn collide_step_holds_equilibrium_and_mass() {
        let (vg, xg) = make_grids(16, 5.3, 1, 1).unwrap();
        let spec = KernelSpec::new(0.0, 0.5, 0.1, AngularProfile::Canonical).unwrap();
        let table =
            SpectralKernelTable::build(vg.clone(), spec, TableParams::for_grid(16)).unwrap();
        let mut f = DistributionField::from_fn(vg, xg, |_, v| maxw(v));
        let mass0 = f.mass();
        let before = f.values.clone();
        collide_step(&mut f, &table, 0.002, true).unwrap();
        let mass1 = f.mass();
        assert!((mass0 - mass1).abs() < 1e-14 * mass0, "mass drift");
        // Per-step equilibrium residual; floor set by the n = 16 spectral
        // tail of the Maxwellian, not by the scheme.
        let mut dev = 0.0f64;
        for (a, b) in f.values.iter().zip(&before) {
            dev = dev.max((a - b).abs());
        }
        assert!(dev < 1e-3, "equilibrium moved by {dev}");
    }

    #[test]
    fn homogeneous_run_matches_pure_collision_bitwise() {
        let (vg, xg) = make_grids(8, 4.0, 1, 1).unwrap();
        let spec = KernelSpec::new(0.0, 0.5, 0.1, AngularProfile::Canonical).unwrap();
        let table = SpectralKernelTable::build(
            vg.clone(),
            spec,
            TableParams {
                n_radial: 6,
                n_polar: 4,
                n_azimuth: 6,
                memory_cap_bytes: 1 << 30,
            },
        )
        .unwrap();
        let init = DistributionField::from_fn(vg.clone(), xg.clone(), |_, v| {
            maxw(v) * (1.0 + 0.2 * (0.8 * v[0]).sin())
        });

        let mut f1 = init.clone();
        let mut stepper = TimeStepper::new(0.004, SplitScheme::Strang).unwrap();
        run(
            &mut f1,
            &table,
            &mut stepper,
            0.02,
            &RunOpts {
                diag_every: 100,
                ..Default::default()
            },
            None,
        )
        .unwrap();

        let mut f2 = init;
        for _ in 0..5 {
            collide_step(&mut f2, &table, 0.004, false).unwrap();
        }
        assert_eq!(f1.values, f2.values, "run loop deviates from pure collision");
    }

    #[test]
    fn run_zero_time_gives_initial_diagnostics_only() {
        let (vg, xg) = make_grids(8, 4.0, 1, 1).unwrap();
        let spec = KernelSpec::new(0.0, 0.5, 0.1, AngularProfile::Canonical).unwrap();
        let table = SpectralKernelTable::build(
            vg.clone(),
            spec,
            TableParams {
                n_radial: 6,
                n_polar: 4,
                n_azimuth: 6,
                memory_cap_bytes: 1 << 30,
            },
        )
        .unwrap();
        let mut f = DistributionField::from_fn(vg, xg, |_, v| maxw(v));
        let mut stepper = TimeStepper::new(0.004, SplitScheme::Strang).unwrap();
        let res = run(&mut f, &table, &mut stepper, 0.0, &RunOpts::default(), None).unwrap();
        assert_eq!(res.reports.len(), 1);
    }

    #[test]
    fn stability_guard_rejects_large_dt() {
        let (vg, xg) = make_grids(16, 5.3, 1, 1).unwrap();
        let spec = KernelSpec::new(0.0, 0.5, 0.05, AngularProfile::Canonical).unwrap();
        let table =
            SpectralKernelTable::build(vg.clone(), spec, TableParams::for_grid(16)).unwrap();
        let mut f = DistributionField::from_fn(vg, xg, |_, v| maxw(v));
        let mut stepper = TimeStepper::new(10.0, SplitScheme::Strang).unwrap();
        assert!(matches!(
            run(&mut f, &table, &mut stepper, 1.0, &RunOpts::default(), None),
            Err(DynamicsError::StabilityViolation(_))
        ));
    }
}
