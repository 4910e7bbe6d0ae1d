//! Phase-space discretisation: a truncated, periodised velocity box and the
//! spatial torus, plus the discrete Fourier machinery in both variables.
//!
//! Velocity grid convention: `n` uniform nodes per axis on `[-L, L)`,
//! node `j` at `v_j = -L + j * (2L/n)`. Fourier series
//! `f(v) = sum_k fhat_k exp(i pi k.v / L)` with integer modes
//! `k in [-n/2, n/2)`. Spectra returned by [`VelocityGrid::dft_v`] hold the
//! true series coefficients `fhat_k` in FFT index order.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

/// Dealiasing constant: the periodised box must satisfy
/// `L >= (3 + sqrt(2))/2 * R` so that collisions of velocities inside the
/// support ball of radius `R` are never folded back onto the support.
pub const DEALIAS_FACTOR: f64 = 2.207_106_781_186_547_5; // (3 + sqrt 2) / 2

#[derive(Debug, Error)]
pub enum GridError {
    #[error("velocity grid needs at least 8 points per axis, got {0}")]
    TooFewVelocityNodes(usize),
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("spatial dimension must be 1, 2 or 3, got {0}")]
    BadDimX(usize),
    #[error("support radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("field/grid size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("vacuum cell at x-index {0}: density {1:.3e} below floor")]
    VacuumCell(usize, f64),
}

/// Uniform velocity grid on the periodised box `[-L, L)^3`.
#[derive(Clone)]
pub struct VelocityGrid {
    /// Points per axis (power of two, >= 8).
    pub n: usize,
    /// Support radius of the physical data.
    pub radius: f64,
    /// Half-width of the periodised box.
    pub box_l: f64,
    /// Node coordinates per axis.
    pub nodes: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for VelocityGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VelocityGrid")
            .field("n", &self.n)
            .field("radius", &self.radius)
            .field("box_l", &self.box_l)
            .finish()
    }
}

impl VelocityGrid {
    /// Builds the grid with the dealiasing rule `box_l = DEALIAS_FACTOR *
    /// radius`, the tightest admissible periodisation box.
    pub fn new(n: usize, radius: f64) -> Result<Self, GridError> {
        if n < 8 {
            return Err(GridError::TooFewVelocityNodes(n));
        }
        if !n.is_power_of_two() {
            return Err(GridError::NotPowerOfTwo(n));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GridError::BadRadius(radius));
        }
        let box_l = DEALIAS_FACTOR * radius;
        let dv = 2.0 * box_l / n as f64;
        let nodes = (0..n).map(|j| -box_l + j as f64 * dv).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            radius,
            box_l,
            nodes,
            fft_fwd: planner.plan_fft_forward(n),
            fft_inv: planner.plan_fft_inverse(n),
        })
    }

    /// Grid spacing per axis.
    #[inline]
    pub fn dv(&self) -> f64 {
        2.0 * self.box_l / self.n as f64
    }

    /// Number of nodes in the 3-D grid.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer Fourier mode for FFT index `j` (wrapped to `[-n/2, n/2)`).
    #[inline]
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Velocity coordinates of linear node index `idx` (axis 0 fastest).
    #[inline]
    pub fn node(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [
            self.nodes[idx % n],
            self.nodes[(idx / n) % n],
            self.nodes[idx / (n * n)],
        ]
    }

    /// Linear index from per-axis indices (axis 0 fastest).
    #[inline]
    pub fn index(&self, i0: usize, i1: usize, i2: usize) -> usize {
        i0 + self.n * (i1 + self.n * i2)
    }

    /// Riemann-sum velocity integral: `dv^3 * sum(values)`. Spectrally
    /// accurate for smooth data decaying inside the box.
    pub fn quadrature_v(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        self.dv().powi(3) * crate::num::det_sum(values)
    }

    /// Forward velocity transform: true Fourier-series coefficients of the
    /// sampled field, in FFT index order.
    pub fn dft_v(&self, values: &[f64]) -> Result<Vec<Complex64>, GridError> {
        if values.len() != self.len() {
            return Err(GridError::SizeMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft3(&mut buf, true);
        let scale = 1.0 / self.len() as f64;
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= parity_sign(self.n, j) * scale;
        }
        Ok(buf)
    }

    /// Inverse of [`Self::dft_v`]; returns the real part of the synthesis and
    /// the largest imaginary residual (should be at rounding level for
    /// Hermitian spectra).
    pub fn idft_v(&self, spectrum: &[Complex64]) -> Result<(Vec<f64>, f64), GridError> {
        if spectrum.len() != self.len() {
            return Err(GridError::SizeMismatch {
                expected: self.len(),
                got: spectrum.len(),
            });
        }
        let mut buf: Vec<Complex64> = spectrum.to_vec();
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= parity_sign(self.n, j);
        }
        self.fft3(&mut buf, false);
        let mut max_im: f64 = 0.0;
        let out = buf
            .iter()
            .map(|c| {
                max_im = max_im.max(c.im.abs());
                c.re
            })
            .collect();
        Ok((out, max_im))
    }

    /// Complex 3-D FFT in place, unnormalised, axis 0 contiguous.
    pub fn fft3(&self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        let fft = if forward { &self.fft_fwd } else { &self.fft_inv };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // Axis 0: contiguous rows.
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        // Axes 1 and 2: gather-transform-scatter.
        let mut tmp = vec![Complex64::default(); n];
        for axis in 1..3 {
            let stride = if axis == 1 { n } else { n * n };
            for outer in 0..n {
                for inner in 0..n {
                    let base = if axis == 1 {
                        inner + outer * n * n
                    } else {
                        inner + outer * n
                    };
                    for (t, slot) in tmp.iter_mut().enumerate() {
                        *slot = data[base + t * stride];
                    }
                    fft.process_with_scratch(&mut tmp, &mut scratch);
                    for (t, slot) in tmp.iter().enumerate() {
                        data[base + t * stride] = *slot;
                    }
                }
            }
        }
    }

    /// Synthesis of a (generally non-Hermitian) spectrum to complex samples.
    pub fn idft_c(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spectrum.len(), self.len());
        let mut buf: Vec<Complex64> = spectrum.to_vec();
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= parity_sign(self.n, j);
        }
        self.fft3(&mut buf, false);
        buf
    }

    /// Analysis of complex samples to true Fourier-series coefficients.
    pub fn dft_c(&self, values: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let mut buf = values.to_vec();
        self.fft3(&mut buf, true);
        let scale = 1.0 / self.len() as f64;
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= parity_sign(self.n, j) * scale;
        }
        buf
    }

    /// Integer mode vector of a linear spectral index (FFT order).
    #[inline]
    pub fn mode_vector(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        [
            self.mode(idx % n),
            self.mode((idx / n) % n),
            self.mode(idx / (n * n)),
        ]
    }

    /// Evaluates the Fourier series of a sampled field at an arbitrary point
    /// (trigonometric interpolation). O(n^3) per point; test/oracle use only.
    pub fn eval_trig(&self, spectrum: &[Complex64], v: [f64; 3]) -> f64 {
        let n = self.n;
        let arg = std::f64::consts::PI / self.box_l;
        // Separable phase tables per axis.
        let mut ph = [const { Vec::new() }; 3];
        for (axis, t) in ph.iter_mut().enumerate() {
            *t = (0..n)
                .map(|j| Complex64::from_polar(1.0, arg * self.mode(j) as f64 * v[axis]))
                .collect();
        }
        let mut acc = Complex64::default();
        for j2 in 0..n {
            let p2 = ph[2][j2];
            for j1 in 0..n {
                let p12 = ph[1][j1] * p2;
                let base = self.index(0, j1, j2);
                let mut row = Complex64::default();
                for j0 in 0..n {
                    row += spectrum[base + j0] * ph[0][j0];
                }
                acc += row * p12;
            }
        }
        acc.re
    }
}

#[inline]
fn parity_sign(n: usize, j: usize) -> f64 {
    // (-1)^(k0+k1+k2) with k the wrapped mode of index j; for even n the
    // parity of the wrapped mode equals the parity of the index.
    let i0 = j % n;
    let i1 = (j / n) % n;
    let i2 = j / (n * n);
    if (i0 + i1 + i2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Spatial torus `[-1/2, 1/2]^dim` with `n_x` points per axis. `n_x = 1`
/// degenerates to the space-homogeneous setting.
#[derive(Clone, Debug)]
pub struct TorusGrid {
    pub n_x: usize,
    pub dim_x: usize,
}

impl TorusGrid {
    pub fn new(n_x: usize, dim_x: usize) -> Result<Self, GridError> {
        if !(1..=3).contains(&dim_x) {
            return Err(GridError::BadDimX(dim_x));
        }
        if !n_x.is_power_of_two() {
            return Err(GridError::NotPowerOfTwo(n_x));
        }
        Ok(Self { n_x, dim_x })
    }

    /// Total number of spatial cells.
    #[inline]
    pub fn cells(&self) -> usize {
        self.n_x.pow(self.dim_x as u32)
    }

    /// True when the grid carries no spatial dependence.
    #[inline]
    pub fn is_homogeneous(&self) -> bool {
        self.cells() == 1
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    /// Cell volume (the torus has unit total volume).
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim_x as i32)
    }

    /// Spatial node coordinates of a linear cell index (axis 0 fastest).
    pub fn node(&self, idx: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut rest = idx;
        for slot in x.iter_mut().take(self.dim_x) {
            *slot = -0.5 + (rest % self.n_x) as f64 * self.dx();
            rest /= self.n_x;
        }
        x
    }

    /// Integer wavenumber for FFT index `j`, wrapped to `[-n/2, n/2]`.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n_x as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumber vector of a linear cell index in FFT order.
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let mut q = [0i64; 3];
        let mut rest = idx;
        for slot in q.iter_mut().take(self.dim_x) {
            *slot = self.wavenumber(rest % self.n_x);
            rest /= self.n_x;
        }
        q
    }
}

/// How the raw values of a [`DistributionField`] are currently represented.
/// Public states are always `Physical`; the spectral-in-x representation is
/// used transiently inside the transport step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    SpectralX,
}

/// Distribution function samples on torus x velocity box: cell-major layout,
/// the velocity block of each spatial cell contiguous.
#[derive(Clone)]
pub struct DistributionField {
    pub vgrid: Arc<VelocityGrid>,
    pub xgrid: Arc<TorusGrid>,
    pub values: Vec<f64>,
    pub repr: Representation,
}

impl DistributionField {
    pub fn zeros(vgrid: Arc<VelocityGrid>, xgrid: Arc<TorusGrid>) -> Self {
        let len = vgrid.len() * xgrid.cells();
        Self {
            vgrid,
            xgrid,
            values: vec![0.0; len],
            repr: Representation::Physical,
        }
    }

    /// Builds a field from a per-cell sampling function `(x, v) -> f`.
    pub fn from_fn(
        vgrid: Arc<VelocityGrid>,
        xgrid: Arc<TorusGrid>,
        f: impl Fn([f64; 3], [f64; 3]) -> f64,
    ) -> Self {
        let mut field = Self::zeros(vgrid, xgrid);
        let nv = field.vgrid.len();
        for ix in 0..field.xgrid.cells() {
            let x = field.xgrid.node(ix);
            let cell = &mut field.values[ix * nv..(ix + 1) * nv];
            for (jv, slot) in cell.iter_mut().enumerate() {
                *slot = f(x, field.vgrid.node(jv));
            }
        }
        field
    }

    #[inline]
    pub fn cell(&self, ix: usize) -> &[f64] {
        let nv = self.vgrid.len();
        &self.values[ix * nv..(ix + 1) * nv]
    }

    #[inline]
    pub fn cell_mut(&mut self, ix: usize) -> &mut [f64] {
        let nv = self.vgrid.len();
        &mut self.values[ix * nv..(ix + 1) * nv]
    }

    /// Total mass `int int f dv dx`.
    pub fn mass(&self) -> f64 {
        let per_cell: Vec<f64> = (0..self.xgrid.cells())
            .map(|ix| self.vgrid.quadrature_v(self.cell(ix)))
            .collect();
        self.xgrid.cell_volume() * crate::num::det_sum(&per_cell)
    }

    /// Grid minimum of the distribution values.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// L2 norm over phase space.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (self.vgrid.dv().powi(3) * self.xgrid.cell_volume() * crate::num::det_sum(&sq)).sqrt()
    }
}

/// Constructor for a matched grid pair; see the type-level invariants.
pub fn make_grids(
    n_v: usize,
    radius: f64,
    n_x: usize,
    dim_x: usize,
) -> Result<(Arc<VelocityGrid>, Arc<TorusGrid>), GridError> {
    Ok((
        Arc::new(VelocityGrid::new(n_v, radius)?),
        Arc::new(TorusGrid::new(n_x, dim_x)?),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maxwellian_cell(g: &VelocityGrid, rho: f64, u: [f64; 3], t: f64) -> Vec<f64> {
        let norm = rho / (2.0 * std::f64::consts::PI * t).powf(1.5);
        (0..g.len())
            .map(|j| {
                let v = g.node(j);
                let d2 = (0..3).map(|a| (v[a] - u[a]) * (v[a] - u[a])).sum::<f64>();
                norm * (-d2 / (2.0 * t)).exp()
            })
            .collect()
    }

    #[test]
    fn make_grids_examples() {
        let (vg, _) = make_grids(16, 6.0, 8, 1).unwrap();
        assert!(vg.box_l >= DEALIAS_FACTOR * 6.0 - 1e-12, "box_l={}", vg.box_l);
        assert!(vg.box_l >= 13.24);

        let (vg8, tg) = make_grids(8, 4.0, 1, 1).unwrap();
        assert!(tg.is_homogeneous());
        assert!(vg8.box_l >= DEALIAS_FACTOR * 4.0 - 1e-12);

        let (_, tg3) = make_grids(32, 8.0, 16, 3).unwrap();
        assert_eq!(tg3.cells(), 16 * 16 * 16);

        assert!(make_grids(4, 4.0, 8, 1).is_err());
        assert!(make_grids(16, 4.0, 8, 4).is_err());
        assert!(make_grids(12, 4.0, 8, 1).is_err());
    }

    #[test]
    fn dft_roundtrip_impulse_and_zero() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let mut f = vec![0.0; g.len()];
        f[g.index(3, 1, 6)] = 1.0;
        let spec = g.dft_v(&f).unwrap();
        // Unit impulse: flat spectrum of constant modulus 1/n^3.
        let want = 1.0 / g.len() as f64;
        for c in &spec {
            assert!((c.norm() - want).abs() < 1e-13);
        }
        let (back, _) = g.idft_v(&spec).unwrap();
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = vec![0.0; g.len()];
        assert!(g.dft_v(&zero).unwrap().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dft_roundtrip_maxwellian() {
        let g = VelocityGrid::new(16, 5.0).unwrap();
        let f = maxwellian_cell(&g, 1.0, [0.3, -0.1, 0.0], 1.2);
        let spec = g.dft_v(&f).unwrap();
        let (back, max_im) = g.idft_v(&spec).unwrap();
        let num: f64 = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = f.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(num / den < 1e-12, "roundtrip rel err {}", num / den);
        assert!(max_im < 1e-12);
    }

    #[test]
    fn quadrature_of_maxwellian_is_mass() {
        // Periodisation error of the unit Gaussian at this spacing is
        // ~1.7e-6 (Poisson summation); the rule is spectrally accurate, so
        // a slightly wider Gaussian already reaches 1e-8 (next test).
        let g = VelocityGrid::new(32, 8.0).unwrap();
        let f = maxwellian_cell(&g, 1.0, [0.0; 3], 1.0);
        assert!((g.quadrature_v(&f) - 1.0).abs() < 1e-5);
        assert_eq!(g.quadrature_v(&vec![0.0; g.len()]), 0.0);
    }

    #[test]
    fn quadrature_of_smooth_bump_mass() {
        // Smooth bump with analytically known mass: a Gaussian of variance
        // 1.44, mass (2 pi 1.44)^{3/2}, well resolved at this spacing.
        let g = VelocityGrid::new(32, 8.0).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|j| {
                let v = g.node(j);
                let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                (-r2 / 2.88).exp()
            })
            .collect();
        let want = (2.88 * std::f64::consts::PI).powf(1.5);
        assert!(
            (g.quadrature_v(&f) - want).abs() < 1e-8 * want,
            "err {}",
            (g.quadrature_v(&f) - want).abs() / want
        );
    }

    #[test]
    fn parseval() {
        let g = VelocityGrid::new(16, 5.0).unwrap();
        let f = maxwellian_cell(&g, 2.0, [0.5, 0.0, -0.2], 0.8);
        let spec = g.dft_v(&f).unwrap();
        let phys: f64 = g.quadrature_v(&f.iter().map(|v| v * v).collect::<Vec<_>>());
        let spect: f64 =
            (2.0 * g.box_l).powi(3) * spec.iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!(
            (phys - spect).abs() < 1e-10 * phys.abs(),
            "parseval {phys} vs {spect}"
        );
    }

    #[test]
    fn trig_eval_matches_samples() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let f = maxwellian_cell(&g, 1.0, [0.2; 3], 1.0);
        let spec = g.dft_v(&f).unwrap();
        let idx = g.index(2, 5, 7);
        let v = g.node(idx);
        assert!((g.eval_trig(&spec, v) - f[idx]).abs() < 1e-11);
    }
}
