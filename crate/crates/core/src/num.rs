//! Small numerical building blocks shared across the solver: Gauss-Legendre
//! rules, sphere quadrature, a Bessel J0 table, least-squares fits and
//! deterministic (ordering-fixed) parallel reductions.

use num_complex::Complex64;
use rayon::prelude::*;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Deterministic to the last bit for a given `n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&t| t * half).collect(),
    )
}

/// Quadrature nodes and weights on the unit sphere: product of a
/// Gauss-Legendre rule in cos(polar) and a uniform azimuthal rule.
/// Weights sum to 4*pi.
pub fn sphere_rule(n_polar: usize, n_azimuth: usize) -> Vec<([f64; 3], f64)> {
    let (ct, wt) = gauss_legendre(n_polar);
    let mut out = Vec::with_capacity(n_polar * n_azimuth);
    let waz = 2.0 * std::f64::consts::PI / n_azimuth as f64;
    for (c, w) in ct.iter().zip(wt.iter()) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for a in 0..n_azimuth {
            let phi = waz * a as f64;
            out.push(([s * phi.cos(), s * phi.sin(), *c], w * waz));
        }
    }
    out
}

/// Bessel function J0 tabulated on a uniform grid with cubic interpolation.
/// The table is built once from the integral representation
/// J0(x) = (1/pi) * int_0^pi cos(x sin t) dt via a trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub struct BesselJ0Table {
    h: f64,
    values: Vec<f64>,
    x_max: f64,
}

impl BesselJ0Table {
    pub fn new(x_max: f64) -> Self {
        let h = 2.5e-3;
        let n = (x_max / h).ceil() as usize + 4;
        let m = 64usize;
        let dt = std::f64::consts::PI / m as f64;
        let sins: Vec<f64> = (0..m).map(|j| ((j as f64 + 0.5) * dt).sin()).collect();
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * h;
                let mut acc = 0.0;
                for s in &sins {
                    acc += (x * s).cos();
                }
                acc / m as f64
            })
            .collect();
        Self {
            h,
            values,
            x_max: (n - 3) as f64 * h,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        assert!(
            x <= self.x_max,
            "J0 table queried at {x} beyond x_max {}",
            self.x_max
        );
        let t = x / self.h;
        let i = (t as usize).clamp(1, self.values.len() - 3);
        let s = t - i as f64;
        // 4-point (cubic) Lagrange interpolation around i.
        let (f0, f1, f2, f3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        let c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        c0 * f0 + c1 * f1 + c2 * f2 + c3 * f3
    }
}

/// Least-squares straight line `y = a + b x`; returns (a, b, r_squared).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    let ybar = sy / n;
    let ss_tot: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xv, yv)| {
            let e = yv - (a + b * xv);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, b, r2)
}

/// Deterministic parallel sum: the slice is split into fixed-size chunks,
/// each chunk is summed sequentially, and the per-chunk partials are folded
/// in chunk order. The result is bitwise independent of the thread count.
pub fn det_sum(data: &[f64]) -> f64 {
    const CHUNK: usize = 4096;
    if data.len() <= CHUNK {
        return data.iter().sum();
    }
    let partials: Vec<f64> = data
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Deterministic parallel sum of a function over an index range, chunked as
/// in [`det_sum`].
pub fn det_sum_by<F>(n: usize, chunk: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks: Vec<(usize, usize)> = (0..n)
        .step_by(chunk)
        .map(|s| (s, (s + chunk).min(n)))
        .collect();
    let partials: Vec<f64> = chunks
        .par_iter()
        .map(|&(s, e)| (s..e).map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Accumulate complex contributions from `n_items` producers into a single
/// buffer, deterministically: items are processed in fixed chunks, each chunk
/// builds its own partial buffer, and partials are combined in chunk order.
pub fn det_accumulate<F>(n_items: usize, chunk: usize, len: usize, fill: F) -> Vec<Complex64>
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    let chunks: Vec<(usize, usize)> = (0..n_items)
        .step_by(chunk)
        .map(|s| (s, (s + chunk).min(n_items)))
        .collect();
    let partials: Vec<Vec<Complex64>> = chunks
        .par_iter()
        .map(|&(s, e)| {
            let mut buf = vec![Complex64::default(); len];
            for item in s..e {
                fill(item, &mut buf);
            }
            buf
        })
        .collect();
    let mut out = vec![Complex64::default(); len];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // int_{-1}^{1} x^14 dx = 2/15, exact for GL-8 (degree 15).
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14, "got {s}");
    }

    #[test]
    fn sphere_rule_weights_and_moments() {
        let rule = sphere_rule(6, 12);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        // int sigma_z^2 over the sphere = 4 pi / 3.
        let sz2: f64 = rule.iter().map(|(s, w)| w * s[2] * s[2]).sum();
        assert!((sz2 - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn j0_table_matches_reference() {
        let table = BesselJ0Table::new(40.0);
        // Series is only stable for small arguments.
        for &x in &[0.0, 0.5, 1.0, 3.0] {
            let mut term: f64 = 1.0;
            let mut sum: f64 = 1.0;
            let q = x * x / 4.0;
            for k in 1..40 {
                term *= -q / ((k * k) as f64);
                sum += term;
            }
            assert!(
                (table.eval(x) - sum).abs() < 1e-10,
                "x={x}: {} vs {sum}",
                table.eval(x)
            );
        }
        // Known zeros and a reference value at large argument.
        for &z in &[2.404825557695773, 5.520078110286311, 8.653727912911013] {
            assert!(table.eval(z).abs() < 1e-10, "J0({z}) = {}", table.eval(z));
        }
        assert!((table.eval(10.0) - (-0.2459357644513483)).abs() < 1e-10);
    }

    #[test]
    fn det_sum_matches_sequential() {
        let data: Vec<f64> = (0..100_000).map(|i| (i as f64 * 0.37).sin()).collect();
        let seq: f64 = data
            .chunks(4096)
            .map(|c| c.iter().sum::<f64>())
            .sum();
        assert_eq!(det_sum(&data), seq);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let (a, b, r2) = linear_fit(&x, &y);
        assert!((a - 3.0).abs() < 1e-12 && (b + 2.0).abs() < 1e-12 && r2 > 0.999999);
    }
}
