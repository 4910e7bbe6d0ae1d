use boltz_core::collision::{q_direct, DirectOpts, SpectralKernelTable, TableParams};
use boltz_core::grid::VelocityGrid;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

/// Random band-limited field: modes |l|_inf <= 1 so products stay unaliased.
fn band_limited(grid: &VelocityGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = grid.n;
    let mut vals = vec![0.0; grid.len()];
    // real field: random cosine/sine expansion
    let mut modes = Vec::new();
    for k2 in -1i64..=1 {
        for k1 in -1i64..=1 {
            for k0 in -1i64..=1 {
                modes.push(([k0, k1, k2], rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
    }
    let arg = std::f64::consts::PI / grid.box_l;
    for j in 0..grid.len() {
        let v = grid.node(j);
        let mut acc = 0.0;
        for &(k, a, b) in &modes {
            let ph = arg * (k[0] as f64 * v[0] + k[1] as f64 * v[1] + k[2] as f64 * v[2]);
            acc += a * ph.cos() + b * ph.sin();
        }
        vals[j] = acc;
    }
    let _ = n;
    vals
}

fn main() {
    let grid = Arc::new(VelocityGrid::new(8, 4.0).unwrap());
    // shared compact theta rule so the scattering-angle error cancels
    let spec = KernelSpec::with_quadrature(1.0, 0.5, 0.05, AngularProfile::Canonical, 8, 4).unwrap();
    let params = TableParams { n_radial: 12, n_polar: 16, n_azimuth: 32, memory_cap_bytes: 1 << 30 };
    let table = SpectralKernelTable::build(grid.clone(), spec.clone(), params).unwrap();
    let opts = DirectOpts {
        interpolation: boltz_core::collision::Interpolation::Trig,
        u_domain: boltz_core::collision::UDomain::PolarBall { n_radial: 12, n_polar: 10, n_azimuth: 20 },
        azimuth: 12,
        prune_rel: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    let t0 = Instant::now();
    for trial in 0..3 {
        let g = band_limited(&grid, &mut rng);
        let f = band_limited(&grid, &mut rng);
        let qs = table.q_spectral(&g, &f).unwrap();
        let qd = q_direct(&g, &f, &spec, &grid, &opts).unwrap();
        let num: f64 = qs.iter().zip(&qd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den: f64 = qd.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("trial {trial}: rel L2 = {:.3e}", num / den);
        worst = worst.max(num / den);
    }
    println!("worst = {worst:.3e}, elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
