use boltz_core::collision::{SpectralKernelTable, TableParams};
use boltz_core::grid::VelocityGrid;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use std::sync::Arc;
use std::time::Instant;

fn maxw(g: &VelocityGrid) -> Vec<f64> {
    let norm = 1.0 / (2.0 * std::f64::consts::PI).powf(1.5);
    (0..g.len()).map(|j| { let v = g.node(j); norm * (-(v[0]*v[0]+v[1]*v[1]+v[2]*v[2])/2.0).exp() }).collect()
}

fn main() {
    for &(n, r) in &[(16usize, 5.0f64), (32, 7.0)] {
        let grid = Arc::new(VelocityGrid::new(n, r).unwrap());
        let spec = KernelSpec::new(0.0, 0.5, 0.05, AngularProfile::Canonical).unwrap();
        let m = maxw(&grid);
        let mn = grid.quadrature_v(&m.iter().map(|x| x*x).collect::<Vec<_>>()).sqrt();
        for &(nr, np, na) in &[(10usize, 4usize, 8usize), (16, 6, 12), (20, 8, 16), (28, 10, 20)] {
            let p = TableParams { n_radial: nr, n_polar: np, n_azimuth: na, memory_cap_bytes: 2 << 30 };
            if p.estimate_bytes(n) > p.memory_cap_bytes { continue; }
            let t0 = Instant::now();
            let table = SpectralKernelTable::build(grid.clone(), spec.clone(), p).unwrap();
            let tb = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let q = table.q_spectral(&m, &m).unwrap();
            let te = t1.elapsed().as_secs_f64();
            let qn = grid.quadrature_v(&q.iter().map(|x| x*x).collect::<Vec<_>>()).sqrt();
            println!("n={n} nodes=({nr},{np},{na})={} relres={:.3e} build={tb:.1}s eval={te:.2}s mem={}MB",
                nr*np*na, qn/mn, table.memory_bytes >> 20);
        }
    }
}
