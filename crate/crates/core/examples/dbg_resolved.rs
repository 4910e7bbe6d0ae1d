use boltz_core::collision::{SpectralKernelTable, TableParams};
use boltz_core::grid::VelocityGrid;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use std::sync::Arc;
use std::time::Instant;

fn maxw(g: &VelocityGrid) -> Vec<f64> {
    let norm = 1.0 / (2.0 * std::f64::consts::PI).powf(1.5);
    (0..g.len()).map(|j| { let v = g.node(j); norm * (-(v[0]*v[0]+v[1]*v[1]+v[2]*v[2])/2.0).exp() }).collect()
}

fn run(n: usize, r: f64, params: TableParams) -> (f64, f64, f64) {
    let grid = Arc::new(VelocityGrid::new(n, r).unwrap());
    let spec = KernelSpec::new(0.0, 0.5, 0.05, AngularProfile::Canonical).unwrap();
    let t0 = Instant::now();
    let table = SpectralKernelTable::build(grid.clone(), spec, params).unwrap();
    let build_s = t0.elapsed().as_secs_f64();
    let m = maxw(&grid);
    let t1 = Instant::now();
    let q = table.q_spectral(&m, &m).unwrap();
    let eval_s = t1.elapsed().as_secs_f64();
    let qn = grid.quadrature_v(&q.iter().map(|x| x*x).collect::<Vec<_>>()).sqrt();
    let mn = grid.quadrature_v(&m.iter().map(|x| x*x).collect::<Vec<_>>()).sqrt();
    let mass = grid.quadrature_v(&q);
    println!("n={n} R={r}: mass(M)={:.8} massQ={:.3e} relres={:.3e} build={build_s:.1}s eval={eval_s:.2}s", grid.quadrature_v(&m), mass, qn/mn);
    (mass, qn/mn, eval_s)
}

fn main() {
    let p16 = TableParams::for_grid(16);
    let p32 = TableParams::for_grid(32);
    run(16, 5.0, p16);
    run(32, 7.0, p32);
}
