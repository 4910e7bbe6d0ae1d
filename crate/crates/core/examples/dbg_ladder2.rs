use boltz_core::collision::{SpectralKernelTable, TableParams};
use boltz_core::dynamics::BkwSolution;
use boltz_core::grid::{make_grids, DistributionField};
use boltz_core::kernel::{AngularProfile, KernelSpec};
use std::time::Instant;

fn main() {
    let (n, r) = (32usize, 4.5f64);
    let (vg, xg) = make_grids(n, r, 1, 1).unwrap();
    let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
    let bkw = BkwSolution::new(0.65, &spec);
    let f = DistributionField::from_fn(vg.clone(), xg, |_, v| {
        bkw.eval(v[0]*v[0]+v[1]*v[1]+v[2]*v[2], 0.0)
    });
    let cell = f.cell(0).to_vec();
    let analytic_dm4 = {
        let lam4 = spec.angular_sin2_mass() / 2.0;
        // m2 of the discrete init
        let m2: f64 = vg.quadrature_v(&(0..vg.len()).map(|j| {
            let v = vg.node(j); cell[j]*(v[0]*v[0]+v[1]*v[1]+v[2]*v[2])
        }).collect::<Vec<_>>());
        let m4: f64 = vg.quadrature_v(&(0..vg.len()).map(|j| {
            let v = vg.node(j); let v2 = v[0]*v[0]+v[1]*v[1]+v[2]*v[2]; cell[j]*v2*v2
        }).collect::<Vec<_>>());
        let rho: f64 = vg.quadrature_v(&cell);
        let lam = spec.angular_sin2_mass();
        // dm4/dt = -(Lam rho / 2) m4 + (5 Lam / 6) m2^2
        -(lam * rho / 2.0) * m4 + (5.0 * lam / 6.0) * m2 * m2 / 1.0 + 0.0*lam4
    };
    println!("analytic dm4/dt at init = {analytic_dm4:.4}");
    for &(nr, np, na) in &[(12usize,6usize,12usize), (24,6,12), (12,10,20), (20,12,24), (28,14,28)] {
        let p = TableParams { n_radial: nr, n_polar: np, n_azimuth: na, memory_cap_bytes: (3usize) << 30 };
        if p.estimate_bytes(n) > p.memory_cap_bytes { println!("skip ({nr},{np},{na})"); continue; }
        let t0 = Instant::now();
        let table = SpectralKernelTable::build(vg.clone(), spec.clone(), p).unwrap();
        let q = table.q_spectral(&cell, &cell).unwrap();
        let vals: Vec<f64> = (0..vg.len()).map(|j| {
            let v = vg.node(j);
            let v2 = v[0]*v[0]+v[1]*v[1]+v[2]*v[2];
            q[j] * v2 * v2
        }).collect();
        println!("({nr},{np},{na}) nodes={}: dm4/dt = {:.4} [{:.0}s]", nr*np*na, vg.quadrature_v(&vals), t0.elapsed().as_secs_f64());
    }
}
