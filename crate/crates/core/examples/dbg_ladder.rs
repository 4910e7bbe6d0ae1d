use boltz_core::collision::{SpectralKernelTable, TableParams};
use boltz_core::grid::{make_grids, DistributionField};
use boltz_core::kernel::{AngularProfile, KernelSpec};
use std::time::Instant;

fn main() {
    let n = 32;
    let r = 5.2;
    let (vg, xg) = make_grids(n, r, 1, 1).unwrap();
    let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
    let f = DistributionField::from_fn(vg.clone(), xg, |_, v| {
        (2.0 * std::f64::consts::PI).powf(-1.5) * (-(v[0]*v[0]+v[1]*v[1]+v[2]*v[2]) / 2.0).exp()
    });
    let m = f.cell(0).to_vec();
    // lambda4 = 2 * lambda = angular_sin2_mass / 2
    let lam4 = spec.angular_sin2_mass() / 2.0;
    for &(nr, np, na) in &[(12usize, 6usize, 12usize), (12, 8, 16), (16, 10, 20), (16, 12, 24), (20, 14, 28)] {
        let p = TableParams { n_radial: nr, n_polar: np, n_azimuth: na, memory_cap_bytes: 2 << 30 };
        if p.estimate_bytes(n) > p.memory_cap_bytes { println!("skip ({nr},{np},{na})"); continue; }
        let t0 = Instant::now();
        let table = SpectralKernelTable::build(vg.clone(), spec.clone(), p).unwrap();
        let tb = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let q = table.q_spectral(&m, &m).unwrap();
        let te = t1.elapsed().as_secs_f64();
        let vals: Vec<f64> = (0..vg.len()).map(|j| {
            let v = vg.node(j);
            let v2 = v[0]*v[0]+v[1]*v[1]+v[2]*v[2];
            q[j] * v2 * v2
        }).collect();
        let dm4 = vg.quadrature_v(&vals);
        println!("({nr},{np},{na}) nodes={}: dm4/dt at M = {dm4:.4}, equil shift ~ {:.4} ({:.2}%), build {tb:.0}s eval {te:.1}s",
            nr*np*na, dm4/lam4, 100.0 * dm4.abs()/lam4/15.0);
    }
}
