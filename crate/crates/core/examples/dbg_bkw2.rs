use boltz_core::collision::{q_direct, DirectOpts, SpectralKernelTable, TableParams};
use boltz_core::dynamics::BkwSolution;
use boltz_core::grid::{make_grids, DistributionField};
use boltz_core::kernel::{AngularProfile, KernelSpec};

fn main() {
    for &(n, r) in &[(16usize, 5.0f64), (32, 5.2)] {
        let (vg, xg) = make_grids(n, r, 1, 1).unwrap();
        let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
        let bkw = BkwSolution::new(0.65, &spec);
        let f = DistributionField::from_fn(vg.clone(), xg, |_, v| {
            bkw.eval(v[0]*v[0]+v[1]*v[1]+v[2]*v[2], 0.0)
        });
        let cell = f.cell(0).to_vec();
        // analytic d/dt via central difference of the exact solution in t
        let dt = 1e-5;
        let dfdt: Vec<f64> = (0..vg.len()).map(|j| {
            let v = vg.node(j);
            let v2 = v[0]*v[0]+v[1]*v[1]+v[2]*v[2];
            (bkw.eval(v2, dt) - bkw.eval(v2, -dt)) / (2.0 * dt)
        }).collect();
        let params = TableParams { n_radial: 12, n_polar: 6, n_azimuth: 12, memory_cap_bytes: 2 << 30 };
        let table = SpectralKernelTable::build(vg.clone(), spec.clone(), params).unwrap();
        let q = table.q_spectral(&cell, &cell).unwrap();
        let num: f64 = q.iter().zip(&dfdt).map(|(a,b)| (a-b)*(a-b)).sum::<f64>().sqrt();
        let den: f64 = dfdt.iter().map(|x| x*x).sum::<f64>().sqrt();
        println!("n={n}: |q_spectral - analytic dBKW/dt| rel = {:.3e}", num/den);
        // moment drifts of Q
        for (name, pw) in [("mass",0), ("energy",2), ("m4",4)] {
            let vals: Vec<f64> = (0..vg.len()).map(|j| {
                let v = vg.node(j);
                let v2: f64 = v[0]*v[0]+v[1]*v[1]+v[2]*v[2];
                q[j] * v2.powi(pw/2 as i32)
            }).collect();
            println!("  d{name}/dt = {:.5}", vg.quadrature_v(&vals));
        }
        if n == 16 {
            let qd = q_direct(&cell, &cell, &spec, &vg, &DirectOpts::default()).unwrap();
            let numd: f64 = qd.iter().zip(&dfdt).map(|(a,b)| (a-b)*(a-b)).sum::<f64>().sqrt();
            println!("  q_direct(tri) vs analytic rel = {:.3e}", numd/den);
        }
    }
}
