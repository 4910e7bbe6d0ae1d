use boltz_core::collision::{SpectralKernelTable, TableParams};
use boltz_core::grid::VelocityGrid;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let grid = Arc::new(VelocityGrid::new(8, 5.0).unwrap());
    // conv theorem sanity
    let mut u = vec![Complex64::default(); grid.len()];
    let mut v = vec![Complex64::default(); grid.len()];
    for (i, (a, b)) in u.iter_mut().zip(v.iter_mut()).enumerate() {
        *a = Complex64::new((i as f64 * 0.13).sin(), (i as f64 * 0.7).cos());
        *b = Complex64::new((i as f64 * 0.29).cos(), (i as f64 * 0.11).sin());
    }
    let pu = grid.idft_c(&u);
    let pv = grid.idft_c(&v);
    let prod: Vec<Complex64> = pu.iter().zip(&pv).map(|(a, b)| a * b).collect();
    let chat = grid.dft_c(&prod);
    // direct wrapped convolution at a few k
    for &kidx in &[0usize, 3, 100] {
        let kk = grid.mode_vector(kidx);
        let mut direct = Complex64::default();
        for l in 0..grid.len() {
            let lv = grid.mode_vector(l);
            // m = k - l wrapped
            let n = grid.n as i64;
            let wrap = |x: i64| -> usize {
                let mut r = x % n;
                if r < 0 { r += n; }
                r as usize
            };
            let mi = grid.index(wrap(kk[0]-lv[0]), wrap(kk[1]-lv[1]), wrap(kk[2]-lv[2]));
            direct += u[l] * v[mi];
        }
        println!("k={kidx}: fft {:?} direct {:?} diff {:.3e}", chat[kidx], direct, (chat[kidx]-direct).norm());
    }

    // loss frequency vs analytic for gamma=0, eps>0: nu = C_b * mass(g)
    let spec = KernelSpec::new(0.0, 0.5, 0.1, AngularProfile::Canonical).unwrap();
    let table = SpectralKernelTable::build(grid.clone(), spec.clone(), TableParams { n_radial: 10, n_polar: 6, n_azimuth: 12, memory_cap_bytes: 1<<30 }).unwrap();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).powf(1.5);
    let m: Vec<f64> = (0..grid.len()).map(|j| { let v = grid.node(j); norm * (-(v[0]*v[0]+v[1]*v[1]+v[2]*v[2])/2.0).exp() }).collect();
    let nu = table.loss_frequency(&m).unwrap();
    let mass = grid.quadrature_v(&m);
    println!("angular_mass(C_b) = {:.6}, mass = {:.6}", table.angular_mass, mass);
    println!("nu at center = {:.6}, expect ~ C_b*mass = {:.6}", nu[grid.index(4,4,4)], table.angular_mass * mass);
    // Q(m,m) mass residual
    let q = table.q_spectral(&m, &m).unwrap();
    println!("mass of Q = {:.3e}", grid.quadrature_v(&q));
    let qn = grid.quadrature_v(&q.iter().map(|x| x*x).collect::<Vec<_>>()).sqrt();
    println!("||Q(M,M)||_2 = {:.3e}", qn);
}
