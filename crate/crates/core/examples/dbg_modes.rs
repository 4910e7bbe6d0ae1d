use boltz_core::grid::VelocityGrid;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use boltz_core::num::{gauss_legendre_on, sphere_rule, BesselJ0Table};
use num_complex::Complex64;

// Compare Bhat(l,m) via the table construction (sigma rule + analytic omega)
// against a dense explicit (omega rule + sigma-around-omega rule) quadrature.
fn main() {
    let grid = VelocityGrid::new(16, 5.0).unwrap();
    let spec = KernelSpec::new(0.0, 0.5, 0.05, AngularProfile::Canonical).unwrap();
    let l_box = grid.box_l;
    let (rn, rw) = gauss_legendre_on(12, 0.0, 2.0 * grid.radius);

    let theta: Vec<(f64, f64)> = spec.theta_nodes.iter().map(|&(t, w)| (t, w * spec.sin_b_eps(t))).collect();
    let cb: f64 = 2.0 * std::f64::consts::PI * theta.iter().map(|t| t.1).sum::<f64>();
    println!("cb = {cb}");

    let pairs = [([1i64,0,0],[0i64,0,0]), ([2,1,0],[1,-1,1]), ([3,0,0],[-3,0,0]), ([4,2,-1],[0,1,1])];

    // Route A: sigma sphere rule + analytic omega (J0).
    let j0 = BesselJ0Table::new(200.0);
    let sig_rule = sphere_rule(24, 48);
    for (l, m) in pairs {
        let mut a = Complex64::default();
        for (&r, &wr) in rn.iter().zip(&rw) {
            let c = std::f64::consts::PI * r / (2.0 * l_box);
            let wrad = wr * r * r;
            let k = [l[0]+m[0], l[1]+m[1], l[2]+m[2]];
            let d = [l[0]-m[0], l[1]-m[1], l[2]-m[2]];
            for &(sig, ws) in &sig_rule {
                let kd = k[0] as f64*sig[0] + k[1] as f64*sig[1] + k[2] as f64*sig[2];
                let k2 = (k[0]*k[0]+k[1]*k[1]+k[2]*k[2]) as f64;
                let apar = c * kd;
                let aperp = c * (k2 - kd*kd).max(0.0).sqrt();
                let mut phi = Complex64::default();
                for &(t, wb) in &theta {
                    let bes = j0.eval(aperp * t.sin());
                    let (s_, c_) = (-apar * t.cos()).sin_cos();
                    phi += Complex64::new(c_ * bes * wb, s_ * bes * wb);
                }
                phi *= 2.0 * std::f64::consts::PI;
                let dd = d[0] as f64*sig[0] + d[1] as f64*sig[1] + d[2] as f64*sig[2];
                let (s_, c_) = (-c * dd).sin_cos();
                a += wrad * ws * phi * Complex64::new(c_, s_);
            }
        }
        // Route B: omega sphere rule + explicit sigma around omega.
        let om_rule = sphere_rule(24, 48);
        let naz = 32;
        let waz = 2.0 * std::f64::consts::PI / naz as f64;
        let mut b = Complex64::default();
        for (&r, &wr) in rn.iter().zip(&rw) {
            let c = std::f64::consts::PI * r / (2.0 * l_box);
            let wrad = wr * r * r;
            let k = [(l[0]+m[0]) as f64, (l[1]+m[1]) as f64, (l[2]+m[2]) as f64];
            let d = [(l[0]-m[0]) as f64, (l[1]-m[1]) as f64, (l[2]-m[2]) as f64];
            for &(om, wo) in &om_rule {
                let (e1, e2) = frame(om);
                let kw = k[0]*om[0]+k[1]*om[1]+k[2]*om[2];
                for &(t, wb) in &theta {
                    let (st, ct) = t.sin_cos();
                    for az in 0..naz {
                        let ph = waz * az as f64;
                        let (sp, cp) = ph.sin_cos();
                        let sg = [ct*om[0] + st*(cp*e1[0]+sp*e2[0]),
                                  ct*om[1] + st*(cp*e1[1]+sp*e2[1]),
                                  ct*om[2] + st*(cp*e1[2]+sp*e2[2])];
                        let ds = d[0]*sg[0]+d[1]*sg[1]+d[2]*sg[2];
                        let arg = -c * (kw + ds);
                        let (s_, c_) = arg.sin_cos();
                        b += wrad * wo * wb * waz * Complex64::new(c_, s_);
                    }
                }
            }
        }
        println!("l={l:?} m={m:?}: A={a:?}  B={b:?}  |A-B|={:.3e} |A|={:.3e}", (a-b).norm(), a.norm());
    }
}

fn frame(w: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if w[0].abs() <= w[1].abs() && w[0].abs() <= w[2].abs() { [1.0,0.0,0.0] }
        else if w[1].abs() <= w[2].abs() { [0.0,1.0,0.0] } else { [0.0,0.0,1.0] };
    let mut e1 = [w[1]*a[2]-w[2]*a[1], w[2]*a[0]-w[0]*a[2], w[0]*a[1]-w[1]*a[0]];
    let n = (e1[0]*e1[0]+e1[1]*e1[1]+e1[2]*e1[2]).sqrt();
    e1 = [e1[0]/n, e1[1]/n, e1[2]/n];
    let e2 = [w[1]*e1[2]-w[2]*e1[1], w[2]*e1[0]-w[0]*e1[2], w[0]*e1[1]-w[1]*e1[0]];
    (e1, e2)
}
