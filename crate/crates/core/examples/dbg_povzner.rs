use boltz_core::functionals::povzner_coefficient;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use boltz_core::num::linear_fit;

fn main() {
    for &s in &[0.25, 0.5, 0.75] {
        let spec = KernelSpec::with_quadrature(0.0, s, 0.0, AngularProfile::Canonical, 16, 8).unwrap();
        let ls = [8.0f64, 16.0, 32.0, 64.0];
        let cs: Vec<f64> = ls.iter().map(|&l| povzner_coefficient(50.0, l, &spec)).collect();
        let xs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
        let ys: Vec<f64> = cs.iter().map(|c| c.ln()).collect();
        let (_, slope, r2) = linear_fit(&xs, &ys);
        let local: Vec<f64> = (0..3).map(|i| (ys[i+1]-ys[i])/(xs[i+1]-xs[i])).collect();
        println!("s={s}: c(l)={cs:?}");
        println!("  global slope={slope:.4} r2={r2:.5} local slopes={local:?}");
        // also try the extended range
        let ls2 = [64.0f64, 128.0, 256.0, 512.0];
        let ys2: Vec<f64> = ls2.iter().map(|&l| povzner_coefficient(200.0, l, &spec).ln()).collect();
        let xs2: Vec<f64> = ls2.iter().map(|l| l.ln()).collect();
        let (_, slope2, _) = linear_fit(&xs2, &ys2);
        println!("  extended-range slope={slope2:.4}");
    }
}
