use boltz_core::experiments::*;
use boltz_core::kernel::{AngularProfile, KernelSpec};
use boltz_core::collision::TableParams;

fn main() {
    for &(n, r) in &[(16usize, 3.6f64), (16, 3.1), (16, 2.8), (32, 4.5)] {
        let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
        let mut cfg = ExperimentConfig::homogeneous("ht", spec, InitialCondition::Bkw { k0: 0.65 });
        cfg.n_v = n;
        cfg.radius = r;
        cfg.table = TableParams::for_grid(n);
        cfg.t_end = 0.5;
        let out = exp_h_theorem(&cfg).unwrap();
        let h: Vec<f64> = out.series.iter().map(|d| d.h_rel_global).collect();
        println!("n={n} R={r}: pass={} H = {:?}", out.verdict.pass,
                 h.iter().step_by((h.len()/6).max(1)).map(|x| format!("{x:.5}")).collect::<Vec<_>>());
    }
}
