use boltz_core::collision::{SpectralKernelTable, TableParams};
use boltz_core::dynamics::{run, BkwSolution, RunOpts, SplitScheme, TimeStepper};
use boltz_core::grid::{make_grids, DistributionField};
use boltz_core::kernel::{AngularProfile, KernelSpec};
use std::time::Instant;

fn main() {
    let n = 32;
    let r = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4.5);
    let (vg, xg) = make_grids(n, r, 1, 1).unwrap();
    let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
    let bkw = BkwSolution::new(0.65, &spec);
    println!("lambda = {} (analytic pi/3*... = {})", bkw.lambda, std::f64::consts::PI / 3.0);
    let mut f = DistributionField::from_fn(vg.clone(), xg, |_, v| {
        bkw.eval(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 0.0)
    });
    let params = TableParams { n_radial: 12, n_polar: 6, n_azimuth: 12, memory_cap_bytes: 1 << 30 };
    let _ = &params;
    let t0 = Instant::now();
    let table = SpectralKernelTable::build(vg.clone(), spec, params).unwrap();
    println!("table build {:.1}s nodes {}", t0.elapsed().as_secs_f64(), params.nodes());

    let m4 = |field: &DistributionField| -> f64 {
        let cell = field.cell(0);
        let vals: Vec<f64> = (0..vg.len()).map(|j| {
            let v = vg.node(j);
            let v2 = v[0]*v[0]+v[1]*v[1]+v[2]*v[2];
            cell[j] * v2 * v2
        }).collect();
        vg.quadrature_v(&vals)
    };
    println!("m4(0) solver = {:.6}, analytic = {:.6}", m4(&f), bkw.fourth_moment(0.0));

    let dt = 0.05;
    let mut stepper = TimeStepper::new(dt, SplitScheme::Strang).unwrap();
    let opts = RunOpts { diag_every: 4, projection: true, ..Default::default() };
    let t1 = Instant::now();
    let mut worst: f64 = 0.0;
    let t_end = 1.0;
    let steps = (t_end / dt).round() as usize;
    for s in 1..=steps {
        boltz_core::dynamics::collide_step(&mut f, &table, dt, true).unwrap();
        if s % 4 == 0 || s == steps {
            let t = s as f64 * dt;
            let got = m4(&f);
            let want = bkw.fourth_moment(t);
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            println!("t={t:.2}: m4 solver {got:.5} analytic {want:.5} rel {rel:.2e}");
        }
    }
    let _ = opts; let _ = stepper.t_now; stepper.t_now = 0.0;
    println!("worst rel err {worst:.3e}, run time {:.1}s", t1.elapsed().as_secs_f64());
}
