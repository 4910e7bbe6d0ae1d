use boltz_core::functionals::dyadic_norm;
use boltz_core::grid::make_grids;

fn main() {
    let (vg, _) = make_grids(16, 6.0, 1, 1).unwrap();
    let members: Vec<(String, Vec<f64>)> = (0..4)
        .map(|i| {
            let f: Vec<f64> = (0..vg.len())
                .map(|j| {
                    let v = vg.node(j);
                    let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                    let base = (-r2 / 2.0f64).exp();
                    match i {
                        0 => base,
                        1 => base * v[0] * v[0],
                        2 => base * (1.0 + (1.3 * v[1]).sin()),
                        _ => base * (0.5 + 0.5 * (0.9 * v[2]).cos()),
                    }
                })
                .collect();
            (format!("member{i}"), f)
        })
        .collect();
    for (name, f) in &members {
        for m in [0.0, 1.0, 2.0] {
            for l in [0.0, 1.0, 2.0] {
                let d = dyadic_norm(f, m, l, &vg).unwrap();
                println!(
                    "{name} m={m} l={l}: freq/sob={:.3} phase/sob={:.3}",
                    d.freq_sum / d.sobolev,
                    d.phase_sum / d.sobolev
                );
            }
        }
    }
}
