//! The acceptance suite: one function per criterion, each returning a
//! machine-checkable result. The integration test target and the `selftest`
//! command both run these.

use crate::collision::{q_direct, DirectOpts, SpectralKernelTable, TableParams};
use crate::dynamics::{self, BkwSolution, RunOpts, SplitScheme, TimeStepper};
use crate::experiments::{self, ExperimentConfig, InitialCondition};
use crate::functionals::{self, DissipationOpts};
use crate::grid::{make_grids, DistributionField, VelocityGrid};
use crate::kernel::{symbol_a_eps, weight_symbol_w_eps_q, AngularProfile, BumpPair, KernelSpec};
use crate::num::linear_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub summary: String,
    pub runtime_secs: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.1}s): {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.runtime_secs,
            self.summary
        )
    }
}

/// Random band-limited field (modes |l|_inf <= 1): products stay inside the
/// representable mode set, so the spectral bilinear form is wrap-free.
pub fn band_limited_field(grid: &VelocityGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut modes = Vec::new();
    for k2 in -1i64..=1 {
        for k1 in -1i64..=1 {
            for k0 in -1i64..=1 {
                modes.push((
                    [k0, k1, k2],
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ));
            }
        }
    }
    let arg = std::f64::consts::PI / grid.box_l;
    (0..grid.len())
        .map(|j| {
            let v = grid.node(j);
            modes
                .iter()
                .map(|&(k, a, b)| {
                    let ph = arg
                        * (k[0] as f64 * v[0] + k[1] as f64 * v[1] + k[2] as f64 * v[2]);
                    a * ph.cos() + b * ph.sin()
                })
                .sum()
        })
        .collect()
}

/// Criterion 1: fast spectral path against the brute-force oracle at
/// matched discretisation (shared radial and scattering-angle rules), 20
/// random smooth pairs, relative L2 error <= 1e-6.
pub fn criterion_1_oracle_equivalence(pairs: usize) -> CriterionResult {
    let t0 = Instant::now();
    let (vg, _) = make_grids(8, 4.0, 1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0172);
    let mut worst: f64 = 0.0;
    let mut details = String::new();
    let configs = [(1.0, 0.5, 0.05), (0.0, 0.25, 0.0), (2.0, 0.75, 0.1)];
    let params = TableParams {
        n_radial: 12,
        n_polar: 12,
        n_azimuth: 24,
        memory_cap_bytes: 1 << 30,
    };
    let opts = DirectOpts::converged();
    let mut tables = Vec::new();
    for &(gamma, s, eps) in &configs {
        let spec =
            KernelSpec::with_quadrature(gamma, s, eps, AngularProfile::Canonical, 8, 4).unwrap();
        let table = SpectralKernelTable::build(vg.clone(), spec.clone(), params).unwrap();
        tables.push((spec, table));
    }
    for trial in 0..pairs {
        let (spec, table) = &tables[trial % tables.len()];
        let g = band_limited_field(&vg, &mut rng);
        let f = band_limited_field(&vg, &mut rng);
        let qs = table.q_spectral(&g, &f).unwrap();
        let qd = q_direct(&g, &f, spec, &vg, &opts).unwrap();
        let num: f64 = qs
            .iter()
            .zip(&qd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = qd.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    details.push_str(&format!("worst relative L2 over {pairs} pairs = {worst:.3e}"));
    CriterionResult {
        id: 1,
        name: "oracle equivalence",
        pass: worst <= 1e-6,
        summary: details,
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

fn conservation_config() -> ExperimentConfig {
    let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::Canonical).unwrap();
    let mut cfg = ExperimentConfig::homogeneous(
        "acceptance",
        spec,
        InitialCondition::Bimodal {
            shift: 0.6,
            temp: 0.65,
        },
    );
    cfg.n_v = 32;
    cfg.radius = experiments::balanced_radius(32, 0.65f64.sqrt(), 0.6);
    cfg.table = TableParams::for_grid(32);
    cfg.projection = true;
    cfg
}

/// Criteria 2 and 3 share the 100-step homogeneous run.
pub fn criterion_2_and_3_conservation_h_theorem() -> (CriterionResult, CriterionResult) {
    let t0 = Instant::now();
    let cfg = conservation_config();
    let mut field = experiments::initial_condition(&cfg).unwrap();
    let (vg, _) = make_grids(cfg.n_v, cfg.radius, 1, 1).unwrap();
    let table = SpectralKernelTable::build(vg, cfg.spec.clone(), cfg.table).unwrap();
    let dt = dynamics::suggest_dt(&table, &field).unwrap();
    let mut stepper = TimeStepper::new(dt, SplitScheme::Strang).unwrap();
    let opts = RunOpts {
        diag_every: 1,
        projection: true,
        ..Default::default()
    };
    let res = dynamics::run(
        &mut field,
        &table,
        &mut stepper,
        100.0 * dt,
        &opts,
        None,
    )
    .unwrap();
    let reports = res.reports;
    let first = &reports[0];
    let mom_scale = (first.mass * first.energy).sqrt();
    let mut drift = 0.0f64;
    for r in &reports {
        drift = drift.max((r.mass - first.mass).abs() / first.mass);
        drift = drift.max((r.energy - first.energy).abs() / first.energy);
        for a in 0..3 {
            drift = drift.max((r.momentum[a] - first.momentum[a]).abs() / mom_scale);
        }
    }
    let c2 = CriterionResult {
        id: 2,
        name: "conservation",
        pass: drift <= 1e-10,
        summary: format!(
            "100 steps (dt {dt:.3e}), max relative drift = {drift:.3e}"
        ),
        runtime_secs: t0.elapsed().as_secs_f64(),
    };

    // H monotone along the same run.
    let t1 = Instant::now();
    let h0 = reports[0].h_rel_global;
    let tol = 1e-8 * h0;
    let mut max_rise = 0.0f64;
    for w in reports.windows(2) {
        max_rise = max_rise.max(w[1].h_rel_global - w[0].h_rel_global);
    }
    let monotone = max_rise <= tol;

    // dH/dt + D(f) = 0 within 10% per step on an oracle-scale grid.
    let spec16 = KernelSpec::with_quadrature(
        0.0,
        0.5,
        0.05,
        AngularProfile::Canonical,
        8,
        3,
    )
    .unwrap();
    let mut cfg16 = ExperimentConfig::homogeneous(
        "dissipation-identity",
        spec16.clone(),
        InitialCondition::Bkw { k0: 0.65 },
    );
    cfg16.n_v = 16;
    cfg16.radius = experiments::balanced_radius(16, 1.0, 0.0);
    cfg16.table = TableParams::for_grid(16);
    let mut f16 = experiments::initial_condition(&cfg16).unwrap();
    let (vg16, _) = make_grids(cfg16.n_v, cfg16.radius, 1, 1).unwrap();
    let table16 = SpectralKernelTable::build(vg16, spec16.clone(), cfg16.table).unwrap();
    let dt16 = dynamics::suggest_dt(&table16, &f16).unwrap();
    let mut stepper16 = TimeStepper::new(dt16, SplitScheme::Strang).unwrap();
    let diss = DissipationOpts {
        azimuth: 6,
        prune_rel: 1e-12,
    };
    let opts16 = RunOpts {
        diag_every: 1,
        compute_dissipation: true,
        dissipation: diss,
        projection: true,
        ..Default::default()
    };
    let res16 = dynamics::run(
        &mut f16,
        &table16,
        &mut stepper16,
        8.0 * dt16,
        &opts16,
        None,
    )
    .unwrap();
    let r16 = res16.reports;
    let mut worst_identity = 0.0f64;
    for i in 1..r16.len() - 1 {
        let dh = (r16[i + 1].h_rel_global - r16[i - 1].h_rel_global)
            / (r16[i + 1].t - r16[i - 1].t);
        let d = r16[i].d_f;
        let rel = (dh + d).abs() / d.abs().max(1e-300);
        worst_identity = worst_identity.max(rel);
    }
    let identity_ok = worst_identity <= 0.10;
    let c3 = CriterionResult {
        id: 3,
        name: "h-theorem",
        pass: monotone && identity_ok,
        summary: format!(
            "max H rise = {max_rise:.3e} (tol {tol:.3e}); worst |dH/dt + D|/D = {:.3}",
            worst_identity
        ),
        runtime_secs: t1.elapsed().as_secs_f64(),
    };
    (c2, c3)
}

/// Criterion 4: cutoff-to-non-cutoff convergence rate.
pub fn criterion_4_cutoff_asymptotics() -> CriterionResult {
    let t0 = Instant::now();
    let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::Canonical).unwrap();
    let mut cfg = ExperimentConfig::homogeneous(
        "cutoff",
        spec,
        InitialCondition::Bimodal {
            shift: 0.6,
            temp: 0.65,
        },
    );
    cfg.n_v = 32;
    cfg.radius = experiments::balanced_radius(32, 0.65f64.sqrt(), 0.6);
    cfg.table = TableParams::for_grid(32);
    let out = experiments::exp_cutoff_asymptotics(&cfg, 0.1).unwrap();
    CriterionResult {
        id: 4,
        name: "cutoff asymptotics",
        pass: out.verdict.pass,
        summary: format!(
            "fitted slope = {:.3} (target {:.1}, window [0.7, 1.3]), r2 = {:.4}",
            out.verdict.get("slope"),
            out.verdict.get("target"),
            out.verdict.get("r2")
        ),
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

/// Criterion 5: Povzner coefficient exponent for s in {0.25, 0.5, 0.75}.
pub fn criterion_5_povzner_rate() -> CriterionResult {
    let t0 = Instant::now();
    let mut all_pass = true;
    let mut parts = Vec::new();
    for &s in &[0.25, 0.5, 0.75] {
        let spec =
            KernelSpec::with_quadrature(0.0, s, 0.0, AngularProfile::Canonical, 16, 6).unwrap();
        let cfg = ExperimentConfig::homogeneous("povzner", spec, InitialCondition::Maxwellian);
        let out = experiments::exp_povzner_rate(&cfg).unwrap();
        all_pass &= out.verdict.pass;
        parts.push(format!("s={s}: {:.3}", out.verdict.get("fitted_exponent")));
    }
    CriterionResult {
        id: 5,
        name: "povzner rate",
        pass: all_pass,
        summary: format!("fitted exponents within +-0.15: {}", parts.join(", ")),
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

/// Criterion 6: symbol equivalence `(A^eps + 1) ~ (W^eps_s)^2` bounded
/// within a factor 50 across the sampled lattice.
pub fn criterion_6_symbol_equivalence() -> CriterionResult {
    let t0 = Instant::now();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut evals = 0usize;
    for &s in &[0.25, 0.5, 0.75] {
        for &eps in &[0.2, 0.05, 0.01] {
            let spec = KernelSpec::new(0.0, s, eps, AngularProfile::Canonical).unwrap();
            for i in 0..200 {
                let xi = if i == 0 {
                    0.0
                } else {
                    (4.0 / eps) * (10f64).powf(-4.0 + 4.0 * i as f64 / 199.0)
                };
                let a = symbol_a_eps(xi, &spec).unwrap();
                let w = weight_symbol_w_eps_q(xi, s, eps);
                let r = (a + 1.0) / (w * w);
                lo = lo.min(r);
                hi = hi.max(r);
                evals += 1;
            }
        }
    }
    CriterionResult {
        id: 6,
        name: "symbol equivalence",
        pass: hi / lo <= 50.0,
        summary: format!(
            "ratio in [{lo:.3}, {hi:.3}], spread {:.1} over {evals} samples",
            hi / lo
        ),
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

/// Criterion 7: the analytic Maxwell-molecule relaxation (independent of
/// the paper) reproduced within 1% in the fourth moment.
pub fn criterion_7_bkw() -> CriterionResult {
    let t0 = Instant::now();
    let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
    let bkw = BkwSolution::new(0.65, &spec);
    let (vg, xg) = make_grids(32, 4.5, 1, 1).unwrap();
    let mut field = DistributionField::from_fn(vg.clone(), xg, |_, v| {
        bkw.eval(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 0.0)
    });
    let params = TableParams {
        n_radial: 12,
        n_polar: 6,
        n_azimuth: 12,
        memory_cap_bytes: 1 << 30,
    };
    let table = SpectralKernelTable::build(vg.clone(), spec, params).unwrap();
    let m4 = |f: &DistributionField| -> f64 {
        let cell = f.cell(0);
        let vals: Vec<f64> = (0..vg.len())
            .map(|j| {
                let v = vg.node(j);
                let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                cell[j] * v2 * v2
            })
            .collect();
        vg.quadrature_v(&vals)
    };
    let dt = 0.05;
    let steps = 20usize; // one relaxation time (1/lambda ~ 0.95)
    let mut worst = 0.0f64;
    for s in 1..=steps {
        dynamics::collide_step(&mut field, &table, dt, true).unwrap();
        let t = s as f64 * dt;
        let rel = (m4(&field) - bkw.fourth_moment(t)).abs() / bkw.fourth_moment(t);
        worst = worst.max(rel);
    }
    CriterionResult {
        id: 7,
        name: "bkw oracle",
        pass: worst <= 0.01,
        summary: format!("worst fourth-moment error over one relaxation time = {worst:.3e}"),
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

/// Criterion 8: entropy decay class for gamma = 2 (exponential tail) and
/// gamma = 0 (at-least-algebraic).
pub fn criterion_8_entropy_decay() -> CriterionResult {
    let t0 = Instant::now();
    let mut summaries = Vec::new();
    let mut pass = true;
    for &(gamma, t_end) in &[(2.0, 1.2), (0.0, 2.5)] {
        let spec = KernelSpec::new(gamma, 0.5, 0.0, AngularProfile::Canonical).unwrap();
        let mut cfg = ExperimentConfig::homogeneous(
            "decay",
            spec,
            InitialCondition::Bimodal {
                shift: 0.6,
                temp: 0.65,
            },
        );
        cfg.n_v = 24;
        cfg.radius = experiments::balanced_radius(24, 0.65f64.sqrt(), 0.6);
        cfg.table = TableParams::for_grid(24);
        cfg.t_end = t_end;
        cfg.fit_window = 0.6;
        let out = experiments::exp_entropy_decay(&cfg).unwrap();
        pass &= out.verdict.pass;
        summaries.push(format!(
            "gamma={gamma}: exp_rate {:.3} (r2 {:.3}), alg_rate {:.3}",
            out.verdict.get("exp_rate"),
            out.verdict.get("exp_r2"),
            out.verdict.get("alg_rate")
        ));
    }
    CriterionResult {
        id: 8,
        name: "entropy decay class",
        pass,
        summary: summaries.join("; "),
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

/// Criterion 9: hydrodynamic witness structure on the 1-D torus.
pub fn criterion_9_hydro_witnesses() -> CriterionResult {
    let t0 = Instant::now();
    let spec = KernelSpec::new(0.0, 0.5, 0.1, AngularProfile::Canonical).unwrap();
    let mut cfg = ExperimentConfig::homogeneous(
        "hydro",
        spec,
        InitialCondition::TemperatureWave { amplitude: 0.2 },
    );
    cfg.n_v = 16;
    cfg.radius = experiments::balanced_radius(16, 1.2f64.sqrt(), 0.0);
    cfg.n_x = 8;
    cfg.dim_x = 1;
    cfg.table = TableParams::for_grid(16);
    cfg.t_end = 1.5;
    cfg.diag_every = 2;
    let out = experiments::exp_hydro_dissipation(&cfg).unwrap();
    CriterionResult {
        id: 9,
        name: "hydro witnesses",
        pass: out.verdict.pass,
        summary: format!(
            "norm_T: {:.3e} -> {:.3e}; C_fit {:.3}, C_late {:.3}",
            out.verdict.get("norm_t_start"),
            out.verdict.get("norm_t_end"),
            out.verdict.get("c_fit"),
            out.verdict.get("c_late")
        ),
        runtime_secs: t0.elapsed().as_secs_f64(),
    }
}

/// The fast deterministic self-test suite: property checks small enough to
/// run twice for the byte-identity criterion. Returns (name, pass, value)
/// rows; the caller persists them.
pub fn selftest_rows() -> Vec<(String, bool, f64)> {
    let mut rows: Vec<(String, bool, f64)> = Vec::new();

    // partition of unity
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let r = 1000.0 * (i as f64 + 0.5) / 200.0;
        worst = worst.max((BumpPair::partition_sum(r, 12) - 1.0).abs());
    }
    rows.push(("partition_of_unity".into(), worst < 1e-12, worst));

    // dft round trip
    let (vg, _) = make_grids(16, 5.0, 1, 1).unwrap();
    let f: Vec<f64> = (0..vg.len())
        .map(|j| {
            let v = vg.node(j);
            (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 2.0).exp()
        })
        .collect();
    let spec = vg.dft_v(&f).unwrap();
    let (back, _) = vg.idft_v(&spec).unwrap();
    let rt: f64 = f
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / f.iter().map(|a| a * a).sum::<f64>().sqrt();
    rows.push(("dft_round_trip".into(), rt < 1e-12, rt));

    // symbol equivalence, small lattice
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let ks = KernelSpec::new(0.0, 0.5, 0.05, AngularProfile::Canonical).unwrap();
    for i in 0..40 {
        let xi = if i == 0 {
            0.0
        } else {
            80.0 * (10f64).powf(-3.0 + 3.0 * i as f64 / 39.0)
        };
        let a = symbol_a_eps(xi, &ks).unwrap();
        let w = weight_symbol_w_eps_q(xi, 0.5, 0.05);
        let r = (a + 1.0) / (w * w);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    rows.push(("symbol_equivalence".into(), hi / lo <= 50.0, hi / lo));

    // povzner exponent at s = 0.5
    let spec_p =
        KernelSpec::with_quadrature(0.0, 0.5, 0.0, AngularProfile::Canonical, 16, 6).unwrap();
    let ls = [8.0, 16.0, 32.0, 64.0];
    let cs: Vec<f64> = ls
        .iter()
        .map(|&l| functionals::povzner_coefficient(50.0, l, &spec_p))
        .collect();
    let (sigma, _, _) = functionals::fit_power_with_offset(&ls, &cs);
    rows.push((
        "povzner_exponent_s05".into(),
        (sigma - 0.5).abs() <= 0.15,
        sigma,
    ));

    // table rebuild determinism
    let (vg8, _) = make_grids(8, 4.0, 1, 1).unwrap();
    let spec8 = KernelSpec::new(1.0, 0.5, 0.05, AngularProfile::Canonical).unwrap();
    let p8 = TableParams {
        n_radial: 6,
        n_polar: 4,
        n_azimuth: 6,
        memory_cap_bytes: 1 << 30,
    };
    let t1 = SpectralKernelTable::build(vg8.clone(), spec8.clone(), p8).unwrap();
    let t2 = SpectralKernelTable::build(vg8.clone(), spec8.clone(), p8).unwrap();
    let same = t1.content_hash() == t2.content_hash();
    rows.push((
        "table_rebuild_hash".into(),
        same,
        t1.content_hash() as f64,
    ));

    // bilinear mass conservation on band-limited fields
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = band_limited_field(&vg8, &mut rng);
    let f8 = band_limited_field(&vg8, &mut rng);
    let q = t1.q_spectral(&g, &f8).unwrap();
    let mass = vg8.quadrature_v(&q);
    let scale = vg8.quadrature_v(&q.iter().map(|x| x.abs()).collect::<Vec<_>>());
    rows.push((
        "bilinear_mass_conservation".into(),
        mass.abs() <= 1e-10 * scale.max(1.0),
        mass.abs() / scale.max(1.0),
    ));

    // mini oracle equivalence (2 pairs)
    let mini = criterion_1_oracle_equivalence(2);
    rows.push(("oracle_equivalence_mini".into(), mini.pass, 0.0));

    // short grad-constant relaxation: H decreases
    let spec_g = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
    let mut cfg = ExperimentConfig::homogeneous(
        "selftest",
        spec_g,
        InitialCondition::Bkw { k0: 0.65 },
    );
    cfg.n_v = 16;
    cfg.radius = 3.1;
    cfg.table = TableParams::for_grid(16);
    cfg.t_end = 0.3;
    let out = experiments::exp_h_theorem(&cfg).unwrap();
    rows.push((
        "h_theorem_short".into(),
        out.verdict.pass,
        out.verdict.get("h_final"),
    ));

    // conservation of the same run machinery
    let out2 = experiments::exp_conservation(&cfg).unwrap();
    rows.push((
        "conservation_short".into(),
        out2.verdict.pass,
        out2.verdict.get("max_rel_drift"),
    ));

    rows
}
