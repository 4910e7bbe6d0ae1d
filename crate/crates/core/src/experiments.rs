//! Scripted verification studies: each experiment runs the solver end to
//! end, measures the quantity a claim is about, and emits a machine-readable
//! verdict plus the diagnostic series it was computed from.

use crate::collision::{SpectralKernelTable, TableParams};
use crate::dynamics::{self, DynamicsError, RunOpts, SplitScheme, TimeStepper};
use crate::functionals::{self, DiagnosticsReport, DissipationOpts, FunctionalError};
use crate::grid::{make_grids, DistributionField, GridError};
use crate::kernel::{KernelError, KernelSpec};
use crate::num::linear_fit;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Collision(#[from] crate::collision::CollisionError),
    #[error("experiment `{0}` is not applicable: {1}")]
    NotApplicable(String, String),
}

/// Named, reproducible initial conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// Global Maxwellian `M_{1,0,1}`.
    Maxwellian,
    /// Exact Bobylev-Krook-Wu profile (Maxwell-molecule oracle).
    Bkw { k0: f64 },
    /// Two counter-shifted Maxwellians, renormalised.
    Bimodal { shift: f64, temp: f64 },
    /// Local Maxwellian with `T(x) = 1 + amplitude cos(2 pi x_1)`.
    TemperatureWave { amplitude: f64 },
    /// Slowly decaying `<v>^-7`-type profile smoothly truncated at the grid
    /// radius: large high moments relative to the low ones.
    MomentPoor,
    /// Local Maxwellian with `u_2(x) = amplitude sin(2 pi x_1)`.
    ShearWave { amplitude: f64 },
}

/// Scripted experiment configuration; runs are reproducible from these
/// fields alone.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub spec: KernelSpec,
    pub n_v: usize,
    pub radius: f64,
    pub n_x: usize,
    pub dim_x: usize,
    pub init: InitialCondition,
    pub t_end: f64,
    /// Explicit step; when absent the stability rule decides.
    pub dt: Option<f64>,
    pub eps_ladder: Vec<f64>,
    pub l_values: Vec<f64>,
    /// Fraction of the time window the asymptotic fits use (from the end).
    pub fit_window: f64,
    pub seed: u64,
    pub table: TableParams,
    pub projection: bool,
    pub diag_every: usize,
}

impl ExperimentConfig {
    /// Desk-scale defaults for a homogeneous study.
    pub fn homogeneous(name: &str, spec: KernelSpec, init: InitialCondition) -> Self {
        Self {
            name: name.to_string(),
            spec,
            n_v: 32,
            radius: 4.5,
            n_x: 1,
            dim_x: 1,
            init,
            t_end: 1.0,
            dt: None,
            eps_ladder: vec![0.2, 0.1, 0.05, 0.025],
            l_values: vec![8.0, 16.0, 32.0, 64.0],
            fit_window: 2.0 / 3.0,
            seed: 0,
            table: TableParams::for_grid(32),
            projection: true,
            diag_every: 1,
        }
    }
}

/// Machine-readable outcome of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub claim_id: String,
    pub measured: Vec<(String, f64)>,
    pub expected: String,
    pub pass: bool,
    pub runtime_secs: f64,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn get(&self, key: &str) -> f64 {
        self.measured
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }
}

/// Everything an experiment produced: the verdict plus the diagnostic
/// series it was judged on.
pub struct ExperimentOutput {
    pub verdict: Verdict,
    pub series: Vec<DiagnosticsReport>,
}

/// Truncation radius balancing support clipping against spectral
/// resolution at the dealiased spacing, for states of thermal width
/// `sigma_max` and bulk speed `u_max`. Ratios tuned on Maxwell-molecule
/// relaxation benchmarks.
pub fn balanced_radius(n_v: usize, sigma_max: f64, u_max: f64) -> f64 {
    let ratio = match n_v {
        0..=16 => 3.1,
        17..=24 => 3.9,
        25..=32 => 4.5,
        33..=48 => 5.0,
        _ => 5.6,
    };
    ratio * sigma_max + u_max
}

/// Builds the sampled initial state, normalised to exact unit discrete mass.
pub fn initial_condition(cfg: &ExperimentConfig) -> Result<DistributionField, ExperimentError> {
    let (vg, xg) = make_grids(cfg.n_v, cfg.radius, cfg.n_x, cfg.dim_x)?;
    let tau = 2.0 * std::f64::consts::PI;
    let maxw = |rho: f64, u: [f64; 3], t: f64, v: [f64; 3]| -> f64 {
        let d2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2) + (v[2] - u[2]).powi(2);
        rho / (tau * t).powf(1.5) * (-d2 / (2.0 * t)).exp()
    };
    let mut field = match cfg.init {
        InitialCondition::Maxwellian => {
            DistributionField::from_fn(vg, xg, |_, v| maxw(1.0, [0.0; 3], 1.0, v))
        }
        InitialCondition::Bkw { k0 } => {
            let bkw = dynamics::BkwSolution::new(k0, &cfg.spec);
            DistributionField::from_fn(vg, xg, move |_, v| {
                bkw.eval(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 0.0)
            })
        }
        InitialCondition::Bimodal { shift, temp } => {
            DistributionField::from_fn(vg, xg, move |_, v| {
                0.5 * maxw(1.0, [shift, 0.0, 0.0], temp, v)
                    + 0.5 * maxw(1.0, [-shift, 0.0, 0.0], temp, v)
            })
        }
        InitialCondition::TemperatureWave { amplitude } => {
            DistributionField::from_fn(vg, xg, move |x, v| {
                let t = 1.0 + amplitude * (tau * x[0]).cos();
                maxw(1.0, [0.0; 3], t, v)
            })
        }
        InitialCondition::MomentPoor => {
            let r_cut = 0.85 * cfg.radius;
            DistributionField::from_fn(vg, xg, move |_, v| {
                let jv = 1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                let r = jv.sqrt();
                jv.powf(-3.5) * crate::kernel::BumpPair::psi(r / r_cut)
            })
        }
        InitialCondition::ShearWave { amplitude } => {
            DistributionField::from_fn(vg, xg, move |x, v| {
                let u = [0.0, amplitude * (tau * x[0]).sin(), 0.0];
                maxw(1.0, u, 1.0, v)
            })
        }
    };
    let mass = field.mass();
    for v in field.values.iter_mut() {
        *v /= mass;
    }
    Ok(field)
}

fn build_table(
    cfg: &ExperimentConfig,
    spec: &KernelSpec,
) -> Result<SpectralKernelTable, ExperimentError> {
    let (vg, _) = make_grids(cfg.n_v, cfg.radius, 1, 1)?;
    Ok(SpectralKernelTable::build(vg, spec.clone(), cfg.table)?)
}

fn run_to(
    cfg: &ExperimentConfig,
    spec: &KernelSpec,
    t_end: f64,
    dt_hint: Option<f64>,
    compute_dissipation: bool,
) -> Result<(Vec<DiagnosticsReport>, DistributionField), ExperimentError> {
    let mut field = initial_condition(cfg)?;
    let table = build_table(cfg, spec)?;
    let dt = match dt_hint.or(cfg.dt) {
        Some(dt) => dt,
        None => dynamics::suggest_dt(&table, &field)?,
    };
    let steps = (t_end / dt).ceil().max(1.0);
    let dt = t_end / steps;
    let mut stepper = TimeStepper::new(dt, SplitScheme::Strang)?;
    let opts = RunOpts {
        diag_every: cfg.diag_every,
        compute_dissipation,
        dissipation: DissipationOpts::default(),
        projection: cfg.projection,
        dt_audit_every: 50,
    };
    let result = dynamics::run(&mut field, &table, &mut stepper, t_end, &opts, None)?;
    Ok((result.reports, field))
}

/// Conservation audit along a run.
pub fn exp_conservation(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let (reports, _) = run_to(cfg, &cfg.spec, cfg.t_end, None, false)?;
    let first = &reports[0];
    let mom_scale = (first.mass * first.energy).sqrt().max(1e-300);
    let mut drift = 0.0f64;
    for r in &reports {
        drift = drift.max((r.mass - first.mass).abs() / first.mass.abs());
        drift = drift.max((r.energy - first.energy).abs() / first.energy.abs());
        for a in 0..3 {
            drift = drift.max((r.momentum[a] - first.momentum[a]).abs() / mom_scale);
        }
    }
    let pass = if cfg.projection { drift <= 1e-10 } else { true };
    let expected = if cfg.projection {
        "relative drift of mass/momentum/energy <= 1e-10".to_string()
    } else {
        "projection off: raw drift reported, no pass/fail".to_string()
    };
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("conservation/{}", cfg.name),
            measured: vec![("max_rel_drift".into(), drift)],
            expected,
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: vec![],
        },
        series: reports,
    })
}

/// Monotone decay of the relative entropy, strict until it vanishes.
pub fn exp_h_theorem(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let (reports, _) = run_to(cfg, &cfg.spec, cfg.t_end, None, false)?;
    let h0 = reports[0].h_rel_global;
    let tol = 1e-8 * h0.max(1e-30);
    let mut monotone = true;
    let mut strict = true;
    let mut max_rise = 0.0f64;
    for w in reports.windows(2) {
        let dh = w[1].h_rel_global - w[0].h_rel_global;
        if dh > tol {
            monotone = false;
            max_rise = max_rise.max(dh);
        }
        if w[0].h_rel_global > 1e-6 && dh >= 0.0 {
            strict = false;
        }
    }
    let degenerate = h0 <= 1e-10;
    let pass = degenerate || (monotone && strict);
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("h_theorem/{}", cfg.name),
            measured: vec![
                ("h_initial".into(), h0),
                ("h_final".into(), reports.last().unwrap().h_rel_global),
                ("max_rise".into(), max_rise),
            ],
            expected: "H(f|M) nonincreasing (tol 1e-8 H(0)), strictly while H > 1e-6".into(),
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: if degenerate {
                vec!["degenerate: initial state already at equilibrium".into()]
            } else {
                vec![]
            },
        },
        series: reports,
    })
}

/// Cutoff-to-non-cutoff asymptotics: `||f - f^eps||_L1 = O(eps^(2-2s))`.
/// All rungs share the quadrature nodes and the time step, so their
/// discretisation errors cancel in the differences.
pub fn exp_cutoff_asymptotics(
    cfg: &ExperimentConfig,
    t_star: f64,
) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let mut notes = Vec::new();

    let theta_min = cfg.spec.theta_min();
    let mut ladder: Vec<f64> = Vec::new();
    for &e in &cfg.eps_ladder {
        if e >= 2.0 * theta_min {
            ladder.push(e);
        } else {
            notes.push(format!(
                "eps {e} excluded: below 2*theta_min = {:.3e}",
                2.0 * theta_min
            ));
        }
    }
    if ladder.len() < 2 {
        return Err(ExperimentError::NotApplicable(
            cfg.name.clone(),
            "fewer than two resolved cutoff rungs".into(),
        ));
    }

    // One shared dt, stable for the most singular resolved rung.
    let spec0 = cfg.spec.with_eps(0.0)?;
    let mut dt_min = match cfg.dt {
        Some(dt) => dt,
        None => f64::INFINITY,
    };
    if cfg.dt.is_none() {
        for &e in &ladder {
            let spec_e = cfg.spec.with_eps(e)?;
            let table = build_table(cfg, &spec_e)?;
            let field = initial_condition(cfg)?;
            dt_min = dt_min.min(dynamics::suggest_dt(&table, &field)?);
        }
    }
    let steps = (t_star / dt_min).ceil().max(1.0);
    let dt = t_star / steps;

    let (_, reference) = run_to(cfg, &spec0, t_star, Some(dt), false)?;

    let mut eps_used = Vec::new();
    let mut diffs = Vec::new();
    for &e in &ladder {
        let spec_e = cfg.spec.with_eps(e)?;
        let (_, fe) = run_to(cfg, &spec_e, t_star, Some(dt), false)?;
        let diff: Vec<f64> = fe
            .values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (a - b).abs())
            .collect();
        let l1 =
            fe.vgrid.dv().powi(3) * fe.xgrid.cell_volume() * crate::num::det_sum(&diff);
        eps_used.push(e);
        diffs.push(l1);
    }
    let xs: Vec<f64> = eps_used.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.max(1e-300).ln()).collect();
    let (_, slope, r2) = linear_fit(&xs, &ys);
    let target = 2.0 - 2.0 * cfg.spec.s;
    let pass = slope >= 0.7 * target && slope <= 1.3 * target;
    let mut measured = vec![
        ("slope".into(), slope),
        ("target".into(), target),
        ("r2".into(), r2),
    ];
    for (e, d) in eps_used.iter().zip(&diffs) {
        measured.push((format!("l1_diff_eps_{e}"), *d));
    }
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("cutoff_asymptotics/{}", cfg.name),
            measured,
            expected: format!(
                "log-log slope of ||f - f^eps||_L1 in [{:.3}, {:.3}]",
                0.7 * target,
                1.3 * target
            ),
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes,
        },
        series: vec![],
    })
}

/// Povzner coefficient growth `c(l) ~ l^s`, offset-robust exponent fit.
pub fn exp_povzner_rate(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let vnorm = 50.0;
    let cs: Vec<f64> = cfg
        .l_values
        .iter()
        .map(|&l| functionals::povzner_coefficient(vnorm, l, &cfg.spec))
        .collect();
    let (sigma, amp, _) = functionals::fit_power_with_offset(&cfg.l_values, &cs);
    let pass = amp > 0.0 && (sigma - cfg.spec.s).abs() <= 0.15;
    let mut measured = vec![("fitted_exponent".into(), sigma), ("amplitude".into(), amp)];
    for (l, c) in cfg.l_values.iter().zip(&cs) {
        measured.push((format!("c_l_{l}"), *c));
    }
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("povzner_rate/{}", cfg.name),
            measured,
            expected: format!("exponent within {} +- 0.15", cfg.spec.s),
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: vec![],
        },
        series: vec![],
    })
}

/// Entropy decay class: exponential tail for gamma = 2, at-least-algebraic
/// for gamma = 0. Constants are non-constructive; only the class is tested.
pub fn exp_entropy_decay(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let (reports, _) = run_to(cfg, &cfg.spec, cfg.t_end, None, false)?;
    let h0 = reports[0].h_rel_global;
    if h0 <= 1e-10 {
        return Ok(ExperimentOutput {
            verdict: Verdict {
                claim_id: format!("entropy_decay/{}", cfg.name),
                measured: vec![("h_initial".into(), h0)],
                expected: "decay class (skipped: degenerate initial state)".into(),
                pass: true,
                runtime_secs: t0.elapsed().as_secs_f64(),
                notes: vec!["degenerate".into()],
            },
            series: reports,
        });
    }
    let t_end = reports.last().unwrap().t;
    let t_from = t_end * (1.0 - cfg.fit_window);
    let tail: Vec<&DiagnosticsReport> = reports
        .iter()
        .filter(|r| r.t >= t_from && r.h_rel_global > 1e-14)
        .collect();
    let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let lhs: Vec<f64> = tail.iter().map(|r| r.h_rel_global.ln()).collect();
    let (_, slope_exp, r2_exp) = linear_fit(&ts, &lhs);
    let lts: Vec<f64> = tail.iter().map(|r| (1.0 + r.t).ln()).collect();
    let (_, slope_alg, r2_alg) = linear_fit(&lts, &lhs);
    let exponential_class = slope_exp < 0.0 && r2_exp >= 0.95;
    let algebraic_or_faster = slope_alg < 0.0;
    let pass = if cfg.spec.gamma >= 2.0 {
        exponential_class
    } else {
        algebraic_or_faster
    };
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("entropy_decay/{}", cfg.name),
            measured: vec![
                ("exp_rate".into(), slope_exp),
                ("exp_r2".into(), r2_exp),
                ("alg_rate".into(), slope_alg),
                ("alg_r2".into(), r2_alg),
                ("h_initial".into(), h0),
                ("h_final".into(), reports.last().unwrap().h_rel_global),
            ],
            expected: if cfg.spec.gamma >= 2.0 {
                "negative linear fit of log H with R^2 >= 0.95 on the tail".into()
            } else {
                "at-least-algebraic decay (negative log-log rate)".into()
            },
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: vec![],
        },
        series: reports,
    })
}

/// Moment production for gamma > 0: the l = 6 moment of a moment-poor state
/// becomes bounded and plateaus; for gamma = 0 moments merely propagate.
pub fn exp_moment_production(
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let mut field = initial_condition(cfg)?;
    let table = build_table(cfg, &cfg.spec)?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => dynamics::suggest_dt(&table, &field)?,
    };
    let steps = ((cfg.t_end / dt).ceil().max(1.0)) as usize;
    let dt = cfg.t_end / steps as f64;
    let mut stepper = TimeStepper::new(dt, SplitScheme::Strang)?;
    let mut moments = Vec::new();
    moments.push((0.0, functionals::weighted_norm(&field, 1.0, 6.0).value));
    let opts = RunOpts {
        diag_every: usize::MAX,
        projection: cfg.projection,
        ..Default::default()
    };
    let checkpoints = 12usize;
    let per = steps.div_ceil(checkpoints);
    let mut done = 0usize;
    while done < steps {
        let todo = per.min(steps - done);
        let target = stepper.t_now + todo as f64 * dt;
        dynamics::run(&mut field, &table, &mut stepper, target, &opts, None)?;
        done += todo;
        moments.push((
            stepper.t_now,
            functionals::weighted_norm(&field, 1.0, 6.0).value,
        ));
    }
    let tail = &moments[moments.len() - moments.len() / 3..];
    let tail_max = tail.iter().map(|(_, m)| *m).fold(0.0f64, f64::max);
    let tail_min = tail.iter().map(|(_, m)| *m).fold(f64::INFINITY, f64::min);
    let variation = (tail_max - tail_min) / tail_max.max(1e-300);
    let bounded = moments.iter().all(|(_, m)| m.is_finite());
    let max_all = moments.iter().map(|(_, m)| *m).fold(0.0f64, f64::max);
    let pass = if cfg.spec.gamma > 0.0 {
        bounded && variation < 0.05
    } else {
        bounded && max_all <= 3.0 * moments[0].1.max(1.0)
    };
    let mut measured = vec![
        ("m6_initial".into(), moments[0].1),
        ("m6_final".into(), moments.last().unwrap().1),
        ("tail_variation".into(), variation),
    ];
    for (t, m) in &moments {
        measured.push((format!("m6_t_{t:.3}"), *m));
    }
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("moment_production/{}", cfg.name),
            measured,
            expected: if cfg.spec.gamma > 0.0 {
                "L1_6 moment bounded and plateauing (tail variation < 5%)".into()
            } else {
                "moments propagate: bounded by an init-dependent constant".into()
            },
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: vec![],
        },
        series: vec![],
    })
}

/// Pointwise lower bound: Gaussian-tail-class envelope of shell minima,
/// with the fitted triple stable across later times.
pub fn exp_lower_bound(
    cfg: &ExperimentConfig,
    t_threshold: f64,
) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    if cfg.t_end < t_threshold {
        return Ok(ExperimentOutput {
            verdict: Verdict {
                claim_id: format!("lower_bound/{}", cfg.name),
                measured: vec![],
                expected: format!("not applicable before t0 = {t_threshold}"),
                pass: true,
                runtime_secs: t0.elapsed().as_secs_f64(),
                notes: vec!["not yet: run shorter than the threshold time".into()],
            },
            series: vec![],
        });
    }
    let mut field = initial_condition(cfg)?;
    let table = build_table(cfg, &cfg.spec)?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => dynamics::suggest_dt(&table, &field)?,
    };
    let steps = ((cfg.t_end / dt).ceil().max(1.0)) as usize;
    let dt = cfg.t_end / steps as f64;
    let mut stepper = TimeStepper::new(dt, SplitScheme::Strang)?;
    let opts = RunOpts {
        diag_every: usize::MAX,
        projection: cfg.projection,
        ..Default::default()
    };

    let shells = 8usize;
    let shell_minima = |f: &DistributionField| -> (Vec<f64>, Vec<f64>) {
        let vg = &f.vgrid;
        let rmax = 0.92 * vg.radius;
        let mut mins = vec![f64::INFINITY; shells];
        let rads: Vec<f64> = (0..shells)
            .map(|s| rmax * (s as f64 + 0.5) / shells as f64)
            .collect();
        for ix in 0..f.xgrid.cells() {
            let cell = f.cell(ix);
            for (jv, &val) in cell.iter().enumerate() {
                let v = vg.node(jv);
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let s = ((r / rmax) * shells as f64) as usize;
                if s < shells {
                    mins[s] = mins[s].min(val);
                }
            }
        }
        (rads, mins)
    };

    let mut fits = Vec::new();
    for target in [t_threshold, cfg.t_end] {
        if stepper.t_now < target {
            dynamics::run(&mut field, &table, &mut stepper, target, &opts, None)?;
        }
        let (r, m) = shell_minima(&field);
        fits.push(functionals::fit_lower_envelope(&r, &m));
    }
    let (Some(f1), Some(f2)) = (fits[0], fits[1]) else {
        return Ok(ExperimentOutput {
            verdict: Verdict {
                claim_id: format!("lower_bound/{}", cfg.name),
                measured: vec![],
                expected: "positive shell minima for the envelope fit".into(),
                pass: false,
                runtime_secs: t0.elapsed().as_secs_f64(),
                notes: vec!["vacuum shells: no envelope".into()],
            },
            series: vec![],
        });
    };
    let (r, m) = shell_minima(&field);
    let holds = r
        .iter()
        .zip(&m)
        .all(|(&rr, &mm)| mm >= 0.5 * f1.0 * (-f1.1 * rr.powf(f1.2)).exp());
    let stable =
        (f2.2 / f1.2 - 1.0).abs() <= 0.2 && (f2.1 / f1.1 - 1.0).abs() <= 0.2;
    let pass = holds && stable;
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("lower_bound/{}", cfg.name),
            measured: vec![
                ("k0_early".into(), f1.0),
                ("a0_early".into(), f1.1),
                ("q0_early".into(), f1.2),
                ("k0_late".into(), f2.0),
                ("a0_late".into(), f2.1),
                ("q0_late".into(), f2.2),
            ],
            expected: "Gaussian-tail-class envelope, triple stable within 20%".into(),
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: vec![],
        },
        series: vec![],
    })
}

/// Hydrodynamic dissipation structure on the torus: fluctuation norms decay
/// after transients; the discrete `M_h` inequality holds with a fitted
/// constant that stays stable across time windows.
pub fn exp_hydro_dissipation(
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput, ExperimentError> {
    let t0 = Instant::now();
    let (reports, _) = run_to(cfg, &cfg.spec, cfg.t_end, None, false)?;

    let n = reports.len();
    let skip = n / 4;
    let mut monotone = true;
    for w in reports[skip..].windows(2) {
        let tol = 1e-9;
        if w[1].norm_t_fluct > w[0].norm_t_fluct * (1.0 + 1e-3) + tol
            || w[1].norm_u_fluct > w[0].norm_u_fluct * (1.0 + 1e-3) + tol
            || w[1].norm_rho_fluct > w[0].norm_rho_fluct * (1.0 + 1e-3) + tol
        {
            monotone = false;
        }
    }
    let decayed = {
        let a = &reports[skip];
        let b = reports.last().unwrap();
        b.norm_t_fluct <= a.norm_t_fluct && b.norm_u_fluct <= a.norm_u_fluct + 1e-12
    };

    // Windowed inequality M_h(t2) - M_h(t1) + int norms^2 <= C int H_local.
    let mut ratios = Vec::new();
    for w in reports[skip..].windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let norms2 = 0.5
            * ((w[0].norm_t_fluct.powi(2)
                + w[0].norm_u_fluct.powi(2)
                + w[0].norm_rho_fluct.powi(2))
                + (w[1].norm_t_fluct.powi(2)
                    + w[1].norm_u_fluct.powi(2)
                    + w[1].norm_rho_fluct.powi(2)));
        let lhs = (w[1].m_h - w[0].m_h) + norms2 * dt;
        let rhs = 0.5 * (w[0].h_rel_local + w[1].h_rel_local) * dt;
        if rhs > 1e-300 {
            ratios.push(lhs / rhs);
        }
    }
    let (first, second) = ratios.split_at(ratios.len() / 2);
    let c_fit = first.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let c_late = second.iter().cloned().fold(0.0f64, f64::max);
    let stable = c_late <= 1.5 * c_fit;
    let pass = monotone && decayed && stable;
    Ok(ExperimentOutput {
        verdict: Verdict {
            claim_id: format!("hydro_dissipation/{}", cfg.name),
            measured: vec![
                ("c_fit".into(), c_fit),
                ("c_late".into(), c_late),
                ("norm_t_start".into(), reports[skip].norm_t_fluct),
                ("norm_t_end".into(), reports.last().unwrap().norm_t_fluct),
                ("norm_u_end".into(), reports.last().unwrap().norm_u_fluct),
            ],
            expected:
                "fluctuation norms decay after transients; M_h inequality with stable C"
                    .into(),
            pass,
            runtime_secs: t0.elapsed().as_secs_f64(),
            notes: vec![],
        },
        series: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::AngularProfile;

    fn grad_cfg(name: &str, init: InitialCondition) -> ExperimentConfig {
        let spec = KernelSpec::new(0.0, 0.5, 0.0, AngularProfile::GradConstant).unwrap();
        let mut cfg = ExperimentConfig::homogeneous(name, spec, init);
        cfg.n_v = 16;
        cfg.radius = 3.0;
        cfg.table = TableParams::for_grid(16);
        cfg
    }

    #[test]
    fn initial_conditions_have_unit_mass() {
        for init in [
            InitialCondition::Maxwellian,
            InitialCondition::Bkw { k0: 0.65 },
            InitialCondition::Bimodal {
                shift: 0.8,
                temp: 0.5,
            },
            InitialCondition::MomentPoor,
        ] {
            let cfg = grad_cfg("mass", init);
            let f = initial_condition(&cfg).unwrap();
            assert!((f.mass() - 1.0).abs() < 1e-13, "{init:?}");
            assert!(f.min_value() >= 0.0, "{init:?}");
        }
    }

    #[test]
    fn conservation_experiment_with_projection() {
        let mut cfg = grad_cfg("cons", InitialCondition::Bkw { k0: 0.65 });
        cfg.t_end = 0.2;
        let out = exp_conservation(&cfg).unwrap();
        assert!(out.verdict.pass, "drift {:?}", out.verdict.measured);
        assert!(out.verdict.get("max_rel_drift") <= 1e-10);
    }

    #[test]
    fn maxwellian_conservation_is_trivially_tight() {
        let mut cfg = grad_cfg("cons_maxw", InitialCondition::Maxwellian);
        cfg.t_end = 0.1;
        let out = exp_conservation(&cfg).unwrap();
        assert!(out.verdict.pass);
        assert!(out.verdict.get("max_rel_drift") <= 1e-12);
    }

    #[test]
    fn h_theorem_on_bkw_relaxation() {
        // n = 16 cannot resolve a wide bimodal state; the BKW profile is
        // the well-resolved far-from-equilibrium state at this size.
        let mut cfg = grad_cfg("ht", InitialCondition::Bkw { k0: 0.65 });
        cfg.t_end = 0.5;
        let out = exp_h_theorem(&cfg).unwrap();
        assert!(out.verdict.pass, "verdict {:?}", out.verdict);
        let mut cfg2 = grad_cfg("ht_maxw", InitialCondition::Maxwellian);
        cfg2.t_end = 0.1;
        let out2 = exp_h_theorem(&cfg2).unwrap();
        assert!(out2.verdict.pass);
    }

    #[test]
    fn povzner_rate_experiment() {
        let spec =
            KernelSpec::with_quadrature(0.0, 0.5, 0.0, AngularProfile::Canonical, 16, 6)
                .unwrap();
        let cfg = ExperimentConfig::homogeneous("pov", spec, InitialCondition::Maxwellian);
        let out = exp_povzner_rate(&cfg).unwrap();
        assert!(out.verdict.pass, "{:?}", out.verdict.measured);
    }
}
