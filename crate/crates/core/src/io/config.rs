//! Plain-text sectioned key-value run configuration.
//!
//! Format: `[section]` headers, `key = value` lines, `#` comments. Unknown
//! keys are rejected, duplicates are errors carrying both line numbers, and
//! every key has a documented default. Environment variables override file
//! values through the mapping `BOLTZ_<SECTION>__<KEY>` (section and key
//! upper-cased, `__` separating them).

use crate::collision::{TableParams, DEFAULT_MEMORY_CAP};
use crate::experiments::InitialCondition;
use crate::kernel::{AngularProfile, KernelSpec};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {0}: {1}")]
    Io(String, std::io::Error),
    #[error("line {line}: malformed entry `{text}` (expected key = value)")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("duplicate key `{key}` at lines {first} and {second}")]
    Duplicate {
        key: String,
        first: usize,
        second: usize,
    },
    #[error("line {line}: key `{key}`: expected {expected}, got `{value}`")]
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("key `{key}`: constraint violated: {constraint} (value {value})")]
    Constraint {
        key: String,
        constraint: &'static str,
        value: String,
    },
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
}

/// Fully resolved run configuration with defaults filled in.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kernel_gamma: f64,
    pub kernel_s: f64,
    pub kernel_eps: f64,
    pub kernel_profile: AngularProfile,
    pub kernel_theta_panels: usize,
    pub kernel_theta_order: usize,

    pub grid_n_v: usize,
    pub grid_radius: f64,
    pub grid_n_x: usize,
    pub grid_dim_x: usize,

    pub dynamics_dt: Option<f64>,
    pub dynamics_scheme: crate::dynamics::SplitScheme,
    pub dynamics_t_end: f64,
    pub dynamics_snapshot_every: usize,
    pub dynamics_diag_every: usize,

    pub collision_table_memory_cap: usize,
    pub collision_conservation_projection: bool,
    pub collision_n_radial: usize,
    pub collision_n_polar: usize,
    pub collision_n_azimuth: usize,

    pub experiment_init: InitialCondition,
    pub experiment_t_star: f64,
    pub experiment_t0: f64,
    pub experiment_eps_ladder: Vec<f64>,
    pub experiment_l_values: Vec<f64>,

    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kernel_gamma: 0.0,
            kernel_s: 0.5,
            kernel_eps: 0.0,
            kernel_profile: AngularProfile::Canonical,
            kernel_theta_panels: KernelSpec::DEFAULT_PANELS,
            kernel_theta_order: KernelSpec::DEFAULT_ORDER,
            grid_n_v: 32,
            grid_radius: 4.5,
            grid_n_x: 1,
            grid_dim_x: 1,
            dynamics_dt: None,
            dynamics_scheme: crate::dynamics::SplitScheme::Strang,
            dynamics_t_end: 1.0,
            dynamics_snapshot_every: 0,
            dynamics_diag_every: 1,
            collision_table_memory_cap: DEFAULT_MEMORY_CAP,
            collision_conservation_projection: true,
            collision_n_radial: 0,
            collision_n_polar: 0,
            collision_n_azimuth: 0,
            experiment_init: InitialCondition::Bimodal {
                shift: 0.6,
                temp: 0.65,
            },
            experiment_t_star: 0.1,
            experiment_t0: 0.5,
            experiment_eps_ladder: vec![0.2, 0.1, 0.05, 0.025],
            experiment_l_values: vec![8.0, 16.0, 32.0, 64.0],
            seed: 0,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "kernel.gamma",
    "kernel.s",
    "kernel.eps",
    "kernel.profile",
    "kernel.theta_panels",
    "kernel.theta_order",
    "grid.n_v",
    "grid.radius",
    "grid.n_x",
    "grid.dim_x",
    "dynamics.dt",
    "dynamics.scheme",
    "dynamics.t_end",
    "dynamics.snapshot_every",
    "dynamics.diag_every",
    "collision.table_memory_cap",
    "collision.conservation_projection",
    "collision.n_radial",
    "collision.n_polar",
    "collision.n_azimuth",
    "experiment.init",
    "experiment.t_star",
    "experiment.t0",
    "experiment.eps_ladder",
    "experiment.l_values",
    "run.seed",
];

/// Parses the file, applies environment overrides and validates.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_lowercase();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: line_no,
                text: raw.trim().to_string(),
            });
        };
        let key = if section.is_empty() {
            key.trim().to_lowercase()
        } else {
            format!("{section}.{}", key.trim().to_lowercase())
        };
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line: line_no, key });
        }
        if let Some((first, _)) = entries.get(&key) {
            return Err(ConfigError::Duplicate {
                key,
                first: *first,
                second: line_no,
            });
        }
        entries.insert(key, (line_no, value.trim().to_string()));
    }

    // Environment overrides.
    for key in KNOWN_KEYS {
        let env_name = format!("BOLTZ_{}", key.replace('.', "__").to_uppercase());
        if let Ok(v) = std::env::var(&env_name) {
            entries.insert(key.to_string(), (0, v));
        }
    }

    build_config(entries)
}

fn build_config(
    entries: BTreeMap<String, (usize, String)>,
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();

    let get_f64 = |k: &str, e: &BTreeMap<String, (usize, String)>| -> Result<Option<f64>, ConfigError> {
        match e.get(k) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| {
                ConfigError::TypeMismatch {
                    line: *line,
                    key: k.to_string(),
                    expected: "a real number",
                    value: v.clone(),
                }
            }),
        }
    };
    let get_usize = |k: &str, e: &BTreeMap<String, (usize, String)>| -> Result<Option<usize>, ConfigError> {
        match e.get(k) {
            None => Ok(None),
            Some((line, v)) => v.parse::<usize>().map(Some).map_err(|_| {
                ConfigError::TypeMismatch {
                    line: *line,
                    key: k.to_string(),
                    expected: "a nonnegative integer",
                    value: v.clone(),
                }
            }),
        }
    };
    let get_bool = |k: &str, e: &BTreeMap<String, (usize, String)>| -> Result<Option<bool>, ConfigError> {
        match e.get(k) {
            None => Ok(None),
            Some((line, v)) => match v.as_str() {
                "true" | "on" | "1" => Ok(Some(true)),
                "false" | "off" | "0" => Ok(Some(false)),
                _ => Err(ConfigError::TypeMismatch {
                    line: *line,
                    key: k.to_string(),
                    expected: "true/false",
                    value: v.clone(),
                }),
            },
        }
    };
    let get_list = |k: &str, e: &BTreeMap<String, (usize, String)>| -> Result<Option<Vec<f64>>, ConfigError> {
        match e.get(k) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| ConfigError::TypeMismatch {
                    line: *line,
                    key: k.to_string(),
                    expected: "a comma-separated list of reals",
                    value: v.clone(),
                }),
        }
    };

    if let Some(v) = get_f64("kernel.gamma", &entries)? {
        if !(0.0..=2.0).contains(&v) {
            return Err(ConfigError::Constraint {
                key: "kernel.gamma".into(),
                constraint: "gamma in [0, 2]",
                value: v.to_string(),
            });
        }
        cfg.kernel_gamma = v;
    }
    if let Some(v) = get_f64("kernel.s", &entries)? {
        if !(v > 0.0 && v < 1.0) {
            return Err(ConfigError::Constraint {
                key: "kernel.s".into(),
                constraint: "s in (0, 1)",
                value: v.to_string(),
            });
        }
        cfg.kernel_s = v;
    }
    if let Some(v) = get_f64("kernel.eps", &entries)? {
        if v < 0.0 {
            return Err(ConfigError::Constraint {
                key: "kernel.eps".into(),
                constraint: "eps >= 0",
                value: v.to_string(),
            });
        }
        cfg.kernel_eps = v;
    }
    if let Some((line, v)) = entries.get("kernel.profile") {
        cfg.kernel_profile = match v.as_str() {
            "canonical" => AngularProfile::Canonical,
            "grad_constant" => AngularProfile::GradConstant,
            _ => {
                return Err(ConfigError::TypeMismatch {
                    line: *line,
                    key: "kernel.profile".into(),
                    expected: "canonical | grad_constant",
                    value: v.clone(),
                })
            }
        };
    }
    if let Some(v) = get_usize("kernel.theta_panels", &entries)? {
        cfg.kernel_theta_panels = v;
    }
    if let Some(v) = get_usize("kernel.theta_order", &entries)? {
        cfg.kernel_theta_order = v;
    }
    if let Some(v) = get_usize("grid.n_v", &entries)? {
        cfg.grid_n_v = v;
    }
    if let Some(v) = get_f64("grid.radius", &entries)? {
        cfg.grid_radius = v;
    }
    if let Some(v) = get_usize("grid.n_x", &entries)? {
        cfg.grid_n_x = v;
    }
    if let Some(v) = get_usize("grid.dim_x", &entries)? {
        cfg.grid_dim_x = v;
    }
    if let Some(v) = get_f64("dynamics.dt", &entries)? {
        cfg.dynamics_dt = Some(v);
    }
    if let Some((line, v)) = entries.get("dynamics.scheme") {
        cfg.dynamics_scheme = match v.as_str() {
            "strang" => crate::dynamics::SplitScheme::Strang,
            "lie" => crate::dynamics::SplitScheme::Lie,
            _ => {
                return Err(ConfigError::TypeMismatch {
                    line: *line,
                    key: "dynamics.scheme".into(),
                    expected: "strang | lie",
                    value: v.clone(),
                })
            }
        };
    }
    if let Some(v) = get_f64("dynamics.t_end", &entries)? {
        cfg.dynamics_t_end = v;
    }
    if let Some(v) = get_usize("dynamics.snapshot_every", &entries)? {
        cfg.dynamics_snapshot_every = v;
    }
    if let Some(v) = get_usize("dynamics.diag_every", &entries)? {
        cfg.dynamics_diag_every = v;
    }
    if let Some(v) = get_usize("collision.table_memory_cap", &entries)? {
        cfg.collision_table_memory_cap = v;
    }
    if let Some(v) = get_bool("collision.conservation_projection", &entries)? {
        cfg.collision_conservation_projection = v;
    }
    if let Some(v) = get_usize("collision.n_radial", &entries)? {
        cfg.collision_n_radial = v;
    }
    if let Some(v) = get_usize("collision.n_polar", &entries)? {
        cfg.collision_n_polar = v;
    }
    if let Some(v) = get_usize("collision.n_azimuth", &entries)? {
        cfg.collision_n_azimuth = v;
    }
    if let Some((line, v)) = entries.get("experiment.init") {
        cfg.experiment_init = match v.as_str() {
            "maxwellian" => InitialCondition::Maxwellian,
            "bkw" => InitialCondition::Bkw { k0: 0.65 },
            "bimodal" => InitialCondition::Bimodal {
                shift: 0.6,
                temp: 0.65,
            },
            "temperature_wave" => InitialCondition::TemperatureWave { amplitude: 0.2 },
            "moment_poor" => InitialCondition::MomentPoor,
            "shear_wave" => InitialCondition::ShearWave { amplitude: 0.2 },
            _ => {
                return Err(ConfigError::TypeMismatch {
                    line: *line,
                    key: "experiment.init".into(),
                    expected:
                        "maxwellian | bkw | bimodal | temperature_wave | moment_poor | shear_wave",
                    value: v.clone(),
                })
            }
        };
    }
    if let Some(v) = get_f64("experiment.t_star", &entries)? {
        cfg.experiment_t_star = v;
    }
    if let Some(v) = get_f64("experiment.t0", &entries)? {
        cfg.experiment_t0 = v;
    }
    if let Some(v) = get_list("experiment.eps_ladder", &entries)? {
        cfg.experiment_eps_ladder = v;
    }
    if let Some(v) = get_list("experiment.l_values", &entries)? {
        cfg.experiment_l_values = v;
    }
    if let Some(v) = get_usize("run.seed", &entries)? {
        cfg.seed = v as u64;
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn kernel_spec(&self) -> Result<KernelSpec, ConfigError> {
        Ok(KernelSpec::with_quadrature(
            self.kernel_gamma,
            self.kernel_s,
            self.kernel_eps,
            self.kernel_profile,
            self.kernel_theta_panels,
            self.kernel_theta_order,
        )?)
    }

    pub fn table_params(&self) -> TableParams {
        let mut p = TableParams::for_grid(self.grid_n_v);
        if self.collision_n_radial > 0 {
            p.n_radial = self.collision_n_radial;
        }
        if self.collision_n_polar > 0 {
            p.n_polar = self.collision_n_polar;
        }
        if self.collision_n_azimuth > 0 {
            p.n_azimuth = self.collision_n_azimuth;
        }
        p.memory_cap_bytes = self.collision_table_memory_cap;
        p
    }

    /// Serialises the resolved configuration (defaults filled) back to the
    /// sectioned text format, suitable for writing next to run outputs.
    pub fn to_resolved_text(&self) -> String {
        let profile = match self.kernel_profile {
            AngularProfile::Canonical => "canonical",
            AngularProfile::GradConstant => "grad_constant",
        };
        let scheme = match self.dynamics_scheme {
            crate::dynamics::SplitScheme::Strang => "strang",
            crate::dynamics::SplitScheme::Lie => "lie",
        };
        let init = match self.experiment_init {
            InitialCondition::Maxwellian => "maxwellian",
            InitialCondition::Bkw { .. } => "bkw",
            InitialCondition::Bimodal { .. } => "bimodal",
            InitialCondition::TemperatureWave { .. } => "temperature_wave",
            InitialCondition::MomentPoor => "moment_poor",
            InitialCondition::ShearWave { .. } => "shear_wave",
        };
        let dt = self
            .dynamics_dt
            .map(|d| format!("dt = {d}\n"))
            .unwrap_or_default();
        let ladder = self
            .experiment_eps_ladder
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let lvals = self
            .experiment_l_values
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "[kernel]\ngamma = {}\ns = {}\neps = {}\nprofile = {}\ntheta_panels = {}\ntheta_order = {}\n\n\
             [grid]\nn_v = {}\nradius = {}\nn_x = {}\ndim_x = {}\n\n\
             [dynamics]\n{}scheme = {}\nt_end = {}\nsnapshot_every = {}\ndiag_every = {}\n\n\
             [collision]\ntable_memory_cap = {}\nconservation_projection = {}\nn_radial = {}\nn_polar = {}\nn_azimuth = {}\n\n\
             [experiment]\ninit = {}\nt_star = {}\nt0 = {}\neps_ladder = {}\nl_values = {}\n\n\
             [run]\nseed = {}\n",
            self.kernel_gamma,
            self.kernel_s,
            self.kernel_eps,
            profile,
            self.kernel_theta_panels,
            self.kernel_theta_order,
            self.grid_n_v,
            self.grid_radius,
            self.grid_n_x,
            self.grid_dim_x,
            dt,
            scheme,
            self.dynamics_t_end,
            self.dynamics_snapshot_every,
            self.dynamics_diag_every,
            self.collision_table_memory_cap,
            self.collision_conservation_projection,
            self.collision_n_radial,
            self.collision_n_polar,
            self.collision_n_azimuth,
            init,
            self.experiment_t_star,
            self.experiment_t0,
            ladder,
            lvals,
            self.seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = parse_config_str("[kernel]\ngamma = 0\ns = 0.5\n").unwrap();
        assert_eq!(cfg.kernel_gamma, 0.0);
        assert_eq!(cfg.grid_n_v, 32);
        assert!(cfg.collision_conservation_projection);
    }

    #[test]
    fn s_constraint_names_the_range() {
        let err = parse_config_str("[kernel]\ns = 1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("s in (0, 1)"), "{msg}");
    }

    #[test]
    fn duplicate_key_reports_both_lines() {
        let err =
            parse_config_str("[kernel]\ngamma = 0\ngamma = 1\n").unwrap_err();
        match err {
            ConfigError::Duplicate { first, second, .. } => {
                assert_eq!((first, second), (2, 3));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let err = parse_config_str("[kernel]\nfoo = 1\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { line, key } => {
                assert_eq!(line, 2);
                assert_eq!(key, "kernel.foo");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn resolved_text_round_trips() {
        let cfg = parse_config_str(
            "[kernel]\ngamma = 1\ns = 0.25\neps = 0.05\nprofile = grad_constant\n[grid]\nn_v = 16\n",
        )
        .unwrap();
        let text = cfg.to_resolved_text();
        let back = parse_config_str(&text).unwrap();
        assert_eq!(back.kernel_gamma, cfg.kernel_gamma);
        assert_eq!(back.kernel_s, cfg.kernel_s);
        assert_eq!(back.grid_n_v, 16);
        assert_eq!(back.kernel_profile, AngularProfile::GradConstant);
    }
}
