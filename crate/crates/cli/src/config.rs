//! JSON run configuration.

use std::path::{Path, PathBuf};

use lindyn::init::{gaussian, mirrored_gaussian, parallel, seeded_rng};
use lindyn::oracle::{IntegratorConfig, Method};
use lindyn::{reduce_dataset, EffectiveData64, Hyperparams64, RawDataset64, Reduction, WeightState64};
use rand::Rng;
use serde::Deserialize;

use crate::error::{json_error, CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hyperparams: Hyperparams64,
    pub init: InitSpec,
    pub data: DataSpec,
    #[serde(default)]
    pub reduction: Reduction,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub integrator: OracleSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Explicit {
        u: Vec<f64>,
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
    },
    Gaussian {
        sigma_u: f64,
        sigma_w: f64,
        seed: u64,
        /// Draw neurons in pairs `(u, w)`, `(−u, w)`.
        #[serde(default)]
        mirrored: bool,
    },
    /// `u` parallel (`ratio > 0`) or anti-parallel to `W x`.
    Parallel { scale: f64, ratio: f64, seed: u64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    /// The effective sample itself.
    Point { x: Vec<f64>, y: f64 },
    /// Samples `(a_k, ỹ_k)` at inputs `a_k n`; `direction` is normalized.
    Samples { direction: Vec<f64>, samples: Vec<(f64, f64)> },
    /// `a_k ~ N(0, 1)`, `ỹ_k = slope a_k + noise ε_k`.
    Synthetic { direction: Vec<f64>, n: usize, slope: f64, noise: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub samples: usize,
    /// End time in units of `t_c` (β = 1 only).
    pub t_end_tc: Option<f64>,
    /// Absolute end time.
    pub t_end: Option<f64>,
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { samples: 200, t_end_tc: None, t_end: None, spacing: Spacing::Log }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub stop_residual: Option<f64>,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { method: Method::AdaptiveDopri5, rel_tol: 1e-10, abs_tol: 1e-12, max_step: None, stop_residual: Some(1e-12) }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub weights: Option<PathBuf>,
}

/// Built instance: hyperparameters, effective data and initial weights.
pub struct Instance {
    pub hp: Hyperparams64,
    pub data: EffectiveData64,
    pub init: WeightState64,
}

pub fn load(path: &Path) -> CliResult<RunConfig> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}:{m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> CliResult<RunConfig> {
    serde_json::from_str(text).map_err(|e| CliError::Config(json_error(&e)))
}

fn unit(direction: &[f64]) -> CliResult<Vec<f64>> {
    let n = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(CliError::Config("data.direction must be a nonzero finite vector".into()));
    }
    Ok(direction.iter().map(|v| v / n).collect())
}

impl RunConfig {
    pub fn set_seed(&mut self, seed: u64) {
        match &mut self.init {
            InitSpec::Gaussian { seed: s, .. } | InitSpec::Parallel { seed: s, .. } => *s = seed,
            InitSpec::Explicit { .. } => {}
        }
        if let DataSpec::Synthetic { seed: s, .. } = &mut self.data {
            *s = seed;
        }
    }

    pub fn has_seed(&self) -> bool {
        !matches!(self.init, InitSpec::Explicit { .. }) || matches!(self.data, DataSpec::Synthetic { .. })
    }

    pub fn instance(&self) -> CliResult<Instance> {
        let hp = self.hyperparams;
        hp.validate()?;
        let data = match &self.data {
            DataSpec::Point { x, y } => {
                if x.len() != hp.d0 {
                    return Err(CliError::Config(format!("data.x has length {}, hyperparams.d0 = {}", x.len(), hp.d0)));
                }
                EffectiveData64::from_point(x.clone(), *y)?
            }
            DataSpec::Samples { direction, samples } => {
                reduce_dataset(&RawDataset64::new(unit(direction)?, samples.clone())?, &hp, self.reduction)?
            }
            DataSpec::Synthetic { direction, n, slope, noise, seed } => {
                let mut rng = seeded_rng(*seed, 1);
                let samples = (0..*n)
                    .map(|_| {
                        let a: f64 = rng.sample(rand_distr::StandardNormal);
                        let e: f64 = rng.sample(rand_distr::StandardNormal);
                        (a, slope * a + noise * e)
                    })
                    .collect();
                reduce_dataset(&RawDataset64::new(unit(direction)?, samples)?, &hp, self.reduction)?
            }
        };
        let init = match &self.init {
            InitSpec::Explicit { u, w } => {
                let s = WeightState64::new(u.clone(), w.clone());
                s.check_dims(&hp)?;
                s
            }
            InitSpec::Gaussian { sigma_u, sigma_w, seed, mirrored } => {
                if !(*sigma_u >= 0.0 && *sigma_w >= 0.0) {
                    return Err(CliError::Config("init sigmas must be nonnegative".into()));
                }
                let mut rng = seeded_rng(*seed, 0);
                if *mirrored {
                    mirrored_gaussian(hp.d, hp.d0, *sigma_u, *sigma_w, &mut rng)
                } else {
                    gaussian(hp.d, hp.d0, *sigma_u, *sigma_w, &mut rng)
                }
            }
            InitSpec::Parallel { scale, ratio, seed } => parallel(&data.n, *scale, *ratio, hp.d, &mut seeded_rng(*seed, 0)),
        };
        Ok(Instance { hp, data, init })
    }

    /// Sample times: `t = 0` then `samples` points ending at the configured time.
    /// `t_c` is the time scale for `t_end_tc`; without one an absolute `t_end` is required.
    pub fn times(&self, t_c: Option<f64>) -> CliResult<Vec<f64>> {
        let g = &self.grid;
        if g.samples < 2 {
            return Err(CliError::Config("grid.samples must be at least 2".into()));
        }
        let t_end = match (g.t_end, g.t_end_tc, t_c) {
            (Some(_), Some(_), _) => return Err(CliError::Config("set only one of grid.t_end and grid.t_end_tc".into())),
            (Some(t), None, _) => t,
            (None, m, Some(tc)) => m.unwrap_or(20.0) * tc,
            (None, _, None) => {
                return Err(CliError::Config("grid.t_end is required when no characteristic time is available (beta >= 2)".into()))
            }
        };
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(CliError::Config(format!("end time must be positive and finite, got {t_end}")));
        }
        let n = g.samples;
        let pts: Vec<f64> = match g.spacing {
            Spacing::Log => {
                let (a, b) = ((t_end / 2000.0).ln(), t_end.ln());
                let mut pts: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
                pts[n - 1] = t_end;
                pts
            }
            Spacing::Linear => (1..=n).map(|k| t_end * k as f64 / n as f64).collect(),
        };
        Ok(std::iter::once(0.0).chain(pts).collect())
    }

    pub fn oracle(&self, t_end: f64) -> CliResult<IntegratorConfig<f64>> {
        let o = &self.integrator;
        let mut cfg = IntegratorConfig::new(t_end).with_tolerances(o.rel_tol, o.abs_tol);
        cfg.method = o.method;
        cfg.stop_residual = o.stop_residual;
        if let Some(h) = o.max_step {
            cfg.max_step = h;
        } else if o.method == Method::FixedRk4 {
            return Err(CliError::Config("integrator.max_step is required for fixed-rk4".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
