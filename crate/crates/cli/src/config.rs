//! Experiment configuration file (JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};

use sgdlab_core::diagnostics::{AnalysisOptions, CaptureSpec, EnsembleSpec};
use sgdlab_core::engine::{ParameterVector, Schedule};
use sgdlab_core::objectives::{catalog_lookup, CatalogParams, NoiseModel, Objective, SmoothnessConstants, StochasticOracle};
use sgdlab_core::sampling::SamplingBox;

use crate::CliError;

/// A number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn to_vec(&self, p: usize) -> Vec<f64> {
        match self {
            Self::One(x) => vec![*x; p],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<ChecksConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

/// Absent block means no noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// `zero`, `additive-gaussian`, `rademacher-radial` or `additive-gaussian-statedep`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    /// Declared expected-smoothness constants; when absent the model's own are used.
    #[serde(default, rename = "C1", skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, rename = "C2", skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, rename = "C3", skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// `scalar-power`, `diagonal-power`, `rotated-diagonal-power` or `constant`.
    pub family: String,
    pub c: OneOrMany,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<OneOrMany>,
    /// Defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    /// Parameter dimension.
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub theta0: Vec<f64>,
    #[serde(rename = "K")]
    pub horizon: u64,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// Defaults to `max(1, K/1000)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureConfig {
    /// Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_bar: Option<Vec<f64>>,
    #[serde(rename = "R")]
    pub radius: f64,
    /// Defaults to `0.1·R`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Defaults to `K/10`.
    #[serde(default, rename = "W", skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    /// Defaults to `10⁻³(1 + ‖θ_0‖)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_conv: Option<f64>,
    /// Defaults to `10³(1 + ‖θ_0‖)`.
    #[serde(default, rename = "R_div", skip_serializing_if = "Option::is_none")]
    pub r_div: Option<f64>,
    /// Escape tallies are computed only when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<CaptureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    /// Radii of the radial probe; defaults to `ρ_min·10^j`, `j = 0..=5`, `ρ_min = max(10, 10(r0 + r))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    /// Hölder exponent; defaults to the objective's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Radius of the local Hölder ball; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Defaults to 0.25.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: OneOrMany,
    pub upper: OneOrMany,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    /// Subset of `p1p2p3p4, descent, variance, gradbound, smoothness, radial, lemma4`; all by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub which: Option<Vec<String>>,
    /// Sampling region; defaults to the objective's standard box.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub sampling_box: Option<BoxConfig>,
    /// Descent constant; defaults to twice the grid Hölder supremum over the box.
    #[serde(default, rename = "L_tilde", skip_serializing_if = "Option::is_none")]
    pub l_tilde: Option<f64>,
    /// Global Hölder constant for the gradient-energy bound; defaults to the objective's.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Defaults to 10⁴.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<usize>,
    /// Defaults to 1000.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    /// Defaults to 1000.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_draws: Option<usize>,
    /// Step-size constant of the eigenvalue threshold; defaults to 4.
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Defaults to 10⁶.
    #[serde(default, rename = "K_max", skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
    /// Horizon of the schedule partial sums; defaults to 10⁵.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Seed of the sampled checks; defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    /// Subset of `json, csv`; both by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
    /// Allow writing into an existing directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<bool>,
}

pub const ALL_CHECKS: [&str; 7] = ["p1p2p3p4", "descent", "variance", "gradbound", "smoothness", "radial", "lemma4"];

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    pub fn dim(&self) -> usize {
        self.schedule.p
    }

    pub fn objective(&self) -> Result<Objective, CliError> {
        let params = CatalogParams {
            q: self.objective.q,
            r0: self.objective.r0,
        };
        Ok(catalog_lookup(&self.objective.name, self.dim(), params)?)
    }

    pub fn noise(&self) -> Result<NoiseModel, CliError> {
        let Some(n) = &self.noise else {
            return Ok(NoiseModel::Zero);
        };
        let need = |v: Option<f64>, field: &str| v.ok_or_else(|| config_err(format!("noise {} needs {field}", n.kind)));
        Ok(match n.kind.as_str() {
            "zero" => NoiseModel::Zero,
            "additive-gaussian" => NoiseModel::AdditiveGaussian {
                sigma: need(n.sigma, "sigma")?,
            },
            "rademacher-radial" => NoiseModel::RademacherRadial {
                direction: n.direction.clone(),
            },
            "additive-gaussian-statedep" => NoiseModel::AdditiveGaussianStatedep {
                sigma0: need(n.sigma0, "sigma0")?,
                sigma1: need(n.sigma1, "sigma1")?,
            },
            other => return Err(config_err(format!("unknown noise kind {other}"))),
        })
    }

    pub fn oracle(&self) -> Result<StochasticOracle, CliError> {
        Ok(StochasticOracle::new(self.objective()?, self.noise()?)?)
    }

    /// Declared constants, falling back to those the noise model implies.
    pub fn smoothness_constants(&self) -> Result<Option<SmoothnessConstants>, CliError> {
        let declared = self.noise.as_ref().map(|n| (n.c1, n.c2, n.c3));
        match declared {
            Some((Some(c1), Some(c2), Some(c3))) => Ok(Some(SmoothnessConstants { c1, c2, c3 })),
            Some((None, None, None)) | None => Ok(self.noise()?.declared_smoothness(&self.objective()?)),
            _ => Err(config_err("declare all of C1, C2, C3 or none")),
        }
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        let s = &self.schedule;
        let p = s.p;
        let c = s.c.to_vec(if s.family == "scalar-power" { 1 } else { p });
        let beta = || {
            s.beta
                .as_ref()
                .map(|b| b.to_vec(if s.family == "scalar-power" { 1 } else { p }))
                .ok_or_else(|| config_err(format!("schedule family {} needs beta", s.family)))
        };
        let k0 = s.k0.unwrap_or(1.0);
        let scalar = |v: Vec<f64>, what: &str| match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(config_err(format!("scalar-power takes a single {what}"))),
        };
        Ok(match s.family.as_str() {
            "scalar-power" => Schedule::scalar_power(scalar(c, "c")?, scalar(beta()?, "beta")?, k0, p)?,
            "diagonal-power" => Schedule::diagonal_power(c, beta()?, k0)?,
            "rotated-diagonal-power" => {
                let seed = s
                    .rotation_seed
                    .ok_or_else(|| config_err("rotated-diagonal-power needs rotation_seed"))?;
                Schedule::rotated_from_seed(c, beta()?, k0, seed)?
            }
            "constant" => {
                let rotation = s.rotation_seed.map(|seed| sgdlab_core::engine::random_orthogonal(p, seed));
                Schedule::constant(c, rotation)?
            }
            other => return Err(config_err(format!("unknown schedule family {other}"))),
        })
    }

    pub fn run_block(&self) -> Result<&RunConfig, CliError> {
        self.run.as_ref().ok_or_else(|| config_err("this command needs a run block"))
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, CliError> {
        let run = self.run_block()?;
        let theta0 = ParameterVector::new(run.theta0.clone())?;
        let capture = match self.diagnostics.as_ref().and_then(|d| d.capture.as_ref()) {
            Some(c) => {
                let bar = c.theta_bar.clone().unwrap_or_else(|| vec![0.0; self.dim()]);
                Some(CaptureSpec::new(ParameterVector::new(bar)?, c.radius, c.epsilon)?)
            }
            None => None,
        };
        Ok(EnsembleSpec {
            oracle: self.oracle()?,
            schedule: self.schedule()?,
            theta0,
            horizon: run.horizon,
            n_trajectories: run.n_trajectories,
            master_seed: run.master_seed,
            record_stride: run.record_stride.unwrap_or((run.horizon / 1000).max(1)),
            capture,
        })
    }

    pub fn analysis(&self, spec: &EnsembleSpec) -> AnalysisOptions {
        let defaults = AnalysisOptions::defaults_for(spec);
        let d = self.diagnostics.clone().unwrap_or_default();
        AnalysisOptions {
            window: d.window.unwrap_or(defaults.window),
            epsilon_conv: d.epsilon_conv.unwrap_or(defaults.epsilon_conv),
            r_div: d.r_div.unwrap_or(defaults.r_div),
            gammas: d.gammas.unwrap_or(defaults.gammas),
        }
    }

    pub fn checks_block(&self) -> ChecksConfig {
        self.checks.clone().unwrap_or_default()
    }

    pub fn diagnostics_block(&self) -> DiagnosticsConfig {
        self.diagnostics.clone().unwrap_or_default()
    }

    pub fn sampling_box(&self, obj: &Objective) -> Result<SamplingBox, CliError> {
        match &self.checks_block().sampling_box {
            Some(b) => Ok(SamplingBox::new(b.lower.to_vec(self.dim()), b.upper.to_vec(self.dim()))?),
            None => Ok(obj.default_box()),
        }
    }

    pub fn formats(&self) -> Result<(bool, bool), CliError> {
        let formats = self
            .output
            .as_ref()
            .and_then(|o| o.formats.clone())
            .unwrap_or_else(|| vec!["json".into(), "csv".into()]);
        if let Some(bad) = formats.iter().find(|f| *f != "json" && *f != "csv") {
            return Err(config_err(format!("unknown output format {bad}")));
        }
        Ok((formats.iter().any(|f| f == "json"), formats.iter().any(|f| f == "csv")))
    }
}
