use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::capture::{capture_escape_frequency, CaptureReport};
use super::convergence::{gradient_convergence_stats, ConvergenceReport};
use super::dichotomy::{classify_dichotomy, DichotomyClassification, DichotomyVerdict};
use crate::engine::trajectory::{check_run_inputs, simulate, Recorder, StepObserver};
use crate::engine::{dist, ParameterVector, Schedule, Trajectory};
use crate::objectives::StochasticOracle;
use crate::sampling::split_seed;
use crate::{Error, Result};

/// Ball whose exits are tallied online at every step, independent of `record_stride`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureSpec {
    pub theta_bar: ParameterVector,
    #[serde(rename = "R")]
    pub radius: f64,
    pub epsilon: f64,
}

impl CaptureSpec {
    /// Jump size defaults to a tenth of the radius.
    pub fn new(theta_bar: ParameterVector, radius: f64, epsilon: Option<f64>) -> Result<Self> {
        let epsilon = epsilon.unwrap_or(0.1 * radius);
        if !(radius > 0.0 && radius.is_finite() && epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::contract("capture radius and epsilon must be positive"));
        }
        Ok(Self {
            theta_bar,
            radius,
            epsilon,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub oracle: StochasticOracle,
    pub schedule: Schedule,
    pub theta0: ParameterVector,
    pub horizon: u64,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub record_stride: u64,
    pub capture: Option<CaptureSpec>,
}

impl EnsembleSpec {
    pub fn objective_id(&self) -> String {
        self.oracle.objective().id()
    }

    pub fn noise_id(&self) -> String {
        self.oracle.noise().id()
    }

    pub fn schedule_id(&self) -> String {
        self.schedule.id()
    }

    /// Seed of trajectory `index`.
    pub fn seed(&self, index: usize) -> u64 {
        split_seed(self.master_seed, index as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::contract("need at least one trajectory"));
        }
        check_run_inputs(&self.oracle, &self.schedule, &self.theta0, self.horizon, self.record_stride)?;
        if let Some(c) = &self.capture {
            if c.theta_bar.dim() != self.theta0.dim() {
                return Err(Error::contract("capture center and theta0 dimensions differ"));
            }
        }
        Ok(())
    }
}

/// Steps `k` at which `‖θ_k − θ̄‖ ≤ R` and `‖θ_{k+1} − θ̄‖ ≥ R + ε`, per trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeLog {
    pub capture: CaptureSpec,
    pub per_trajectory: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub spec: EnsembleSpec,
    pub trajectories: Vec<Trajectory>,
    pub escapes: Option<EscapeLog>,
}

struct EscapeTracker<'a> {
    recorder: Recorder,
    capture: Option<&'a CaptureSpec>,
    inside: bool,
    escapes: Vec<u64>,
}

impl StepObserver for EscapeTracker<'_> {
    fn position(&mut self, k: u64, theta: &[f64]) {
        if let Some(c) = self.capture {
            let d = dist(theta, c.theta_bar.as_slice());
            if self.inside && d >= c.radius + c.epsilon {
                self.escapes.push(k - 1);
            }
            self.inside = d <= c.radius;
        }
    }

    fn evaluated(&mut self, k: u64, theta: &[f64], f_value: f64, grad_norm: f64) {
        self.recorder.evaluated(k, theta, f_value, grad_norm);
    }
}

/// Runs all trajectories in parallel; the result is independent of scheduling because
/// each trajectory owns its generator and results are kept in index order.
pub fn simulate_ensemble(spec: &EnsembleSpec) -> Result<Ensemble> {
    spec.validate()?;
    let oracle_id = spec.oracle.id();
    let objective_id = spec.objective_id();
    let schedule_id = spec.schedule_id();
    let runs: Vec<(Trajectory, Vec<u64>)> = (0..spec.n_trajectories)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed(i);
            let mut tracker = EscapeTracker {
                recorder: Recorder::new(spec.record_stride, spec.horizon),
                capture: spec.capture.as_ref(),
                inside: false,
                escapes: Vec::new(),
            };
            let termination = simulate(
                &spec.oracle,
                &spec.schedule,
                spec.theta0.as_slice(),
                spec.horizon,
                seed,
                &mut tracker,
            );
            let traj = Trajectory {
                steps: tracker.recorder.finish(),
                seed,
                schedule_id: schedule_id.clone(),
                objective_id: objective_id.clone(),
                oracle_id: oracle_id.clone(),
                horizon: spec.horizon,
                record_stride: spec.record_stride,
                termination,
            };
            (traj, tracker.escapes)
        })
        .collect();
    let (trajectories, escapes): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    Ok(Ensemble {
        escapes: spec.capture.clone().map(|capture| EscapeLog {
            capture,
            per_trajectory: escapes,
        }),
        spec: spec.clone(),
        trajectories,
    })
}

/// Thresholds for the per-trajectory classification and the moment exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    #[serde(rename = "W")]
    pub window: u64,
    pub epsilon_conv: f64,
    #[serde(rename = "R_div")]
    pub r_div: f64,
    pub gammas: Vec<f64>,
}

impl AnalysisOptions {
    /// `W = K/10`, `ε_conv = 10⁻³(1 + ‖θ_0‖)`, `R_div = 10³(1 + ‖θ_0‖)`.
    pub fn defaults_for(spec: &EnsembleSpec) -> Self {
        let scale = 1.0 + spec.theta0.norm();
        Self {
            window: (spec.horizon / 10).max(1),
            epsilon_conv: 1e-3 * scale,
            r_div: 1e3 * scale,
            gammas: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub converged_like: usize,
    pub diverging_like: usize,
    pub undecided: usize,
}

impl VerdictCounts {
    pub fn tally(classes: &[DichotomyClassification]) -> Self {
        let mut c = Self::default();
        for cl in classes {
            match cl.verdict {
                DichotomyVerdict::ConvergedLike => c.converged_like += 1,
                DichotomyVerdict::DivergingLike => c.diverging_like += 1,
                DichotomyVerdict::Undecided => c.undecided += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.converged_like + self.diverging_like + self.undecided
    }

    pub fn converged_fraction(&self) -> f64 {
        self.converged_like as f64 / self.total().max(1) as f64
    }

    pub fn diverging_fraction(&self) -> f64 {
        self.diverging_like as f64 / self.total().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub objective_id: String,
    pub noise_id: String,
    pub schedule_id: String,
    pub theta0: Vec<f64>,
    #[serde(rename = "K")]
    pub horizon: u64,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub record_stride: u64,
    pub analysis: AnalysisOptions,
    pub verdict_counts: VerdictCounts,
    pub classifications: Vec<DichotomyClassification>,
    pub convergence: ConvergenceReport,
    pub capture: Option<CaptureReport>,
}

/// Simulates the ensemble and computes every report derived from it.
pub fn run_ensemble(spec: &EnsembleSpec, options: &AnalysisOptions) -> Result<(Ensemble, EnsembleReport)> {
    let ensemble = simulate_ensemble(spec)?;
    let report = ensemble.report(options)?;
    Ok((ensemble, report))
}

impl Ensemble {
    pub fn classify(&self, options: &AnalysisOptions) -> Result<Vec<DichotomyClassification>> {
        self.trajectories
            .iter()
            .map(|t| classify_dichotomy(t, options.window, options.epsilon_conv, options.r_div))
            .collect()
    }

    pub fn report(&self, options: &AnalysisOptions) -> Result<EnsembleReport> {
        let classifications = self.classify(options)?;
        let capture = match &self.escapes {
            Some(log) => Some(capture_escape_frequency(
                self,
                &log.capture.theta_bar,
                log.capture.radius,
                log.capture.epsilon,
            )?),
            None => None,
        };
        let spec = &self.spec;
        Ok(EnsembleReport {
            objective_id: spec.objective_id(),
            noise_id: spec.noise_id(),
            schedule_id: spec.schedule_id(),
            theta0: spec.theta0.as_slice().to_vec(),
            horizon: spec.horizon,
            n_trajectories: spec.n_trajectories,
            master_seed: spec.master_seed,
            record_stride: spec.record_stride,
            analysis: options.clone(),
            verdict_counts: VerdictCounts::tally(&classifications),
            classifications,
            convergence: gradient_convergence_stats(self, &options.gammas)?,
            capture,
        })
    }
}
