use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{norm_of, ParameterVector, Schedule};
use crate::objectives::StochasticOracle;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: u64,
    pub theta: Vec<f64>,
    pub f_value: f64,
    pub grad_norm: f64,
}

/// How a trajectory ended. Divergence is an outcome, not a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    /// `θ_k`, `F(θ_k)` or `Ḟ(θ_k)` stopped being representable.
    Overflow { k: u64, theta: Vec<f64> },
    /// `θ_k` fell below the objective's domain floor.
    DomainExit { k: u64, theta: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    pub seed: u64,
    pub schedule_id: String,
    pub objective_id: String,
    pub oracle_id: String,
    pub horizon: u64,
    /// Every `record_stride`-th step is kept (plus the final one).
    pub record_stride: u64,
    pub termination: Termination,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("trajectory has at least θ_0")
    }
}

/// Hooks called by the simulation loop.
pub(crate) trait StepObserver {
    /// Called with every iterate `θ_k` as soon as it is formed.
    fn position(&mut self, _k: u64, _theta: &[f64]) {}
    /// Called after `F(θ_k)` and `Ḟ(θ_k)` have been evaluated.
    fn evaluated(&mut self, k: u64, theta: &[f64], f_value: f64, grad_norm: f64);
}

pub(crate) fn check_run_inputs(
    oracle: &StochasticOracle,
    schedule: &Schedule,
    theta0: &ParameterVector,
    horizon: u64,
    stride: u64,
) -> Result<()> {
    if horizon == 0 {
        return Err(Error::contract("horizon K must be ≥ 1"));
    }
    if stride == 0 {
        return Err(Error::contract("record stride must be ≥ 1"));
    }
    let p = theta0.dim();
    if oracle.dim() != p || schedule.dim() != p {
        return Err(Error::contract(format!(
            "dimensions disagree: theta0 {p}, oracle {}, schedule {}",
            oracle.dim(),
            schedule.dim()
        )));
    }
    oracle.objective().value(theta0.as_slice()).map(|_| ())
}

/// Runs `θ_{k+1} = θ_k − M_k ḟ(θ_k, X_{k+1})` for `k < horizon`, one oracle draw per step,
/// all draws taken in step order from a generator seeded with `seed`.
pub(crate) fn simulate<O: StepObserver>(
    oracle: &StochasticOracle,
    schedule: &Schedule,
    theta0: &[f64],
    horizon: u64,
    seed: u64,
    observer: &mut O,
) -> Termination {
    let p = theta0.len();
    let objective = oracle.objective();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = theta0.to_vec();
    let mut grad = vec![0.0; p];
    let mut noisy = vec![0.0; p];
    let mut step = vec![0.0; p];
    let mut scratch = vec![0.0; p];

    observer.position(0, &theta);
    for k in 0..=horizon {
        let f = match objective.eval_into(&theta, &mut grad) {
            Ok(f) => f,
            Err(Error::Domain { theta, .. }) => return Termination::DomainExit { k, theta },
            Err(_) => return Termination::Overflow { k, theta },
        };
        observer.evaluated(k, &theta, f, norm_of(&grad));
        if k == horizon {
            break;
        }
        oracle.sample_with_gradient_into(&theta, &grad, &mut noisy, &mut rng);
        schedule.apply_at(k, &noisy, &mut step, &mut scratch);
        for (t, s) in theta.iter_mut().zip(&step) {
            *t -= s;
        }
        observer.position(k + 1, &theta);
        if theta.iter().any(|t| !t.is_finite()) {
            return Termination::Overflow { k: k + 1, theta };
        }
    }
    Termination::Completed
}

pub(crate) struct Recorder {
    pub stride: u64,
    pub horizon: u64,
    pub steps: Vec<StepRecord>,
    pending: Option<StepRecord>,
}

impl Recorder {
    pub fn new(stride: u64, horizon: u64) -> Self {
        let cap = (horizon / stride + 2).min(1 << 20) as usize;
        Self {
            stride,
            horizon,
            steps: Vec::with_capacity(cap),
            pending: None,
        }
    }

    /// Keeps the last evaluated step when the run stops between strides.
    pub fn finish(mut self) -> Vec<StepRecord> {
        if let Some(rec) = self.pending.take() {
            self.steps.push(rec);
        }
        self.steps
    }
}

impl StepObserver for Recorder {
    fn evaluated(&mut self, k: u64, theta: &[f64], f_value: f64, grad_norm: f64) {
        let rec = StepRecord {
            k,
            theta: theta.to_vec(),
            f_value,
            grad_norm,
        };
        if k.is_multiple_of(self.stride) || k == self.horizon {
            self.steps.push(rec);
            self.pending = None;
        } else {
            self.pending = Some(rec);
        }
    }
}

/// Full-resolution trajectory (every step recorded).
pub fn run_trajectory(
    oracle: &StochasticOracle,
    schedule: &Schedule,
    theta0: &ParameterVector,
    horizon: u64,
    seed: u64,
) -> Result<Trajectory> {
    run_trajectory_strided(oracle, schedule, theta0, horizon, seed, 1)
}

/// Trajectory keeping every `stride`-th step and the final one.
///
/// Errors only on bad inputs (including `θ_0` outside the domain); overflow and
/// domain exits during the run end it early and are reported in
/// [`Trajectory::termination`].
pub fn run_trajectory_strided(
    oracle: &StochasticOracle,
    schedule: &Schedule,
    theta0: &ParameterVector,
    horizon: u64,
    seed: u64,
    stride: u64,
) -> Result<Trajectory> {
    check_run_inputs(oracle, schedule, theta0, horizon, stride)?;
    let mut recorder = Recorder::new(stride, horizon);
    let termination = simulate(oracle, schedule, theta0.as_slice(), horizon, seed, &mut recorder);
    Ok(Trajectory {
        steps: recorder.finish(),
        seed,
        schedule_id: schedule.id(),
        objective_id: oracle.objective().id(),
        oracle_id: oracle.id(),
        horizon,
        record_stride: stride,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{NoiseModel, Objective};

    fn pv(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    fn quad_oracle(noise: NoiseModel) -> StochasticOracle {
        StochasticOracle::new(Objective::quadratic(1), noise).unwrap()
    }

    #[test]
    fn deterministic_descent_halves() {
        let oracle = quad_oracle(NoiseModel::Zero);
        let sched = Schedule::constant(vec![0.5], None).unwrap();
        let t = run_trajectory(&oracle, &sched, &pv(&[1.0]), 2, 0).unwrap();
        let thetas: Vec<f64> = t.steps.iter().map(|s| s.theta[0]).collect();
        assert_eq!(thetas, vec![1.0, 0.5, 0.25]);
        assert_eq!(t.steps.iter().map(|s| s.k).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(t.is_complete());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let oracle = quad_oracle(NoiseModel::AdditiveGaussian { sigma: 1.0 });
        let sched = Schedule::scalar_power(1.0, 0.75, 1.0, 1).unwrap();
        let a = run_trajectory(&oracle, &sched, &pv(&[1.0]), 500, 7).unwrap();
        let b = run_trajectory(&oracle, &sched, &pv(&[1.0]), 500, 7).unwrap();
        let c = run_trajectory(&oracle, &sched, &pv(&[1.0]), 500, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.steps, c.steps);
    }

    #[test]
    fn stride_keeps_final_step() {
        let oracle = quad_oracle(NoiseModel::Zero);
        let sched = Schedule::scalar_power(0.5, 0.75, 1.0, 1).unwrap();
        let t = run_trajectory_strided(&oracle, &sched, &pv(&[1.0]), 25, 0, 10).unwrap();
        assert_eq!(t.steps.iter().map(|s| s.k).collect::<Vec<_>>(), vec![0, 10, 20, 25]);
        let full = run_trajectory(&oracle, &sched, &pv(&[1.0]), 25, 0).unwrap();
        assert_eq!(t.steps[2], full.steps[20]);
    }

    #[test]
    fn domain_violations() {
        let oracle = StochasticOracle::new(Objective::loglog1p_abs(1), NoiseModel::Zero).unwrap();
        let sched = Schedule::scalar_power(1.0, 0.75, 1.0, 1).unwrap();
        assert!(matches!(
            run_trajectory(&oracle, &sched, &pv(&[0.5]), 10, 0),
            Err(Error::Domain { .. })
        ));
        // θ_1 = 2 − 5/(3·ln 3) ≈ 0.48 lands inside the floor r0 = 1
        let sched = Schedule::constant(vec![5.0], None).unwrap();
        let t = run_trajectory(&oracle, &sched, &pv(&[2.0]), 10, 0).unwrap();
        assert!(matches!(t.termination, Termination::DomainExit { k: 1, .. }));
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn overflow_truncates() {
        let oracle = quad_oracle(NoiseModel::Zero);
        // expanding step: θ ← θ − 1e10·θ
        let sched = Schedule::constant(vec![1e10], None).unwrap();
        let t = run_trajectory(&oracle, &sched, &pv(&[1.0]), 1000, 0).unwrap();
        assert!(matches!(t.termination, Termination::Overflow { .. }));
        assert!(t.steps.iter().all(|s| s.f_value.is_finite()));
    }

    #[test]
    fn mismatched_inputs() {
        let oracle = quad_oracle(NoiseModel::Zero);
        let sched = Schedule::scalar_power(1.0, 0.75, 1.0, 2).unwrap();
        assert!(run_trajectory(&oracle, &sched, &pv(&[1.0]), 10, 0).is_err());
        let sched = Schedule::scalar_power(1.0, 0.75, 1.0, 1).unwrap();
        assert!(run_trajectory(&oracle, &sched, &pv(&[1.0]), 0, 0).is_err());
    }
}
