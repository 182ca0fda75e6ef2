use serde::{Deserialize, Serialize};

use super::ensemble::Ensemble;
use crate::engine::{StepRecord, Termination};
use crate::{Error, Result};

/// Mean with standard error and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                q25: f64::NAN,
                median: f64::NAN,
                q75: f64::NAN,
            };
        }
        let (mean, stderr) = mean_stderr(values);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean,
            stderr,
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
        }
    }
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub gamma: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: u64,
    /// Trajectories still running at `k`.
    pub n: usize,
    pub f_gap: Summary,
    pub grad_norm: Summary,
    pub grad_norm_sq: Summary,
    /// `E[(F(θ_k) − F_lb)^γ]` for each requested `γ`.
    pub gamma_moments: Vec<MomentEstimate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminationTally {
    pub completed: usize,
    pub overflow: usize,
    pub domain_exit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub f_lb: f64,
    pub checkpoints: Vec<Checkpoint>,
    /// Per trajectory, mean of `F` over the recorded steps of the final tenth of its run.
    #[serde(rename = "F_lim_estimate")]
    pub f_lim_estimate: Vec<f64>,
    /// `max_k mean(F(θ_k) − F_lb)` over checkpoints.
    #[serde(rename = "sup_mean_F")]
    pub sup_mean_f: f64,
    #[serde(rename = "sup_mean_F_stderr")]
    pub sup_mean_f_stderr: f64,
    #[serde(rename = "sup_mean_F_k")]
    pub sup_mean_f_k: u64,
    /// Least-squares slope of `log mean‖Ḟ(θ_k)‖` against `log k` over `k ∈ [K/10, K]`.
    pub final_decade_slope: Option<f64>,
    pub terminations: TerminationTally,
    /// Escape events summed over steps and trajectories, when tracked.
    pub total_escapes: Option<u64>,
    pub trajectories_with_escape: Option<usize>,
}

/// Per-checkpoint estimates across the ensemble; `gammas` must lie in `[0, 1)`.
pub fn gradient_convergence_stats(ensemble: &Ensemble, gammas: &[f64]) -> Result<ConvergenceReport> {
    if let Some(g) = gammas.iter().find(|g| !(**g >= 0.0 && **g < 1.0)) {
        return Err(Error::contract(format!("gamma must lie in [0,1), got {g}")));
    }
    let spec = &ensemble.spec;
    let f_lb = spec.oracle.objective().f_lb();
    let horizon = spec.horizon;
    let stride = spec.record_stride;

    let mut ks: Vec<u64> = (0..=horizon).step_by(stride as usize).collect();
    if *ks.last().unwrap() != horizon {
        ks.push(horizon);
    }
    // recorded ks are shared by all trajectories, so index columns by position
    let index_of = |k: u64| -> Option<usize> {
        if k.is_multiple_of(stride) {
            Some((k / stride) as usize)
        } else if k == horizon {
            Some((horizon / stride) as usize + 1)
        } else {
            None
        }
    };
    let at = |steps: &[StepRecord], k: u64| -> Option<StepRecord> {
        let i = index_of(k)?;
        steps.get(i).filter(|s| s.k == k).cloned()
    };

    let mut checkpoints = Vec::with_capacity(ks.len());
    for &k in &ks {
        let recs: Vec<StepRecord> = ensemble.trajectories.iter().filter_map(|t| at(&t.steps, k)).collect();
        if recs.is_empty() {
            continue;
        }
        let gaps: Vec<f64> = recs.iter().map(|r| (r.f_value - f_lb).max(0.0)).collect();
        let gn: Vec<f64> = recs.iter().map(|r| r.grad_norm).collect();
        let gn2: Vec<f64> = gn.iter().map(|g| g * g).collect();
        let gamma_moments = gammas
            .iter()
            .map(|&gamma| {
                let m: Vec<f64> = gaps.iter().map(|x| x.powf(gamma)).collect();
                let (mean, stderr) = mean_stderr(&m);
                MomentEstimate { gamma, mean, stderr }
            })
            .collect();
        checkpoints.push(Checkpoint {
            k,
            n: recs.len(),
            f_gap: Summary::of(&gaps),
            grad_norm: Summary::of(&gn),
            grad_norm_sq: Summary::of(&gn2),
            gamma_moments,
        });
    }

    let (mut sup_mean_f, mut sup_mean_f_stderr, mut sup_mean_f_k) = (f64::NEG_INFINITY, 0.0, 0);
    for c in &checkpoints {
        if c.f_gap.mean > sup_mean_f {
            sup_mean_f = c.f_gap.mean;
            sup_mean_f_stderr = c.f_gap.stderr;
            sup_mean_f_k = c.k;
        }
    }

    let f_lim_estimate = ensemble
        .trajectories
        .iter()
        .map(|t| {
            let last = t.last().k;
            let from = last - last / 10;
            let tail: Vec<f64> = t.steps.iter().filter(|s| s.k >= from).map(|s| s.f_value).collect();
            tail.iter().sum::<f64>() / tail.len() as f64
        })
        .collect();

    let mut terminations = TerminationTally::default();
    for t in &ensemble.trajectories {
        match t.termination {
            Termination::Completed => terminations.completed += 1,
            Termination::Overflow { .. } => terminations.overflow += 1,
            Termination::DomainExit { .. } => terminations.domain_exit += 1,
        }
    }

    let (total_escapes, trajectories_with_escape) = match &ensemble.escapes {
        Some(log) => (
            Some(log.per_trajectory.iter().map(|e| e.len() as u64).sum()),
            Some(log.per_trajectory.iter().filter(|e| !e.is_empty()).count()),
        ),
        None => (None, None),
    };

    Ok(ConvergenceReport {
        f_lb,
        final_decade_slope: decade_slope(&checkpoints, horizon),
        checkpoints,
        f_lim_estimate,
        sup_mean_f,
        sup_mean_f_stderr,
        sup_mean_f_k,
        terminations,
        total_escapes,
        trajectories_with_escape,
    })
}

fn decade_slope(checkpoints: &[Checkpoint], horizon: u64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = checkpoints
        .iter()
        .filter(|c| c.k > 0 && c.k >= horizon / 10 && c.grad_norm.mean > 0.0)
        .map(|c| ((c.k as f64).ln(), c.grad_norm.mean.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
