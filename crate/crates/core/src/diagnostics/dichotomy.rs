use serde::{Deserialize, Serialize};

use crate::engine::{norm_of, Termination, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DichotomyVerdict {
    ConvergedLike,
    DivergingLike,
    Undecided,
}

/// `‖θ_k‖` statistics over the recorded steps of the trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowEvidence {
    pub k_start: u64,
    pub k_end: u64,
    pub n_recorded: usize,
    pub range: f64,
    pub min_norm: f64,
    pub max_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyClassification {
    pub verdict: DichotomyVerdict,
    pub window_length: u64,
    pub epsilon_conv: f64,
    #[serde(rename = "R_div")]
    pub r_div: f64,
    pub evidence: WindowEvidence,
}

/// Finite-horizon surrogate for "‖θ_k‖ converges" versus "‖θ_k‖ → ∞", judged on the
/// recorded steps with `k > k_last − window`.
///
/// Converged-like needs range < `epsilon_conv` and max < `r_div`; diverging-like needs
/// min > `r_div`. Trajectories that left the domain are undecided.
pub fn classify_dichotomy(
    traj: &Trajectory,
    window: u64,
    epsilon_conv: f64,
    r_div: f64,
) -> Result<DichotomyClassification> {
    if window == 0 || window > traj.horizon {
        return Err(Error::contract(format!(
            "window must lie in [1, horizon = {}], got {window}",
            traj.horizon
        )));
    }
    if !(epsilon_conv > 0.0 && r_div > 0.0) {
        return Err(Error::contract("epsilon_conv and R_div must be positive"));
    }
    let last = traj.last();
    let k_start = last.k.saturating_sub(window - 1);
    let norms: Vec<f64> = traj
        .steps
        .iter()
        .filter(|s| s.k >= k_start)
        .map(|s| norm_of(&s.theta))
        .collect();
    let min_norm = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max_norm = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max_norm - min_norm;
    let verdict = if matches!(traj.termination, Termination::DomainExit { .. }) {
        DichotomyVerdict::Undecided
    } else if range < epsilon_conv && max_norm < r_div {
        DichotomyVerdict::ConvergedLike
    } else if min_norm > r_div {
        DichotomyVerdict::DivergingLike
    } else {
        DichotomyVerdict::Undecided
    };
    Ok(DichotomyClassification {
        verdict,
        window_length: window,
        epsilon_conv,
        r_div,
        evidence: WindowEvidence {
            k_start,
            k_end: last.k,
            n_recorded: norms.len(),
            range,
            min_norm,
            max_norm,
        },
    })
}
