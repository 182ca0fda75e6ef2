use serde::{Deserialize, Serialize};

use crate::engine::Trajectory;
use crate::{Error, Result};

/// `τ_0 = 0`, `τ_k = min{j > τ_{k−1} : F(θ_j) > F(θ_{τ_{k−1}}) + 1}` over a finite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingTimes {
    pub taus: Vec<u64>,
    /// True iff the final step is itself a stopping time, so no crossing is pending.
    pub complete: bool,
    /// `τ_k ≥ k` for every recorded `k`.
    pub tau_geq_k: bool,
}

impl StoppingTimes {
    pub fn count_beyond_origin(&self) -> usize {
        self.taus.len() - 1
    }
}

/// Stopping times of a full-resolution trajectory.
pub fn compute_stopping_times(traj: &Trajectory) -> Result<StoppingTimes> {
    if traj.record_stride != 1 || traj.steps.iter().enumerate().any(|(i, s)| s.k != i as u64) {
        return Err(Error::contract("stopping times need every step recorded (record_stride = 1)"));
    }
    let f: Vec<f64> = traj.steps.iter().map(|s| s.f_value).collect();
    stopping_times_of_values(&f)
}

pub fn stopping_times_of_values(f: &[f64]) -> Result<StoppingTimes> {
    if f.is_empty() {
        return Err(Error::contract("need at least F(θ_0)"));
    }
    let mut taus = vec![0u64];
    let mut level = f[0] + 1.0;
    for (j, &v) in f.iter().enumerate().skip(1) {
        if v > level {
            taus.push(j as u64);
            level = v + 1.0;
        }
    }
    let complete = *taus.last().unwrap() == (f.len() - 1) as u64 && taus.len() > 1;
    let tau_geq_k = taus.iter().enumerate().all(|(k, &t)| t >= k as u64);
    Ok(StoppingTimes {
        taus,
        complete,
        tau_geq_k,
    })
}
