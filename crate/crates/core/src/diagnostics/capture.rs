use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ensemble::Ensemble;
use crate::engine::{dist, ParameterVector};
use crate::objectives::StochasticOracle;
use crate::sampling::ball_points;
use crate::{Error, Result};

/// Points used to maximize the declared envelope over the capture ball.
pub const G_R_POINTS: usize = 4096;

/// Binomial standard errors allowed above the theoretical tail at each step.
const ESCAPE_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureRow {
    pub k: u64,
    pub escapes: u64,
    pub empirical: f64,
    pub theoretical_tail: f64,
    /// `sqrt(p(1 − p)/n)` at `p = min(theoretical_tail, 1)`.
    pub binomial_sigma: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureReport {
    pub theta_bar: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
    pub epsilon: f64,
    #[serde(rename = "G_R")]
    pub g_r: f64,
    pub n_trajectories: usize,
    #[serde(rename = "K")]
    pub horizon: u64,
    /// Step `k` to the number of trajectories escaping between `k` and `k + 1`; zero counts omitted.
    pub escape_counts: BTreeMap<u64, u64>,
    /// Recorded checkpoints and every step with an escape.
    pub rows: Vec<CaptureRow>,
    pub empirical_sum: f64,
    pub theoretical_sum: f64,
    /// Steps where the empirical frequency exceeds the tail plus the binomial margin.
    pub bound_violations: Vec<u64>,
}

impl CaptureReport {
    pub fn total_escapes_from(&self, k_min: u64) -> u64 {
        self.escape_counts.range(k_min..).map(|(_, c)| c).sum()
    }

    pub fn within_bound(&self) -> bool {
        self.bound_violations.is_empty()
    }
}

/// `sup_{‖θ − θ̄‖ ≤ R} G(θ)` over boundary axis points, the point of the sphere farthest
/// from the origin, and quasi-uniform interior points. Points outside the objective's
/// domain are skipped.
pub fn envelope_sup_over_ball(
    oracle: &StochasticOracle,
    theta_bar: &ParameterVector,
    radius: f64,
    n_points: usize,
) -> Result<f64> {
    let center = theta_bar.as_slice();
    let mut pts = ball_points(center, radius, n_points.max(2 * center.len()));
    let n = theta_bar.norm();
    if n > 0.0 {
        pts.push(center.iter().map(|c| c + radius * c / n).collect());
    }
    let obj = oracle.objective();
    let mut best = f64::NEG_INFINITY;
    for p in pts.iter().filter(|p| obj.in_domain(p)) {
        best = best.max(oracle.envelope(p)?);
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Domain {
            theta: center.to_vec(),
            min_radius: obj.r0,
        });
    }
    Ok(best)
}

/// Per-step escape frequencies against the Markov tail `ε⁻²‖M_k‖²G_R`.
///
/// Uses the ensemble's online escape log when it was recorded for the same ball,
/// otherwise needs full-resolution trajectories.
pub fn capture_escape_frequency(
    ensemble: &Ensemble,
    theta_bar: &ParameterVector,
    radius: f64,
    epsilon: f64,
) -> Result<CaptureReport> {
    if !(radius > 0.0 && epsilon > 0.0) {
        return Err(Error::contract("R and epsilon must be positive"));
    }
    let spec = &ensemble.spec;
    let per_trajectory: Vec<Vec<u64>> = match &ensemble.escapes {
        Some(log)
            if log.capture.theta_bar == *theta_bar && log.capture.radius == radius && log.capture.epsilon == epsilon =>
        {
            log.per_trajectory.clone()
        }
        _ if spec.record_stride == 1 => ensemble
            .trajectories
            .iter()
            .map(|t| {
                let d: Vec<f64> = t.steps.iter().map(|s| dist(&s.theta, theta_bar.as_slice())).collect();
                (0..d.len().saturating_sub(1))
                    .filter(|&k| d[k] <= radius && d[k + 1] >= radius + epsilon)
                    .map(|k| k as u64)
                    .collect()
            })
            .collect(),
        _ => {
            return Err(Error::contract(
                "escape frequencies need an online escape log for this ball or record_stride = 1",
            ))
        }
    };

    let g_r = envelope_sup_over_ball(&spec.oracle, theta_bar, radius, G_R_POINTS)?;
    let n = spec.n_trajectories as f64;
    let tail = |k: u64| spec.schedule.lambda_max(k).powi(2) * g_r / (epsilon * epsilon);

    let mut escape_counts = BTreeMap::new();
    for k in per_trajectory.iter().flatten() {
        *escape_counts.entry(*k).or_insert(0u64) += 1;
    }
    let row = |k: u64| {
        let escapes = escape_counts.get(&k).copied().unwrap_or(0);
        let empirical = escapes as f64 / n;
        let theoretical_tail = tail(k);
        let p = theoretical_tail.min(1.0);
        let binomial_sigma = (p * (1.0 - p) / n).sqrt();
        CaptureRow {
            k,
            escapes,
            empirical,
            theoretical_tail,
            binomial_sigma,
            within_bound: empirical <= theoretical_tail + ESCAPE_SIGMAS * binomial_sigma,
        }
    };
    let mut ks: Vec<u64> = (0..spec.horizon).step_by(spec.record_stride as usize).collect();
    ks.extend(escape_counts.keys());
    ks.sort_unstable();
    ks.dedup();
    let rows: Vec<CaptureRow> = ks.into_iter().map(row).collect();
    let bound_violations = rows.iter().filter(|r| !r.within_bound).map(|r| r.k).collect();
    let empirical_sum = escape_counts.values().sum::<u64>() as f64 / n;
    let theoretical_sum = (0..spec.horizon).map(tail).sum();
    Ok(CaptureReport {
        theta_bar: theta_bar.as_slice().to_vec(),
        radius,
        epsilon,
        g_r,
        n_trajectories: spec.n_trajectories,
        horizon: spec.horizon,
        escape_counts,
        rows,
        empirical_sum,
        theoretical_sum,
        bound_violations,
    })
}
