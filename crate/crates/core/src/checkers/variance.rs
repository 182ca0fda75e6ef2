use super::holder::check_alpha;
use super::{AssumptionReport, Verdict};
use crate::{Error, Result};

pub const VARIANCE_TOL: f64 = 1e-12;

/// `[mean(s^{1+α}), mean(s²)^{(1+α)/2}, ((1+α)/2)·mean(s²) + (1−α)/2]`.
pub fn variance_chain(samples: &[f64], alpha: f64) -> Result<[f64; 3]> {
    check_alpha(alpha)?;
    if samples.is_empty() {
        return Err(Error::contract("samples must be nonempty"));
    }
    if let Some(bad) = samples.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::contract(format!("samples must be finite and nonnegative, got {bad}")));
    }
    let n = samples.len() as f64;
    let mean_pow = samples.iter().map(|s| s.powf(1.0 + alpha)).sum::<f64>() / n;
    let mean_sq = samples.iter().map(|s| s * s).sum::<f64>() / n;
    let jensen = mean_sq.powf((1.0 + alpha) / 2.0);
    let young = (1.0 + alpha) / 2.0 * mean_sq + (1.0 - alpha) / 2.0;
    Ok([mean_pow, jensen, young])
}

/// Checks both links of the moment chain; the witness is the chain itself.
pub fn check_variance_control(samples: &[f64], alpha: f64) -> Result<AssumptionReport> {
    let chain = variance_chain(samples, alpha)?;
    let excess = |lhs: f64, rhs: f64| (lhs - rhs) / rhs.abs().max(1.0);
    let worst = excess(chain[0], chain[1]).max(excess(chain[1], chain[2]));
    let verdict = if worst <= VARIANCE_TOL { Verdict::Pass } else { Verdict::Fail };
    Ok(AssumptionReport {
        assumption_id: "variance-control".into(),
        verdict,
        worst_violation: worst,
        witness: vec![chain.to_vec()],
        tolerance: VARIANCE_TOL,
    })
}
