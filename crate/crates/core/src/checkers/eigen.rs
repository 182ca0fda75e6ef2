use super::holder::check_alpha;
use crate::engine::Schedule;
use crate::{Error, Result};

/// `λ_min − (C/2)·λ_max^{1+α} − ½·λ_min` at step `k`; nonnegative once the step
/// sizes are small enough for the descent step to dominate.
pub fn lemma4_margin(schedule: &Schedule, k: u64, c: f64, alpha: f64) -> f64 {
    let (lo, hi) = (schedule.lambda_min(k), schedule.lambda_max(k));
    lo - 0.5 * c * hi.powf(1.0 + alpha) - 0.5 * lo
}

/// Smallest `K ≤ k_max` with `λ_max(M_k)^α·κ(M_k) ≤ 1/C` for every `k ∈ [K, k_max]`.
pub fn find_eigenvalue_threshold(schedule: &Schedule, c: f64, alpha: f64, k_max: u64) -> Result<Option<u64>> {
    check_alpha(alpha)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::contract("C must be positive"));
    }
    if k_max < 1 {
        return Err(Error::contract("K_max must be at least 1"));
    }
    let limit = 1.0 / c;
    let holds = |k: u64| {
        let (lo, hi) = (schedule.lambda_min(k), schedule.lambda_max(k));
        hi.powf(alpha) * (hi / lo) <= limit
    };
    let mut k = k_max;
    loop {
        if !holds(k) {
            return Ok((k < k_max).then_some(k + 1));
        }
        if k == 0 {
            return Ok(Some(0));
        }
        k -= 1;
    }
}
