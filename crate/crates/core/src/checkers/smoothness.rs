use rand::Rng;

use super::{check_box_in_domain, AssumptionReport, Verdict};
use crate::engine::norm_sq;
use crate::objectives::{SmoothnessConstants, StochasticOracle};
use crate::sampling::SamplingBox;
use crate::{Error, Result};

/// Statistical margin in standard errors of the empirical second moment.
pub const SMOOTHNESS_SIGMAS: f64 = 4.0;

/// Checks `E‖ḟ(θ)‖² ≤ C1 + C2(F(θ) − F_lb) + C3‖Ḟ(θ)‖²` at `n_points` Halton points of `b`,
/// estimating the left side from `n_draws` oracle draws per point.
///
/// `worst_violation` is the largest `mean − bound` and the reported `tolerance`
/// is the number of standard errors allowed above the bound.
pub fn check_expected_smoothness<R: Rng + ?Sized>(
    oracle: &StochasticOracle,
    constants: SmoothnessConstants,
    n_points: usize,
    n_draws: usize,
    b: &SamplingBox,
    rng: &mut R,
) -> Result<AssumptionReport> {
    let SmoothnessConstants { c1, c2, c3 } = constants;
    if !(c1 >= 0.0 && c2 >= 0.0 && c3 >= 1.0) || ![c1, c2, c3].iter().all(|c| c.is_finite()) {
        return Err(Error::contract("need C1, C2 >= 0 and C3 >= 1"));
    }
    if n_points == 0 || n_draws < 2 {
        return Err(Error::contract("need at least one point and two draws"));
    }
    let obj = oracle.objective();
    check_box_in_domain(obj, b)?;
    let f_lb = obj.f_lb();
    let mut draw = vec![0.0; obj.dim];
    let mut worst = f64::NEG_INFINITY;
    let mut worst_margin_excess = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    let mut failed = false;
    for pt in b.halton(n_points) {
        let (f, grad) = obj.value_and_gradient(&pt)?;
        let bound = c1 + c2 * (f - f_lb) + c3 * norm_sq(&grad);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n_draws {
            oracle.sample_with_gradient_into(&pt, &grad, &mut draw, rng);
            let s = norm_sq(&draw);
            sum += s;
            sum_sq += s * s;
        }
        let n = n_draws as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let margin = SMOOTHNESS_SIGMAS * (var / n).sqrt() + 1e-12 * bound.abs().max(1.0);
        let excess = mean - bound;
        let violated = excess > margin;
        // failing points outrank passing ones; within a class keep the largest excess
        let key = excess - margin;
        if (violated && !failed) || (violated == failed && key > worst_margin_excess) {
            worst_margin_excess = key;
            worst = excess;
            witness = vec![pt];
            failed |= violated;
        }
    }
    Ok(AssumptionReport {
        assumption_id: "expected-smoothness".into(),
        verdict: if failed { Verdict::Fail } else { Verdict::Pass },
        worst_violation: worst,
        witness,
        tolerance: SMOOTHNESS_SIGMAS,
    })
}
