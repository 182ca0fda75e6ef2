use super::holder::check_alpha;
use super::{check_box_in_domain, AssumptionReport, Verdict};
use crate::objectives::Objective;
use crate::sampling::SamplingBox;
use crate::{Error, Result};

pub const GRAD_BOUND_RTOL: f64 = 1e-9;

/// `(L^{1/α}(1+α)/α · gap)^{2α/(1+α)}` with `gap = F − F_lb`.
pub fn grad_energy_bound(l: f64, alpha: f64, gap: f64) -> f64 {
    (l.powf(1.0 / alpha) * (1.0 + alpha) / alpha * gap.max(0.0)).powf(2.0 * alpha / (1.0 + alpha))
}

/// Checks `‖Ḟ‖² ≤ grad_energy_bound(L, α, F − F_lb)` on a grid of about `n_points` points of `b`.
///
/// `l = None` falls back to the objective's global constant; without either the
/// verdict is inconclusive.
pub fn check_grad_bound(
    obj: &Objective,
    l: Option<f64>,
    alpha: f64,
    n_points: usize,
    b: &SamplingBox,
) -> Result<AssumptionReport> {
    check_alpha(alpha)?;
    if n_points == 0 {
        return Err(Error::contract("need at least one point"));
    }
    check_box_in_domain(obj, b)?;
    let Some(l) = l.or(obj.l_global()) else {
        return Ok(AssumptionReport {
            assumption_id: "gradient-energy-bound".into(),
            verdict: Verdict::Inconclusive,
            worst_violation: f64::NAN,
            witness: Vec::new(),
            tolerance: GRAD_BOUND_RTOL,
        });
    };
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::contract("L must be positive"));
    }
    let f_lb = obj.f_lb();
    let mut worst = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    let mut failed = false;
    for pt in b.grid(n_points) {
        let (f, g) = obj.value_and_gradient(&pt)?;
        let lhs: f64 = g.iter().map(|x| x * x).sum();
        let rhs = grad_energy_bound(l, alpha, f - f_lb);
        let excess = lhs - rhs;
        let violated = excess > GRAD_BOUND_RTOL * rhs;
        if violated && !failed || (violated == failed && excess > worst) {
            worst = excess;
            witness = vec![pt];
            failed |= violated;
        }
    }
    Ok(AssumptionReport {
        assumption_id: "gradient-energy-bound".into(),
        verdict: if failed { Verdict::Fail } else { Verdict::Pass },
        worst_violation: worst,
        witness,
        tolerance: GRAD_BOUND_RTOL,
    })
}
