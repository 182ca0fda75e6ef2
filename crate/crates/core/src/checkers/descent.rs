use rand::Rng;

use super::holder::check_alpha;
use super::{check_box_in_domain, AssumptionReport, Verdict};
use crate::engine::{dist, dot};
use crate::objectives::Objective;
use crate::sampling::SamplingBox;
use crate::{Error, Result};

pub const DESCENT_TOL: f64 = 1e-9;

/// Excess of `F(θ)` over the Hölder upper model built at `φ`; nonpositive when the bound holds.
pub fn descent_gap(obj: &Objective, theta: &[f64], phi: &[f64], l_tilde: f64, alpha: f64) -> Result<f64> {
    let (f_theta, _) = obj.value_and_gradient(theta)?;
    let (f_phi, g_phi) = obj.value_and_gradient(phi)?;
    let step: Vec<f64> = theta.iter().zip(phi).map(|(t, p)| t - p).collect();
    Ok(f_theta - f_phi - dot(&g_phi, &step) - l_tilde / (1.0 + alpha) * dist(theta, phi).powf(1.0 + alpha))
}

/// Samples `n_pairs` uniform pairs in `b` and checks the Hölder descent inequality
/// with constant `l_tilde` on each.
pub fn check_descent_inequality<R: Rng + ?Sized>(
    obj: &Objective,
    n_pairs: usize,
    l_tilde: f64,
    alpha: f64,
    b: &SamplingBox,
    rng: &mut R,
) -> Result<AssumptionReport> {
    check_alpha(alpha)?;
    if !(l_tilde.is_finite() && l_tilde > 0.0) {
        return Err(Error::contract("L_tilde must be positive"));
    }
    if n_pairs == 0 {
        return Err(Error::contract("need at least one pair"));
    }
    check_box_in_domain(obj, b)?;
    let mut worst = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    for _ in 0..n_pairs {
        let theta = b.sample(rng);
        let phi = b.sample(rng);
        let gap = descent_gap(obj, &theta, &phi, l_tilde, alpha)?;
        if gap > worst {
            worst = gap;
            witness = vec![theta, phi];
        }
    }
    let verdict = if worst <= DESCENT_TOL { Verdict::Pass } else { Verdict::Fail };
    Ok(AssumptionReport {
        assumption_id: "holder-descent-inequality".into(),
        verdict,
        worst_violation: worst,
        witness,
        tolerance: DESCENT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_identity_and_understated_constant() {
        let obj = Objective::quadratic(2);
        let b = SamplingBox::cube(2, -10.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ok = check_descent_inequality(&obj, 500, 1.0, 1.0, &b, &mut rng).unwrap();
        assert_eq!(ok.verdict, Verdict::Pass);
        assert!(ok.worst_violation.abs() <= 1e-12 * 400.0);

        let bad = check_descent_inequality(&obj, 500, 0.9, 1.0, &b, &mut rng).unwrap();
        assert_eq!(bad.verdict, Verdict::Fail);
        let (t, p) = (&bad.witness[0], &bad.witness[1]);
        let again = descent_gap(&obj, t, p, 0.9, 1.0).unwrap();
        assert_eq!(again, bad.worst_violation);
        let expected = 0.05 * dist(t, p).powi(2);
        assert!((again - expected).abs() < 1e-9);
    }

    #[test]
    fn rectifier_with_quarter() {
        let obj = Objective::smooth_rectifier(1);
        let b = SamplingBox::cube(1, -10.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = check_descent_inequality(&obj, 5000, 0.25, 1.0, &b, &mut rng).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn box_outside_domain_is_rejected() {
        let obj = Objective::loglog1p_abs(1);
        let b = SamplingBox::cube(1, -5.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            check_descent_inequality(&obj, 10, 1.0, 1.0, &b, &mut rng),
            Err(Error::Domain { .. })
        ));
    }
}
