use serde::{Deserialize, Serialize};

use crate::engine::{dist, norm_of, ParameterVector};
use crate::objectives::Objective;
use crate::sampling::{ball_points, SamplingBox};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderMethod {
    PairSampling,
    Grid,
}

/// Sampled local Hölder constant
/// `L_r(φ) = sup_{‖φ′−φ‖≤r} ‖Ḟ(φ′) − Ḟ(φ)‖ / ‖φ′ − φ‖^α`.
///
/// `value` is a maximum over finitely many points, hence a lower bound of the supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub center: ParameterVector,
    pub radius: f64,
    pub alpha: f64,
    pub value: f64,
    pub n_samples: usize,
    pub method: HolderMethod,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::contract(format!("alpha must lie in (0,1], got {alpha}")))
    }
}

pub fn estimate_local_holder(
    obj: &Objective,
    phi: &ParameterVector,
    r: f64,
    alpha: f64,
    n_samples: usize,
) -> Result<HolderEstimate> {
    check_alpha(alpha)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::contract("radius must be positive"));
    }
    if n_samples < 2 {
        return Err(Error::contract("need at least 2 samples"));
    }
    if phi.dim() != obj.dim {
        return Err(Error::contract("center and objective dimensions differ"));
    }
    if obj.r0 > 0.0 && phi.norm() - r < obj.r0 {
        return Err(Error::Domain {
            theta: phi.as_slice().to_vec(),
            min_radius: obj.r0,
        });
    }
    let center = phi.as_slice();
    let g0 = obj.gradient(center)?;
    let mut g = vec![0.0; obj.dim];
    let mut value = 0.0f64;
    for pt in ball_points(center, r, n_samples) {
        let d = dist(&pt, center);
        if d == 0.0 {
            continue;
        }
        obj.eval_into(&pt, &mut g)?;
        let ratio = dist(&g, &g0) / d.powf(alpha);
        value = value.max(ratio);
    }
    Ok(HolderEstimate {
        center: phi.clone(),
        radius: r,
        alpha,
        value,
        n_samples,
        method: HolderMethod::PairSampling,
    })
}

/// Maximum Hölder ratio over all pairs of a tensor grid of about `n` points in `b`.
///
/// A grid-based lower estimate of the global Hölder constant on the box; checkers that
/// need an upper bound use a multiple of it.
pub fn grid_holder_sup(obj: &Objective, b: &SamplingBox, alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    super::check_box_in_domain(obj, b)?;
    let pts = b.grid(n);
    let grads = pts
        .iter()
        .map(|p| obj.gradient(p))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = dist(&pts[i], &pts[j]);
            if d > 0.0 {
                best = best.max(dist(&grads[i], &grads[j]) / d.powf(alpha));
            }
        }
    }
    debug_assert!(norm_of(&[best]).is_finite());
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn quadratic_is_exactly_one() {
        let obj = Objective::quadratic(3);
        for (phi, r) in [(vec![0.0, 0.0, 0.0], 1.0), (vec![1e3, -7.0, 0.25], 0.01), (vec![-2.0, 5.0, 9.0], 40.0)] {
            let est = estimate_local_holder(&obj, &pv(&phi), r, 1.0, 200).unwrap();
            assert_eq!(est.value, 1.0);
        }
    }

    #[test]
    fn rectifier_boundary_secant() {
        // with only the two boundary points, the ratio is the secant slope (σ(0.5) − ½)/0.5
        let obj = Objective::smooth_rectifier(1);
        let est = estimate_local_holder(&obj, &pv(&[0.0]), 0.5, 1.0, 2).unwrap();
        let secant = (1.0 / (1.0 + (-0.5f64).exp()) - 0.5) / 0.5;
        assert!((est.value - secant).abs() < 1e-15);
        assert!((est.value - 0.2449).abs() < 1e-4);
    }

    #[test]
    fn domain_and_contract_errors() {
        let obj = Objective::loglog1p_abs(1);
        assert!(matches!(
            estimate_local_holder(&obj, &pv(&[1.5]), 1.0, 1.0, 10),
            Err(Error::Domain { .. })
        ));
        assert!(estimate_local_holder(&obj, &pv(&[3.0]), 1.0, 1.0, 10).is_ok());
        assert!(estimate_local_holder(&obj, &pv(&[3.0]), 0.0, 1.0, 10).is_err());
        assert!(estimate_local_holder(&obj, &pv(&[3.0]), 1.0, 1.0, 1).is_err());
        assert!(estimate_local_holder(&obj, &pv(&[3.0]), 1.0, 1.5, 10).is_err());
    }

    #[test]
    fn grid_sup_of_quadratic() {
        let obj = Objective::quadratic(2);
        let b = SamplingBox::cube(2, -1.0, 1.0).unwrap();
        let l = grid_holder_sup(&obj, &b, 1.0, 100).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }
}
