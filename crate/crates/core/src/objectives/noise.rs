use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Objective, ObjectiveKind};
use crate::engine::{norm_of, norm_sq};
use crate::{Error, Result};

/// Expected-smoothness constants `(C1, C2, C3)`:
/// `E‖ḟ‖² ≤ C1 + C2·(F − F_lb) + C3·‖Ḟ‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Noise added to the exact gradient. Every variant has zero mean, so the
/// stochastic gradient is unbiased by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    Zero,
    /// `ḟ = Ḟ(θ) + σ·Z`, `Z ~ N(0, I)`.
    AdditiveGaussian { sigma: f64 },
    /// `ḟ = Ḟ(θ) + ‖θ‖₂·X·u`, `X` a fair ±1 sign and `u` a fixed unit vector
    /// (first basis vector when `direction` is absent).
    RademacherRadial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// `ḟ = Ḟ(θ) + σ(θ)·Z` with `σ(θ) = sigma0 + sigma1·‖θ‖₂`.
    AdditiveGaussianStatedep { sigma0: f64, sigma1: f64 },
}

impl NoiseModel {
    pub fn id(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::AdditiveGaussian { sigma } => format!("additive-gaussian(sigma={sigma})"),
            Self::RademacherRadial { direction: None } => "rademacher-radial".into(),
            Self::RademacherRadial { direction: Some(u) } => {
                format!("rademacher-radial(u={u:?})")
            }
            Self::AdditiveGaussianStatedep { sigma0, sigma1 } => {
                format!("additive-gaussian-statedep(sigma0={sigma0},sigma1={sigma1})")
            }
        }
    }

    /// Checks parameters against the problem dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::AdditiveGaussian { sigma } if sigma.is_finite() && *sigma >= 0.0 => Ok(()),
            Self::AdditiveGaussian { .. } => Err(Error::contract("sigma must be finite and ≥ 0")),
            Self::RademacherRadial { direction: None } => Ok(()),
            Self::RademacherRadial { direction: Some(u) } => {
                if u.len() != dim {
                    return Err(Error::contract("noise direction has the wrong dimension"));
                }
                if (norm_of(u) - 1.0).abs() > 1e-12 {
                    return Err(Error::contract("noise direction must be a unit vector"));
                }
                Ok(())
            }
            Self::AdditiveGaussianStatedep { sigma0, sigma1 } => {
                if [sigma0, sigma1].iter().all(|s| s.is_finite() && **s >= 0.0) {
                    Ok(())
                } else {
                    Err(Error::contract("state-dependent sigma coefficients must be ≥ 0"))
                }
            }
        }
    }

    /// `out = grad + noise`, consuming draws from `rng` in a fixed order.
    pub(crate) fn perturb_into<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        grad: &[f64],
        out: &mut [f64],
        rng: &mut R,
    ) {
        out.copy_from_slice(grad);
        match self {
            Self::Zero => {}
            Self::AdditiveGaussian { sigma } => add_gaussian(*sigma, out, rng),
            Self::AdditiveGaussianStatedep { sigma0, sigma1 } => {
                add_gaussian(sigma0 + sigma1 * norm_of(theta), out, rng)
            }
            Self::RademacherRadial { direction } => {
                let x = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let scale = norm_of(theta) * x;
                match direction {
                    None => out[0] += scale,
                    Some(u) => {
                        for (o, ui) in out.iter_mut().zip(u) {
                            *o += scale * ui;
                        }
                    }
                }
            }
        }
    }

    /// `E‖ḟ(θ, X) − Ḟ(θ)‖²`, exact for every variant.
    pub fn noise_second_moment(&self, theta: &[f64]) -> f64 {
        let p = theta.len() as f64;
        match self {
            Self::Zero => 0.0,
            Self::AdditiveGaussian { sigma } => p * sigma * sigma,
            Self::RademacherRadial { .. } => norm_sq(theta),
            Self::AdditiveGaussianStatedep { sigma0, sigma1 } => {
                let s = sigma0 + sigma1 * norm_of(theta);
                p * s * s
            }
        }
    }

    /// Declared envelope `G(θ) = ‖Ḟ(θ)‖² + E‖ḟ − Ḟ‖²`. It equals the second moment
    /// exactly (the cross term has zero mean) and is continuous.
    pub fn envelope(&self, objective: &Objective, theta: &[f64]) -> Result<f64> {
        let grad = objective.gradient(theta)?;
        Ok(norm_sq(&grad) + self.noise_second_moment(theta))
    }

    /// Expected-smoothness constants implied by the model, when it has them.
    pub fn declared_smoothness(&self, objective: &Objective) -> Option<SmoothnessConstants> {
        let p = objective.dim as f64;
        let quadratic = objective.kind == ObjectiveKind::Quadratic;
        match self {
            Self::Zero => Some(SmoothnessConstants { c1: 0.0, c2: 0.0, c3: 1.0 }),
            Self::AdditiveGaussian { sigma } => Some(SmoothnessConstants {
                c1: p * sigma * sigma,
                c2: 0.0,
                c3: 1.0,
            }),
            // ‖θ‖² = 2(F − F_lb) on the quadratic
            Self::RademacherRadial { .. } if quadratic => {
                Some(SmoothnessConstants { c1: 0.0, c2: 2.0, c3: 1.0 })
            }
            // (a + b‖θ‖)² ≤ 2a² + 2b²‖θ‖²
            Self::AdditiveGaussianStatedep { sigma0, sigma1 } if quadratic => {
                Some(SmoothnessConstants {
                    c1: 2.0 * p * sigma0 * sigma0,
                    c2: 4.0 * p * sigma1 * sigma1,
                    c3: 1.0,
                })
            }
            Self::AdditiveGaussianStatedep { sigma0, sigma1 } if *sigma1 == 0.0 => Some(SmoothnessConstants {
                c1: p * sigma0 * sigma0,
                c2: 0.0,
                c3: 1.0,
            }),
            _ => None,
        }
    }
}

fn add_gaussian<R: Rng + ?Sized>(sigma: f64, out: &mut [f64], rng: &mut R) {
    for o in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *o += sigma * z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rademacher_draws_on_quadratic() {
        let obj = Objective::quadratic(1);
        let noise = NoiseModel::RademacherRadial { direction: None };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut fours, mut zeros) = (0, 0);
        let mut out = [0.0];
        for _ in 0..1000 {
            noise.perturb_into(&[2.0], &[2.0], &mut out, &mut rng);
            if out[0] == 4.0 {
                fours += 1;
            } else if out[0] == 0.0 {
                zeros += 1;
            } else {
                panic!("unexpected draw {}", out[0]);
            }
        }
        assert!(fours > 400 && zeros > 400);
        assert_eq!(noise.envelope(&obj, &[2.0]).unwrap(), 8.0);
    }

    #[test]
    fn zero_sigma_is_exact() {
        let noise = NoiseModel::AdditiveGaussian { sigma: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut out = [0.0; 2];
        noise.perturb_into(&[1.0, 2.0], &[0.25, -3.0], &mut out, &mut rng);
        assert_eq!(out, [0.25, -3.0]);
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::AdditiveGaussian { sigma: -1.0 }.validate(1).is_err());
        let bad_u = NoiseModel::RademacherRadial { direction: Some(vec![1.0, 1.0]) };
        assert!(bad_u.validate(2).is_err());
        let u = NoiseModel::RademacherRadial { direction: Some(vec![0.6, 0.8]) };
        assert!(u.validate(2).is_ok());
        assert!(u.validate(3).is_err());
    }

    #[test]
    fn serde_tags() {
        let n: NoiseModel = serde_json::from_str(r#"{"kind":"additive-gaussian","sigma":0.1}"#).unwrap();
        assert_eq!(n, NoiseModel::AdditiveGaussian { sigma: 0.1 });
        let n: NoiseModel = serde_json::from_str(r#"{"kind":"rademacher-radial"}"#).unwrap();
        assert_eq!(n, NoiseModel::RademacherRadial { direction: None });
    }
}
