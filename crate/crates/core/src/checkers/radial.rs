use serde::{Deserialize, Serialize};

use super::holder::{check_alpha, estimate_local_holder};
use crate::engine::{norm_of, norm_sq, ParameterVector};
use crate::objectives::Objective;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A5Trend {
    IncreasingUnbounded,
    Bounded,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A6Verdict {
    SatisfiedAtHorizon,
    ViolatedAtHorizon,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialRecord {
    pub radius: f64,
    pub f_value: f64,
    pub grad_norm_sq: f64,
    #[serde(rename = "L_r")]
    pub l_r: f64,
    #[serde(rename = "G_value")]
    pub g_value: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProbe {
    pub radii: Vec<f64>,
    pub direction: Vec<f64>,
    pub records: Vec<RadialRecord>,
    pub alpha: f64,
    pub r: f64,
    pub b_threshold: f64,
    pub a5_trend: A5Trend,
    pub a6_verdict: A6Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialOptions {
    /// Probe direction; normalized before use. Defaults to the first axis.
    pub direction: Option<Vec<f64>>,
    pub holder_samples: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            direction: None,
            holder_samples: 64,
        }
    }
}

/// Number of largest radii that decide the A6 verdict.
const TAIL: usize = 3;

/// `‖Ḟ‖² / ([L_r + 1{L_r = 0}]·[G^{(1+α)/2} + 1{G = 0}])`.
pub fn a6_ratio(grad_norm_sq: f64, l_r: f64, g_value: f64, alpha: f64) -> f64 {
    let l = if l_r == 0.0 { 1.0 } else { l_r };
    let g = if g_value == 0.0 { 1.0 } else { g_value.powf((1.0 + alpha) / 2.0) };
    grad_norm_sq / (l * g)
}

/// Evaluates the gradient-to-envelope ratio along a ray and classifies its behavior
/// at the largest probed radii.
pub fn probe_radial_conditions<G>(
    obj: &Objective,
    g_fn: G,
    alpha: f64,
    r: f64,
    radii: &[f64],
    b_threshold: f64,
    options: &RadialOptions,
) -> Result<RadialProbe>
where
    G: Fn(&[f64]) -> Result<f64>,
{
    check_alpha(alpha)?;
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) || radii.iter().any(|r| r.is_nan()) {
        return Err(Error::contract("radii must be nonempty and strictly increasing"));
    }
    if !(b_threshold > 0.0 && b_threshold.is_finite()) {
        return Err(Error::contract("b_threshold must be positive"));
    }
    let mut direction = options.direction.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; obj.dim];
        e[0] = 1.0;
        e
    });
    if direction.len() != obj.dim {
        return Err(Error::contract("direction and objective dimensions differ"));
    }
    let n = norm_of(&direction);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::contract("direction must be nonzero"));
    }
    direction.iter_mut().for_each(|x| *x /= n);

    let mut records = Vec::with_capacity(radii.len());
    for &rho in radii {
        let phi: Vec<f64> = direction.iter().map(|u| rho * u).collect();
        let pv = ParameterVector::new(phi.clone())?;
        let (f_value, grad) = obj.value_and_gradient(&phi)?;
        let grad_norm_sq = norm_sq(&grad);
        let l_r = estimate_local_holder(obj, &pv, r, alpha, options.holder_samples)?.value;
        let g_value = g_fn(&phi)?;
        if !(g_value >= 0.0 && g_value.is_finite()) {
            return Err(Error::contract(format!("G must be finite and nonnegative, got {g_value} at radius {rho}")));
        }
        records.push(RadialRecord {
            radius: rho,
            f_value,
            grad_norm_sq,
            l_r,
            g_value,
            ratio: a6_ratio(grad_norm_sq, l_r, g_value, alpha),
        });
    }
    Ok(RadialProbe {
        radii: radii.to_vec(),
        direction,
        a5_trend: classify_trend(&records),
        a6_verdict: classify_tail(&records, b_threshold),
        records,
        alpha,
        r,
        b_threshold,
    })
}

fn classify_trend(records: &[RadialRecord]) -> A5Trend {
    let f: Vec<f64> = records.iter().map(|r| r.f_value).collect();
    if f.len() >= 2 && f.windows(2).all(|w| w[1] > w[0]) {
        A5Trend::IncreasingUnbounded
    } else if f.len() >= 2 && f.windows(2).all(|w| w[1] <= w[0]) && f[f.len() - 1] < f[0] {
        A5Trend::Decreasing
    } else {
        A5Trend::Bounded
    }
}

fn classify_tail(records: &[RadialRecord], b: f64) -> A6Verdict {
    let tail = &records[records.len().saturating_sub(TAIL)..];
    if tail.iter().all(|r| r.ratio >= b) {
        A6Verdict::SatisfiedAtHorizon
    } else if tail.iter().all(|r| r.ratio < b) && tail.windows(2).all(|w| w[1].ratio <= w[0].ratio) {
        A6Verdict::ViolatedAtHorizon
    } else {
        A6Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rademacher_envelope(obj: Objective) -> impl Fn(&[f64]) -> Result<f64> {
        move |t: &[f64]| Ok(norm_sq(&obj.gradient(t)?) + norm_sq(t))
    }

    #[test]
    fn quadratic_ratio_is_half() {
        let obj = Objective::quadratic(1);
        let radii = [10.0, 100.0, 1e3, 1e4];
        let p = probe_radial_conditions(&obj, rademacher_envelope(obj), 1.0, 1.0, &radii, 0.25, &RadialOptions::default()).unwrap();
        for rec in &p.records {
            assert!((rec.ratio - 0.5).abs() < 1e-12);
        }
        assert_eq!(p.a6_verdict, A6Verdict::SatisfiedAtHorizon);
        assert_eq!(p.a5_trend, A5Trend::IncreasingUnbounded);
    }

    #[test]
    fn loglog_ratio_vanishes() {
        let obj = Objective::loglog1p_abs(1);
        let radii = [1e2, 1e3, 1e4, 1e5, 1e6];
        let p = probe_radial_conditions(&obj, rademacher_envelope(obj), 1.0, 1.0, &radii, 0.25, &RadialOptions::default()).unwrap();
        assert_eq!(p.a6_verdict, A6Verdict::ViolatedAtHorizon);
        assert_eq!(p.a5_trend, A5Trend::IncreasingUnbounded);
        for rec in &p.records {
            assert_eq!(rec.ratio, a6_ratio(rec.grad_norm_sq, rec.l_r, rec.g_value, 1.0));
        }
    }

    #[test]
    fn gauss_bump_decreases() {
        let obj = Objective::gauss_bump(2);
        let p = probe_radial_conditions(&obj, |_: &[f64]| Ok(1.0), 1.0, 0.5, &[1.0, 2.0, 3.0, 4.0], 0.1, &RadialOptions::default()).unwrap();
        assert_eq!(p.a5_trend, A5Trend::Decreasing);
    }

    #[test]
    fn indicator_guards() {
        assert_eq!(a6_ratio(2.0, 0.0, 0.0, 1.0), 2.0);
        assert_eq!(a6_ratio(2.0, 2.0, 4.0, 1.0), 0.25);
    }

    #[test]
    fn bad_inputs() {
        let obj = Objective::loglog1p_abs(1);
        let g = |_: &[f64]| Ok(1.0);
        let o = RadialOptions::default();
        assert!(probe_radial_conditions(&obj, g, 1.0, 1.0, &[3.0, 2.0], 0.1, &o).is_err());
        assert!(matches!(probe_radial_conditions(&obj, g, 1.0, 1.0, &[1.5, 3.0], 0.1, &o), Err(Error::Domain { .. })));
        assert!(probe_radial_conditions(&obj, g, 1.0, 1.0, &[3.0], 0.0, &o).is_err());
    }
}
