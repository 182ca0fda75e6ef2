//! Falsifiable numerical checks of the regularity, noise and step-size conditions.
//!
//! Every check returns a report with a verdict, the worst violation found and a
//! witness that reproduces it. Sampled suprema are lower bounds of the true
//! suprema, so checks that need an upper bound take it as an explicit input.

mod descent;
mod eigen;
mod grad_bound;
mod holder;
mod radial;
mod smoothness;
mod variance;

use serde::{Deserialize, Serialize};

pub use crate::engine::Verdict;
pub use descent::check_descent_inequality;
pub use eigen::{find_eigenvalue_threshold, lemma4_margin};
pub use grad_bound::{check_grad_bound, grad_energy_bound};
pub use holder::{estimate_local_holder, grid_holder_sup, HolderEstimate, HolderMethod};
pub use radial::{a6_ratio, probe_radial_conditions, A5Trend, A6Verdict, RadialOptions, RadialProbe, RadialRecord};
pub use smoothness::check_expected_smoothness;
pub use variance::{check_variance_control, variance_chain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub assumption_id: String,
    pub verdict: Verdict,
    pub worst_violation: f64,
    /// Points achieving `worst_violation`; always present on failure.
    pub witness: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// `‖θ‖` lower bound over a box: the norm of the point of the box closest to the origin.
pub(crate) fn box_min_norm(b: &crate::sampling::SamplingBox) -> f64 {
    b.lower
        .iter()
        .zip(&b.upper)
        .map(|(l, u)| {
            let c = 0.0f64.clamp(*l, *u);
            c * c
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_box_in_domain(
    obj: &crate::objectives::Objective,
    b: &crate::sampling::SamplingBox,
) -> crate::Result<()> {
    if b.dim() != obj.dim {
        return Err(crate::Error::contract("box and objective dimensions differ"));
    }
    if obj.r0 > 0.0 && box_min_norm(b) < obj.r0 {
        let closest: Vec<f64> = b
            .lower
            .iter()
            .zip(&b.upper)
            .map(|(l, u)| 0.0f64.clamp(*l, *u))
            .collect();
        return Err(crate::Error::Domain {
            theta: closest,
            min_radius: obj.r0,
        });
    }
    Ok(())
}
