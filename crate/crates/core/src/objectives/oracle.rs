use rand::Rng;

use super::{NoiseModel, Objective};
use crate::engine::ParameterVector;
use crate::{Error, Result};

/// Stochastic gradient oracle `ḟ(θ, X)` for an objective and a noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOracle {
    objective: Objective,
    noise: NoiseModel,
}

impl StochasticOracle {
    pub fn new(objective: Objective, noise: NoiseModel) -> Result<Self> {
        noise.validate(objective.dim)?;
        Ok(Self { objective, noise })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn dim(&self) -> usize {
        self.objective.dim
    }

    pub fn id(&self) -> String {
        format!("{}+{}", self.objective.id(), self.noise.id())
    }

    /// One draw of `ḟ(θ, X)`.
    pub fn sample<R: Rng + ?Sized>(&self, theta: &ParameterVector, rng: &mut R) -> Result<ParameterVector> {
        if theta.dim() != self.dim() {
            return Err(Error::contract("oracle and point dimensions differ"));
        }
        let grad = self.objective.gradient(theta.as_slice())?;
        let mut out = vec![0.0; grad.len()];
        self.noise.perturb_into(theta.as_slice(), &grad, &mut out, rng);
        Ok(ParameterVector::from_vec_unchecked(out))
    }

    /// Draw given a precomputed `Ḟ(θ)`.
    pub(crate) fn sample_with_gradient_into<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        grad: &[f64],
        out: &mut [f64],
        rng: &mut R,
    ) {
        self.noise.perturb_into(theta, grad, out, rng);
    }

    /// Declared second-moment envelope `G(θ)`.
    pub fn envelope(&self, theta: &[f64]) -> Result<f64> {
        self.noise.envelope(&self.objective, theta)
    }
}

/// One draw of `ḟ(θ, X)`, advancing `rng`.
pub fn sample_gradient<R: Rng + ?Sized>(
    oracle: &StochasticOracle,
    theta: &ParameterVector,
    rng: &mut R,
) -> Result<ParameterVector> {
    oracle.sample(theta, rng)
}
