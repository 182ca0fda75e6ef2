use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point θ ∈ ℝᵖ with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::contract("parameter vector must have dimension ≥ 1"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::contract(format!("non-finite coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    /// `scale · e_axis` in dimension `p`.
    pub fn axis(p: usize, axis: usize, scale: f64) -> Self {
        let mut v = vec![0.0; p];
        v[axis] = scale;
        Self(v)
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl TryFrom<Vec<f64>> for ParameterVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(v: ParameterVector) -> Self {
        v.0
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(ParameterVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ParameterVector::new(vec![f64::INFINITY]).is_err());
        assert!(ParameterVector::new(vec![]).is_err());
        assert!(serde_json::from_str::<ParameterVector>("[1.0, 2.0]").is_ok());
        assert!(serde_json::from_str::<ParameterVector>("[]").is_err());
    }

    #[test]
    fn norm_of_3_4() {
        assert_eq!(ParameterVector::new(vec![3.0, 4.0]).unwrap().norm(), 5.0);
    }
}
