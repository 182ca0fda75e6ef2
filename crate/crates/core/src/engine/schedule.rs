use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::{apply_rotated, check_orthogonal, LearningRateMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleFamily {
    ScalarPower,
    DiagonalPower,
    RotatedDiagonalPower,
    /// Fixed eigenvalues for every k. Not a power law, so only sampled diagnostics apply.
    Constant,
}

impl fmt::Display for ScheduleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ScalarPower => "scalar-power",
            Self::DiagonalPower => "diagonal-power",
            Self::RotatedDiagonalPower => "rotated-diagonal-power",
            Self::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
}

/// Deterministic sequence of learning-rate matrices `M_k`, `k = 0, 1, ...`.
///
/// Power families have eigenvalues `d_i(k) = c_i·(k + k0)^(−β_i)`, optionally conjugated
/// by a fixed orthogonal `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    family: ScheduleFamily,
    coefficients: Vec<f64>,
    exponents: Vec<f64>,
    offset: f64,
    dim: usize,
    rotation: Option<Arc<DMatrix<f64>>>,
}

fn check_power_params(c: &[f64], beta: &[f64], k0: f64) -> Result<()> {
    if c.is_empty() || c.len() != beta.len() {
        return Err(Error::contract("coefficients and exponents must be nonempty and equal length"));
    }
    if c.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::contract("coefficients must be finite and positive"));
    }
    if beta.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::contract("exponents must be finite and positive"));
    }
    if !(k0.is_finite() && k0 >= 1.0) {
        return Err(Error::contract("offset k0 must be ≥ 1"));
    }
    Ok(())
}

/// Orthogonal factor of the QR decomposition of a seeded Gaussian matrix, with the
/// column signs fixed so that `R` has a positive diagonal.
pub fn random_orthogonal(p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(p, p, |_, _| StandardNormal.sample(&mut rng));
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

impl Schedule {
    pub fn scalar_power(c: f64, beta: f64, k0: f64, dim: usize) -> Result<Self> {
        check_power_params(&[c], &[beta], k0)?;
        if dim == 0 {
            return Err(Error::contract("dimension must be ≥ 1"));
        }
        Ok(Self {
            family: ScheduleFamily::ScalarPower,
            coefficients: vec![c],
            exponents: vec![beta],
            offset: k0,
            dim,
            rotation: None,
        })
    }

    pub fn diagonal_power(c: Vec<f64>, beta: Vec<f64>, k0: f64) -> Result<Self> {
        check_power_params(&c, &beta, k0)?;
        Ok(Self {
            family: ScheduleFamily::DiagonalPower,
            dim: c.len(),
            coefficients: c,
            exponents: beta,
            offset: k0,
            rotation: None,
        })
    }

    pub fn rotated_diagonal_power(
        c: Vec<f64>,
        beta: Vec<f64>,
        k0: f64,
        q: DMatrix<f64>,
    ) -> Result<Self> {
        check_power_params(&c, &beta, k0)?;
        check_orthogonal(&q)?;
        if q.nrows() != c.len() {
            return Err(Error::contract("rotation dimension differs from eigenvalue count"));
        }
        Ok(Self {
            family: ScheduleFamily::RotatedDiagonalPower,
            dim: c.len(),
            coefficients: c,
            exponents: beta,
            offset: k0,
            rotation: Some(Arc::new(q)),
        })
    }

    /// Rotated family with `Q` drawn from `rotation_seed`.
    pub fn rotated_from_seed(c: Vec<f64>, beta: Vec<f64>, k0: f64, rotation_seed: u64) -> Result<Self> {
        let q = random_orthogonal(c.len(), rotation_seed);
        Self::rotated_diagonal_power(c, beta, k0, q)
    }

    /// `M_k = Q·diag(d)·Qᵀ` (or `diag(d)` without rotation) for every k.
    pub fn constant(d: Vec<f64>, rotation: Option<DMatrix<f64>>) -> Result<Self> {
        if d.is_empty() || d.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::contract("constant eigenvalues must be finite and positive"));
        }
        if let Some(q) = &rotation {
            check_orthogonal(q)?;
            if q.nrows() != d.len() {
                return Err(Error::contract("rotation dimension differs from eigenvalue count"));
            }
        }
        Ok(Self {
            family: ScheduleFamily::Constant,
            dim: d.len(),
            exponents: vec![0.0; d.len()],
            coefficients: d,
            offset: 1.0,
            rotation: rotation.map(Arc::new),
        })
    }

    pub fn family(&self) -> ScheduleFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn rotation(&self) -> Option<&DMatrix<f64>> {
        self.rotation.as_deref()
    }

    pub fn is_power_family(&self) -> bool {
        self.family != ScheduleFamily::Constant
    }

    pub fn id(&self) -> String {
        let fmt_list = |v: &[f64]| {
            v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
        };
        match self.family {
            ScheduleFamily::Constant => format!("constant(d=[{}])", fmt_list(&self.coefficients)),
            fam => format!(
                "{fam}(c=[{}],beta=[{}],k0={},p={})",
                fmt_list(&self.coefficients),
                fmt_list(&self.exponents),
                self.offset,
                self.dim
            ),
        }
    }

    fn eigenvalue(&self, i: usize, k: u64) -> f64 {
        match self.family {
            ScheduleFamily::Constant => self.coefficients[i],
            _ => self.coefficients[i] * (k as f64 + self.offset).powf(-self.exponents[i]),
        }
    }

    fn eigenvalues_into(&self, k: u64, out: &mut [f64]) {
        if self.family == ScheduleFamily::ScalarPower {
            out.fill(self.eigenvalue(0, k));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.eigenvalue(i, k);
            }
        }
    }

    /// The matrix `M_k`.
    pub fn matrix(&self, k: u64) -> LearningRateMatrix {
        match (self.family, &self.rotation) {
            (ScheduleFamily::ScalarPower, _) => LearningRateMatrix::Scalar {
                eta: self.eigenvalue(0, k),
                dim: self.dim,
            },
            (_, None) => LearningRateMatrix::Diagonal {
                d: (0..self.dim).map(|i| self.eigenvalue(i, k)).collect(),
            },
            (_, Some(q)) => LearningRateMatrix::Rotated {
                q: Arc::clone(q),
                d: (0..self.dim).map(|i| self.eigenvalue(i, k)).collect(),
            },
        }
    }

    /// `out = M_k·g` without building the matrix. `scratch` must have length `p`.
    pub(crate) fn apply_at(&self, k: u64, g: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        match (self.family, &self.rotation) {
            (ScheduleFamily::ScalarPower, _) => {
                let eta = self.eigenvalue(0, k);
                for (o, x) in out.iter_mut().zip(g) {
                    *o = eta * x;
                }
            }
            (_, None) => {
                self.eigenvalues_into(k, scratch);
                for ((o, x), d) in out.iter_mut().zip(g).zip(scratch.iter()) {
                    *o = d * x;
                }
            }
            (_, Some(q)) => {
                self.eigenvalues_into(k, scratch);
                apply_rotated(q, scratch, g, out);
            }
        }
    }

    pub fn lambda_max(&self, k: u64) -> f64 {
        (0..self.coefficients.len())
            .map(|i| self.eigenvalue(i, k))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lambda_min(&self, k: u64) -> f64 {
        (0..self.coefficients.len())
            .map(|i| self.eigenvalue(i, k))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Exact `(λ_min, λ_max, κ)` of `M_k` from the family parameters.
pub fn schedule_eigen_bounds(schedule: &Schedule, k: u64) -> EigenBounds {
    let lambda_min = schedule.lambda_min(k);
    let lambda_max = schedule.lambda_max(k);
    EigenBounds {
        lambda_min,
        lambda_max,
        kappa: lambda_max / lambda_min,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub alpha: f64,
    /// `Σ_{k<horizon} λ_max(M_k)^(1+α)`, a finite-horizon estimate of `S`.
    pub p2_partial_sum: f64,
    pub p2_verdict: Verdict,
    pub p3_verdict: Verdict,
    pub p4_verdict: Verdict,
    pub analytic_basis: String,
    pub horizon_used: u64,
}

impl ScheduleReport {
    pub fn all_pass(&self) -> bool {
        [self.p2_verdict, self.p3_verdict, self.p4_verdict]
            .iter()
            .all(|v| *v == Verdict::Pass)
    }

    pub fn any_fail(&self) -> bool {
        [self.p2_verdict, self.p3_verdict, self.p4_verdict].contains(&Verdict::Fail)
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Summability checks on the eigenvalue sequences.
///
/// For power families `λ_max(M_k) ≍ k^(−β_min)` and `λ_min(M_k) ≍ k^(−β_max)`, so:
/// the `λ_max^(1+α)` series converges iff `β_min·(1+α) > 1`; the `λ_min` series
/// diverges iff `β_max ≤ 1`; and `λ_max^α·κ ≍ k^(β_max − β_min(1+α))` vanishes iff
/// `β_min·(1+α) > β_max`.
pub fn validate_schedule(schedule: &Schedule, alpha: f64, horizon: u64) -> Result<ScheduleReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::contract(format!("alpha must lie in (0,1], got {alpha}")));
    }
    if horizon == 0 {
        return Err(Error::contract("horizon must be ≥ 1"));
    }
    let p2_partial_sum: f64 = (0..horizon)
        .map(|k| schedule.lambda_max(k).powf(1.0 + alpha))
        .sum();

    if !schedule.is_power_family() {
        return Ok(ScheduleReport {
            alpha,
            p2_partial_sum,
            p2_verdict: Verdict::Inconclusive,
            p3_verdict: Verdict::Inconclusive,
            p4_verdict: Verdict::Inconclusive,
            analytic_basis: format!(
                "{} is not a power family; only the sampled partial sum over {horizon} steps is reported",
                schedule.family()
            ),
            horizon_used: horizon,
        });
    }

    let beta = schedule.exponents();
    let beta_min = beta.iter().copied().fold(f64::INFINITY, f64::min);
    let beta_max = beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p2_exp = beta_min * (1.0 + alpha);
    let p4_exp = beta_max - p2_exp;
    let analytic_basis = format!(
        "lambda_max ~ k^-{beta_min}: P2 needs {beta_min}*(1+{alpha}) = {p2_exp} > 1; \
         lambda_min ~ k^-{beta_max}: P3 needs {beta_max} <= 1; \
         lambda_max^alpha*kappa ~ k^({p4_exp}): P4 needs exponent < 0"
    );
    Ok(ScheduleReport {
        alpha,
        p2_partial_sum,
        p2_verdict: verdict(p2_exp > 1.0),
        p3_verdict: verdict(beta_max <= 1.0),
        p4_verdict: verdict(p2_exp > beta_max),
        analytic_basis,
        horizon_used: horizon,
    })
}
