use serde::{Deserialize, Serialize};

use crate::engine::ParameterVector;
use crate::sampling::SamplingBox;
use crate::{Error, Result};

/// Values above this are treated as overflow.
pub const VALUE_CAP: f64 = 1e300;

pub const CATALOG_NAMES: [&str; 7] = [
    "quadratic",
    "smooth-rectifier",
    "exp-abs",
    "power-q",
    "log1p-abs",
    "loglog1p-abs",
    "gauss-bump",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// `½‖θ‖²`
    Quadratic,
    /// `Σ_i log(1 + exp(θ_i))`
    SmoothRectifier,
    /// `exp(‖θ‖)`
    ExpAbs,
    /// `‖θ‖^q`
    PowerQ { q: f64 },
    /// `log(1 + ‖θ‖)`
    Log1pAbs,
    /// `log(log(1 + ‖θ‖))`
    #[serde(rename = "loglog1p-abs")]
    LogLog1pAbs,
    /// `exp(−‖θ‖²)`
    GaussBump,
}

impl ObjectiveKind {
    /// Radial profile `g` with `F(θ) = g(‖θ‖)`, if the objective is radial with a domain floor.
    fn is_restricted(&self) -> bool {
        matches!(
            self,
            Self::ExpAbs | Self::PowerQ { .. } | Self::Log1pAbs | Self::LogLog1pAbs
        )
    }

    fn profile(&self, rho: f64) -> (f64, f64) {
        match *self {
            Self::ExpAbs => {
                let e = rho.exp();
                (e, e)
            }
            Self::PowerQ { q } => (rho.powf(q), q * rho.powf(q - 1.0)),
            Self::Log1pAbs => (rho.ln_1p(), 1.0 / (1.0 + rho)),
            Self::LogLog1pAbs => {
                let l = rho.ln_1p();
                (l.ln(), 1.0 / ((1.0 + rho) * l))
            }
            _ => unreachable!("not a restricted radial objective"),
        }
    }
}

/// A catalog objective on ℝᵖ together with the constants the checkers need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub dim: usize,
    /// Evaluation is restricted to `‖θ‖₂ ≥ r0` when `r0 > 0`.
    pub r0: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CatalogParams {
    pub q: Option<f64>,
    pub r0: Option<f64>,
}

pub const DEFAULT_R0: f64 = 1.0;
pub const DEFAULT_Q: f64 = 0.5;

/// Looks up a catalog objective by name in dimension `dim`.
pub fn catalog_lookup(name: &str, dim: usize, params: CatalogParams) -> Result<Objective> {
    let kind = match name {
        "quadratic" => ObjectiveKind::Quadratic,
        "smooth-rectifier" => ObjectiveKind::SmoothRectifier,
        "exp-abs" => ObjectiveKind::ExpAbs,
        "power-q" => ObjectiveKind::PowerQ {
            q: params.q.unwrap_or(DEFAULT_Q),
        },
        "log1p-abs" => ObjectiveKind::Log1pAbs,
        "loglog1p-abs" => ObjectiveKind::LogLog1pAbs,
        "gauss-bump" => ObjectiveKind::GaussBump,
        other => return Err(Error::UnknownObjective(other.to_string())),
    };
    let r0 = if kind.is_restricted() {
        params.r0.unwrap_or(DEFAULT_R0)
    } else {
        params.r0.unwrap_or(0.0)
    };
    Objective::new(kind, dim, r0)
}

impl Objective {
    pub fn new(kind: ObjectiveKind, dim: usize, r0: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::contract("objective dimension must be ≥ 1"));
        }
        if !(r0.is_finite() && r0 >= 0.0) {
            return Err(Error::contract("domain radius r0 must be finite and ≥ 0"));
        }
        if kind.is_restricted() && r0 <= 0.0 {
            return Err(Error::contract(format!(
                "{} needs a positive domain floor r0",
                kind_name(&kind)
            )));
        }
        if let ObjectiveKind::PowerQ { q } = kind {
            if !(q.is_finite() && q > 0.0) {
                return Err(Error::contract("power-q needs q > 0"));
            }
        }
        Ok(Self { kind, dim, r0 })
    }

    pub fn quadratic(dim: usize) -> Self {
        Self::new(ObjectiveKind::Quadratic, dim, 0.0).expect("valid")
    }

    pub fn smooth_rectifier(dim: usize) -> Self {
        Self::new(ObjectiveKind::SmoothRectifier, dim, 0.0).expect("valid")
    }

    pub fn gauss_bump(dim: usize) -> Self {
        Self::new(ObjectiveKind::GaussBump, dim, 0.0).expect("valid")
    }

    pub fn loglog1p_abs(dim: usize) -> Self {
        Self::new(ObjectiveKind::LogLog1pAbs, dim, DEFAULT_R0).expect("valid")
    }

    pub fn id(&self) -> String {
        match self.kind {
            ObjectiveKind::PowerQ { q } => format!("power-q(q={q},r0={},p={})", self.r0, self.dim),
            k if k.is_restricted() => format!("{}(r0={},p={})", kind_name(&k), self.r0, self.dim),
            k => format!("{}(p={})", kind_name(&k), self.dim),
        }
    }

    pub fn name(&self) -> &'static str {
        kind_name(&self.kind)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_min_radius(&self) -> f64 {
        self.r0
    }

    /// Lower bound `F_lb`. For the radial examples this is the infimum over `‖θ‖ ≥ r0`.
    pub fn f_lb(&self) -> f64 {
        match self.kind {
            ObjectiveKind::Quadratic | ObjectiveKind::SmoothRectifier | ObjectiveKind::GaussBump => 0.0,
            k => k.profile(self.r0).0,
        }
    }

    /// Hölder exponent of the gradient.
    pub fn alpha(&self) -> f64 {
        1.0
    }

    /// Global Hölder constant of the gradient (sup of the Hessian spectral norm), when finite.
    pub fn l_global(&self) -> Option<f64> {
        match self.kind {
            ObjectiveKind::Quadratic => Some(1.0),
            // max of σ(θ)(1 − σ(θ)), attained at θ = 0
            ObjectiveKind::SmoothRectifier => Some(0.25),
            // Hessian e^{−ρ²}(4θθᵀ − 2I) has spectral norm 2 at the origin
            ObjectiveKind::GaussBump => Some(2.0),
            _ => None,
        }
    }

    /// Convex region inside the domain used by the sampled checkers.
    pub fn default_box(&self) -> SamplingBox {
        let (lo, hi) = match self.kind {
            ObjectiveKind::Quadratic | ObjectiveKind::SmoothRectifier => (-10.0, 10.0),
            ObjectiveKind::GaussBump => (-3.0, 3.0),
            ObjectiveKind::ExpAbs => (self.r0, self.r0 + 4.0),
            _ => (self.r0, self.r0 * 100.0),
        };
        // an optional floor on an unrestricted objective moves the box onto the allowed side
        let (lo, hi) = if !self.kind.is_restricted() && self.r0 > 0.0 {
            (self.r0, self.r0 + 0.5 * (hi - lo))
        } else {
            (lo, hi)
        };
        SamplingBox::cube(self.dim, lo, hi).expect("valid box")
    }

    pub fn in_domain(&self, theta: &[f64]) -> bool {
        self.r0 <= 0.0 || crate::engine::norm_of(theta) >= self.r0
    }

    fn check_input(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim {
            return Err(Error::contract(format!(
                "objective has dimension {}, point has {}",
                self.dim,
                theta.len()
            )));
        }
        let rho = crate::engine::norm_of(theta);
        if self.r0 > 0.0 && (rho < self.r0 || rho.is_nan()) {
            return Err(Error::Domain {
                theta: theta.to_vec(),
                min_radius: self.r0,
            });
        }
        Ok(rho)
    }

    /// `F(θ)` and `Ḟ(θ)` written into `grad`.
    pub fn eval_into(&self, theta: &[f64], grad: &mut [f64]) -> Result<f64> {
        let rho = self.check_input(theta)?;
        let value = match self.kind {
            ObjectiveKind::Quadratic => {
                grad.copy_from_slice(theta);
                0.5 * rho * rho
            }
            ObjectiveKind::SmoothRectifier => {
                let mut v = 0.0;
                for (g, &t) in grad.iter_mut().zip(theta) {
                    v += softplus(t);
                    *g = sigmoid(t);
                }
                v
            }
            ObjectiveKind::GaussBump => {
                let e = (-rho * rho).exp();
                for (g, &t) in grad.iter_mut().zip(theta) {
                    *g = -2.0 * t * e;
                }
                e
            }
            k => {
                let (v, dv) = k.profile(rho);
                let s = dv / rho;
                for (g, &t) in grad.iter_mut().zip(theta) {
                    *g = s * t;
                }
                v
            }
        };
        if !(value.is_finite() && value.abs() <= VALUE_CAP) || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Overflow {
                theta: theta.to_vec(),
            });
        }
        Ok(value)
    }

    pub fn eval(&self, theta: &ParameterVector) -> Result<(f64, ParameterVector)> {
        let mut grad = vec![0.0; self.dim];
        let v = self.eval_into(theta.as_slice(), &mut grad)?;
        Ok((v, ParameterVector::from_vec_unchecked(grad)))
    }

    pub fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut grad = vec![0.0; self.dim];
        let v = self.eval_into(theta, &mut grad)?;
        Ok((v, grad))
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        let mut grad = vec![0.0; self.dim];
        self.eval_into(theta, &mut grad)
    }

    pub fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.dim];
        self.eval_into(theta, &mut grad)?;
        Ok(grad)
    }
}

fn kind_name(kind: &ObjectiveKind) -> &'static str {
    match kind {
        ObjectiveKind::Quadratic => "quadratic",
        ObjectiveKind::SmoothRectifier => "smooth-rectifier",
        ObjectiveKind::ExpAbs => "exp-abs",
        ObjectiveKind::PowerQ { .. } => "power-q",
        ObjectiveKind::Log1pAbs => "log1p-abs",
        ObjectiveKind::LogLog1pAbs => "loglog1p-abs",
        ObjectiveKind::GaussBump => "gauss-bump",
    }
}

/// `log(1 + e^t)` as `max(t, 0) + log1p(e^{−|t|})`.
pub(crate) fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `(F(θ), Ḟ(θ))`.
pub fn eval_objective(obj: &Objective, theta: &ParameterVector) -> Result<(f64, ParameterVector)> {
    obj.eval(theta)
}
