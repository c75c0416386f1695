//! Noise models that turn exact oracles into η-approximate ones.
//!
//! Every perturbation is clamped to the guarantee ball before release, so each
//! model is a valid approximate oracle by construction. Responses depend only
//! on `(seed, t, x)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::constraint::{Constraint, Flag, Separation};
use super::objective::Objective;
use crate::error::{Error, Result};
use crate::sampling::{keyed_rng, sample_unit_ball, sample_unit_sphere};
use crate::vector::Vector;

const VALUE_STREAM: u64 = 0x7661_6c75;
const SEP_STREAM: u64 = 0x7365_7061;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    #[default]
    Zero,
    /// Value error uniform on `[−η, η]`, gradient error uniform on `B(η/2R)`.
    UniformRandom,
    /// Exact value; gradient tilted towards the origin by exactly `η/2R`.
    AdversarialSlopeFlip,
    /// Constant value offset (`bias`, default `+η`), exact gradient.
    ValueBias,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(default)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
}

impl NoiseModel {
    pub fn zero() -> Self {
        NoiseModel::default()
    }

    pub fn new(kind: NoiseKind, eta: f64, seed: u64) -> Self {
        NoiseModel {
            kind,
            eta,
            seed,
            bias: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::BadArgs(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        Ok(())
    }
}

/// An η-approximate first-order oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxOracle {
    objective: Objective,
    noise: NoiseModel,
}

impl ApproxOracle {
    pub fn new(objective: Objective, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        Ok(ApproxOracle { objective, noise })
    }

    pub fn exact(objective: Objective) -> Self {
        ApproxOracle {
            objective,
            noise: NoiseModel::zero(),
        }
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn eta(&self) -> f64 {
        self.noise.eta
    }

    /// Noisy pair at query index `t`.
    pub fn query(&self, x: &Vector, t: usize) -> Result<(f64, Vector)> {
        let (f, g) = self.objective.first_order(x)?;
        let eta = self.noise.eta;
        if eta == 0.0 {
            return Ok((f, g));
        }
        let gbound = eta / (2.0 * self.objective.radius());
        let (dv, dg) = match self.noise.kind {
            NoiseKind::Zero => return Ok((f, g)),
            NoiseKind::UniformRandom => {
                let mut rng = keyed_rng(self.noise.seed, VALUE_STREAM ^ t as u64, Some(x));
                let dv = eta * rng.random_range(-1.0..=1.0);
                let dg = sample_unit_ball(x.dim(), &mut rng).scaled(gbound);
                (dv, dg)
            }
            NoiseKind::AdversarialSlopeFlip => {
                let dg = match x.normalized() {
                    Some(u) => u.scaled(-gbound),
                    None => Vector::zeros(x.dim()),
                };
                (0.0, dg)
            }
            NoiseKind::ValueBias => (self.noise.bias.unwrap_or(eta), Vector::zeros(x.dim())),
        };
        let dv = dv.clamp(-eta, eta);
        let dg = dg.project_to_ball(gbound);
        Ok((f + dv, g.add(&dg)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationPolicy {
    #[default]
    Zero,
    RandomRotation,
    AdversarialTowardDeep,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationNoiseModel {
    #[serde(default)]
    pub eta_c: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub policy: RotationPolicy,
}

/// Largest rotation angle whose chord stays within `η_C/(4R)`.
pub fn max_rotation_angle(eta_c: f64, radius: f64) -> f64 {
    2.0 * (eta_c / (8.0 * radius)).min(1.0).asin()
}

/// An η_C-approximate separation oracle: exact flag, tilted normal.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSeparationOracle {
    constraint: Constraint,
    noise: SeparationNoiseModel,
}

/// Approximate response plus the exact normal, which only the transfer layer's
/// degenerate-cone fallback may use.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationAnswer {
    pub response: Separation,
    pub exact_normal: Option<Vector>,
}

impl ApproxSeparationOracle {
    pub fn new(constraint: Constraint, noise: SeparationNoiseModel) -> Result<Self> {
        let rho = constraint.rho();
        if !(noise.eta_c >= 0.0) || noise.eta_c > rho {
            return Err(Error::BadEta {
                eta_c: noise.eta_c,
                rho,
            });
        }
        Ok(ApproxSeparationOracle { constraint, noise })
    }

    pub fn exact(constraint: Constraint) -> Self {
        ApproxSeparationOracle {
            constraint,
            noise: SeparationNoiseModel::default(),
        }
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn noise(&self) -> &SeparationNoiseModel {
        &self.noise
    }

    pub fn eta_c(&self) -> f64 {
        self.noise.eta_c
    }

    pub fn query(&self, x: &Vector, t: usize) -> Result<SeparationAnswer> {
        let exact = self.constraint.separate(x)?;
        let g = match (&exact.flag, &exact.normal) {
            (Flag::Infeasible, Some(g)) => g.clone(),
            _ => {
                return Ok(SeparationAnswer {
                    response: exact,
                    exact_normal: None,
                })
            }
        };
        // A hair inside the maximal angle so rounding cannot breach the budget.
        let theta_max = max_rotation_angle(self.noise.eta_c, self.constraint.radius()) * (1.0 - 1e-12);
        let (theta, dir) = match self.noise.policy {
            RotationPolicy::Zero => (0.0, None),
            RotationPolicy::RandomRotation => {
                let mut rng = keyed_rng(self.noise.seed, SEP_STREAM ^ t as u64, Some(x));
                let theta = theta_max * rng.random::<f64>();
                let v = orthogonal_part(&sample_unit_sphere(x.dim(), &mut rng), &g);
                (theta, v.or_else(|| any_orthogonal(&g)))
            }
            RotationPolicy::AdversarialTowardDeep => {
                let toward = self.constraint.center().sub(x);
                (theta_max, orthogonal_part(&toward, &g).or_else(|| any_orthogonal(&g)))
            }
        };
        let tilted = match dir {
            Some(v) if theta > 0.0 => g.scaled(theta.cos()).add_scaled(theta.sin(), &v),
            _ => g.clone(),
        };
        // Guard rounding so the chord bound holds with the stated budget.
        let budget = self.noise.eta_c / (4.0 * self.constraint.radius());
        let tilted = if tilted.distance(&g) > budget {
            g.clone()
        } else {
            tilted
        };
        Ok(SeparationAnswer {
            response: Separation::infeasible(tilted),
            exact_normal: Some(g),
        })
    }
}

/// Unit vector along the part of `v` orthogonal to the unit vector `g`.
fn orthogonal_part(v: &Vector, g: &Vector) -> Option<Vector> {
    let p = v.add_scaled(-v.dot(g), g);
    if p.norm() > 1e-12 * (1.0 + v.norm()) {
        p.normalized()
    } else {
        None
    }
}

/// First standard basis direction with a usable orthogonal component.
fn any_orthogonal(g: &Vector) -> Option<Vector> {
    (0..g.dim()).find_map(|i| orthogonal_part(&Vector::basis(g.dim(), i), g))
}
