use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::sample_ball;
use crate::vector::Vector;

/// Objectives are defined on `B(DOMAIN_FACTOR · R)` so smoothing probes stay in range.
pub const DOMAIN_FACTOR: f64 = 4.0;

/// Configuration of a test objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `Σ_i |x_i − a_i|`.
    AbsDistance { center: Vector },
    /// `max_i ⟨a_i, x⟩ + b_i`.
    MaxAffine {
        slopes: Vec<Vector>,
        intercepts: Vec<f64>,
    },
    /// `½ α ‖x − a‖²`.
    Quadratic { center: Vector, alpha: f64 },
    /// `τ · log Σ_i exp((⟨a_i, x⟩ + b_i) / τ)`.
    LogSumExp {
        slopes: Vec<Vector>,
        intercepts: Vec<f64>,
        temperature: f64,
    },
    /// `‖x − a‖`.
    EuclideanNorm { center: Vector },
}

/// A validated objective with certified constants on `B(4R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    spec: ObjectiveSpec,
    dim: usize,
    radius: f64,
    lipschitz: f64,
    smoothness: Option<f64>,
    minimizer: Option<Vector>,
}

impl Objective {
    pub fn new(spec: ObjectiveSpec, dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::BadArgs(format!(
                "objective needs d >= 1 and R > 0 (got d={dim}, R={radius})"
            )));
        }
        let dom = DOMAIN_FACTOR * radius;
        let (lipschitz, smoothness, minimizer) = match &spec {
            ObjectiveSpec::AbsDistance { center } => {
                center.check_dim(dim)?;
                ((dim as f64).sqrt(), None, Some(center.clone()))
            }
            ObjectiveSpec::MaxAffine { slopes, intercepts } => {
                check_pieces(slopes, intercepts, dim)?;
                let m = max_norm(slopes);
                let alpha = (slopes.len() == 1).then_some(0.0);
                (m, alpha, None)
            }
            ObjectiveSpec::Quadratic { center, alpha } => {
                center.check_dim(dim)?;
                if !(*alpha >= 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidObjective(format!("alpha must be >= 0, got {alpha}")));
                }
                (alpha * (dom + center.norm()), Some(*alpha), Some(center.clone()))
            }
            ObjectiveSpec::LogSumExp {
                slopes,
                intercepts,
                temperature,
            } => {
                check_pieces(slopes, intercepts, dim)?;
                if !(*temperature > 0.0) || !temperature.is_finite() {
                    return Err(Error::InvalidObjective(format!(
                        "temperature must be > 0, got {temperature}"
                    )));
                }
                let m = max_norm(slopes);
                (m, Some(m * m / temperature), None)
            }
            ObjectiveSpec::EuclideanNorm { center } => {
                center.check_dim(dim)?;
                (1.0, None, Some(center.clone()))
            }
        };
        let obj = Objective {
            spec,
            dim,
            radius,
            lipschitz,
            smoothness,
            minimizer,
        };
        obj.audit_certificates()?;
        Ok(obj)
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Lipschitz constant `M` on `B(4R)`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Gradient Lipschitz constant `α`, when the objective is smooth.
    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    /// Unconstrained minimiser, when known in closed form.
    pub fn minimizer(&self) -> Option<&Vector> {
        self.minimizer.as_ref()
    }

    /// Value and one subgradient at `x ∈ B(4R)`.
    pub fn first_order(&self, x: &Vector) -> Result<(f64, Vector)> {
        x.check_dim(self.dim)?;
        let limit = DOMAIN_FACTOR * self.radius;
        let norm = x.norm();
        if norm > limit * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain { norm, limit });
        }
        Ok(self.first_order_unchecked(x))
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.first_order(x)?.0)
    }

    fn first_order_unchecked(&self, x: &Vector) -> (f64, Vector) {
        match &self.spec {
            ObjectiveSpec::AbsDistance { center } => {
                let diff = x.sub(center);
                let v = diff.iter().map(|c| c.abs()).sum();
                // At a kink the first listed piece (+1) is taken.
                let g = diff.iter().map(|&c| if c >= 0.0 { 1.0 } else { -1.0 }).collect::<Vec<_>>();
                (v, Vector::new(g))
            }
            ObjectiveSpec::MaxAffine { slopes, intercepts } => {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for (i, (a, b)) in slopes.iter().zip(intercepts).enumerate() {
                    let v = a.dot(x) + b;
                    if v > best_v {
                        best = i;
                        best_v = v;
                    }
                }
                (best_v, slopes[best].clone())
            }
            ObjectiveSpec::Quadratic { center, alpha } => {
                let diff = x.sub(center);
                (0.5 * alpha * diff.norm_sq(), diff.scaled(*alpha))
            }
            ObjectiveSpec::LogSumExp {
                slopes,
                intercepts,
                temperature,
            } => {
                let z: Vec<f64> = slopes
                    .iter()
                    .zip(intercepts)
                    .map(|(a, b)| (a.dot(x) + b) / temperature)
                    .collect();
                let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
                let total: f64 = w.iter().sum();
                let mut g = Vector::zeros(self.dim);
                for (wi, a) in w.iter().zip(slopes) {
                    g.axpy(wi / total, a);
                }
                (temperature * (zmax + total.ln()), g)
            }
            ObjectiveSpec::EuclideanNorm { center } => {
                let diff = x.sub(center);
                let n = diff.norm();
                let g = if n > 0.0 { diff.scaled(1.0 / n) } else { Vector::zeros(self.dim) };
                (n, g)
            }
        }
    }

    /// Samples pairs in `B(4R)` and checks the stated constants hold.
    fn audit_certificates(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0b1e_c71e);
        let dom = DOMAIN_FACTOR * self.radius;
        let origin = Vector::zeros(self.dim);
        for _ in 0..200 {
            let x = sample_ball(&origin, dom, &mut rng);
            let y = sample_ball(&origin, dom, &mut rng);
            let (fx, gx) = self.first_order_unchecked(&x);
            let (fy, gy) = self.first_order_unchecked(&y);
            let dist = x.distance(&y);
            let tol = 1e-6 * (1.0 + fx.abs().max(fy.abs()));
            if (fx - fy).abs() > self.lipschitz * dist + tol || gx.norm() > self.lipschitz + 1e-6 {
                return Err(Error::InvalidObjective(
                    "Lipschitz certificate failed on sampled pairs".into(),
                ));
            }
            if fy < fx + gx.dot_diff(&y, &x) - tol {
                return Err(Error::InvalidObjective("subgradient inequality failed".into()));
            }
            if let Some(alpha) = self.smoothness {
                if gx.distance(&gy) > alpha * dist + 1e-6 {
                    return Err(Error::InvalidObjective(
                        "smoothness certificate failed on sampled pairs".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_pieces(slopes: &[Vector], intercepts: &[f64], dim: usize) -> Result<()> {
    if slopes.is_empty() || slopes.len() != intercepts.len() {
        return Err(Error::InvalidObjective(format!(
            "need matching nonempty slopes/intercepts (got {} and {})",
            slopes.len(),
            intercepts.len()
        )));
    }
    for a in slopes {
        a.check_dim(dim)?;
        if !a.is_finite() {
            return Err(Error::InvalidObjective("non-finite slope".into()));
        }
    }
    if intercepts.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidObjective("non-finite intercept".into()));
    }
    Ok(())
}

fn max_norm(vs: &[Vector]) -> f64 {
    vs.iter().map(Vector::norm).fold(0.0, f64::max)
}
