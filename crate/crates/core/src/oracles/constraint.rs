use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::sample_ball;
use crate::vector::Vector;

/// Configuration of a convex feasible set inside `B(R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Ball { center: Vector, radius: f64 },
    Box { lo: Vector, hi: Vector },
    /// `{x : ⟨n_i, x⟩ ≤ b_i ∀i} ∩ B(R)`; `interior_point` certifies an inscribed ball of radius `rho`.
    Polytope {
        normals: Vec<Vector>,
        offsets: Vec<f64>,
        interior_point: Vector,
        rho: f64,
    },
}

/// Membership answer of a separation oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    Feasible,
    Infeasible,
}

/// A separation response: feasible, or infeasible with a unit normal `g`
/// such that `⟨g, y⟩ ≤ ⟨g, x⟩` for the relevant set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub flag: Flag,
    pub normal: Option<Vector>,
}

impl Separation {
    pub fn feasible() -> Self {
        Separation {
            flag: Flag::Feasible,
            normal: None,
        }
    }

    pub fn infeasible(normal: Vector) -> Self {
        Separation {
            flag: Flag::Infeasible,
            normal: Some(normal),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.flag == Flag::Feasible
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    spec: ConstraintSpec,
    dim: usize,
    radius: f64,
    /// Unit facet normals and offsets (polytope only).
    facets: Vec<(Vector, f64)>,
    rho: f64,
    center: Vector,
}

impl Constraint {
    pub fn new(spec: ConstraintSpec, dim: usize, radius: f64) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidConstraint(m));
        let mut facets = Vec::new();
        let (rho, center) = match &spec {
            ConstraintSpec::Ball { center, radius: r } => {
                center.check_dim(dim)?;
                if !(*r > 0.0) {
                    return invalid(format!("ball radius must be > 0, got {r}"));
                }
                if center.norm() + r > radius * (1.0 + 1e-12) {
                    return invalid(format!("ball does not fit inside B({radius})"));
                }
                (*r, center.clone())
            }
            ConstraintSpec::Box { lo, hi } => {
                lo.check_dim(dim)?;
                hi.check_dim(dim)?;
                if lo.iter().zip(hi.iter()).any(|(l, h)| !(l < h)) {
                    return invalid("box needs lo < hi in every coordinate".into());
                }
                let corner: f64 = lo
                    .iter()
                    .zip(hi.iter())
                    .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if corner > radius * (1.0 + 1e-12) {
                    return invalid(format!("box does not fit inside B({radius})"));
                }
                let rho = lo
                    .iter()
                    .zip(hi.iter())
                    .map(|(l, h)| 0.5 * (h - l))
                    .fold(f64::INFINITY, f64::min);
                (rho, lo.lerp(hi, 0.5))
            }
            ConstraintSpec::Polytope {
                normals,
                offsets,
                interior_point,
                rho,
            } => {
                interior_point.check_dim(dim)?;
                if normals.len() != offsets.len() {
                    return invalid("normals and offsets differ in length".into());
                }
                if !(*rho > 0.0) {
                    return invalid(format!("rho must be > 0, got {rho}"));
                }
                for (n, b) in normals.iter().zip(offsets) {
                    n.check_dim(dim)?;
                    let norm = n.norm();
                    if !(norm > 0.0) || !b.is_finite() {
                        return invalid("facet normals must be nonzero and offsets finite".into());
                    }
                    let unit = n.scaled(1.0 / norm);
                    let off = b / norm;
                    if off - unit.dot(interior_point) < rho - 1e-12 {
                        return invalid("interior ball crosses a facet".into());
                    }
                    facets.push((unit, off));
                }
                if interior_point.norm() + rho > radius * (1.0 + 1e-12) {
                    return invalid("interior ball leaves B(R)".into());
                }
                (*rho, interior_point.clone())
            }
        };
        Ok(Constraint {
            spec,
            dim,
            radius,
            facets,
            rho,
            center,
        })
    }

    pub fn spec(&self) -> &ConstraintSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Radius of a ball certified to lie inside the set.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Centre of the certified inscribed ball.
    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// Upper bound on the diameter of the set.
    pub fn diameter(&self) -> f64 {
        match &self.spec {
            ConstraintSpec::Ball { radius, .. } => 2.0 * radius,
            ConstraintSpec::Box { lo, hi } => lo.distance(hi),
            ConstraintSpec::Polytope { .. } => 2.0 * self.radius,
        }
    }

    /// Signed violation of the most violated defining inequality, with its unit normal.
    /// Nonpositive values mean membership.
    fn worst_violation(&self, x: &Vector) -> (f64, Option<Vector>) {
        match &self.spec {
            ConstraintSpec::Ball { center, radius } => {
                let diff = x.sub(center);
                (diff.norm() - radius, diff.normalized())
            }
            ConstraintSpec::Box { lo, hi } => {
                let mut worst = f64::NEG_INFINITY;
                let mut normal = None;
                for i in 0..self.dim {
                    for (v, sign) in [(x[i] - hi[i], 1.0), (lo[i] - x[i], -1.0)] {
                        if v > worst {
                            worst = v;
                            normal = Some(Vector::basis(self.dim, i).scaled(sign));
                        }
                    }
                }
                (worst, normal)
            }
            ConstraintSpec::Polytope { .. } => {
                let mut worst = x.norm() - self.radius;
                let mut normal = x.normalized();
                for (n, b) in &self.facets {
                    let v = n.dot(x) - b;
                    if v > worst {
                        worst = v;
                        normal = Some(n.clone());
                    }
                }
                (worst, normal)
            }
        }
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        x.check_dim(self.dim)?;
        Ok(self.worst_violation(x).0 <= 0.0)
    }

    /// Exact separation at `x ∈ B(R)`.
    pub fn separate(&self, x: &Vector) -> Result<Separation> {
        x.check_dim(self.dim)?;
        let norm = x.norm();
        if norm > self.radius * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                norm,
                limit: self.radius,
            });
        }
        let (v, normal) = self.worst_violation(x);
        if v <= 0.0 {
            Ok(Separation::feasible())
        } else {
            Ok(Separation::infeasible(
                normal.expect("a violated inequality always has a normal"),
            ))
        }
    }

    /// Membership in the shrunken set `C_{−δ}`.
    pub fn contains_deep(&self, x: &Vector, delta: f64) -> bool {
        match &self.spec {
            ConstraintSpec::Ball { center, radius } => x.distance(center) <= radius - delta,
            ConstraintSpec::Box { lo, hi } => (0..self.dim).all(|i| x[i] >= lo[i] + delta && x[i] <= hi[i] - delta),
            ConstraintSpec::Polytope { .. } => {
                x.norm() <= self.radius - delta && self.facets.iter().all(|(n, b)| n.dot(x) <= b - delta)
            }
        }
    }

    /// Uniform samples from `C_{−δ}`.
    pub fn deep_point_sampler(&self, delta: f64, n: usize, seed: u64) -> Result<Vec<Vector>> {
        if !(delta >= 0.0) || delta >= self.rho {
            return Err(Error::BadDelta { delta, rho: self.rho });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        match &self.spec {
            ConstraintSpec::Ball { center, radius } => {
                for _ in 0..n {
                    out.push(sample_ball(center, radius - delta, &mut rng));
                }
            }
            ConstraintSpec::Box { lo, hi } => {
                for _ in 0..n {
                    let v: Vec<f64> = (0..self.dim)
                        .map(|i| rng.random_range((lo[i] + delta)..=(hi[i] - delta)))
                        .collect();
                    out.push(Vector::new(v));
                }
            }
            ConstraintSpec::Polytope { .. } => {
                let origin = Vector::zeros(self.dim);
                let max_tries = 1000 * n.max(1) + 100_000;
                let mut tries = 0;
                while out.len() < n {
                    tries += 1;
                    if tries > max_tries {
                        return Err(Error::BadArgs(
                            "rejection sampling of deep points did not converge".into(),
                        ));
                    }
                    let p = sample_ball(&origin, self.radius - delta, &mut rng);
                    if self.contains_deep(&p, delta) {
                        out.push(p);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball() -> Constraint {
        Constraint::new(
            ConstraintSpec::Ball {
                center: Vector::zeros(2),
                radius: 1.0,
            },
            2,
            2.0,
        )
        .unwrap()
    }

    fn square() -> Constraint {
        Constraint::new(
            ConstraintSpec::Box {
                lo: Vector::from([-1.0, -1.0]),
                hi: Vector::from([1.0, 1.0]),
            },
            2,
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn ball_separation() {
        assert_eq!(
            ball().separate(&Vector::from([2.0, 0.0])).unwrap(),
            Separation::infeasible(Vector::from([1.0, 0.0]))
        );
        assert_eq!(ball().separate(&Vector::from([0.5, 0.0])).unwrap(), Separation::feasible());
    }

    #[test]
    fn box_separation() {
        assert_eq!(
            square().separate(&Vector::from([1.5, 0.2])).unwrap(),
            Separation::infeasible(Vector::from([1.0, 0.0]))
        );
    }

    #[test]
    fn deep_samples() {
        for p in ball().deep_point_sampler(0.3, 500, 1).unwrap() {
            assert!(p.norm() <= 0.7 + 1e-15);
        }
        for p in square().deep_point_sampler(0.5, 500, 2).unwrap() {
            assert!(p.iter().all(|c| c.abs() <= 0.5));
        }
        let half = Constraint::new(
            ConstraintSpec::Polytope {
                normals: vec![Vector::from([1.0, 0.0])],
                offsets: vec![1.0],
                interior_point: Vector::from([0.0, 0.0]),
                rho: 1.0,
            },
            2,
            2.0,
        )
        .unwrap();
        for p in half.deep_point_sampler(0.2, 500, 3).unwrap() {
            assert!(p[0] <= 0.8);
        }
        assert!(matches!(
            ball().deep_point_sampler(1.0, 1, 0),
            Err(Error::BadDelta { .. })
        ));
    }

    #[test]
    fn set_must_fit_in_domain() {
        assert!(Constraint::new(
            ConstraintSpec::Ball {
                center: Vector::from([1.5, 0.0]),
                radius: 1.0
            },
            2,
            2.0
        )
        .is_err());
    }
}
