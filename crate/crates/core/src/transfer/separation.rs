//! Online repair of approximate separation responses.
//!
//! Keeps an outer approximation `K_t` (a list of halfspaces through earlier
//! infeasible queries) and the points answered feasible. Every emitted normal
//! is rotated, as little as possible, so its halfspace contains all feasible
//! points seen so far; the responses are then exactly those of a separation
//! oracle for `K_t ∩ C`.

use serde::{Deserialize, Serialize};

use super::lipschitz::check_query;
use super::nnls::project_onto_polar_cone;
use crate::error::{Error, Result};
use crate::halfspace::Halfspace;
use crate::oracles::{Flag, Separation};
use crate::vector::Vector;

/// Tolerance for membership in `K_t` and for cone constraints.
pub const SEPARATION_TOL: f64 = 1e-9;

/// Unit vector in the cone `{g : ⟨g, p − x⟩ ≤ 0 ∀p ∈ feasible}` closest to `g_tilde`.
///
/// Returns `g_tilde` unchanged when it already satisfies every constraint. When
/// the projection vanishes the caller-supplied `fallback` is used.
pub fn cone_project_unit(
    g_tilde: &Vector,
    feasible: &[Vector],
    x: &Vector,
    fallback: Option<&Vector>,
) -> Result<Vector> {
    for p in feasible {
        p.check_dim(x.dim())?;
    }
    g_tilde.check_dim(x.dim())?;
    let rows: Vec<Vector> = feasible.iter().map(|p| p.sub(x)).collect();
    let inside = rows
        .iter()
        .all(|a| a.dot(g_tilde) <= 1e-12 * (1.0 + a.norm()));
    if inside {
        return Ok(g_tilde.clone());
    }
    let p = project_onto_polar_cone(g_tilde, &rows)?;
    if p.norm() <= 1e-12 {
        return fallback.cloned().ok_or(Error::DegenerateCone);
    }
    Ok(p.normalized().expect("nonzero projection"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationTransfer {
    dim: usize,
    radius: f64,
    eta_c: f64,
    rho: f64,
    halfspaces: Vec<Halfspace>,
    feasible: Vec<Vector>,
    t: usize,
}

impl SeparationTransfer {
    pub fn new(dim: usize, radius: f64, eta_c: f64, rho: f64) -> Result<Self> {
        if !(eta_c >= 0.0) || eta_c > rho {
            return Err(Error::BadEta { eta_c, rho });
        }
        if !(radius > 0.0) {
            return Err(Error::BadArgs(format!("radius must be > 0, got {radius}")));
        }
        Ok(SeparationTransfer {
            dim,
            radius,
            eta_c,
            rho,
            halfspaces: Vec::new(),
            feasible: Vec::new(),
            t: 0,
        })
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn feasible_points(&self) -> &[Vector] {
        &self.feasible
    }

    pub fn eta_c(&self) -> f64 {
        self.eta_c
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    /// Membership in `K_t` (all of `ℝ^d` before the first cut).
    pub fn in_outer(&self, x: &Vector) -> bool {
        self.halfspaces.iter().all(|h| h.violation(x) <= SEPARATION_TOL)
    }

    /// Pre-seeds the outer approximation, for scripted scenarios.
    pub fn push_halfspace(&mut self, h: Halfspace) -> Result<()> {
        h.normal().check_dim(self.dim)?;
        self.halfspaces.push(h);
        Ok(())
    }

    pub fn step(&mut self, x: &Vector, raw: &Separation, fallback: Option<&Vector>) -> Result<Separation> {
        check_query(x, self.dim, self.radius)?;
        self.t += 1;
        match raw.flag {
            Flag::Feasible => {
                let worst = self
                    .halfspaces
                    .iter()
                    .map(|h| (h.violation(x), h))
                    .filter(|(v, _)| *v > SEPARATION_TOL)
                    .max_by(|a, b| a.0.total_cmp(&b.0));
                match worst {
                    None => {
                        self.feasible.push(x.clone());
                        Ok(Separation::feasible())
                    }
                    // x lies outside a stored halfspace, which already contains K.
                    Some((_, h)) => Ok(Separation::infeasible(h.normal().clone())),
                }
            }
            Flag::Infeasible => {
                let g = raw
                    .normal
                    .as_ref()
                    .ok_or_else(|| Error::BadArgs("infeasible response without a normal".into()))?;
                g.check_dim(self.dim)?;
                let g_hat = cone_project_unit(g, &self.feasible, x, fallback)?;
                self.halfspaces.push(Halfspace::new(g_hat.clone(), x.clone())?);
                Ok(Separation::infeasible(g_hat))
            }
        }
    }
}
