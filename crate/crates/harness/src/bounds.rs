//! Guarantee predictions for completed runs.
//!
//! A bound is the exact-oracle error of the algorithm on the instance it is
//! told about, plus the additive price of the repair in use. The naive
//! baseline carries no guarantee and gets no bound.

use inexact_core::algorithms::{AlgorithmKind, StepPolicy};
use inexact_core::channel::{CertifiedConstants, TraceRow};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, TransferMode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    /// Exact-oracle error of the algorithm with the certified constants.
    pub algorithm: f64,
    /// Additive term paid for the repair.
    pub transfer: f64,
    /// Statistical allowance for Monte Carlo smoothing (three standard errors).
    pub slack: f64,
    pub total: f64,
}

/// Geometry the bound depends on.
pub struct BoundContext<'a> {
    pub config: &'a ExperimentConfig,
    pub constants: &'a CertifiedConstants,
    /// Lipschitz constant of the true objective (not inflated).
    pub objective_lipschitz: f64,
    /// Distance from the start to the reference minimiser, when known.
    pub start_distance: Option<f64>,
    /// Diameter and inscribed radius `ρ` of the feasible set (`B(R)` when unconstrained).
    pub diameter: f64,
    pub rho: f64,
    pub rows: &'a [TraceRow],
}

/// `M·(D² + R²)/(2R√T)` for the fixed step `R/(M√T)`.
pub fn subgradient_error(m: f64, d: f64, r: f64, t: usize) -> f64 {
    m * (d * d + r * r) / (2.0 * r * (t as f64).sqrt())
}

/// `2L·D²/T²`.
pub fn agd_error(l: f64, d: f64, t: usize) -> f64 {
    2.0 * l * d * d / (t as f64 * t as f64)
}

/// `M·diam·(R/ρ)·exp(−T/(2d(d+1)))`.
pub fn ellipsoid_error(m: f64, diameter: f64, r: f64, rho: f64, dim: usize, t: usize) -> f64 {
    let df = dim as f64;
    m * diameter * (r / rho) * (-(t as f64) / (2.0 * df * (df + 1.0))).exp()
}

fn algorithm_error(ctx: &BoundContext) -> Option<f64> {
    let cfg = ctx.config;
    let k = ctx.constants;
    let constrained = cfg.constraint.is_some();
    let t = cfg.iterations;
    let dist = ctx.start_distance.unwrap_or(2.0 * k.radius);
    match cfg.algorithm.kind {
        AlgorithmKind::ProjectedSubgradient if !constrained && cfg.algorithm.step == StepPolicy::Fixed => {
            Some(subgradient_error(k.lipschitz, dist, k.radius, t))
        }
        AlgorithmKind::NesterovAgd if !constrained => Some(agd_error(k.smoothness?, dist, t)),
        AlgorithmKind::Ellipsoid => {
            let rho = k.inner_radius.unwrap_or(k.radius);
            Some(ellipsoid_error(k.lipschitz, ctx.diameter, k.radius, rho, k.dim, t))
        }
        AlgorithmKind::LatticeEnumerator => Some(0.0),
        _ => None,
    }
}

/// The applicable guarantee, or `None` when no certified rate covers the run.
pub fn predict(ctx: &BoundContext) -> Option<Bound> {
    let cfg = ctx.config;
    let eta = cfg.noise.eta;
    let t = cfg.iterations as f64;
    let (transfer, slack) = match cfg.transfer {
        TransferMode::None => return None,
        TransferMode::Lipschitz if cfg.constraint.is_some() => return None,
        TransferMode::Lipschitz => (4.0 * eta * t, 0.0),
        TransferMode::Smooth if cfg.constraint.is_some() => return None,
        TransferMode::Smooth => {
            let sigma = ctx
                .rows
                .iter()
                .filter_map(|r| r.mc_stderr)
                .fold(0.0, f64::max);
            (5.0 * eta * (t + 2.0), 3.0 * sigma)
        }
        TransferMode::Constrained => {
            let eta_c = cfg.sep_noise.as_ref().map_or(0.0, |n| n.eta_c);
            (
                4.0 * eta * t + 2.0 * eta_c * ctx.objective_lipschitz * ctx.constants.radius / ctx.rho,
                0.0,
            )
        }
    };
    let algorithm = algorithm_error(ctx)?;
    Some(Bound {
        algorithm,
        transfer,
        slack,
        total: algorithm + transfer + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        // D = R reduces the subgradient bound to MR/√T.
        assert!((subgradient_error(1.0, 1.0, 1.0, 100) - 0.1).abs() < 1e-15);
        assert!((agd_error(1.0, 1.0, 30) - 2.0 / 900.0).abs() < 1e-15);
        let e = ellipsoid_error(1.0, 1.6, 1.0, 0.75, 2, 60);
        assert!((e - 1.6 / 0.75 * (-5.0f64).exp()).abs() < 1e-15);
    }
}
