//! Online Lipschitz extension of approximate first-order data.
//!
//! Each noisy pair becomes an affine piece shifted down just enough to stay
//! below the running model at every earlier query. The model then reports its
//! own value and subgradient, so the emitted pairs always admit a convex
//! `(M + η/2R)`-Lipschitz extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pwmax::{active_tolerance, AffinePiece, Anchor, PiecewiseMaxFunction, TieBreak};
use crate::vector::Vector;

/// Parameters shared by the first-order transfers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    pub lipschitz: f64,
    pub radius: f64,
    pub eta: f64,
}

impl TransferParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !(self.eta >= 0.0) || !(self.lipschitz >= 0.0) {
            return Err(Error::BadArgs(format!("invalid transfer parameters {self:?}")));
        }
        Ok(())
    }

    /// `M′ = M + η/(2R)`.
    pub fn inflated_lipschitz(&self) -> f64 {
        self.lipschitz + self.eta / (2.0 * self.radius)
    }
}

/// A repaired pair plus the shift used for its piece.
#[derive(Clone, Debug, PartialEq)]
pub struct Repaired {
    pub value: f64,
    pub grad: Vector,
    pub shift: f64,
}

pub(crate) fn check_query(x: &Vector, dim: usize, radius: f64) -> Result<()> {
    x.check_dim(dim)?;
    let norm = x.norm();
    if norm > radius * (1.0 + 1e-12) {
        return Err(Error::OutOfDomain { norm, limit: radius });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTransfer {
    params: TransferParams,
    model: PiecewiseMaxFunction,
    t: usize,
}

impl LipschitzTransfer {
    pub fn new(dim: usize, params: TransferParams) -> Result<Self> {
        params.validate()?;
        Ok(LipschitzTransfer {
            params,
            model: PiecewiseMaxFunction::new(dim),
            t: 0,
        })
    }

    pub fn params(&self) -> &TransferParams {
        &self.params
    }

    pub fn model(&self) -> &PiecewiseMaxFunction {
        &self.model
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> usize {
        self.t
    }

    /// `s* = max(0, max_τ f̃ + ⟨g̃, x_τ − x_t⟩ − F_{t−1}(x_τ))`.
    ///
    /// Uses the recorded `f̂_τ = F_{t−1}(x_τ)`; values below a relative
    /// rounding floor are returned as zero.
    pub fn compute_shift(&self, x: &Vector, f: f64, g: &Vector) -> Result<f64> {
        x.check_dim(self.model.dim())?;
        g.check_dim(self.model.dim())?;
        let s = self
            .model
            .anchors()
            .iter()
            .map(|a| f + g.dot_diff(&a.point, x) - a.value)
            .fold(0.0, f64::max);
        Ok(if s < 1e-12 * (1.0 + f.abs()) { 0.0 } else { s })
    }

    pub fn step(&mut self, x: &Vector, f: f64, g: &Vector) -> Result<Repaired> {
        check_query(x, self.model.dim(), self.params.radius)?;
        g.check_dim(self.model.dim())?;
        let shift = self.compute_shift(x, f, g)?;
        self.t += 1;
        self.model
            .push_piece(AffinePiece::anchored(x.clone(), f - shift, g.clone(), self.t))?;
        let (value, grad) = newest_active(&self.model, x)?;
        self.model.record_anchor(Anchor {
            point: x.clone(),
            value,
            grad: grad.clone(),
        })?;
        Ok(Repaired { value, grad, shift })
    }
}

/// Value and slope of the newest piece within the active tolerance at `x`.
///
/// Reporting the selected piece's own value (rather than the float max) keeps
/// the zero-noise case bit-identical to the raw oracle.
pub(crate) fn newest_active(model: &PiecewiseMaxFunction, x: &Vector) -> Result<(f64, Vector)> {
    let a = model.active(x, TieBreak::PreferNewest)?;
    debug_assert!(a.value >= model.eval_unchecked(x) - active_tolerance(a.value));
    Ok((a.value, a.piece.slope.clone()))
}
