//! Online smooth extension: shifted pieces plus ball smoothing.
//!
//! The piece added at step `t` is lowered by `s_t + 2η` with `s_t = 5ηt`, and
//! the emitted pair is the smoothed model `(F_t)_r` at `x_t` with
//! `r = √(η/α)`. Later pieces never rise above the model within `√2·r` of an
//! earlier query, so earlier outputs stay valid.

use serde::{Deserialize, Serialize};

use super::lipschitz::{check_query, newest_active, TransferParams};
use super::smoothing::{smooth_exact_1d, smooth_monte_carlo, EstimatorMode, Smoothed, SmoothingEstimator};
use crate::error::{Error, Result};
use crate::pwmax::{AffinePiece, Anchor, PiecewiseMaxFunction};
use crate::vector::Vector;

/// Smoothness certified for the extension: `α′ = α√d(4√(5(T+1)) + 3)`.
pub fn inflated_smoothness(alpha: f64, dim: usize, horizon: usize) -> f64 {
    alpha * (dim as f64).sqrt() * (4.0 * (5.0 * (horizon as f64 + 1.0)).sqrt() + 3.0)
}

/// Largest admissible oracle accuracy `αR²/(5T)`.
pub fn eta_limit(alpha: f64, radius: f64, horizon: usize) -> f64 {
    alpha * radius * radius / (5.0 * horizon.max(1) as f64)
}

/// Output of one smooth step.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothRepaired {
    pub value: f64,
    pub grad: Vector,
    pub shift: f64,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothTransfer {
    params: TransferParams,
    alpha: f64,
    horizon: usize,
    r: f64,
    estimator: SmoothingEstimator,
    model: PiecewiseMaxFunction,
    t: usize,
}

impl SmoothTransfer {
    pub fn new(
        dim: usize,
        params: TransferParams,
        alpha: f64,
        horizon: usize,
        estimator: SmoothingEstimator,
    ) -> Result<Self> {
        params.validate()?;
        estimator.validate(dim)?;
        if !(alpha >= 0.0) || !alpha.is_finite() || horizon == 0 {
            return Err(Error::BadArgs(format!(
                "smooth transfer needs alpha >= 0 and T >= 1 (got {alpha}, {horizon})"
            )));
        }
        let limit = eta_limit(alpha, params.radius, horizon);
        if params.eta > limit * (1.0 + 1e-12) {
            return Err(Error::EtaTooLarge {
                eta: params.eta,
                limit,
            });
        }
        let r = if params.eta == 0.0 {
            0.0
        } else {
            (params.eta / alpha).sqrt()
        };
        let tr = SmoothTransfer {
            params,
            alpha,
            horizon,
            r,
            estimator,
            model: PiecewiseMaxFunction::new(dim),
            t: 0,
        };
        // s_t = 4ηt + αr²t collapses to 5ηt since αr² = η.
        let t = horizon as f64;
        let long = 4.0 * params.eta * t + alpha * r * r * t;
        assert!((long - tr.cumulative_shift(horizon)).abs() <= 1e-12 * (1.0 + long.abs()));
        Ok(tr)
    }

    pub fn params(&self) -> &TransferParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Smoothing radius `r = √(η/α)`.
    pub fn radius_r(&self) -> f64 {
        self.r
    }

    pub fn estimator(&self) -> &SmoothingEstimator {
        &self.estimator
    }

    pub fn model(&self) -> &PiecewiseMaxFunction {
        &self.model
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn inflated_smoothness(&self) -> f64 {
        inflated_smoothness(self.alpha, self.model.dim(), self.horizon)
    }

    /// `s_t = 5ηt`.
    pub fn cumulative_shift(&self, t: usize) -> f64 {
        5.0 * self.params.eta * t as f64
    }

    /// Total downward shift of the piece created at step `t`: `s_t + 2η`.
    pub fn piece_shift(&self, t: usize) -> f64 {
        self.cumulative_shift(t) + 2.0 * self.params.eta
    }

    pub fn step(&mut self, x: &Vector, f: f64, g: &Vector) -> Result<SmoothRepaired> {
        check_query(x, self.model.dim(), self.params.radius)?;
        g.check_dim(self.model.dim())?;
        if self.t >= self.horizon {
            return Err(Error::ExchangeBudget { budget: self.horizon });
        }
        self.t += 1;
        let shift = self.piece_shift(self.t);
        self.model
            .push_piece(AffinePiece::anchored(x.clone(), f - shift, g.clone(), self.t))?;
        let out = if self.r == 0.0 {
            let (value, grad) = newest_active(&self.model, x)?;
            SmoothRepaired {
                value,
                grad,
                shift,
                stderr: None,
            }
        } else {
            let s = self.smoothed_model_at(&self.model, x, self.t)?;
            SmoothRepaired {
                value: s.value,
                grad: s.grad,
                shift,
                stderr: (self.estimator.mode == EstimatorMode::MonteCarlo).then_some(s.value_stderr),
            }
        };
        self.model.record_anchor(Anchor {
            point: x.clone(),
            value: out.value,
            grad: out.grad.clone(),
        })?;
        Ok(out)
    }

    /// `(F)_r(x)` for a given model with the sample set of query `key`.
    pub fn smoothed_model_at(&self, model: &PiecewiseMaxFunction, x: &Vector, key: usize) -> Result<Smoothed> {
        match self.estimator.mode {
            EstimatorMode::Exact1d => smooth_exact_1d(model, x, self.r),
            EstimatorMode::MonteCarlo => smooth_monte_carlo(model, x, self.r, &self.estimator, key as u64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta: f64) -> TransferParams {
        TransferParams {
            lipschitz: 1.0,
            radius: 1.0,
            eta,
        }
    }

    #[test]
    fn first_step_is_shifted_affine() {
        let mut tr = SmoothTransfer::new(2, params(0.01), 1.0, 5, SmoothingEstimator::monte_carlo(256, 3)).unwrap();
        let out = tr.step(&Vector::zeros(2), 3.0, &Vector::from([1.0, 0.0])).unwrap();
        assert!((out.shift - 0.07).abs() < 1e-15);
        assert!((out.value - 2.93).abs() < 1e-14);
        assert!(out.grad.distance(&Vector::from([1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn eta_precondition() {
        let r = SmoothTransfer::new(1, params(0.1), 1.0, 10, SmoothingEstimator::exact_1d());
        assert!(matches!(r, Err(Error::EtaTooLarge { .. })));
        assert!(SmoothTransfer::new(1, params(0.02), 1.0, 10, SmoothingEstimator::exact_1d()).is_ok());
    }

    #[test]
    fn alpha_prime_formula() {
        let a = inflated_smoothness(1.0, 2, 30);
        let expected = 2f64.sqrt() * (4.0 * 155f64.sqrt() + 3.0);
        assert!((a - expected).abs() < 1e-12);
    }

    #[test]
    fn radius_is_sqrt_eta_over_alpha() {
        let tr = SmoothTransfer::new(1, params(0.004), 2.0, 10, SmoothingEstimator::exact_1d()).unwrap();
        assert_eq!(tr.radius_r(), (0.004f64 / 2.0).sqrt());
    }
}
