//! Decides whether first-order data admits a convex extension.
//!
//! Pairs `(x_τ, f_τ, g_τ)` are consistent with some convex function exactly
//! when every piece stays below every other data point:
//! `f_τ + ⟨g_τ, x_σ − x_τ⟩ ≤ f_σ` for all ordered pairs. The piecewise max of
//! the pieces is then an extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderSample {
    pub point: Vector,
    pub value: f64,
    pub grad: Vector,
}

impl FirstOrderSample {
    pub fn new(point: Vector, value: f64, grad: Vector) -> Self {
        FirstOrderSample { point, value, grad }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensibilityReport {
    pub extensible: bool,
    /// `max_{τ,σ} f_τ + ⟨g_τ, x_σ − x_τ⟩ − f_σ` (never negative: `τ = σ` gives zero).
    pub worst_violation: f64,
    /// Zero-based `(τ, σ)` attaining the worst violation.
    pub witness: (usize, usize),
}

pub fn check_convex_extensibility(
    pairs: &[FirstOrderSample],
    tol: f64,
) -> Result<ExtensibilityReport> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::BadArgs("extensibility check needs at least one pair".into()))?;
    let d = first.point.dim();
    for p in pairs {
        p.point.check_dim(d)?;
        p.grad.check_dim(d)?;
    }
    let mut worst = 0.0;
    let mut witness = (0, 0);
    for (tau, a) in pairs.iter().enumerate() {
        for (sigma, b) in pairs.iter().enumerate() {
            if tau == sigma {
                continue;
            }
            let v = a.value + a.grad.dot_diff(&b.point, &a.point) - b.value;
            if v > worst {
                worst = v;
                witness = (tau, sigma);
            }
        }
    }
    Ok(ExtensibilityReport {
        extensible: worst <= tol,
        worst_violation: worst,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64, f: f64, g: f64) -> FirstOrderSample {
        FirstOrderSample::new(Vector::from([x]), f, Vector::from([g]))
    }

    #[test]
    fn decreasing_slopes_are_not_extensible() {
        let r = check_convex_extensibility(&[s(-0.5, 0.0, 0.04), s(0.5, 0.0, -0.04)], 0.0).unwrap();
        assert!(!r.extensible);
        assert!((r.worst_violation - 0.04).abs() < 1e-15);
        assert_eq!(r.witness, (0, 1));
    }

    #[test]
    fn abs_data_is_extensible() {
        let r = check_convex_extensibility(&[s(-0.5, 0.5, -1.0), s(0.5, 0.5, 1.0)], 1e-12).unwrap();
        assert!(r.extensible);
    }

    #[test]
    fn single_pair_is_extensible() {
        let r = check_convex_extensibility(&[s(0.0, 3.0, 17.0)], 0.0).unwrap();
        assert!(r.extensible);
        assert_eq!(r.worst_violation, 0.0);
    }

    #[test]
    fn errors() {
        assert!(check_convex_extensibility(&[], 0.0).is_err());
        let bad = FirstOrderSample::new(Vector::zeros(2), 0.0, Vector::zeros(1));
        assert!(matches!(
            check_convex_extensibility(&[s(0.0, 0.0, 0.0), bad], 0.0),
            Err(Error::Dim { .. })
        ));
    }
}
