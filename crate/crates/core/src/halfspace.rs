use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vector::Vector;

/// Closed halfspace `{x : ⟨normal, x⟩ ≤ ⟨normal, anchor⟩}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    normal: Vector,
    anchor: Vector,
}

impl Halfspace {
    /// Builds the halfspace, normalising `normal` if it is not already unit length.
    pub fn new(normal: Vector, anchor: Vector) -> Result<Self> {
        check_dim(normal.dim(), anchor.dim())?;
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::BadArgs("halfspace normal must be nonzero".into()));
        }
        let normal = if (n - 1.0).abs() <= 1e-12 {
            normal
        } else {
            normal.scaled(1.0 / n)
        };
        Ok(Halfspace { normal, anchor })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// `⟨normal, x − anchor⟩`; positive values lie outside.
    pub fn violation(&self, x: &Vector) -> f64 {
        self.normal.dot_diff(x, &self.anchor)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(self.violation(x) <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h() -> Halfspace {
        Halfspace::new(Vector::from([1.0, 0.0]), Vector::from([2.0, 0.0])).unwrap()
    }

    #[test]
    fn membership() {
        assert!(h().contains(&Vector::from([0.0, 0.0]), 0.0).unwrap());
        assert!(!h().contains(&Vector::from([3.0, 0.0]), 0.0).unwrap());
        assert!(h().contains(&Vector::from([2.0, 5.0]), 0.0).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            h().contains(&Vector::zeros(3), 0.0),
            Err(Error::Dim { .. })
        ));
    }

    #[test]
    fn normal_is_normalised() {
        let h = Halfspace::new(Vector::from([3.0, 4.0]), Vector::zeros(2)).unwrap();
        assert!((h.normal().norm() - 1.0).abs() < 1e-12);
        assert!(Halfspace::new(Vector::zeros(2), Vector::zeros(2)).is_err());
    }
}
