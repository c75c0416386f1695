use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// Dense vector of `f64` coordinates.
///
/// Arithmetic helpers assert matching lengths; public operations of the
/// crate validate dimensions up front and report [`crate::Error::Dim`].
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.dim())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `⟨self, x − base⟩` without materialising the difference.
    pub fn dot_diff(&self, x: &Vector, base: &Vector) -> f64 {
        assert_eq!(self.dim(), x.dim(), "dot_diff: dimension mismatch");
        assert_eq!(self.dim(), base.dim(), "dot_diff: dimension mismatch");
        self.0
            .iter()
            .zip(x.0.iter().zip(&base.0))
            .map(|(s, (a, b))| s * (a - b))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance: dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "add: dimension mismatch");
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "sub: dimension mismatch");
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "add_scaled: dimension mismatch");
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    /// In-place `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &Vector) {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scaled(1.0 / n))
        } else {
            None
        }
    }

    /// Euclidean projection onto the centred ball of radius `radius`.
    pub fn project_to_ball(&self, radius: f64) -> Vector {
        let n = self.norm();
        if n <= radius {
            self.clone()
        } else {
            self.scaled(radius / n)
        }
    }

    /// Convex combination `(1 − w)·self + w·other`.
    pub fn lerp(&self, other: &Vector, w: f64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "lerp: dimension mismatch");
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect(),
        )
    }

    /// True when every coordinate has identical bits to the other vector.
    pub fn bit_eq(&self, other: &Vector) -> bool {
        self.dim() == other.dim()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Pairwise (cascade) summation with a fixed reduction order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_arithmetic() {
        let a = Vector::from([3.0, 4.0]);
        let b = Vector::from([1.0, -1.0]);
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.dot(&b), -1.0);
        assert_eq!(a.sub(&b), Vector::from([2.0, 5.0]));
        assert_eq!(a.dot_diff(&a, &b), 3.0 * 2.0 + 4.0 * 5.0);
        assert!(a.project_to_ball(1.0).distance(&Vector::from([0.6, 0.8])) < 1e-15);
        assert!(Vector::zeros(3).normalized().is_none());
    }

    #[test]
    fn dimension_check_reports_error() {
        let a = Vector::zeros(2);
        assert!(a.check_dim(2).is_ok());
        assert_eq!(
            a.check_dim(3),
            Err(crate::Error::Dim { expected: 3, found: 2 })
        );
    }

    #[test]
    fn pairwise_sum_error_stays_small() {
        let v = vec![0.1; 4096];
        assert!((pairwise_sum(&v) - 409.6).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
