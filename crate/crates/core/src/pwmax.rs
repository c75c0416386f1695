//! Piecewise-maximum convex models `F(x) = max_i ℓ_i(x)` built from affine pieces.
//!
//! Pieces are stored in anchored form `ℓ(x) = value + ⟨slope, x − anchor⟩`, so a
//! piece evaluated at its own anchor returns `value` bit-exactly. The model is
//! append-only: pieces are never pruned and historical anchors are kept, since
//! the repair procedures reason about every earlier query point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Relative tolerance used to decide which pieces are active at a point.
pub const ACTIVE_REL_TOL: f64 = 1e-9;

/// Tolerance band for "within the max" comparisons at a value of size `v`.
pub fn active_tolerance(v: f64) -> f64 {
    ACTIVE_REL_TOL * (1.0 + v.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: Vector,
    pub anchor: Vector,
    /// Value of the piece at `anchor`.
    pub value: f64,
    /// Iteration that created the piece.
    pub origin_index: usize,
}

impl AffinePiece {
    pub fn anchored(anchor: Vector, value: f64, slope: Vector, origin_index: usize) -> Self {
        assert_eq!(anchor.dim(), slope.dim());
        AffinePiece {
            slope,
            anchor,
            value,
            origin_index,
        }
    }

    /// Piece `intercept + ⟨slope, x⟩`.
    pub fn from_intercept(intercept: f64, slope: Vector, origin_index: usize) -> Self {
        let anchor = Vector::zeros(slope.dim());
        Self::anchored(anchor, intercept, slope, origin_index)
    }

    pub fn intercept(&self) -> f64 {
        self.value - self.slope.dot(&self.anchor)
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.value + self.slope.dot_diff(x, &self.anchor)
    }
}

/// Which active piece supplies the subgradient when several are within tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    PreferNewest,
    PreferOldest,
}

/// A first-order pair recorded at a query point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub point: Vector,
    pub value: f64,
    pub grad: Vector,
}

/// The piece selected at a point together with its value there.
#[derive(Clone, Copy, Debug)]
pub struct ActivePiece<'a> {
    pub index: usize,
    pub value: f64,
    pub piece: &'a AffinePiece,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseMaxFunction {
    dim: usize,
    pieces: Vec<AffinePiece>,
    anchors: Vec<Anchor>,
}

impl PiecewiseMaxFunction {
    /// The model `F_0 ≡ −∞` (no pieces).
    pub fn new(dim: usize) -> Self {
        PiecewiseMaxFunction {
            dim,
            pieces: Vec::new(),
            anchors: Vec::new(),
        }
    }

    pub fn from_pieces(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        let mut f = Self::new(dim);
        for p in pieces {
            f.push_piece(p)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn push_piece(&mut self, piece: AffinePiece) -> Result<()> {
        piece.slope.check_dim(self.dim)?;
        if !piece.slope.is_finite() || !piece.anchor.is_finite() || !piece.value.is_finite() {
            return Err(Error::BadArgs("affine piece has non-finite entries".into()));
        }
        self.pieces.push(piece);
        Ok(())
    }

    pub fn record_anchor(&mut self, anchor: Anchor) -> Result<()> {
        anchor.point.check_dim(self.dim)?;
        anchor.grad.check_dim(self.dim)?;
        self.anchors.push(anchor);
        Ok(())
    }

    /// Model restricted to its first `n` pieces (the model as it stood after `n` appends).
    pub fn prefix(&self, n: usize) -> PiecewiseMaxFunction {
        PiecewiseMaxFunction {
            dim: self.dim,
            pieces: self.pieces[..n.min(self.pieces.len())].to_vec(),
            anchors: self.anchors[..n.min(self.anchors.len())].to_vec(),
        }
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim)?;
        if self.pieces.is_empty() {
            return Err(Error::ModelEmpty);
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &Vector) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Values `F_1(x), …, F_n(x)` of every prefix model, in one pass.
    pub fn prefix_values(&self, x: &Vector) -> Result<Vec<f64>> {
        x.check_dim(self.dim)?;
        let mut running = f64::NEG_INFINITY;
        Ok(self
            .pieces
            .iter()
            .map(|p| {
                running = running.max(p.eval(x));
                running
            })
            .collect())
    }

    /// Select the active piece at `x` under the given tie-breaking policy.
    pub fn active(&self, x: &Vector, tie_break: TieBreak) -> Result<ActivePiece<'_>> {
        x.check_dim(self.dim)?;
        if self.pieces.is_empty() {
            return Err(Error::ModelEmpty);
        }
        let values: Vec<f64> = self.pieces.iter().map(|p| p.eval(x)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = active_tolerance(max);
        let within = |i: &usize| values[*i] >= max - tol;
        let index = match tie_break {
            TieBreak::PreferNewest => (0..values.len())
                .rev()
                .filter(within)
                .max_by_key(|&i| self.pieces[i].origin_index),
            TieBreak::PreferOldest => (0..values.len())
                .filter(within)
                .min_by_key(|&i| self.pieces[i].origin_index),
        }
        .expect("the maximising piece is always within tolerance");
        Ok(ActivePiece {
            index,
            value: values[index],
            piece: &self.pieces[index],
        })
    }

    /// Slope of an active piece at `x`: a subgradient of the model.
    pub fn subgradient(&self, x: &Vector, tie_break: TieBreak) -> Result<Vector> {
        Ok(self.active(x, tie_break)?.piece.slope.clone())
    }

    /// Largest slope norm, i.e. the Lipschitz constant of the model.
    pub fn max_slope_norm(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.slope.norm())
            .fold(0.0, f64::max)
    }
}

/// Functions that can report a value and one subgradient at any point.
pub trait SubgradientField {
    fn dim(&self) -> usize;
    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector);
}

impl SubgradientField for PiecewiseMaxFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    /// Uses the strict maximiser (newest among exact ties), so appending pieces
    /// that stay strictly below the model never changes the answer.
    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
        let i = self.argmax(x).expect("subgradient field requires a nonempty model");
        (self.pieces[i].eval(x), self.pieces[i].slope.clone())
    }
}

impl PiecewiseMaxFunction {
    /// Index of a maximising piece, newest among exactly equal values.
    pub fn argmax(&self, x: &Vector) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.pieces.iter().enumerate() {
            let v = p.eval(x);
            if best.is_none_or(|(_, b)| v >= b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}
