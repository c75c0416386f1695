//! Ball smoothing `h_r(x) = E h(x + rU)`, `U` uniform on the unit ball.
//!
//! Two estimators: Monte Carlo with samples keyed by a caller-chosen integer
//! (so value and gradient share one sample set, and repeated calls with the
//! same key reuse it), and an exact breakpoint integrator for piecewise-max
//! functions of one variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pwmax::{PiecewiseMaxFunction, SubgradientField};
use crate::sampling::{keyed_rng, sample_unit_ball};
use crate::vector::{pairwise_sum, Vector};

pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMode {
    #[default]
    MonteCarlo,
    Exact1d,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingEstimator {
    #[serde(default)]
    pub mode: EstimatorMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub antithetic: bool,
}

impl Default for SmoothingEstimator {
    fn default() -> Self {
        SmoothingEstimator {
            mode: EstimatorMode::MonteCarlo,
            samples: DEFAULT_SAMPLES,
            seed: 0,
            antithetic: true,
        }
    }
}

impl SmoothingEstimator {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        SmoothingEstimator {
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn exact_1d() -> Self {
        SmoothingEstimator {
            mode: EstimatorMode::Exact1d,
            ..Default::default()
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.mode {
            EstimatorMode::Exact1d if dim != 1 => Err(Error::Exact1dInHighDim(dim)),
            EstimatorMode::MonteCarlo if self.samples < 2 => {
                Err(Error::BadArgs("Monte Carlo smoothing needs at least 2 samples".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Smoothed value and gradient with their standard errors (zero when exact).
#[derive(Clone, Debug, PartialEq)]
pub struct Smoothed {
    pub value: f64,
    pub grad: Vector,
    pub value_stderr: f64,
    pub grad_stderr: Vector,
}

/// Monte Carlo estimate of `h_r` and `∇h_r = E ∂h(x + rU)` at `x`.
pub fn smooth_monte_carlo<F: SubgradientField + ?Sized>(
    h: &F,
    x: &Vector,
    r: f64,
    est: &SmoothingEstimator,
    key: u64,
) -> Result<Smoothed> {
    let d = h.dim();
    x.check_dim(d)?;
    if est.samples < 2 {
        return Err(Error::BadArgs("Monte Carlo smoothing needs at least 2 samples".into()));
    }
    let mut rng = keyed_rng(est.seed, key, None);
    let m = if est.antithetic { est.samples / 2 } else { est.samples };
    let mut values = Vec::with_capacity(m);
    let mut grads: Vec<Vec<f64>> = vec![Vec::with_capacity(m); d];
    for _ in 0..m {
        let u = sample_unit_ball(d, &mut rng);
        let (v, g) = if est.antithetic {
            let (v1, g1) = h.value_and_subgradient(&x.add_scaled(r, &u));
            let (v2, g2) = h.value_and_subgradient(&x.add_scaled(-r, &u));
            (0.5 * (v1 + v2), g1.lerp(&g2, 0.5))
        } else {
            h.value_and_subgradient(&x.add_scaled(r, &u))
        };
        values.push(v);
        for (col, gi) in grads.iter_mut().zip(g.iter()) {
            col.push(*gi);
        }
    }
    let (value, value_stderr) = mean_and_stderr(&values);
    let (grad, grad_stderr): (Vec<f64>, Vec<f64>) = grads.iter().map(|c| mean_and_stderr(c)).unzip();
    Ok(Smoothed {
        value,
        grad: Vector::new(grad),
        value_stderr,
        grad_stderr: Vector::new(grad_stderr),
    })
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Exact `h_r(x)` and `h_r′(x)` for a one-dimensional piecewise-max model.
///
/// Walks the upper envelope across `[x − r, x + r]`, integrating each linear
/// segment in closed form.
pub fn smooth_exact_1d(model: &PiecewiseMaxFunction, x: &Vector, r: f64) -> Result<Smoothed> {
    if model.dim() != 1 {
        return Err(Error::Exact1dInHighDim(model.dim()));
    }
    x.check_dim(1)?;
    if model.is_empty() {
        return Err(Error::ModelEmpty);
    }
    if !(r > 0.0) {
        let (v, g) = model.value_and_subgradient(x);
        return Ok(exact(v, g));
    }
    let (lo, hi) = (x[0] - r, x[0] + r);
    let mut integral = 0.0;
    let mut slope_mass = 0.0;
    for seg in envelope_segments(model, lo, hi) {
        integral += (seg.end - seg.start) * 0.5 * (seg.start_value + seg.end_value);
        slope_mass += (seg.end - seg.start) * seg.slope;
    }
    Ok(exact(integral / (2.0 * r), Vector::from([slope_mass / (2.0 * r)])))
}

fn exact(value: f64, grad: Vector) -> Smoothed {
    let d = grad.dim();
    Smoothed {
        value,
        grad,
        value_stderr: 0.0,
        grad_stderr: Vector::zeros(d),
    }
}

/// A linear stretch of the upper envelope of a 1-d model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeSegment {
    pub start: f64,
    pub end: f64,
    pub start_value: f64,
    pub end_value: f64,
    pub slope: f64,
    pub piece: usize,
}

/// Upper envelope of a 1-d piecewise-max model on `[lo, hi]`, left to right.
pub fn envelope_segments(model: &PiecewiseMaxFunction, lo: f64, hi: f64) -> Vec<EnvelopeSegment> {
    let pieces = model.pieces();
    let at = |i: usize, z: f64| pieces[i].eval(&Vector::from([z]));
    let slope = |i: usize| pieces[i].slope[0];
    // Active piece at the left end: largest value, then largest slope.
    let mut cur = 0;
    for i in 1..pieces.len() {
        let (vi, vc) = (at(i, lo), at(cur, lo));
        if vi > vc || (vi == vc && slope(i) > slope(cur)) {
            cur = i;
        }
    }
    let mut z = lo;
    let mut out = Vec::new();
    loop {
        let vz = at(cur, z);
        let mut next: Option<(usize, f64)> = None;
        for j in 0..pieces.len() {
            let ds = slope(j) - slope(cur);
            if ds <= 0.0 {
                continue;
            }
            let cross = z + ((vz - at(j, z)) / ds).max(0.0);
            let better = match next {
                None => true,
                Some((k, c)) => cross < c || (cross == c && slope(j) > slope(k)),
            };
            if better {
                next = Some((j, cross));
            }
        }
        match next {
            Some((j, c)) if c < hi => {
                if c > z {
                    out.push(EnvelopeSegment {
                        start: z,
                        end: c,
                        start_value: vz,
                        end_value: at(cur, c),
                        slope: slope(cur),
                        piece: cur,
                    });
                }
                z = c;
                cur = j;
            }
            _ => {
                out.push(EnvelopeSegment {
                    start: z,
                    end: hi,
                    start_value: vz,
                    end_value: at(cur, hi),
                    slope: slope(cur),
                    piece: cur,
                });
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwmax::AffinePiece;

    fn abs_model() -> PiecewiseMaxFunction {
        PiecewiseMaxFunction::from_pieces(
            1,
            vec![
                AffinePiece::from_intercept(0.0, Vector::from([1.0]), 1),
                AffinePiece::from_intercept(0.0, Vector::from([-1.0]), 2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn affine_smoothing_is_exact() {
        let f = PiecewiseMaxFunction::from_pieces(
            2,
            vec![AffinePiece::from_intercept(1.0, Vector::from([2.0, 0.0]), 1)],
        )
        .unwrap();
        let s = smooth_monte_carlo(&f, &Vector::from([0.5, 0.0]), 0.3, &SmoothingEstimator::monte_carlo(64, 1), 1)
            .unwrap();
        assert!((s.value - 2.0).abs() < 1e-14);
        assert!(s.grad.distance(&Vector::from([2.0, 0.0])) < 1e-14);
    }

    #[test]
    fn exact_abs_at_kink() {
        let s = smooth_exact_1d(&abs_model(), &Vector::from([0.0]), 0.5).unwrap();
        assert!((s.value - 0.25).abs() < 1e-15);
        assert_eq!(s.grad[0], 0.0);
    }

    #[test]
    fn exact_abs_off_kink() {
        let s = smooth_exact_1d(&abs_model(), &Vector::from([0.2]), 0.5).unwrap();
        assert!((s.grad[0] - 0.4).abs() < 1e-15);
        // (0.3² + 0.7²) / 2 over an interval of length 1.
        assert!((s.value - 0.29).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let est = SmoothingEstimator::monte_carlo(100_000, 5);
        let s = smooth_monte_carlo(&abs_model(), &Vector::from([0.0]), 0.5, &est, 0).unwrap();
        assert!((s.value - 0.25).abs() <= 3.0 * s.value_stderr);
    }

    #[test]
    fn exact_1d_rejects_higher_dimension() {
        let f = PiecewiseMaxFunction::from_pieces(2, vec![AffinePiece::from_intercept(0.0, Vector::zeros(2), 1)]).unwrap();
        assert_eq!(
            smooth_exact_1d(&f, &Vector::zeros(2), 0.1),
            Err(Error::Exact1dInHighDim(2))
        );
        assert_eq!(
            SmoothingEstimator::exact_1d().validate(3),
            Err(Error::Exact1dInHighDim(3))
        );
    }

    #[test]
    fn envelope_covers_interval() {
        let segs = envelope_segments(&abs_model(), -1.0, 2.0);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].start, -1.0);
        assert_eq!(segs[0].end, 0.0);
        assert_eq!(segs[1].end, 2.0);
    }
}
