use nalgebra::{DMatrix, DVector};

use crate::channel::{CertifiedConstants, Channel, FirstOrderAlgorithm};
use crate::error::{Error, Result};
use crate::vector::Vector;

/// Central-cut ellipsoid method started from `B(R)`.
///
/// Centres outside `B(R)` get a free cut along the centre direction (no query).
/// Feasible centres get an objective cut, infeasible ones a feasibility cut.
/// The run stops after `T` cuts, on a vanishing objective cut, or when the
/// ellipsoid has shrunk below float resolution. Reports the best feasible
/// centre by received value.
pub struct Ellipsoid {
    consts: CertifiedConstants,
}

impl Ellipsoid {
    pub fn new(consts: CertifiedConstants) -> Self {
        Ellipsoid { consts }
    }
}

impl FirstOrderAlgorithm for Ellipsoid {
    fn name(&self) -> &'static str {
        "ellipsoid"
    }

    fn run(&mut self, channel: &mut dyn Channel) -> Result<Vector> {
        let d = self.consts.dim;
        let r = self.consts.radius;
        let mut c = DVector::<f64>::zeros(d);
        let mut p = DMatrix::<f64>::identity(d, d) * (r * r);
        let mut best: Option<(f64, Vector)> = None;
        let df = d as f64;
        for _ in 0..self.consts.iterations {
            let center = Vector::from(c.as_slice());
            let norm = center.norm();
            let a = if norm > r {
                center.scaled(1.0 / norm)
            } else {
                let resp = channel.exchange(&center)?;
                if resp.is_feasible() {
                    if best.as_ref().is_none_or(|(v, _)| resp.value < *v) {
                        best = Some((resp.value, center.clone()));
                    }
                    if resp.grad.norm() <= 1e-12 {
                        return Ok(center);
                    }
                    resp.grad
                } else {
                    resp.separation
                        .and_then(|s| s.normal)
                        .ok_or_else(|| Error::BadArgs("infeasible response without a normal".into()))?
                }
            };
            let av = DVector::from_column_slice(a.as_slice());
            let pa = &p * &av;
            let apa = av.dot(&pa);
            if !apa.is_finite() || apa < 0.0 {
                return Err(Error::NumericalCollapse(format!("aᵀPa = {apa}")));
            }
            let width = apa.sqrt();
            if width <= 1e-13 * r {
                break;
            }
            let b = pa / width;
            if d == 1 {
                c -= &b * 0.5;
                p *= 0.25;
            } else {
                c -= &b * (1.0 / (df + 1.0));
                p = (p - (&b * b.transpose()) * (2.0 / (df + 1.0))) * (df * df / (df * df - 1.0));
                p = (&p + p.transpose()) * 0.5;
            }
            if p.iter().any(|v| !v.is_finite()) || (0..d).any(|i| p[(i, i)] <= 0.0) {
                return Err(Error::NumericalCollapse("ellipsoid matrix lost definiteness".into()));
            }
        }
        best.map(|(_, x)| x).ok_or(Error::NoFeasiblePoint)
    }
}
