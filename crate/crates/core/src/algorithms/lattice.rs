use crate::channel::{CertifiedConstants, Channel, FirstOrderAlgorithm};
use crate::error::{Error, Result};
use crate::vector::Vector;

/// Integer points of `B(R)` in lexicographic order.
pub fn lattice_points(dim: usize, radius: f64) -> Vec<Vector> {
    let k = radius.floor() as i64;
    let mut out = Vec::new();
    let mut cur = vec![-k; dim];
    loop {
        let v = Vector::new(cur.iter().map(|&c| c as f64).collect());
        if v.norm() <= radius {
            out.push(v);
        }
        // Odometer increment.
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < k {
                cur[i] += 1;
                break;
            }
            cur[i] = -k;
        }
    }
}

/// Queries every lattice point of `B(R)` once and reports the best feasible one.
pub struct LatticeEnumerator {
    consts: CertifiedConstants,
}

impl LatticeEnumerator {
    pub fn new(consts: CertifiedConstants) -> Self {
        LatticeEnumerator { consts }
    }
}

impl FirstOrderAlgorithm for LatticeEnumerator {
    fn name(&self) -> &'static str {
        "lattice-enumerator"
    }

    fn run(&mut self, channel: &mut dyn Channel) -> Result<Vector> {
        let points = lattice_points(self.consts.dim, self.consts.radius);
        if points.len() > self.consts.iterations {
            return Err(Error::BudgetExceeded {
                needed: points.len(),
                budget: self.consts.iterations,
            });
        }
        let mut best: Option<(f64, Vector)> = None;
        for p in points {
            let resp = channel.exchange(&p)?;
            if resp.is_feasible() && best.as_ref().is_none_or(|(v, _)| resp.value < *v) {
                best = Some((resp.value, p));
            }
        }
        best.map(|(_, p)| p).ok_or(Error::NoFeasiblePoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_lattice_points() {
        assert_eq!(lattice_points(2, 2.5).len(), 21);
        assert_eq!(lattice_points(2, 3.0).len(), 29);
        assert_eq!(lattice_points(1, 1.0), vec![Vector::from([-1.0]), Vector::from([0.0]), Vector::from([1.0])]);
    }
}
