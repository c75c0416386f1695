use super::StepPolicy;
use crate::channel::{CertifiedConstants, Channel, FirstOrderAlgorithm};
use crate::error::Result;
use crate::vector::Vector;

/// Projected subgradient method on `B(R)`, reporting the best received value.
///
/// Infeasible responses (constrained runs) step along the returned normal and
/// are never reported.
pub struct ProjectedSubgradient {
    consts: CertifiedConstants,
    start: Vector,
    step: StepPolicy,
}

impl ProjectedSubgradient {
    pub fn new(consts: CertifiedConstants, start: Vector, step: StepPolicy) -> Self {
        ProjectedSubgradient { consts, start, step }
    }

    fn step_size(&self, t: usize) -> f64 {
        let m = if self.consts.lipschitz > 0.0 { self.consts.lipschitz } else { 1.0 };
        let denom = match self.step {
            StepPolicy::Fixed => self.consts.iterations,
            StepPolicy::Diminishing => t,
        };
        self.consts.radius / (m * (denom as f64).sqrt())
    }
}

impl FirstOrderAlgorithm for ProjectedSubgradient {
    fn name(&self) -> &'static str {
        "projected-subgradient"
    }

    fn run(&mut self, channel: &mut dyn Channel) -> Result<Vector> {
        let r = self.consts.radius;
        let mut x = self.start.clone();
        let mut best: Option<(f64, Vector)> = None;
        for t in 1..=self.consts.iterations {
            let resp = channel.exchange(&x)?;
            let dir = if resp.is_feasible() {
                if best.as_ref().is_none_or(|(v, _)| resp.value < *v) {
                    best = Some((resp.value, x.clone()));
                }
                resp.grad
            } else {
                resp.separation
                    .and_then(|s| s.normal)
                    .unwrap_or_else(|| Vector::zeros(x.dim()))
            };
            x = x.add_scaled(-self.step_size(t), &dir).project_to_ball(r);
        }
        Ok(best.map(|(_, p)| p).unwrap_or(x))
    }
}
