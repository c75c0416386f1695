use crate::channel::{CertifiedConstants, Channel, FirstOrderAlgorithm};
use crate::error::Result;
use crate::vector::Vector;

/// Accelerated projected gradient on `B(R)` with `θ_k = 2/(k+2)`.
///
/// Per step: `y = (1−θ)x + θz`, query `y`, `z ← Π(z − ∇/(θL))`,
/// `x ← (1−θ)x + θz`. Every query is a convex combination of points in the
/// ball, so it stays in the ball. Reports the last `x`.
pub struct NesterovAgd {
    consts: CertifiedConstants,
    start: Vector,
    smoothness: f64,
}

impl NesterovAgd {
    pub fn new(consts: CertifiedConstants, start: Vector, smoothness: f64) -> Self {
        NesterovAgd {
            consts,
            start,
            smoothness,
        }
    }
}

impl FirstOrderAlgorithm for NesterovAgd {
    fn name(&self) -> &'static str {
        "nesterov-agd"
    }

    fn run(&mut self, channel: &mut dyn Channel) -> Result<Vector> {
        let r = self.consts.radius;
        // A zero constant means the objective is affine; any finite step is safe.
        let l = if self.smoothness > 0.0 { self.smoothness } else { 1.0 };
        let mut x = self.start.clone();
        let mut z = self.start.clone();
        for k in 0..self.consts.iterations {
            let theta = 2.0 / (k as f64 + 2.0);
            let y = x.lerp(&z, theta);
            let resp = channel.exchange(&y)?;
            z = z.add_scaled(-1.0 / (theta * l), &resp.grad).project_to_ball(r);
            x = x.lerp(&z, theta);
        }
        Ok(x)
    }
}
