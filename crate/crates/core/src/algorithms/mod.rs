//! Reference algorithms written against exact oracles.
//!
//! They only ever see responses through a [`Channel`](crate::channel::Channel).

pub mod agd;
pub mod ellipsoid;
pub mod lattice;
pub mod subgradient;

use serde::{Deserialize, Serialize};

use crate::channel::{CertifiedConstants, FirstOrderAlgorithm};
use crate::error::{Error, Result};
use crate::vector::Vector;

pub use agd::NesterovAgd;
pub use ellipsoid::Ellipsoid;
pub use lattice::{lattice_points, LatticeEnumerator};
pub use subgradient::ProjectedSubgradient;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    ProjectedSubgradient,
    NesterovAgd,
    Ellipsoid,
    LatticeEnumerator,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::ProjectedSubgradient,
        AlgorithmKind::NesterovAgd,
        AlgorithmKind::Ellipsoid,
        AlgorithmKind::LatticeEnumerator,
    ];
}

/// Subgradient step-size schedule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepPolicy {
    /// `R / (M √T)` at every step.
    #[default]
    Fixed,
    /// `R / (M √t)` at step `t`.
    Diminishing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    /// Initial point (subgradient and AGD); the origin when absent.
    #[serde(default)]
    pub start: Option<Vector>,
    #[serde(default)]
    pub step: StepPolicy,
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind) -> Self {
        AlgorithmConfig {
            kind,
            start: None,
            step: StepPolicy::Fixed,
        }
    }

    pub fn with_start(mut self, start: Vector) -> Self {
        self.start = Some(start);
        self
    }

    pub fn start_point(&self, dim: usize) -> Result<Vector> {
        match &self.start {
            Some(s) => {
                s.check_dim(dim)?;
                Ok(s.clone())
            }
            None => Ok(Vector::zeros(dim)),
        }
    }

    pub fn build(&self, consts: &CertifiedConstants) -> Result<Box<dyn FirstOrderAlgorithm>> {
        if consts.iterations == 0 {
            return Err(Error::BadArgs("iterations must be >= 1".into()));
        }
        let start = self.start_point(consts.dim)?;
        Ok(match self.kind {
            AlgorithmKind::ProjectedSubgradient => {
                Box::new(ProjectedSubgradient::new(consts.clone(), start, self.step))
            }
            AlgorithmKind::NesterovAgd => {
                let l = consts
                    .smoothness
                    .ok_or_else(|| Error::BadArgs("accelerated gradient needs a smoothness constant".into()))?;
                Box::new(NesterovAgd::new(consts.clone(), start, l))
            }
            AlgorithmKind::Ellipsoid => Box::new(Ellipsoid::new(consts.clone())),
            AlgorithmKind::LatticeEnumerator => Box::new(LatticeEnumerator::new(consts.clone())),
        })
    }
}
