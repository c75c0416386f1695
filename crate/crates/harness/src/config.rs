//! Experiment configuration: a JSON document validated against a fixed schema.

use std::path::{Path, PathBuf};

use inexact_core::algorithms::{AlgorithmConfig, AlgorithmKind};
use inexact_core::oracles::{
    ApproxOracle, ApproxSeparationOracle, Constraint, ConstraintSpec, NoiseModel, Objective, ObjectiveSpec,
    SeparationNoiseModel,
};
use inexact_core::transfer::{eta_limit, EstimatorMode, SmoothingEstimator};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, HarnessError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundSet {
    #[default]
    Continuous,
    IntegerLattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferMode {
    /// Raw responses forwarded unrepaired (the naive baseline).
    None,
    Lipschitz,
    Smooth,
    /// Lipschitz repair of first-order pairs plus separation repair.
    Constrained,
}

impl TransferMode {
    pub const ALL: [TransferMode; 4] = [
        TransferMode::None,
        TransferMode::Lipschitz,
        TransferMode::Smooth,
        TransferMode::Constrained,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransferMode::None => "none",
            TransferMode::Lipschitz => "lipschitz",
            TransferMode::Smooth => "smooth",
            TransferMode::Constrained => "constrained",
        }
    }
}

impl std::str::FromStr for TransferMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        TransferMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown transfer mode `{s}`")))
    }
}

/// Where a run writes its trace; the summary goes next to it with a `.json` extension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub radius: f64,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintSpec>,
    #[serde(default)]
    pub ground_set: GroundSet,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sep_noise: Option<SeparationNoiseModel>,
    pub transfer: TransferMode,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<SmoothingEstimator>,
    /// Seeds the audit sampling in verification.
    #[serde(default)]
    pub seed: u64,
    /// Known optimal value; overrides the reference computation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
}

/// Oracles and constants built from a validated config.
pub struct Instance {
    pub objective: Objective,
    pub oracle: ApproxOracle,
    pub constraint: Option<Constraint>,
    pub separation: Option<ApproxSeparationOracle>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON form, output paths excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let canon = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }

    pub fn estimator_or_default(&self) -> SmoothingEstimator {
        self.estimator.unwrap_or_default()
    }

    /// Checks every cross-field rule and builds the oracles.
    pub fn instance(&self) -> Result<Instance> {
        let d = self.dimension;
        if d == 0 {
            return Err(HarnessError::Invalid("dimension must be >= 1".into()));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(HarnessError::Invalid(format!("radius must be > 0, got {}", self.radius)));
        }
        if self.iterations == 0 {
            return Err(HarnessError::Invalid("iterations must be >= 1".into()));
        }
        self.algorithm.start_point(d)?;
        let objective = Objective::new(self.objective.clone(), d, self.radius)?;
        let oracle = ApproxOracle::new(objective.clone(), self.noise.clone())?;
        let constraint = self
            .constraint
            .as_ref()
            .map(|c| Constraint::new(c.clone(), d, self.radius))
            .transpose()?;
        let separation = match (&constraint, &self.sep_noise) {
            (Some(c), Some(n)) => Some(ApproxSeparationOracle::new(c.clone(), n.clone())?),
            (Some(c), None) => Some(ApproxSeparationOracle::exact(c.clone())),
            (None, Some(_)) => return Err(HarnessError::Invalid("sep_noise given without a constraint".into())),
            (None, None) => None,
        };
        let lattice_alg = self.algorithm.kind == AlgorithmKind::LatticeEnumerator;
        let lattice_set = self.ground_set == GroundSet::IntegerLattice;
        if lattice_alg != lattice_set {
            return Err(HarnessError::Invalid(
                "the integer-lattice ground set goes with the lattice-enumerator algorithm and vice versa".into(),
            ));
        }
        match self.transfer {
            TransferMode::Smooth => {
                let alpha = objective
                    .smoothness()
                    .ok_or_else(|| HarnessError::Invalid("transfer=smooth needs a smooth objective".into()))?;
                let limit = eta_limit(alpha, self.radius, self.iterations);
                if self.noise.eta > limit * (1.0 + 1e-12) {
                    return Err(inexact_core::Error::EtaTooLarge {
                        eta: self.noise.eta,
                        limit,
                    }
                    .into());
                }
                self.estimator_or_default().validate(d)?;
            }
            TransferMode::Constrained if constraint.is_none() => {
                return Err(HarnessError::Invalid("transfer=constrained needs a constraint".into()));
            }
            _ => {}
        }
        if let Some(est) = &self.estimator {
            if self.transfer != TransferMode::Smooth {
                return Err(HarnessError::Invalid("estimator is only used with transfer=smooth".into()));
            }
            if est.mode == EstimatorMode::Exact1d && d != 1 {
                return Err(inexact_core::Error::Exact1dInHighDim(d).into());
            }
        }
        Ok(Instance {
            objective,
            oracle,
            constraint,
            separation,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.instance().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "dimension": 1,
  "radius": 1.0,
  "objective": {"kind": "abs-distance", "center": [0.3]},
  "algorithm": {"kind": "projected-subgradient"},
  "noise": {"kind": "uniform-random", "eta": 0.001, "seed": 7},
  "transfer": "lipschitz",
  "iterations": 100
}"#;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.transfer, TransferMode::Lipschitz);
        assert_eq!(c.ground_set, GroundSet::Continuous);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn unknown_field_reports_position() {
        let bad = BASE.replace("\"iterations\"", "\"iteratons\"");
        match ExperimentConfig::from_json(&bad) {
            Err(HarnessError::Config { line, .. }) => assert!(line >= 8),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn hash_ignores_output_paths() {
        let a = ExperimentConfig::from_json(BASE).unwrap();
        let mut b = a.clone();
        b.output = Some(OutputPaths {
            trace: Some("x.csv".into()),
        });
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn smooth_needs_alpha_and_small_eta() {
        let c = BASE.replace("\"lipschitz\"", "\"smooth\"");
        assert!(matches!(ExperimentConfig::from_json(&c), Err(HarnessError::Invalid(_))));
        let q = c.replace(
            r#"{"kind": "abs-distance", "center": [0.3]}"#,
            r#"{"kind": "quadratic", "center": [0.3], "alpha": 1.0}"#,
        );
        // The limit is αR²/(5T) = 0.002.
        ExperimentConfig::from_json(&q).unwrap();
        let big = q.replace("0.001", "0.003");
        assert!(matches!(
            ExperimentConfig::from_json(&big),
            Err(HarnessError::Core(inexact_core::Error::EtaTooLarge { .. }))
        ));
    }

    #[test]
    fn constrained_needs_constraint() {
        let c = BASE.replace("\"lipschitz\"", "\"constrained\"");
        assert!(matches!(ExperimentConfig::from_json(&c), Err(HarnessError::Invalid(_))));
    }
}
