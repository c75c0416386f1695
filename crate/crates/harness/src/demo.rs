//! Canned experiments, one per scenario the library is built around.

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, Experiment};
use crate::verify::{audit, VerifyReport};

pub const DEMOS: [&str; 5] = ["figure1", "lipschitz", "smooth", "ellipsoid", "lattice"];

const FIGURE1: &str = r#"{
  "dimension": 1,
  "radius": 1.0,
  "objective": {"kind": "max-affine", "slopes": [[0.0]], "intercepts": [0.0]},
  "algorithm": {"kind": "projected-subgradient", "start": [0.5]},
  "noise": {"kind": "adversarial-slope-flip", "eta": 0.1},
  "transfer": "lipschitz",
  "iterations": 10
}"#;

const LIPSCHITZ: &str = r#"{
  "dimension": 1,
  "radius": 1.0,
  "objective": {"kind": "abs-distance", "center": [0.3]},
  "algorithm": {"kind": "projected-subgradient"},
  "noise": {"kind": "uniform-random", "eta": 0.001, "seed": 1},
  "transfer": "lipschitz",
  "iterations": 100
}"#;

const SMOOTH: &str = r#"{
  "dimension": 2,
  "radius": 1.0,
  "objective": {"kind": "quadratic", "center": [0.0, 0.0], "alpha": 1.0},
  "algorithm": {"kind": "nesterov-agd", "start": [1.0, 0.0]},
  "noise": {"kind": "uniform-random", "eta": 0.0006666666666666666, "seed": 1},
  "transfer": "smooth",
  "iterations": 30,
  "estimator": {"mode": "monte-carlo", "samples": 4096, "seed": 1}
}"#;

const ELLIPSOID: &str = r#"{
  "dimension": 2,
  "radius": 1.0,
  "objective": {"kind": "max-affine", "slopes": [[1.0, 0.0]], "intercepts": [0.0]},
  "constraint": {"kind": "ball", "center": [0.0, 0.0], "radius": 0.8},
  "algorithm": {"kind": "ellipsoid"},
  "sep_noise": {"eta_c": 0.05, "seed": 1, "policy": "adversarial-toward-deep"},
  "transfer": "constrained",
  "iterations": 60
}"#;

const LATTICE: &str = r#"{
  "dimension": 2,
  "radius": 3.0,
  "objective": {"kind": "quadratic", "center": [1.2, 0.4], "alpha": 2.0},
  "constraint": {"kind": "ball", "center": [0.0, 0.0], "radius": 2.5},
  "ground_set": "integer-lattice",
  "algorithm": {"kind": "lattice-enumerator"},
  "noise": {"kind": "uniform-random", "eta": 0.01, "seed": 1},
  "sep_noise": {"eta_c": 0.1, "seed": 1, "policy": "random-rotation"},
  "transfer": "constrained",
  "iterations": 40
}"#;

pub fn demo_config(name: &str) -> Result<ExperimentConfig> {
    let text = match name {
        "figure1" => FIGURE1,
        "lipschitz" => LIPSCHITZ,
        "smooth" => SMOOTH,
        "ellipsoid" => ELLIPSOID,
        "lattice" => LATTICE,
        other => return Err(HarnessError::UnknownDemo(other.into())),
    };
    ExperimentConfig::from_json(text)
}

pub struct DemoOutcome {
    pub config: ExperimentConfig,
    pub experiment: Experiment,
    pub report: VerifyReport,
    pub passed: bool,
}

/// Runs a demo and its audits. The figure1 demo also requires the raw
/// responses to be inconsistent, since that is what it demonstrates.
pub fn run_demo(name: &str) -> Result<DemoOutcome> {
    let config = demo_config(name)?;
    let experiment = run_experiment(&config)?;
    let report = audit(&config, &experiment)?;
    let mut passed = report.passed() && experiment.summary.audits_passed;
    if name == "figure1" {
        passed &= !experiment.summary.raw_extensibility.extensible;
    }
    Ok(DemoOutcome {
        config,
        experiment,
        report,
        passed,
    })
}
