//! Exact test instances, η-approximate oracles and oracle-parameter conversion.

pub mod constraint;
pub mod devolder;
pub mod noise;
pub mod objective;

pub use constraint::{Constraint, ConstraintSpec, Flag, Separation};
pub use devolder::{devolder_params, DevolderParams, OracleClass};
pub use noise::{
    ApproxOracle, ApproxSeparationOracle, NoiseKind, NoiseModel, RotationPolicy, SeparationAnswer,
    SeparationNoiseModel,
};
pub use objective::{Objective, ObjectiveSpec};
