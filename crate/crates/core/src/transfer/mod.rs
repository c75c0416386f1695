//! Repair procedures that make approximate responses exactly consistent with a
//! nearby instance, and the channels that apply them.

pub mod lipschitz;
pub mod mediator;
pub mod nnls;
pub mod separation;
pub mod smooth;
pub mod smoothing;

pub use lipschitz::{LipschitzTransfer, Repaired, TransferParams};
pub use mediator::{run_direct, run_wrapped, run_wrapped_constrained, run_wrapped_smooth, Mediator, Repair};
pub use separation::{cone_project_unit, SeparationTransfer, SEPARATION_TOL};
pub use smooth::{eta_limit, inflated_smoothness, SmoothRepaired, SmoothTransfer};
pub use smoothing::{
    envelope_segments, smooth_exact_1d, smooth_monte_carlo, EnvelopeSegment, EstimatorMode, Smoothed,
    SmoothingEstimator,
};
