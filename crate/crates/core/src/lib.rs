//! Running exact-oracle convex optimisation algorithms on inexact oracles.
//!
//! The crate provides η-approximate first-order and separation oracles over
//! a small family of test instances, the online repair procedures that turn
//! their responses into data exactly consistent with a nearby instance, and
//! reference algorithms that talk to either through a [`channel::Channel`].

pub mod algorithms;
pub mod channel;
pub mod error;
pub mod extensibility;
pub mod halfspace;
pub mod oracles;
pub mod pwmax;
pub mod sampling;
pub mod transfer;
pub mod vector;

pub use error::{Error, Result};
pub use extensibility::{check_convex_extensibility, ExtensibilityReport, FirstOrderSample};
pub use halfspace::Halfspace;
pub use pwmax::{AffinePiece, PiecewiseMaxFunction, TieBreak};
pub use vector::Vector;
