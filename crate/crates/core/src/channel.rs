//! The only interface between an optimisation algorithm and its oracles.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::halfspace::Halfspace;
use crate::oracles::{Flag, Separation};
use crate::vector::Vector;

/// What an algorithm receives for one query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub value: f64,
    pub grad: Vector,
    /// Present only when a constraint set is being separated.
    pub separation: Option<Separation>,
}

impl Response {
    pub fn is_feasible(&self) -> bool {
        self.separation.as_ref().is_none_or(Separation::is_feasible)
    }

    pub fn bit_eq(&self, other: &Response) -> bool {
        self.value.to_bits() == other.value.to_bits()
            && self.grad.bit_eq(&other.grad)
            && match (&self.separation, &other.separation) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    a.flag == b.flag
                        && match (&a.normal, &b.normal) {
                            (None, None) => true,
                            (Some(u), Some(v)) => u.bit_eq(v),
                            _ => false,
                        }
                }
                _ => false,
            }
    }
}

/// Query/response exchange. Implementations enforce the query domain and budget.
pub trait Channel {
    fn dim(&self) -> usize;
    fn exchange(&mut self, x: &Vector) -> Result<Response>;
}

/// Constants an algorithm may use to pick step sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedConstants {
    pub dim: usize,
    /// Lipschitz constant of the instance the algorithm is solving.
    pub lipschitz: f64,
    /// Gradient Lipschitz constant, for smooth instances.
    pub smoothness: Option<f64>,
    /// Radius of the ball containing every query.
    pub radius: f64,
    /// Inscribed-ball radius of the feasible set, for constrained instances.
    pub inner_radius: Option<f64>,
    /// Number of exchanges the algorithm may make.
    pub iterations: usize,
}

/// A black-box first-order method.
pub trait FirstOrderAlgorithm {
    fn name(&self) -> &'static str;

    /// Runs to completion and reports a point.
    fn run(&mut self, channel: &mut dyn Channel) -> Result<Vector>;
}

/// One mediated exchange.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// One-based query index.
    pub t: usize,
    pub x: Vector,
    pub raw_value: f64,
    pub raw_grad: Vector,
    pub value: f64,
    pub grad: Vector,
    /// Downward shift applied to the new piece (`s*` or the smoothing shift).
    pub shift: f64,
    pub raw_flag: Option<Flag>,
    pub raw_normal: Option<Vector>,
    pub flag: Option<Flag>,
    pub normal: Option<Vector>,
    pub exact_value: f64,
    pub best_gap: Option<f64>,
    pub mc_stderr: Option<f64>,
}

impl TraceRow {
    pub fn response(&self) -> Response {
        Response {
            value: self.value,
            grad: self.grad.clone(),
            separation: self.flag.map(|flag| Separation {
                flag,
                normal: self.normal.clone(),
            }),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub final_point: Option<Vector>,
    /// Outer approximation `K_T` (constrained runs).
    pub halfspaces: Vec<Halfspace>,
    /// Points answered feasible (constrained runs).
    pub feasible_points: Vec<Vector>,
}

impl RunTrace {
    pub fn queries(&self) -> impl Iterator<Item = &Vector> {
        self.rows.iter().map(|r| &r.x)
    }
}
