//! Channels that sit between an algorithm and approximate oracles.
//!
//! A [`Mediator`] asks the oracles, optionally repairs the responses, records
//! a trace row and hands the algorithm only the (repaired) response.

use super::lipschitz::{LipschitzTransfer, TransferParams};
use super::separation::SeparationTransfer;
use super::smooth::SmoothTransfer;
use super::smoothing::SmoothingEstimator;
use crate::channel::{Channel, FirstOrderAlgorithm, Response, RunTrace, TraceRow};
use crate::error::{Error, Result};
use crate::oracles::{ApproxOracle, ApproxSeparationOracle};
use crate::vector::Vector;

/// How first-order responses are post-processed.
#[derive(Clone, Debug)]
pub enum Repair {
    /// Forward raw responses.
    None,
    Lipschitz(LipschitzTransfer),
    Smooth(SmoothTransfer),
}

pub struct Mediator<'a> {
    oracle: &'a ApproxOracle,
    separation: Option<&'a ApproxSeparationOracle>,
    repair: Repair,
    separation_repair: Option<SeparationTransfer>,
    radius: f64,
    budget: usize,
    trace: RunTrace,
}

impl<'a> Mediator<'a> {
    pub fn new(oracle: &'a ApproxOracle, radius: f64, budget: usize, repair: Repair) -> Self {
        Mediator {
            oracle,
            separation: None,
            repair,
            separation_repair: None,
            radius,
            budget,
            trace: RunTrace::default(),
        }
    }

    /// Adds a separation oracle; `repair` enables the outer-approximation repair.
    pub fn with_separation(
        mut self,
        separation: &'a ApproxSeparationOracle,
        repair: Option<SeparationTransfer>,
    ) -> Self {
        self.separation = Some(separation);
        self.separation_repair = repair;
        self
    }

    pub fn repair(&self) -> &Repair {
        &self.repair
    }

    pub fn separation_repair(&self) -> Option<&SeparationTransfer> {
        self.separation_repair.as_ref()
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn into_trace(mut self, final_point: Option<Vector>) -> RunTrace {
        self.trace.final_point = final_point;
        if let Some(st) = &self.separation_repair {
            self.trace.halfspaces = st.halfspaces().to_vec();
            self.trace.feasible_points = st.feasible_points().to_vec();
        }
        self.trace
    }

    /// Drives `algorithm` to completion through this mediator.
    pub fn run(mut self, algorithm: &mut dyn FirstOrderAlgorithm) -> Result<RunTrace> {
        let point = algorithm.run(&mut self)?;
        Ok(self.into_trace(Some(point)))
    }
}

impl Channel for Mediator<'_> {
    fn dim(&self) -> usize {
        self.oracle.objective().dim()
    }

    fn exchange(&mut self, x: &Vector) -> Result<Response> {
        let t = self.trace.rows.len() + 1;
        if t > self.budget {
            return Err(Error::ExchangeBudget { budget: self.budget });
        }
        x.check_dim(self.dim())?;
        let norm = x.norm();
        if !(norm <= self.radius * (1.0 + 1e-12)) {
            return Err(Error::AlgorithmQueryOutOfBall {
                t,
                norm,
                radius: self.radius,
            });
        }
        let (raw_value, raw_grad) = self.oracle.query(x, t)?;
        let exact_value = self.oracle.objective().value(x)?;
        let (value, grad, shift, mc_stderr) = match &mut self.repair {
            Repair::None => (raw_value, raw_grad.clone(), 0.0, None),
            Repair::Lipschitz(tr) => {
                let r = tr.step(x, raw_value, &raw_grad)?;
                (r.value, r.grad, r.shift, None)
            }
            Repair::Smooth(tr) => {
                let r = tr.step(x, raw_value, &raw_grad)?;
                (r.value, r.grad, r.shift, r.stderr)
            }
        };
        let (raw_sep, sep) = match self.separation {
            None => (None, None),
            Some(oracle) => {
                let ans = oracle.query(x, t)?;
                let repaired = match &mut self.separation_repair {
                    Some(st) => st.step(x, &ans.response, ans.exact_normal.as_ref())?,
                    None => ans.response.clone(),
                };
                (Some(ans.response), Some(repaired))
            }
        };
        let row = TraceRow {
            t,
            x: x.clone(),
            raw_value,
            raw_grad,
            value,
            grad,
            shift,
            raw_flag: raw_sep.as_ref().map(|s| s.flag),
            raw_normal: raw_sep.and_then(|s| s.normal),
            flag: sep.as_ref().map(|s| s.flag),
            normal: sep.as_ref().and_then(|s| s.normal.clone()),
            exact_value,
            best_gap: None,
            mc_stderr,
        };
        let response = row.response();
        self.trace.rows.push(row);
        Ok(response)
    }
}

fn params_for(oracle: &ApproxOracle) -> TransferParams {
    let obj = oracle.objective();
    TransferParams {
        lipschitz: obj.lipschitz(),
        radius: obj.radius(),
        eta: oracle.eta(),
    }
}

/// Runs `algorithm` against the raw oracles, no repair.
pub fn run_direct(
    algorithm: &mut dyn FirstOrderAlgorithm,
    oracle: &ApproxOracle,
    separation: Option<&ApproxSeparationOracle>,
    iterations: usize,
) -> Result<RunTrace> {
    let mut m = Mediator::new(oracle, oracle.objective().radius(), iterations, Repair::None);
    if let Some(sep) = separation {
        m = m.with_separation(sep, None);
    }
    m.run(algorithm)
}

/// Unconstrained run through the Lipschitz repair.
pub fn run_wrapped(
    algorithm: &mut dyn FirstOrderAlgorithm,
    oracle: &ApproxOracle,
    iterations: usize,
) -> Result<RunTrace> {
    let tr = LipschitzTransfer::new(oracle.objective().dim(), params_for(oracle))?;
    Mediator::new(oracle, oracle.objective().radius(), iterations, Repair::Lipschitz(tr)).run(algorithm)
}

/// Unconstrained run through the smooth repair; `alpha` is the objective's smoothness.
pub fn run_wrapped_smooth(
    algorithm: &mut dyn FirstOrderAlgorithm,
    oracle: &ApproxOracle,
    alpha: f64,
    iterations: usize,
    estimator: SmoothingEstimator,
) -> Result<RunTrace> {
    let obj = oracle.objective();
    let tr = SmoothTransfer::new(obj.dim(), params_for(oracle), alpha, iterations, estimator)?;
    Mediator::new(oracle, obj.radius(), iterations, Repair::Smooth(tr)).run(algorithm)
}

/// Constrained run: Lipschitz repair of first-order pairs plus separation repair.
pub fn run_wrapped_constrained(
    algorithm: &mut dyn FirstOrderAlgorithm,
    oracle: &ApproxOracle,
    separation: &ApproxSeparationOracle,
    iterations: usize,
) -> Result<RunTrace> {
    let obj = oracle.objective();
    let c = separation.constraint();
    let tr = LipschitzTransfer::new(obj.dim(), params_for(oracle))?;
    let st = SeparationTransfer::new(obj.dim(), obj.radius(), separation.eta_c(), c.rho())?;
    Mediator::new(oracle, obj.radius(), iterations, Repair::Lipschitz(tr))
        .with_separation(separation, Some(st))
        .run(algorithm)
}
