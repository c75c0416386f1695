//! One-axis parameter sweeps, run in parallel and aggregated into CSV.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, TransferMode};
use crate::csv_io::{fmt_f64, write_file};
use crate::error::{HarnessError, Result};
use crate::experiment::run_experiment;

pub const SWEEP_MAGIC: &str = "# inexact-sweep v1";
pub const SWEEP_COLUMNS: [&str; 9] = [
    "axis",
    "axis_value",
    "transfer",
    "iterations",
    "eta",
    "epsilon",
    "final_gap",
    "bound",
    "bound_satisfied",
];

#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    Eta(Vec<f64>),
    Iterations(Vec<usize>),
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Eta(_) => "eta",
            Axis::Iterations(_) => "T",
        }
    }

    fn len(&self) -> usize {
        match self {
            Axis::Eta(v) => v.len(),
            Axis::Iterations(v) => v.len(),
        }
    }

    /// Parses `eta=0,1e-3` or `T=25,100`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, values) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::BadGrid(format!("expected axis=v1,v2,…, got `{s}`")))?;
        let items: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        let bad = |v: &str| HarnessError::BadGrid(format!("bad {name} value `{v}`"));
        let axis = match name.trim() {
            "eta" => Axis::Eta(items.iter().map(|v| v.parse().map_err(|_| bad(v))).collect::<Result<_>>()?),
            "T" | "iterations" => {
                Axis::Iterations(items.iter().map(|v| v.parse().map_err(|_| bad(v))).collect::<Result<_>>()?)
            }
            other => return Err(HarnessError::BadGrid(format!("unknown axis `{other}`"))),
        };
        if axis.len() == 0 {
            return Err(HarnessError::BadGrid("empty grid".into()));
        }
        Ok(axis)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Transfer modes to run at each grid point; empty means the config's own.
    pub transfers: Vec<TransferMode>,
    /// On a `T` axis, couple accuracy to the horizon: `ε = MR/√T`, `η = ε³/(M²R²)`.
    pub recipe: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub axis_value: f64,
    pub transfer: TransferMode,
    pub iterations: usize,
    pub eta: f64,
    pub epsilon: Option<f64>,
    pub final_gap: f64,
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
}

struct Point {
    cfg: ExperimentConfig,
    axis_value: f64,
    epsilon: Option<f64>,
}

fn grid(base: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<Point>> {
    if spec.axis.len() == 0 {
        return Err(HarnessError::BadGrid("empty grid".into()));
    }
    let m = base.instance()?.objective.lipschitz();
    let r = base.radius;
    let transfers = if spec.transfers.is_empty() {
        vec![base.transfer]
    } else {
        spec.transfers.clone()
    };
    let mut out = Vec::new();
    for &transfer in &transfers {
        let mut cfg = base.clone();
        cfg.transfer = transfer;
        match &spec.axis {
            Axis::Eta(etas) => {
                if spec.recipe {
                    return Err(HarnessError::BadGrid("the accuracy recipe needs a T axis".into()));
                }
                for &eta in etas {
                    let mut c = cfg.clone();
                    c.noise.eta = eta;
                    out.push(Point {
                        cfg: c,
                        axis_value: eta,
                        epsilon: None,
                    });
                }
            }
            Axis::Iterations(ts) => {
                for &t in ts {
                    let mut c = cfg.clone();
                    c.iterations = t;
                    let epsilon = spec.recipe.then(|| m * r / (t as f64).sqrt());
                    if let Some(e) = epsilon {
                        c.noise.eta = e.powi(3) / (m * m * r * r);
                    }
                    out.push(Point {
                        cfg: c,
                        axis_value: t as f64,
                        epsilon,
                    });
                }
            }
        }
    }
    for p in &out {
        p.cfg.validate()?;
    }
    Ok(out)
}

/// Runs every grid point (in parallel) and returns rows in grid order.
pub fn sweep(base: &ExperimentConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let axis = spec.axis.name();
    grid(base, spec)?
        .into_par_iter()
        .map(|p| {
            let exp = run_experiment(&p.cfg)?;
            let s = exp.summary;
            Ok(SweepRow {
                axis: axis.into(),
                axis_value: p.axis_value,
                transfer: p.cfg.transfer,
                iterations: p.cfg.iterations,
                eta: p.cfg.noise.eta,
                epsilon: p.epsilon,
                final_gap: s.final_gap,
                bound: s.bound.map(|b| b.total),
                bound_satisfied: s.bound_satisfied,
            })
        })
        .collect()
}

pub fn sweep_to_string(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.axis.clone(),
            fmt_f64(r.axis_value),
            r.transfer.as_str().into(),
            r.iterations.to_string(),
            fmt_f64(r.eta),
            r.epsilon.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.final_gap),
            r.bound.map(fmt_f64).unwrap_or_default(),
            r.bound_satisfied.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| HarnessError::Schema(e.to_string()))?)
        .expect("csv is utf-8");
    Ok(format!("{SWEEP_MAGIC}\n{body}"))
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_file(path, &sweep_to_string(rows)?)
}
