//! Runs one configured experiment and summarises it.

use std::time::Instant;

use inexact_core::algorithms::{lattice_points, AlgorithmConfig, AlgorithmKind};
use inexact_core::channel::{CertifiedConstants, RunTrace};
use inexact_core::oracles::{ApproxOracle, ApproxSeparationOracle, Constraint, ConstraintSpec, ObjectiveSpec};
use inexact_core::transfer::{
    inflated_smoothness, LipschitzTransfer, Mediator, Repair, SeparationTransfer, SmoothTransfer, TransferParams,
};
use inexact_core::{check_convex_extensibility, ExtensibilityReport, FirstOrderSample, Vector};
use serde::{Deserialize, Serialize};

use crate::bounds::{predict, Bound, BoundContext};
use crate::config::{ExperimentConfig, GroundSet, Instance, TransferMode};
use crate::error::Result;

pub const SUMMARY_SCHEMA: &str = "inexact-summary v1";

/// How the optimal value used for gaps was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptSource {
    Config,
    ClosedForm,
    LatticeBruteForce,
    NumericEllipsoid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub point: Option<Vector>,
    pub source: OptSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub algorithm: String,
    pub rows: usize,
    pub constants: CertifiedConstants,
    pub final_point: Vector,
    pub final_value: f64,
    pub reference: Reference,
    pub final_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_feasible: Option<bool>,
    pub bound: Option<Bound>,
    pub bound_satisfied: Option<bool>,
    pub raw_extensibility: ExtensibilityReport,
    pub repaired_extensibility: ExtensibilityReport,
    pub audits_passed: bool,
    pub wall_time_ms: f64,
}

pub struct Experiment {
    pub trace: RunTrace,
    pub summary: Summary,
}

/// Constants handed to the algorithm: those of the instance the repair certifies.
pub fn certified_constants(cfg: &ExperimentConfig, inst: &Instance) -> CertifiedConstants {
    let obj = &inst.objective;
    let eta = cfg.noise.eta;
    let inflated = obj.lipschitz() + eta / (2.0 * cfg.radius);
    let eta_c = inst.separation.as_ref().map_or(0.0, ApproxSeparationOracle::eta_c);
    let (lipschitz, smoothness) = match cfg.transfer {
        TransferMode::None => (obj.lipschitz(), obj.smoothness()),
        TransferMode::Lipschitz | TransferMode::Constrained => (inflated, obj.smoothness()),
        TransferMode::Smooth => (
            inflated,
            obj.smoothness()
                .map(|a| inflated_smoothness(a, cfg.dimension, cfg.iterations)),
        ),
    };
    let inner_radius = inst.constraint.as_ref().map(|c| match cfg.transfer {
        TransferMode::Constrained => c.rho() - eta_c,
        _ => c.rho(),
    });
    CertifiedConstants {
        dim: cfg.dimension,
        lipschitz,
        smoothness,
        radius: cfg.radius,
        inner_radius,
        iterations: cfg.iterations,
    }
}

/// Executes the configured (wrapped or naive) run.
pub fn execute(cfg: &ExperimentConfig, inst: &Instance, consts: &CertifiedConstants) -> Result<RunTrace> {
    let d = cfg.dimension;
    let params = TransferParams {
        lipschitz: inst.objective.lipschitz(),
        radius: cfg.radius,
        eta: cfg.noise.eta,
    };
    let repair = match cfg.transfer {
        TransferMode::None => Repair::None,
        TransferMode::Lipschitz | TransferMode::Constrained => Repair::Lipschitz(LipschitzTransfer::new(d, params)?),
        TransferMode::Smooth => {
            let alpha = inst.objective.smoothness().expect("validated smooth objective");
            Repair::Smooth(SmoothTransfer::new(
                d,
                params,
                alpha,
                cfg.iterations,
                cfg.estimator_or_default(),
            )?)
        }
    };
    let mut mediator = Mediator::new(&inst.oracle, cfg.radius, cfg.iterations, repair);
    if let Some(sep) = &inst.separation {
        let st = match cfg.transfer {
            TransferMode::Constrained => Some(SeparationTransfer::new(d, cfg.radius, sep.eta_c(), sep.constraint().rho())?),
            _ => None,
        };
        mediator = mediator.with_separation(sep, st);
    }
    let mut alg = cfg.algorithm.build(consts)?;
    Ok(mediator.run(alg.as_mut())?)
}

fn feasible(c: Option<&Constraint>, x: &Vector) -> Result<bool> {
    Ok(match c {
        Some(c) => c.contains(x)?,
        None => true,
    })
}

/// Optimal value over the ground set intersected with the feasible set.
pub fn reference_optimum(cfg: &ExperimentConfig, inst: &Instance) -> Result<Reference> {
    let obj = &inst.objective;
    let c = inst.constraint.as_ref();
    if let Some(v) = cfg.opt_value {
        return Ok(Reference {
            value: v,
            point: None,
            source: OptSource::Config,
        });
    }
    if cfg.ground_set == GroundSet::IntegerLattice {
        let mut best: Option<(f64, Vector)> = None;
        for p in lattice_points(cfg.dimension, cfg.radius) {
            if feasible(c, &p)? {
                let v = obj.value(&p)?;
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, p));
                }
            }
        }
        let (value, point) = best.ok_or(inexact_core::Error::NoFeasiblePoint)?;
        return Ok(Reference {
            value,
            point: Some(point),
            source: OptSource::LatticeBruteForce,
        });
    }
    if let Some(p) = closed_form_minimiser(cfg, inst)? {
        return Ok(Reference {
            value: obj.value(&p)?,
            point: Some(p),
            source: OptSource::ClosedForm,
        });
    }
    // Exact-oracle ellipsoid run long enough to reach float resolution.
    let d = cfg.dimension;
    let t = 60 * d * (d + 1) + 100;
    let consts = CertifiedConstants {
        dim: d,
        lipschitz: obj.lipschitz(),
        smoothness: None,
        radius: cfg.radius,
        inner_radius: c.map(Constraint::rho),
        iterations: t,
    };
    let oracle = ApproxOracle::exact(obj.clone());
    let sep = c.map(|c| ApproxSeparationOracle::exact(c.clone()));
    let mut m = Mediator::new(&oracle, cfg.radius, t, Repair::None);
    if let Some(s) = &sep {
        m = m.with_separation(s, None);
    }
    let mut alg = AlgorithmConfig::new(AlgorithmKind::Ellipsoid).build(&consts)?;
    let trace = m.run(alg.as_mut())?;
    let p = trace.final_point.expect("ellipsoid reports a point");
    Ok(Reference {
        value: obj.value(&p)?,
        point: Some(p),
        source: OptSource::NumericEllipsoid,
    })
}

fn closed_form_minimiser(cfg: &ExperimentConfig, inst: &Instance) -> Result<Option<Vector>> {
    let Some(m) = inst.objective.minimizer() else {
        return Ok(None);
    };
    let in_ball = m.norm() <= cfg.radius;
    if in_ball && feasible(inst.constraint.as_ref(), m)? {
        return Ok(Some(m.clone()));
    }
    // Isotropic objectives are minimised by the Euclidean projection onto a ball.
    let isotropic = matches!(
        cfg.objective,
        ObjectiveSpec::Quadratic { .. } | ObjectiveSpec::EuclideanNorm { .. }
    );
    if !isotropic {
        return Ok(None);
    }
    match &cfg.constraint {
        None => Ok(Some(m.project_to_ball(cfg.radius))),
        Some(ConstraintSpec::Ball { center, radius }) => {
            let dir = m.sub(center);
            let n = dir.norm();
            Ok(Some(center.add_scaled(radius / n, &dir)))
        }
        Some(_) => Ok(None),
    }
}

fn extensibility(rows: &[(Vector, f64, Vector)]) -> Result<ExtensibilityReport> {
    let scale = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    let pairs: Vec<FirstOrderSample> = rows
        .iter()
        .map(|(x, f, g)| FirstOrderSample::new(x.clone(), *f, g.clone()))
        .collect();
    Ok(check_convex_extensibility(&pairs, 1e-9 * (1.0 + scale))?)
}

/// Runs the experiment, fills the best-so-far gap column and audits the outcome.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    let start = Instant::now();
    let inst = cfg.instance()?;
    let consts = certified_constants(cfg, &inst);
    let mut trace = execute(cfg, &inst, &consts)?;
    let reference = reference_optimum(cfg, &inst)?;
    let c = inst.constraint.as_ref();

    let mut best: Option<f64> = None;
    for row in &mut trace.rows {
        if feasible(c, &row.x)? {
            best = Some(best.map_or(row.exact_value, |b| b.min(row.exact_value)));
        }
        row.best_gap = best.map(|b| b - reference.value);
    }

    let final_point = trace.final_point.clone().expect("runs report a point");
    let final_value = inst.objective.value(&final_point)?;
    let final_gap = final_value - reference.value;
    let final_feasible = c.map(|c| c.contains(&final_point)).transpose()?;
    let (diameter, rho) = match c {
        Some(c) => (c.diameter(), c.rho()),
        None => (2.0 * cfg.radius, cfg.radius),
    };
    let start_distance = match (&reference.point, cfg.algorithm.start_point(cfg.dimension)?) {
        (Some(p), s) => Some(p.distance(&s)),
        (None, _) => None,
    };
    let bound = predict(&BoundContext {
        config: cfg,
        constants: &consts,
        objective_lipschitz: inst.objective.lipschitz(),
        start_distance,
        diameter,
        rho,
        rows: &trace.rows,
    });
    let bound_satisfied = bound.map(|b| final_gap <= b.total);

    let raw: Vec<_> = trace
        .rows
        .iter()
        .map(|r| (r.x.clone(), r.raw_value, r.raw_grad.clone()))
        .collect();
    let repaired: Vec<_> = trace
        .rows
        .iter()
        .map(|r| (r.x.clone(), r.value, r.grad.clone()))
        .collect();
    let raw_extensibility = extensibility(&raw)?;
    let repaired_extensibility = extensibility(&repaired)?;
    let repair_audited = matches!(cfg.transfer, TransferMode::Lipschitz | TransferMode::Constrained);
    let audits_passed = bound_satisfied != Some(false)
        && final_feasible != Some(false)
        && (!repair_audited || repaired_extensibility.extensible);

    let summary = Summary {
        schema: SUMMARY_SCHEMA.into(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        algorithm: cfg.algorithm.build(&consts)?.name().into(),
        rows: trace.rows.len(),
        constants: consts,
        final_point,
        final_value,
        reference,
        final_gap,
        final_feasible,
        bound,
        bound_satisfied,
        raw_extensibility,
        repaired_extensibility,
        audits_passed,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Experiment { trace, summary })
}
