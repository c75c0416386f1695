//! Trace replay and the invariant audits run against it.
//!
//! A recorded trace is first replayed from its configuration and compared
//! field by field; any divergence is a [`HarnessError::TraceMismatch`]. The
//! repair state is then rebuilt from the raw responses and every suite for
//! the transfer mode is evaluated. Each check yields a margin (slack of the
//! inequality plus, for Monte Carlo quantities, three standard errors); a
//! suite passes when its worst margin is at least `−1e-9`.

use std::path::Path;

use inexact_core::channel::TraceRow;
use inexact_core::oracles::{Constraint, Flag, Objective};
use inexact_core::pwmax::SubgradientField;
use inexact_core::sampling::{keyed_rng, sample_ball};
use inexact_core::transfer::{
    envelope_segments, smooth_monte_carlo, EstimatorMode, LipschitzTransfer, Smoothed, SmoothingEstimator,
    SmoothTransfer, TransferParams,
};
use inexact_core::{PiecewiseMaxFunction, TieBreak, Vector};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Instance, TransferMode};
use crate::csv_io::{read_summary, read_trace, row_fields, summary_path, TRACE_COLUMNS};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, Experiment};

pub const MARGIN_TOL: f64 = 1e-9;
const SAMPLE_POINTS: usize = 500;
const BALL_POINTS: usize = 50;
const PROBES: usize = 20;
const EXTENSION_POINTS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub worst_margin: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// Accumulates the margins of one suite.
pub struct Suite {
    name: &'static str,
    checks: usize,
    worst: f64,
}

impl Suite {
    pub fn new(name: &'static str) -> Self {
        Suite {
            name,
            checks: 0,
            worst: f64::INFINITY,
        }
    }

    pub fn margin(&mut self, m: f64) {
        self.checks += 1;
        // NaN margins count as failures.
        self.worst = if m.is_nan() { f64::NEG_INFINITY } else { self.worst.min(m) };
    }

    /// A yes/no check: counted, and sinks the suite when false.
    pub fn holds(&mut self, ok: bool) {
        self.margin(if ok { f64::INFINITY } else { f64::NEG_INFINITY });
    }

    pub fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            checks: self.checks,
            worst_margin: self.worst,
            passed: self.worst >= -MARGIN_TOL,
        }
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(seed: u64, stream: u64) -> Self {
        Sampler {
            rng: keyed_rng(seed, stream, None),
        }
    }

    fn ball(&mut self, center: &Vector, radius: f64) -> Vector {
        sample_ball(center, radius, &mut self.rng)
    }
}

/// Compares recorded rows with a replay, reporting the first differing column.
pub fn compare_rows(recorded: &[TraceRow], replayed: &[TraceRow]) -> Result<()> {
    for (i, (a, b)) in recorded.iter().zip(replayed).enumerate() {
        let (fa, fb) = (row_fields(a), row_fields(b));
        if let Some(col) = (0..fa.len()).find(|&c| fa[c] != fb[c]) {
            return Err(HarnessError::TraceMismatch {
                row: i + 1,
                detail: format!("column {}: recorded `{}`, replay `{}`", TRACE_COLUMNS[col], fa[col], fb[col]),
            });
        }
    }
    if recorded.len() != replayed.len() {
        return Err(HarnessError::TraceMismatch {
            row: recorded.len().min(replayed.len()) + 1,
            detail: format!("recorded {} rows, replay produced {}", recorded.len(), replayed.len()),
        });
    }
    Ok(())
}

/// Replays `cfg`, checks it reproduces `recorded`, then audits the replay.
pub fn verify_trace(cfg: &ExperimentConfig, recorded: &[TraceRow]) -> Result<VerifyReport> {
    let exp = run_experiment(cfg)?;
    compare_rows(recorded, &exp.trace.rows)?;
    audit(cfg, &exp)
}

/// Verifies a trace file; the config comes from `config` or the summary sidecar.
pub fn verify_file(trace: &Path, config: Option<&Path>) -> Result<VerifyReport> {
    let file = read_trace(trace)?;
    let cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let cfg = read_summary(&summary_path(trace))?.config;
            cfg.validate()?;
            cfg
        }
    };
    if cfg.hash() != file.config_hash {
        return Err(HarnessError::TraceMismatch {
            row: 0,
            detail: format!("trace header names config {}, config hashes to {}", file.config_hash, cfg.hash()),
        });
    }
    verify_trace(&cfg, &file.rows)
}

/// Runs every suite that applies to the experiment's transfer mode.
pub fn audit(cfg: &ExperimentConfig, exp: &Experiment) -> Result<VerifyReport> {
    let inst = cfg.instance()?;
    let rows = &exp.trace.rows;
    let mut suites = vec![SuiteResult {
        name: "replay".into(),
        checks: rows.len(),
        worst_margin: 0.0,
        passed: true,
    }];
    match cfg.transfer {
        TransferMode::None => {}
        TransferMode::Lipschitz => suites.extend(lipschitz_suites(cfg, &inst, rows)?),
        TransferMode::Smooth => suites.extend(smooth_suites(cfg, &inst, rows)?),
        TransferMode::Constrained => {
            suites.extend(lipschitz_suites(cfg, &inst, rows)?);
            suites.extend(separation_suites(cfg, &inst, exp)?);
        }
    }
    suites.push(bound_suite(exp));
    Ok(VerifyReport {
        config_hash: cfg.hash(),
        suites,
    })
}

fn params(cfg: &ExperimentConfig, inst: &Instance) -> TransferParams {
    TransferParams {
        lipschitz: inst.objective.lipschitz(),
        radius: cfg.radius,
        eta: cfg.noise.eta,
    }
}

fn bound_suite(exp: &Experiment) -> SuiteResult {
    let s = &exp.summary;
    let mut suite = Suite::new("bound");
    if let Some(b) = s.bound {
        suite.margin(b.total - s.final_gap);
    }
    if let Some(f) = s.final_feasible {
        suite.holds(f);
    }
    suite.finish()
}

/// Extension, sandwich, final-function and monotonicity audits of the Lipschitz repair.
pub fn lipschitz_suites(cfg: &ExperimentConfig, inst: &Instance, rows: &[TraceRow]) -> Result<Vec<SuiteResult>> {
    let d = cfg.dimension;
    let p = params(cfg, inst);
    let mut tr = LipschitzTransfer::new(d, p)?;
    for r in rows {
        tr.step(&r.x, r.raw_value, &r.raw_grad)?;
    }
    let model = tr.model();
    let n = rows.len();
    let eta = p.eta;
    let f = |x: &Vector| inst.objective.value(x);
    let origin = Vector::zeros(d);
    let mut rng = Sampler::new(cfg.seed, 1);

    let mut ext = Suite::new("ft-ext");
    let mut approx = Suite::new("ft-approx");
    let mut fin = Suite::new("final-function");
    let mut mono = Suite::new("monotone");
    let delta = 2.0 * eta * n as f64;
    for (tau, r) in rows.iter().enumerate() {
        let pv = model.prefix_values(&r.x)?;
        let fx = f(&r.x)?;
        for (k, v) in pv.iter().enumerate().skip(tau) {
            ext.margin(-rel_diff(*v, r.value));
            approx.margin(v - (fx - 2.0 * eta * (k + 1) as f64));
        }
        ext.margin(p.inflated_lipschitz() - r.grad.norm());
        for _ in 0..PROBES {
            let z = rng.ball(&origin, cfg.radius);
            let pz = model.prefix_values(&z)?;
            let lin = r.value + r.grad.dot_diff(&z, &r.x);
            ext.margin(pz[tau] - lin);
            ext.margin(pz[n - 1] - lin);
        }
        fin.margin(-rel_diff(pv[n - 1].max(fx - delta), r.value));
    }
    for _ in 0..SAMPLE_POINTS {
        let x = rng.ball(&origin, cfg.radius);
        let px = model.prefix_values(&x)?;
        let fx = f(&x)?;
        for (k, v) in px.iter().enumerate() {
            approx.margin(fx + 2.0 * eta * (k + 1) as f64 - v);
            if k > 0 {
                mono.margin(v - px[k - 1]);
            }
        }
        fin.margin(delta - (px[n - 1].max(fx - delta) - fx).abs());
    }
    Ok(vec![ext.finish(), approx.finish(), fin.finish(), mono.finish()])
}

/// `h = max{F, f − s}`: the model completed by the shifted true objective.
pub struct FinalFunction<'a> {
    pub model: &'a PiecewiseMaxFunction,
    pub objective: &'a Objective,
    pub shift: f64,
}

impl SubgradientField for FinalFunction<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
        let (fv, fg) = self.objective.first_order(x).expect("probe inside the certified domain");
        let i = self.model.argmax(x).expect("nonempty model");
        let piece = &self.model.pieces()[i];
        let pv = piece.eval(x);
        if pv >= fv - self.shift {
            (pv, piece.slope.clone())
        } else {
            (fv - self.shift, fg)
        }
    }
}

impl FinalFunction<'_> {
    fn value(&self, x: f64) -> f64 {
        self.value_and_subgradient(&Vector::from([x])).0
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Ball smoothing of the final function at `x`.
///
/// One dimension with the exact estimator integrates `h` between the model's
/// breakpoints by adaptive quadrature, and the derivative is the exact
/// `(h(x + r) − h(x − r))/(2r)`. Otherwise Monte Carlo with sample set `key`.
pub fn smooth_final(h: &FinalFunction, x: &Vector, r: f64, est: &SmoothingEstimator, key: u64) -> Result<Smoothed> {
    let d = x.dim();
    if r == 0.0 {
        let (value, grad) = h.value_and_subgradient(x);
        return Ok(Smoothed {
            value,
            grad,
            value_stderr: 0.0,
            grad_stderr: Vector::zeros(d),
        });
    }
    match est.mode {
        EstimatorMode::MonteCarlo => Ok(smooth_monte_carlo(h, x, r, est, key)?),
        EstimatorMode::Exact1d => {
            let (lo, hi) = (x[0] - r, x[0] + r);
            let hv = |z: f64| h.value(z);
            let integral: f64 = envelope_segments(h.model, lo, hi)
                .iter()
                .map(|s| integrate(&hv, s.start, s.end, 1e-14))
                .sum();
            Ok(Smoothed {
                value: integral / (2.0 * r),
                grad: Vector::from([(hv(hi) - hv(lo)) / (2.0 * r)]),
                value_stderr: 0.0,
                grad_stderr: Vector::zeros(1),
            })
        }
    }
}

/// Replays the smooth repair from the raw responses.
pub fn replay_smooth(cfg: &ExperimentConfig, inst: &Instance, rows: &[TraceRow]) -> Result<SmoothTransfer> {
    let alpha = inst
        .objective
        .smoothness()
        .ok_or_else(|| HarnessError::Invalid("smooth audit needs a smooth objective".into()))?;
    let mut tr = SmoothTransfer::new(
        cfg.dimension,
        params(cfg, inst),
        alpha,
        cfg.iterations,
        cfg.estimator_or_default(),
    )?;
    for r in rows {
        tr.step(&r.x, r.raw_value, &r.raw_grad)?;
    }
    Ok(tr)
}

const KEY_BASE: u64 = 0x5EED_0000_0000;

/// `|S − f| ≤ ε + αr²/2` for the materialised `S = (max{F_T, f − s_{T+1}})_r`.
///
/// The points form a uniform grid of `[−R, R]` in one dimension and random
/// draws from `B(R)` otherwise.
pub fn closeness_suite(cfg: &ExperimentConfig, inst: &Instance, tr: &SmoothTransfer) -> Result<SuiteResult> {
    let n = tr.steps();
    let h = FinalFunction {
        model: tr.model(),
        objective: &inst.objective,
        shift: tr.cumulative_shift(n + 1),
    };
    let r = tr.radius_r();
    let allowed = h.shift + tr.alpha() * r * r / 2.0;
    let est = tr.estimator();
    let mut rng = Sampler::new(cfg.seed, 4);
    let mut suite = Suite::new("closeness");
    for i in 0..EXTENSION_POINTS {
        let x = if cfg.dimension == 1 {
            Vector::from([-cfg.radius + 2.0 * cfg.radius * i as f64 / (EXTENSION_POINTS - 1) as f64])
        } else {
            rng.ball(&Vector::zeros(cfg.dimension), cfg.radius)
        };
        let s = smooth_final(&h, &x, r, est, KEY_BASE + i as u64)?;
        suite.margin(allowed - (s.value - inst.objective.value(&x)?).abs() + 3.0 * s.value_stderr);
    }
    Ok(suite.finish())
}

/// `‖∇S(x) − ∇S(y)‖ ≤ α′‖x − y‖` over random pairs, half of them close together.
pub fn smoothness_suite(cfg: &ExperimentConfig, inst: &Instance, tr: &SmoothTransfer) -> Result<SuiteResult> {
    let n = tr.steps();
    let h = FinalFunction {
        model: tr.model(),
        objective: &inst.objective,
        shift: tr.cumulative_shift(n + 1),
    };
    let r = tr.radius_r();
    let alpha_prime = tr.inflated_smoothness();
    let est = tr.estimator();
    let origin = Vector::zeros(cfg.dimension);
    let mut rng = Sampler::new(cfg.seed, 5);
    let mut suite = Suite::new("smoothness");
    for i in 0..EXTENSION_POINTS {
        let x = rng.ball(&origin, cfg.radius);
        let y = if i % 2 == 0 {
            rng.ball(&x, r.max(1e-3 * cfg.radius)).project_to_ball(cfg.radius)
        } else {
            rng.ball(&origin, cfg.radius)
        };
        let key = KEY_BASE + 2 * (EXTENSION_POINTS + i) as u64;
        let sx = smooth_final(&h, &x, r, est, key)?;
        let sy = smooth_final(&h, &y, r, est, key + 1)?;
        let sigma = (sx.grad_stderr.norm_sq() + sy.grad_stderr.norm_sq()).sqrt();
        suite.margin(alpha_prime * x.distance(&y) + 3.0 * sigma - sx.grad.distance(&sy.grad));
    }
    Ok(suite.finish())
}

/// Under-bound, deep lower bound, ball protection, output stability and the final extension audits.
pub fn smooth_suites(cfg: &ExperimentConfig, inst: &Instance, rows: &[TraceRow]) -> Result<Vec<SuiteResult>> {
    let tr = replay_smooth(cfg, inst, rows)?;
    let model = tr.model();
    let n = rows.len();
    let r = tr.radius_r();
    let d = cfg.dimension;
    let eta = cfg.noise.eta;
    let obj = &inst.objective;
    let origin = Vector::zeros(d);
    let exact_mode = r == 0.0 || tr.estimator().mode == EstimatorMode::Exact1d;

    let mut rng = Sampler::new(cfg.seed, 2);
    let mut under = Suite::new("smooth-under");
    for _ in 0..SAMPLE_POINTS {
        let x = rng.ball(&origin, 4.0 * cfg.radius);
        under.margin(obj.value(&x)? - model.eval(&x)?);
    }

    let mut deep = Suite::new("smooth-deep");
    let mut protect = Suite::new("ball-protection");
    let mut stable = Suite::new("output-stability");
    for (k, row) in rows.iter().enumerate() {
        for _ in 0..BALL_POINTS {
            let z = rng.ball(&row.x, std::f64::consts::SQRT_2 * r);
            let pz = model.prefix_values(&z)?;
            let fz = obj.value(&z)?;
            for (t, v) in pz.iter().enumerate().skip(k) {
                deep.margin(v - (fz - tr.cumulative_shift(t + 2)));
                protect.margin(-(v - pz[k]).abs());
            }
        }
        if r == 0.0 {
            let a = model.active(&row.x, TieBreak::PreferNewest)?;
            stable.margin(-rel_diff(a.value, row.value));
        } else {
            let s = tr.smoothed_model_at(model, &row.x, row.t)?;
            if exact_mode {
                stable.margin(-rel_diff(s.value, row.value));
                stable.margin(-s.grad.distance(&row.grad));
            } else {
                stable.holds(s.value.to_bits() == row.value.to_bits() && s.grad.bit_eq(&row.grad));
            }
        }
    }

    let h = FinalFunction {
        model,
        objective: obj,
        shift: tr.cumulative_shift(n + 1),
    };
    let mut ext = Suite::new("final-extension");
    let allowed = 5.0 * eta * (n as f64 + 2.0);
    for i in 0..EXTENSION_POINTS {
        let x = rng.ball(&origin, cfg.radius);
        let s = smooth_final(&h, &x, r, tr.estimator(), KEY_BASE + 10_000 + i as u64)?;
        ext.margin(allowed - (s.value - obj.value(&x)?).abs() + 3.0 * s.value_stderr);
    }
    if r > 0.0 && tr.estimator().mode == EstimatorMode::Exact1d {
        for row in rows {
            let s = smooth_final(&h, &row.x, r, tr.estimator(), 0)?;
            ext.margin(-(s.value - row.value).abs());
            ext.margin(-s.grad.distance(&row.grad));
        }
    }
    Ok(vec![
        under.finish(),
        deep.finish(),
        protect.finish(),
        stable.finish(),
        ext.finish(),
        closeness_suite(cfg, inst, &tr)?,
        smoothness_suite(cfg, inst, &tr)?,
    ])
}

fn outside(constraint: &Constraint, x: &Vector) -> Result<bool> {
    Ok(!constraint.contains(x)?)
}

/// Sandwich, response consistency and rotation budget of the separation repair.
pub fn separation_suites(cfg: &ExperimentConfig, inst: &Instance, exp: &Experiment) -> Result<Vec<SuiteResult>> {
    let c = inst.constraint.as_ref().expect("constrained runs carry a constraint");
    let sep = inst.separation.as_ref().expect("constrained runs carry a separation oracle");
    let eta_c = sep.eta_c();
    let rows = &exp.trace.rows;
    let ks = &exp.trace.halfspaces;
    let feas = &exp.trace.feasible_points;
    let tol = inexact_core::transfer::SEPARATION_TOL;

    let mut sandwich = Suite::new("k-sandwich");
    if eta_c < c.rho() {
        for p in c.deep_point_sampler(eta_c, SAMPLE_POINTS, cfg.seed)? {
            for h in ks {
                sandwich.margin(-h.violation(&p));
            }
        }
    }
    let mut consistency = Suite::new("k-consistency");
    let mut budget = Suite::new("rotation-budget");
    let mut cuts = 0;
    for r in rows {
        match r.raw_flag {
            Some(Flag::Feasible) => sandwich.holds(c.contains(&r.x)?),
            Some(Flag::Infeasible) => sandwich.holds(outside(c, &r.x)?),
            None => sandwich.holds(false),
        }
        match r.flag {
            Some(Flag::Feasible) => {
                for h in ks {
                    consistency.margin(-h.violation(&r.x));
                }
            }
            Some(Flag::Infeasible) => {
                let g = r.normal.as_ref().expect("infeasible rows carry a normal");
                for p in feas {
                    consistency.margin(-g.dot_diff(p, &r.x));
                }
                // Either x is outside C, or an earlier cut already excludes it.
                let earlier = &ks[..cuts];
                consistency.holds(outside(c, &r.x)? || earlier.iter().any(|h| h.violation(&r.x) > tol));
                if r.raw_flag == Some(Flag::Infeasible) {
                    cuts += 1;
                    let raw = r.raw_normal.as_ref().expect("infeasible rows carry a normal");
                    budget.margin(eta_c / (4.0 * cfg.radius) - g.distance(raw));
                }
            }
            None => consistency.holds(false),
        }
    }
    Ok(vec![sandwich.finish(), consistency.finish(), budget.finish()])
}
