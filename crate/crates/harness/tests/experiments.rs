use inexact_core::oracles::NoiseKind;
use inexact_harness::csv_io::trace_to_string;
use inexact_harness::demo::demo_config;
use inexact_harness::plot::{render, PlotKind};
use inexact_harness::sweep::{sweep, sweep_to_string, Axis, SweepSpec};
use inexact_harness::verify::{verify_trace, VerifyReport};
use inexact_harness::{run_experiment, ExperimentConfig, HarnessError, TransferMode};

fn abs_config() -> ExperimentConfig {
    demo_config("lipschitz").unwrap()
}

fn assert_all_pass(report: &VerifyReport) {
    for s in &report.suites {
        assert!(s.passed, "suite {} failed with worst margin {}", s.name, s.worst_margin);
    }
}

#[test]
fn wrapped_subgradient_gap_is_within_bound() {
    let exp = run_experiment(&abs_config()).unwrap();
    let s = &exp.summary;
    assert!(s.final_gap <= 0.55, "gap {}", s.final_gap);
    assert_eq!(s.bound_satisfied, Some(true));
    assert!(s.repaired_extensibility.extensible);
    assert!(s.audits_passed);
    assert_eq!(exp.trace.rows.len(), 100);
    assert_eq!(s.config_hash, abs_config().hash());
}

#[test]
fn naive_baseline_reports_raw_inconsistency() {
    let mut cfg = abs_config();
    cfg.transfer = TransferMode::None;
    cfg.noise.kind = NoiseKind::AdversarialSlopeFlip;
    let s = run_experiment(&cfg).unwrap().summary;
    assert!(s.bound.is_none());
    assert!(!s.raw_extensibility.extensible);
    // Unrepaired responses are forwarded, so the repaired column is the raw one.
    assert_eq!(s.raw_extensibility, s.repaired_extensibility);
}

#[test]
fn zero_noise_wrapping_leaves_iterates_unchanged() {
    let mut wrapped = abs_config();
    wrapped.noise.eta = 0.0;
    let mut naive = wrapped.clone();
    naive.transfer = TransferMode::None;
    let a = run_experiment(&wrapped).unwrap().trace;
    let b = run_experiment(&naive).unwrap().trace;
    assert_eq!(a.rows.len(), b.rows.len());
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert!(ra.x.bit_eq(&rb.x));
        assert!(ra.response().bit_eq(&rb.response()));
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = demo_config("smooth").unwrap();
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(
        trace_to_string(&a.summary.config_hash, &a.trace.rows).unwrap(),
        trace_to_string(&b.summary.config_hash, &b.trace.rows).unwrap()
    );
}

#[test]
fn eta_sweep_respects_bounds() {
    let spec = SweepSpec {
        axis: Axis::Eta(vec![0.0, 1e-4, 1e-3, 1e-2]),
        transfers: vec![],
        recipe: false,
    };
    let mut gaps = vec![0.0; 4];
    for seed in 0..8 {
        let mut cfg = abs_config();
        cfg.noise.seed = seed;
        let rows = sweep(&cfg, &spec).unwrap();
        assert_eq!(rows.len(), 4);
        for (g, r) in gaps.iter_mut().zip(&rows) {
            assert_eq!(r.bound_satisfied, Some(true));
            *g += r.final_gap / 8.0;
        }
    }
    // Mean gap over noise seeds grows with the oracle error.
    assert!(gaps[3] >= gaps[0], "{gaps:?}");
}

#[test]
fn empty_grid_is_rejected() {
    let spec = SweepSpec {
        axis: Axis::Eta(vec![]),
        transfers: vec![],
        recipe: false,
    };
    assert!(matches!(sweep(&abs_config(), &spec), Err(HarnessError::BadGrid(_))));
    assert!(matches!(Axis::parse("T="), Err(HarnessError::BadGrid(_))));
}

#[test]
fn zero_noise_traces_pass_every_suite() {
    for name in ["lipschitz", "smooth", "ellipsoid", "lattice"] {
        let mut cfg = demo_config(name).unwrap();
        cfg.noise.eta = 0.0;
        if let Some(n) = cfg.sep_noise.as_mut() {
            n.eta_c = 0.0;
        }
        let exp = run_experiment(&cfg).unwrap();
        let report = verify_trace(&cfg, &exp.trace.rows).unwrap();
        assert_all_pass(&report);
    }
}

#[test]
fn zero_function_trace_repairs_inconsistent_data() {
    let cfg = demo_config("figure1").unwrap();
    let exp = run_experiment(&cfg).unwrap();
    assert!(!exp.summary.raw_extensibility.extensible);
    assert!(exp.summary.repaired_extensibility.extensible);
    assert_all_pass(&verify_trace(&cfg, &exp.trace.rows).unwrap());
}

#[test]
fn tampered_row_is_a_mismatch() {
    let cfg = abs_config();
    let mut rows = run_experiment(&cfg).unwrap().trace.rows;
    rows[41].value += 1e-12;
    match verify_trace(&cfg, &rows) {
        Err(HarnessError::TraceMismatch { row, .. }) => assert_eq!(row, 42),
        other => panic!("expected a mismatch, got {other:?}"),
    }
    rows.pop();
    assert!(matches!(verify_trace(&cfg, &rows), Err(HarnessError::TraceMismatch { .. })));
}

#[test]
fn sweep_plot_has_a_series_per_transfer() {
    let spec = SweepSpec {
        axis: Axis::Iterations(vec![25, 100]),
        transfers: vec![TransferMode::None, TransferMode::Lipschitz],
        recipe: true,
    };
    let rows = sweep(&abs_config(), &spec).unwrap();
    assert_eq!(rows.len(), 4);
    let svg = render(&sweep_to_string(&rows).unwrap(), PlotKind::GapVsT).unwrap();
    assert_eq!(svg.matches("class=\"series\"").count(), 2);
    // Only the repaired mode carries a guarantee.
    assert_eq!(svg.matches("class=\"bound\"").count(), 1);
    assert!(matches!(render("", PlotKind::GapVsT), Err(HarnessError::Schema(_))));
}

#[test]
fn config_errors_carry_positions() {
    let text = "{\n  \"dimension\": 1,\n  \"radius\": \"one\"\n}";
    match ExperimentConfig::from_json(text) {
        Err(HarnessError::Config { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a positioned error, got {other:?}"),
    }
}
