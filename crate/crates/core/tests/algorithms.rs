use inexact_core::algorithms::{lattice_points, AlgorithmConfig, AlgorithmKind};
use inexact_core::channel::{CertifiedConstants, Channel, Response};
use inexact_core::oracles::{
    ApproxOracle, ApproxSeparationOracle, Constraint, ConstraintSpec, Objective, ObjectiveSpec, RotationPolicy,
    SeparationNoiseModel,
};
use inexact_core::transfer::{run_direct, run_wrapped_constrained};
use inexact_core::{Error, Result, Vector};

fn consts(d: usize, m: f64, alpha: Option<f64>, r: f64, t: usize) -> CertifiedConstants {
    CertifiedConstants {
        dim: d,
        lipschitz: m,
        smoothness: alpha,
        radius: r,
        inner_radius: None,
        iterations: t,
    }
}

fn run_exact(cfg: &AlgorithmConfig, obj: &Objective, c: &CertifiedConstants) -> Vector {
    let oracle = ApproxOracle::exact(obj.clone());
    let mut alg = cfg.build(c).unwrap();
    run_direct(alg.as_mut(), &oracle, None, c.iterations).unwrap().final_point.unwrap()
}

#[test]
fn subgradient_on_norm() {
    let obj = Objective::new(ObjectiveSpec::EuclideanNorm { center: Vector::zeros(2) }, 2, 1.0).unwrap();
    let cfg = AlgorithmConfig::new(AlgorithmKind::ProjectedSubgradient).with_start(Vector::from([1.0, 0.0]));
    let x = run_exact(&cfg, &obj, &consts(2, 1.0, None, 1.0, 100));
    assert!(obj.value(&x).unwrap() <= 0.1);
}

#[test]
fn subgradient_on_constant_stays_put() {
    let obj = Objective::new(
        ObjectiveSpec::MaxAffine {
            slopes: vec![Vector::zeros(2)],
            intercepts: vec![0.0],
        },
        2,
        1.0,
    )
    .unwrap();
    let start = Vector::from([0.3, -0.2]);
    let cfg = AlgorithmConfig::new(AlgorithmKind::ProjectedSubgradient).with_start(start.clone());
    let oracle = ApproxOracle::exact(obj);
    let mut alg = cfg.build(&consts(2, 0.0, None, 1.0, 20)).unwrap();
    let trace = run_direct(alg.as_mut(), &oracle, None, 20).unwrap();
    assert!(trace.rows.iter().all(|r| r.x == start));
}

#[test]
fn agd_on_quadratic() {
    let obj = Objective::new(
        ObjectiveSpec::Quadratic {
            center: Vector::zeros(2),
            alpha: 1.0,
        },
        2,
        1.0,
    )
    .unwrap();
    let cfg = AlgorithmConfig::new(AlgorithmKind::NesterovAgd).with_start(Vector::from([1.0, 0.0]));
    let x = run_exact(&cfg, &obj, &consts(2, obj.lipschitz(), Some(1.0), 1.0, 30));
    assert!(obj.value(&x).unwrap() <= 2.0 / 900.0);
    // T = 1 is one projected gradient step: (1,0) − ∇f/α = 0.
    let x1 = run_exact(&cfg, &obj, &consts(2, obj.lipschitz(), Some(1.0), 1.0, 1));
    assert_eq!(x1, Vector::zeros(2));
}

fn ball_instance(eta_c: f64) -> (ApproxOracle, ApproxSeparationOracle, CertifiedConstants) {
    let obj = Objective::new(
        ObjectiveSpec::MaxAffine {
            slopes: vec![Vector::from([1.0, 0.0])],
            intercepts: vec![0.0],
        },
        2,
        1.0,
    )
    .unwrap();
    let c = Constraint::new(
        ConstraintSpec::Ball {
            center: Vector::zeros(2),
            radius: 0.8,
        },
        2,
        1.0,
    )
    .unwrap();
    let sep = ApproxSeparationOracle::new(
        c,
        SeparationNoiseModel {
            eta_c,
            seed: 1,
            policy: RotationPolicy::AdversarialTowardDeep,
        },
    )
    .unwrap();
    let mut k = consts(2, 1.0, Some(0.0), 1.0, 60);
    k.inner_radius = Some(0.8 - eta_c);
    (ApproxOracle::exact(obj), sep, k)
}

#[test]
fn ellipsoid_on_ball() {
    let (oracle, sep, k) = ball_instance(0.0);
    let mut alg = AlgorithmConfig::new(AlgorithmKind::Ellipsoid).build(&k).unwrap();
    let trace = run_direct(alg.as_mut(), &oracle, Some(&sep), 60).unwrap();
    // First centre is feasible, so the first cut is the objective cut (1, 0).
    assert_eq!(trace.rows[0].x, Vector::zeros(2));
    assert_eq!(trace.rows[0].grad, Vector::from([1.0, 0.0]));
    let x = trace.final_point.unwrap();
    assert!(x.norm() <= 0.8);
    let bound = 2.0 * (-60.0f64 / 12.0).exp();
    assert!(x[0] + 0.8 <= bound + 1e-6);
}

#[test]
fn wrapped_ellipsoid_under_rotated_normals() {
    let (oracle, sep, k) = ball_instance(0.05);
    let mut alg = AlgorithmConfig::new(AlgorithmKind::Ellipsoid).build(&k).unwrap();
    let trace = run_wrapped_constrained(alg.as_mut(), &oracle, &sep, 60).unwrap();
    let x = trace.final_point.unwrap();
    assert!(x.norm() <= 0.8);
    let bound = 1.0 * 1.6 * (1.0 / 0.75) * (-60.0f64 / 12.0).exp() + 2.0 * 0.05 * 1.0 * 1.0 / 0.8;
    assert!(x[0] + 0.8 <= bound * 1.1);
}

fn lattice_instance(eta_c: f64, seed: u64) -> (ApproxOracle, ApproxSeparationOracle, CertifiedConstants) {
    let obj = Objective::new(
        ObjectiveSpec::Quadratic {
            center: Vector::from([1.2, 0.4]),
            alpha: 2.0,
        },
        2,
        3.0,
    )
    .unwrap();
    let c = Constraint::new(
        ConstraintSpec::Ball {
            center: Vector::zeros(2),
            radius: 2.5,
        },
        2,
        3.0,
    )
    .unwrap();
    let sep = ApproxSeparationOracle::new(
        c,
        SeparationNoiseModel {
            eta_c,
            seed,
            policy: RotationPolicy::RandomRotation,
        },
    )
    .unwrap();
    let k = consts(2, obj.lipschitz(), Some(2.0), 3.0, 40);
    (ApproxOracle::exact(obj), sep, k)
}

#[test]
fn lattice_enumerator_finds_the_lattice_optimum() {
    assert_eq!(lattice_points(2, 2.5).len(), 21);
    for seed in 0..5 {
        let (oracle, sep, k) = lattice_instance(0.1, seed);
        let mut alg = AlgorithmConfig::new(AlgorithmKind::LatticeEnumerator).build(&k).unwrap();
        let trace = run_wrapped_constrained(alg.as_mut(), &oracle, &sep, 40).unwrap();
        assert_eq!(trace.final_point.unwrap(), Vector::from([1.0, 0.0]));
    }
    let (oracle, sep, k) = lattice_instance(0.0, 0);
    let mut alg = AlgorithmConfig::new(AlgorithmKind::LatticeEnumerator).build(&k).unwrap();
    let trace = run_direct(alg.as_mut(), &oracle, Some(&sep), 40).unwrap();
    assert_eq!(trace.final_point.unwrap(), Vector::from([1.0, 0.0]));
}

#[test]
fn lattice_errors() {
    let (oracle, _, mut k) = lattice_instance(0.0, 0);
    let empty = Constraint::new(
        ConstraintSpec::Ball {
            center: Vector::from([0.5, 0.5]),
            radius: 0.3,
        },
        2,
        3.0,
    )
    .unwrap();
    let sep = ApproxSeparationOracle::exact(empty);
    let mut alg = AlgorithmConfig::new(AlgorithmKind::LatticeEnumerator).build(&k).unwrap();
    assert_eq!(run_direct(alg.as_mut(), &oracle, Some(&sep), 40), Err(Error::NoFeasiblePoint));
    k.iterations = 10;
    let mut alg = AlgorithmConfig::new(AlgorithmKind::LatticeEnumerator).build(&k).unwrap();
    assert!(matches!(
        run_direct(alg.as_mut(), &oracle, Some(&sep), 10),
        Err(Error::BudgetExceeded { needed: 29, budget: 10 })
    ));
}

/// Replays a fixed response script; records the queries it receives.
struct Scripted {
    responses: Vec<Response>,
    queries: Vec<Vector>,
}

impl Channel for Scripted {
    fn dim(&self) -> usize {
        2
    }

    fn exchange(&mut self, x: &Vector) -> Result<Response> {
        let r = self.responses[self.queries.len() % self.responses.len()].clone();
        self.queries.push(x.clone());
        Ok(r)
    }
}

#[test]
fn identical_responses_give_identical_queries() {
    let script = vec![
        Response {
            value: 1.0,
            grad: Vector::from([0.3, -0.4]),
            separation: None,
        },
        Response {
            value: 0.5,
            grad: Vector::from([-1.0, 0.2]),
            separation: None,
        },
    ];
    for kind in [AlgorithmKind::ProjectedSubgradient, AlgorithmKind::NesterovAgd, AlgorithmKind::Ellipsoid] {
        let k = consts(2, 1.0, Some(1.0), 1.0, 25);
        let runs: Vec<Vec<Vector>> = (0..2)
            .map(|_| {
                let mut ch = Scripted {
                    responses: script.clone(),
                    queries: vec![],
                };
                AlgorithmConfig::new(kind).build(&k).unwrap().run(&mut ch).unwrap();
                ch.queries
            })
            .collect();
        assert!(runs[0].iter().zip(&runs[1]).all(|(a, b)| a.bit_eq(b)));
        assert!(runs[0].iter().all(|q| q.norm() <= 1.0 + 1e-12));
    }
}
