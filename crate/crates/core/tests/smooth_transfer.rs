use inexact_core::algorithms::{AlgorithmConfig, AlgorithmKind};
use inexact_core::channel::CertifiedConstants;
use inexact_core::oracles::{ApproxOracle, NoiseKind, NoiseModel, Objective, ObjectiveSpec};
use inexact_core::sampling::sample_ball;
use inexact_core::transfer::{
    eta_limit, inflated_smoothness, run_wrapped_smooth, smooth_exact_1d, smooth_monte_carlo, SmoothTransfer,
    SmoothingEstimator, TransferParams,
};
use inexact_core::{AffinePiece, Error, PiecewiseMaxFunction, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn smooth_objective(kind: u8, d: usize) -> Objective {
    let spec = if kind % 2 == 0 {
        ObjectiveSpec::Quadratic {
            center: Vector::new((0..d).map(|i| 0.2 * i as f64 - 0.1).collect()),
            alpha: 1.0,
        }
    } else {
        ObjectiveSpec::LogSumExp {
            slopes: vec![Vector::basis(d, 0), Vector::basis(d, 0).scaled(-1.0), Vector::new(vec![0.6; d])],
            intercepts: vec![0.0, 0.05, -0.1],
            temperature: 0.5,
        }
    };
    Objective::new(spec, d, 1.0).unwrap()
}

struct Run {
    obj: Objective,
    tr: SmoothTransfer,
    eta: f64,
    outputs: Vec<(Vector, f64, Vector)>,
}

fn run(kind: u8, d: usize, frac: f64, seed: u64, steps: usize, est: SmoothingEstimator) -> Run {
    let obj = smooth_objective(kind, d);
    let alpha = obj.smoothness().unwrap();
    let eta = frac * eta_limit(alpha, 1.0, steps);
    let oracle = ApproxOracle::new(obj.clone(), NoiseModel::new(NoiseKind::UniformRandom, eta, seed)).unwrap();
    let params = TransferParams {
        lipschitz: obj.lipschitz(),
        radius: 1.0,
        eta,
    };
    let mut tr = SmoothTransfer::new(d, params, alpha, steps, est).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outputs = Vec::new();
    for t in 1..=steps {
        let x = sample_ball(&Vector::zeros(d), 1.0, &mut rng);
        let (f, g) = oracle.query(&x, t).unwrap();
        let out = tr.step(&x, f, &g).unwrap();
        outputs.push((x, out.value, out.grad));
    }
    Run { obj, tr, eta, outputs }
}

fn estimator(d: usize, seed: u64) -> SmoothingEstimator {
    if d == 1 {
        SmoothingEstimator::exact_1d()
    } else {
        SmoothingEstimator::monte_carlo(512, seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smoothed_model_lemmas(kind in 0u8..2, d in 1usize..3, frac in 0.05..1.0f64, seed in any::<u64>()) {
        let steps = 12;
        let Run { obj, tr, eta, outputs } = run(kind, d, frac, seed, steps, estimator(d, seed));
        let model = tr.model();
        let r = tr.radius_r();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let origin = Vector::zeros(d);
        // Under-bound on B(4R).
        for _ in 0..500 {
            let z = sample_ball(&origin, 4.0, &mut rng);
            prop_assert!(model.eval(&z).unwrap() <= obj.value(&z).unwrap() + 1e-9);
        }
        let s_next = 5.0 * eta * (steps as f64 + 1.0);
        for (tp, (x, value, grad)) in outputs.iter().enumerate() {
            let prefix = model.prefix(tp + 1);
            for _ in 0..50 {
                let z = sample_ball(x, 2f64.sqrt() * r, &mut rng);
                let full = model.eval(&z).unwrap();
                // Ball protection and deep lower bound.
                prop_assert!((full - prefix.eval(&z).unwrap()).abs() <= 1e-9);
                prop_assert!(full >= obj.value(&z).unwrap() - s_next - 1e-9);
            }
            // Output stability: the later model reproduces the earlier output.
            let again = tr.smoothed_model_at(model, x, tp + 1).unwrap();
            prop_assert!((again.value - value).abs() <= 1e-12 * (1.0 + value.abs()));
            prop_assert!(again.grad.distance(grad) <= 1e-12);
        }
        prop_assert_eq!(tr.inflated_smoothness(), inflated_smoothness(tr.alpha(), d, steps));
    }
}

#[test]
fn monte_carlo_outputs_are_bit_stable() {
    let Run { tr, outputs, .. } = run(1, 2, 0.5, 9, 10, SmoothingEstimator::monte_carlo(1024, 4));
    for (tp, (x, value, grad)) in outputs.iter().enumerate() {
        let again = tr.smoothed_model_at(tr.model(), x, tp + 1).unwrap();
        assert_eq!(again.value.to_bits(), value.to_bits());
        assert!(again.grad.bit_eq(grad));
    }
}

#[test]
fn gradient_matches_common_random_number_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in 1..=3 {
        for trial in 0..10 {
            let pieces = (0..6)
                .map(|i| {
                    let g = Vector::new((0..d).map(|_| rng.random_range(-2.0..2.0)).collect());
                    AffinePiece::from_intercept(rng.random_range(-0.5..0.5), g, i + 1)
                })
                .collect();
            let f = PiecewiseMaxFunction::from_pieces(d, pieces).unwrap();
            let est = SmoothingEstimator::monte_carlo(2048, trial);
            let x = sample_ball(&Vector::zeros(d), 1.0, &mut rng);
            let r = rng.random_range(0.05..0.5);
            let s = smooth_monte_carlo(&f, &x, r, &est, 7).unwrap();
            let h = 1e-7;
            for i in 0..d {
                let e = Vector::basis(d, i);
                let up = smooth_monte_carlo(&f, &x.add_scaled(h, &e), r, &est, 7).unwrap().value;
                let down = smooth_monte_carlo(&f, &x.add_scaled(-h, &e), r, &est, 7).unwrap().value;
                let fd = (up - down) / (2.0 * h);
                let tol = (3.0 * s.grad_stderr[i]).max(1e-6);
                assert!((fd - s.grad[i]).abs() <= tol, "d={d} i={i}: fd {fd} vs {}", s.grad[i]);
            }
        }
    }
}

#[test]
fn exact_integrator_matches_hand_breakpoints_at_a_kink() {
    // Pieces 1 − x and 2x − 0.5 cross at x = 0.5.
    let f = PiecewiseMaxFunction::from_pieces(
        1,
        vec![
            AffinePiece::from_intercept(1.0, Vector::from([-1.0]), 1),
            AffinePiece::from_intercept(-0.5, Vector::from([2.0]), 2),
        ],
    )
    .unwrap();
    let s = smooth_exact_1d(&f, &Vector::from([0.5]), 0.2).unwrap();
    // ∫_{0.3}^{0.5} (1 − z) dz + ∫_{0.5}^{0.7} (2z − 0.5) dz, over 0.4.
    let left = 0.2 - (0.25 - 0.09) / 2.0;
    let right = (0.49 - 0.25) - 0.1;
    assert!((s.value - (left + right) / 0.4).abs() < 1e-9);
    assert!((s.grad[0] - 0.5).abs() < 1e-12);
}

#[test]
fn tiny_radius_degenerates_to_evaluation() {
    let obj = smooth_objective(0, 1);
    let eta = 1e-14;
    let mut tr = SmoothTransfer::new(
        1,
        TransferParams {
            lipschitz: obj.lipschitz(),
            radius: 1.0,
            eta,
        },
        1.0,
        5,
        SmoothingEstimator::exact_1d(),
    )
    .unwrap();
    for (t, x) in [0.3, -0.5, 0.9].into_iter().enumerate() {
        let x = Vector::from([x]);
        let (f, g) = obj.first_order(&x).unwrap();
        let out = tr.step(&x, f, &g).unwrap();
        assert!((out.value - tr.model().eval(&x).unwrap()).abs() < 1e-6, "step {t}");
    }
}

#[test]
fn eta_above_limit_is_rejected() {
    let obj = smooth_objective(0, 2);
    let eta = 1.01 * eta_limit(1.0, 1.0, 30);
    let oracle = ApproxOracle::new(obj.clone(), NoiseModel::new(NoiseKind::UniformRandom, eta, 0)).unwrap();
    let consts = CertifiedConstants {
        dim: 2,
        lipschitz: obj.lipschitz(),
        smoothness: Some(1.0),
        radius: 1.0,
        inner_radius: None,
        iterations: 30,
    };
    let mut alg = AlgorithmConfig::new(AlgorithmKind::NesterovAgd).build(&consts).unwrap();
    let r = run_wrapped_smooth(alg.as_mut(), &oracle, 1.0, 30, SmoothingEstimator::default());
    assert!(matches!(r, Err(Error::EtaTooLarge { .. })));
}
