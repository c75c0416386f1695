use inexact_core::oracles::{
    ApproxSeparationOracle, Constraint, ConstraintSpec, Flag, RotationPolicy, SeparationNoiseModel,
};
use inexact_core::sampling::{sample_ball, sample_unit_sphere};
use inexact_core::transfer::{cone_project_unit, SeparationTransfer};
use inexact_core::Vector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn constraint(kind: u8) -> Constraint {
    let spec = match kind % 3 {
        0 => ConstraintSpec::Ball {
            center: Vector::from([0.1, 0.0]),
            radius: 0.8,
        },
        1 => ConstraintSpec::Box {
            lo: Vector::from([-0.6, -0.5]),
            hi: Vector::from([0.5, 0.7]),
        },
        _ => ConstraintSpec::Polytope {
            normals: vec![Vector::from([1.0, 0.3]), Vector::from([-0.5, 1.0]), Vector::from([-0.2, -1.0])],
            offsets: vec![0.7, 0.6, 0.6],
            interior_point: Vector::from([0.0, 0.0]),
            rho: 0.5,
        },
    };
    Constraint::new(spec, 2, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn outer_approximation_properties(kind in 0u8..3, frac in 0.0..1.0f64, adversarial in any::<bool>(), seed in any::<u64>()) {
        let c = constraint(kind);
        let eta_c = frac * c.rho();
        let policy = if adversarial { RotationPolicy::AdversarialTowardDeep } else { RotationPolicy::RandomRotation };
        let oracle = ApproxSeparationOracle::new(c.clone(), SeparationNoiseModel { eta_c, seed, policy }).unwrap();
        let mut st = SeparationTransfer::new(2, 1.0, eta_c, c.rho()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for t in 1..=40 {
            let x = sample_ball(&Vector::zeros(2), 1.0, &mut rng);
            let ans = oracle.query(&x, t).unwrap();
            let out = st.step(&x, &ans.response, ans.exact_normal.as_ref()).unwrap();
            if ans.response.flag == Flag::Infeasible {
                let g_hat = out.normal.as_ref().unwrap();
                let g_tilde = ans.response.normal.as_ref().unwrap();
                prop_assert!(g_hat.distance(g_tilde) <= eta_c / 4.0 + 1e-9);
            }
            rows.push((x, out));
        }
        // Deep points survive every cut.
        if eta_c < c.rho() {
            for p in c.deep_point_sampler(eta_c, 500, seed).unwrap() {
                for h in st.halfspaces() {
                    prop_assert!(h.violation(&p) <= 1e-9);
                }
            }
        }
        // Flags are exact for K ∩ C and responses are mutually consistent.
        for (x, out) in &rows {
            match out.flag {
                Flag::Feasible => {
                    prop_assert!(c.contains(x).unwrap());
                    prop_assert!(st.in_outer(x));
                }
                Flag::Infeasible => {
                    let g = out.normal.as_ref().unwrap();
                    prop_assert!(!c.contains(x).unwrap() || !st.in_outer(x));
                    for p in st.feasible_points() {
                        prop_assert!(g.dot(p) <= g.dot(x) + 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn zero_noise_normals_pass_through() {
    for kind in 0..3 {
        let c = constraint(kind);
        let oracle = ApproxSeparationOracle::exact(c.clone());
        let mut st = SeparationTransfer::new(2, 1.0, 0.0, c.rho()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(kind as u64);
        for t in 1..=200 {
            let x = sample_ball(&Vector::zeros(2), 1.0, &mut rng);
            let ans = oracle.query(&x, t).unwrap();
            let out = st.step(&x, &ans.response, None).unwrap();
            assert_eq!(out, ans.response);
        }
    }
}

#[test]
fn cone_projection_maximises_alignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let grid: Vec<Vector> = (0..200_000)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 200_000.0;
            Vector::from([a.cos(), a.sin()])
        })
        .collect();
    for _ in 0..30 {
        let x = sample_ball(&Vector::zeros(2), 1.0, &mut rng);
        let n = rng.random_range(1..=3);
        let feas: Vec<Vector> = (0..n).map(|_| sample_ball(&Vector::zeros(2), 1.0, &mut rng)).collect();
        let g_tilde = sample_unit_sphere(2, &mut rng);
        let in_cone = |u: &Vector| feas.iter().all(|p| u.dot_diff(p, &x) <= 1e-12);
        let best = grid.iter().filter(|u| in_cone(u)).map(|u| u.dot(&g_tilde)).fold(f64::NEG_INFINITY, f64::max);
        match cone_project_unit(&g_tilde, &feas, &x, None) {
            Ok(g) => {
                assert!(in_cone(&g) || feas.iter().all(|p| g.dot_diff(p, &x) <= 1e-9));
                if best.is_finite() {
                    assert!(g.dot(&g_tilde) >= best - 1e-3);
                }
            }
            // A vanishing projection means no cone direction has positive alignment.
            Err(_) => assert!(best <= 1e-9),
        }
    }
}
