use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::vector::Vector;

/// Uniform draw from the closed unit ball in `d` dimensions.
///
/// Gaussian direction scaled by a radius `U^{1/d}`.
pub fn sample_unit_ball<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vector {
    assert!(d >= 1, "sample_unit_ball needs d >= 1");
    let dir = sample_unit_sphere(d, rng);
    let u: f64 = rng.random();
    dir.scaled(u.powf(1.0 / d as f64))
}

/// Uniform draw from the unit sphere.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vector {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(v) = Vector::new(g).normalized() {
            return v;
        }
    }
}

/// Uniform draw from `B(center, radius)`.
pub fn sample_ball<R: Rng + ?Sized>(center: &Vector, radius: f64, rng: &mut R) -> Vector {
    center.add_scaled(radius, &sample_unit_ball(center.dim(), rng))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one well-mixed 64-bit key.
pub fn mix_key(words: impl IntoIterator<Item = u64>) -> u64 {
    words
        .into_iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, w| splitmix(acc ^ splitmix(w)))
}

/// Deterministic generator for a `(seed, stream, point)` triple.
pub fn keyed_rng(seed: u64, stream: u64, x: Option<&Vector>) -> ChaCha8Rng {
    let bits = x.into_iter().flat_map(|v| v.iter().map(|c| c.to_bits()));
    let key = mix_key([seed, stream].into_iter().chain(bits));
    ChaCha8Rng::seed_from_u64(key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_stay_in_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            for _ in 0..1000 {
                assert!(sample_unit_ball(d, &mut rng).norm() <= 1.0);
            }
        }
    }

    #[test]
    fn mean_is_centred() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mut sum = [0.0; 3];
        for _ in 0..n {
            let u = sample_unit_ball(3, &mut rng);
            for (s, c) in sum.iter_mut().zip(u.iter()) {
                *s += c;
            }
        }
        // Var(U_i) = 1/(d + 2) for the uniform ball.
        let sigma = (1.0 / 5.0 / n as f64).sqrt();
        for s in sum {
            assert!((s / n as f64).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn second_moment_matches_radial_quadrature() {
        // E‖U‖² = ∫_0^1 ρ² · dρ^{d-1} dρ, evaluated by the midpoint rule.
        let d = 2usize;
        let m = 100_000;
        let quad: f64 = (0..m)
            .map(|i| {
                let rho = (i as f64 + 0.5) / m as f64;
                rho * rho * d as f64 * rho.powi(d as i32 - 1) / m as f64
            })
            .sum();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_unit_ball(d, &mut rng).norm_sq()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((quad - 0.5).abs() < 1e-8);
        assert!((mean - quad).abs() <= 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn keyed_rng_is_deterministic() {
        let x = Vector::from([0.25, -1.0]);
        let a: u64 = keyed_rng(7, 3, Some(&x)).random();
        let b: u64 = keyed_rng(7, 3, Some(&x)).random();
        let c: u64 = keyed_rng(7, 4, Some(&x)).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
