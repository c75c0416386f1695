//! Nonnegative least squares (Lawson–Hanson active set) and polyhedral cone projection.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Solves `min ‖Eλ − b‖` over `λ ≥ 0`; `columns` are the columns of `E`.
pub fn nnls(columns: &[Vector], b: &Vector) -> Result<Vec<f64>> {
    let m = columns.len();
    let d = b.dim();
    for c in columns {
        c.check_dim(d)?;
    }
    let e = DMatrix::from_fn(d, m, |i, j| columns[j][i]);
    let bv = DVector::from_column_slice(b.as_slice());
    let scale = columns.iter().map(Vector::norm).fold(0.0, f64::max) * b.norm().max(1.0);
    let tol = 1e-12 * scale.max(1.0);

    let mut lambda = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    for _ in 0..3 * m + 10 {
        let w = e.transpose() * (&bv - &e * &lambda);
        let pick = (0..m)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        match pick {
            Some(j) if w[j] > tol => passive[j] = true,
            _ => return Ok(lambda.iter().copied().collect()),
        }
        loop {
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let sub = e.select_columns(&idx);
            let sol = sub
                .clone()
                .svd(true, true)
                .solve(&bv, 1e-14)
                .map_err(|m| Error::NumericalCollapse(format!("nnls subproblem: {m}")))?;
            let mut s = DVector::<f64>::zeros(m);
            for (k, &j) in idx.iter().enumerate() {
                s[j] = sol[k];
            }
            if idx.iter().all(|&j| s[j] > 0.0) {
                lambda = s;
                break;
            }
            let step = idx
                .iter()
                .filter(|&&j| s[j] <= 0.0)
                .map(|&j| lambda[j] / (lambda[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            lambda += (s - &lambda) * step;
            for &j in &idx {
                if lambda[j] <= tol {
                    lambda[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(Error::NumericalCollapse("nnls did not converge".into()))
}

/// Euclidean projection of `g` onto `{v : ⟨a, v⟩ ≤ 0 for every a in rows}`.
///
/// The cone is the polar of the cone generated by `rows`, so by Moreau's
/// decomposition the projection is `g − Aᵀλ*` with `λ*` the NNLS solution.
pub fn project_onto_polar_cone(g: &Vector, rows: &[Vector]) -> Result<Vector> {
    if rows.is_empty() {
        return Ok(g.clone());
    }
    let lambda = nnls(rows, g)?;
    let mut p = g.clone();
    for (l, a) in lambda.iter().zip(rows) {
        if *l != 0.0 {
            p.axpy(-l, a);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_clips_negative_solution() {
        // Unconstrained optimum is λ = −1.
        let l = nnls(&[Vector::from([1.0, 0.0])], &Vector::from([-1.0, 2.0])).unwrap();
        assert_eq!(l, vec![0.0]);
    }

    #[test]
    fn nnls_recovers_positive_combination() {
        let cols = [Vector::from([1.0, 0.0]), Vector::from([1.0, 1.0])];
        let l = nnls(&cols, &Vector::from([3.0, 2.0])).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-12 && (l[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_halfplane() {
        let p = project_onto_polar_cone(&Vector::from([-0.6, 0.8]), &[Vector::from([-1.0, 0.0])]).unwrap();
        assert!(p.distance(&Vector::from([0.0, 0.8])) < 1e-15);
    }
}
