//! Orthonormal basis extraction from surrogate-gradient matrices.

use nalgebra::DMatrix;

/// Relative residual below which a column is treated as linearly dependent
/// and dropped from the basis.
const RANK_TOL: f64 = 1e-10;

/// Orthonormalize the columns of `deltas` into a basis `U` with
/// `U^T U = I` and `span(U) = span(nonzero columns of deltas)`.
///
/// All-zero columns are dropped first; numerically dependent columns are
/// dropped during elimination, so the result can have fewer columns than the
/// input. An input with no usable columns yields an `n x 0` matrix — the
/// caller falls back to isotropic sampling.
///
/// Modified Gram-Schmidt with a second pass; orthonormality lands well below
/// the 1e-10 tolerance the distribution enforces.
pub fn orthogonalize(deltas: &DMatrix<f64>) -> DMatrix<f64> {
    let n = deltas.nrows();
    let mut basis: Vec<Vec<f64>> = Vec::new();

    for j in 0..deltas.ncols() {
        let col: Vec<f64> = (0..n).map(|i| deltas[(i, j)]).collect();
        let orig_norm = norm(&col);
        if orig_norm == 0.0 {
            continue;
        }
        let mut v = col;
        for _pass in 0..2 {
            for q in &basis {
                let proj = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let res_norm = norm(&v);
        if res_norm <= RANK_TOL * orig_norm {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= res_norm;
        }
        basis.push(v);
    }

    let k = basis.len();
    let mut u = DMatrix::zeros(n, k);
    for (j, q) in basis.iter().enumerate() {
        for (i, qi) in q.iter().enumerate() {
            u[(i, j)] = *qi;
        }
    }
    u
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn single_column_is_normalized() {
        let d = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let u = orthogonalize(&d);
        assert_eq!(u.ncols(), 1);
        assert!((u[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((u[(1, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn all_zero_columns_give_empty_basis() {
        let d = DMatrix::zeros(5, 3);
        let u = orthogonalize(&d);
        assert_eq!(u.ncols(), 0);
        assert_eq!(u.nrows(), 5);
    }

    #[test]
    fn zero_columns_are_skipped() {
        let mut d = DMatrix::zeros(3, 2);
        d[(0, 1)] = 2.0;
        let u = orthogonalize(&d);
        assert_eq!(u.ncols(), 1);
        assert!((u[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_input_spans_same_subspace() {
        // Projector U U^T must match the input's projector within 1e-10.
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let d = DMatrix::from_column_slice(
            3,
            2,
            &[inv_sqrt2, inv_sqrt2, 0.0, 0.0, 0.0, 1.0],
        );
        let u = orthogonalize(&d);
        assert_eq!(u.ncols(), 2);
        let p_in = &d * d.transpose();
        let p_out = &u * u.transpose();
        assert!(max_abs(&(p_in - p_out)) < 1e-10);
    }

    #[test]
    fn duplicated_columns_are_rank_truncated() {
        let d = DMatrix::from_column_slice(4, 3, &[
            1.0, 2.0, 0.0, -1.0, //
            1.0, 2.0, 0.0, -1.0, //
            0.0, 1.0, 1.0, 0.0,
        ]);
        let u = orthogonalize(&d);
        assert_eq!(u.ncols(), 2, "duplicate column must be dropped");
    }

    #[test]
    fn random_matrices_project_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = 20;
            let k = 4;
            let d = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
            let u = orthogonalize(&d);
            // U^T U = I within 1e-10
            let gram = u.transpose() * &u;
            let eye = DMatrix::<f64>::identity(u.ncols(), u.ncols());
            assert!(max_abs(&(gram - eye)) < 1e-10);
            // Every input column lies in span(U).
            let proj = &u * u.transpose();
            for j in 0..k {
                let col = d.column(j);
                let res = (&proj * col) - col;
                let rel = res.norm() / col.norm();
                assert!(rel < 1e-10, "projection residual {rel:.3e}");
            }
        }
    }
}
