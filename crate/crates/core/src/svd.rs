//! One-sided Jacobi SVD for the small matrices in this crate.
//!
//! Complex matrices go through the real embedding `[[X, -Y], [Y, X]]` of
//! `X + iY`, whose singular values are those of the complex matrix, each
//! repeated twice.

use crate::matrix::{Field, Matrix, C64};

struct JacobiSvd {
    /// Column norms after convergence, i.e. singular values (unsorted).
    values: Vec<f64>,
    /// Right singular vectors, column `j` at `v[i * n + j]`.
    v: Vec<f64>,
    n: usize,
}

/// Runs one-sided Jacobi on the square row-major matrix `a` (`n x n`).
fn jacobi(a: &[f64], n: usize) -> JacobiSvd {
    let mut u = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..n {
                    let up = u[i * n + p];
                    let uq = u[i * n + q];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let up = u[i * n + p];
                    let uq = u[i * n + q];
                    u[i * n + p] = c * up - s * uq;
                    u[i * n + q] = s * up + c * uq;
                    let vp = v[i * n + p];
                    let vq = v[i * n + q];
                    v[i * n + p] = c * vp - s * vq;
                    v[i * n + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let values = (0..n)
        .map(|j| (0..n).map(|i| u[i * n + j] * u[i * n + j]).sum::<f64>().sqrt())
        .collect();
    JacobiSvd { values, v, n }
}

fn real_embedding(a: &Matrix) -> (Vec<f64>, usize) {
    let d = a.dim();
    if a.field() == Field::Real {
        return (a.entries().iter().map(|z| z.re).collect(), d);
    }
    let n = 2 * d;
    let mut out = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = a.get(i, j);
            out[i * n + j] = z.re;
            out[i * n + j + d] = -z.im;
            out[(i + d) * n + j] = z.im;
            out[(i + d) * n + j + d] = z.re;
        }
    }
    (out, n)
}

/// Singular values of `a`, descending, `a.dim()` of them.
pub(crate) fn singular_values(a: &Matrix) -> Vec<f64> {
    let (emb, n) = real_embedding(a);
    let mut values = jacobi(&emb, n).values;
    values.sort_by(|x, y| y.total_cmp(x));
    if n == a.dim() {
        values
    } else {
        values.into_iter().step_by(2).collect()
    }
}

/// A unit vector `x` minimising `|A x|` (right singular vector of the
/// smallest singular value), returned with that singular value.
///
/// For real matrices the vector is real.
pub(crate) fn null_vector(a: &Matrix) -> (Vec<C64>, f64) {
    let d = a.dim();
    let (emb, n) = real_embedding(a);
    let svd = jacobi(&emb, n);
    let j = (0..svd.n)
        .min_by(|&x, &y| svd.values[x].total_cmp(&svd.values[y]))
        .unwrap();
    let col: Vec<f64> = (0..n).map(|i| svd.v[i * n + j]).collect();
    let vec = if n == d {
        col.iter().map(|&x| C64::new(x, 0.0)).collect()
    } else {
        (0..d).map(|i| C64::new(col[i], col[i + d])).collect()
    };
    (vec, svd.values[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_values() {
        let a = Matrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, -5.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(singular_values(&a), vec![5.0, 3.0, 1.0]);
    }

    #[test]
    fn complex_values_match_hermitian_square() {
        // [[1, i], [0, 1]] has A^H A = [[1, i], [-i, 2]], eigenvalues (3 +- sqrt 5)/2
        let a = Matrix::complex(
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let s = singular_values(&a);
        let hi = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        let lo = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        assert!((s[0] - hi).abs() < 1e-14);
        assert!((s[1] - lo).abs() < 1e-14);
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let (v, s) = null_vector(&a);
        assert!(s < 1e-14);
        let r = [a.get(0, 0) * v[0] + a.get(0, 1) * v[1], a.get(1, 0) * v[0] + a.get(1, 1) * v[1]];
        assert!(r[0].norm() < 1e-14 && r[1].norm() < 1e-14);
    }
}
