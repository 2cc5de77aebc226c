//! Naive reference implementations, used to check kernel output.

use crate::kernel::Op;
use crate::matrix::{MatrixView, Uplo};
use crate::precision::Scalar;

/// Element `(i, j)` of the full operator `op(A)` implied by `op`.
pub fn operator_entry<T: Scalar>(op: Op, a: &MatrixView<'_, T>, i: usize, j: usize) -> T {
    match op {
        Op::GemvN => a.get(i, j),
        Op::GemvT => a.get(j, i),
        Op::GemvC => a.get(j, i).conj(),
        Op::SymvLower | Op::SymvUpper | Op::HemvLower | Op::HemvUpper => {
            let uplo = op.uplo().expect("symmetric op");
            let herm = op.conjugates();
            if i == j {
                let v = a.get(i, i);
                if herm {
                    v.real_only()
                } else {
                    v
                }
            } else if uplo.is_unreferenced(i, j) {
                let v = a.get(j, i);
                if herm {
                    v.conj()
                } else {
                    v
                }
            } else {
                a.get(i, j)
            }
        }
    }
}

/// `alpha * op(A) * x + beta * y` by a plain double loop. A zero beta
/// ignores `y` entirely.
pub fn reference_mv<T: Scalar>(op: Op, a: &MatrixView<'_, T>, x: &[T], y: &[T], alpha: T, beta: T) -> Vec<T> {
    let (rows, cols) = match op {
        Op::GemvN => (a.rows(), a.cols()),
        _ => (a.cols(), a.rows()),
    };
    (0..rows)
        .map(|i| {
            let mut acc = T::zero();
            for (j, &xj) in x.iter().enumerate().take(cols) {
                acc += operator_entry(op, a, i, j) * xj;
            }
            let base = if beta.is_zero() { T::zero() } else { beta * y[i] };
            base + alpha * acc
        })
        .collect()
}

/// Infinity-norm error bound for a computed matrix-vector product:
/// `k * eps * (|alpha| ||op(A)||_inf ||x||_inf + |beta| ||y||_inf)`.
pub fn error_bound<T: Scalar>(op: Op, a: &MatrixView<'_, T>, x: &[T], y: &[T], alpha: T, beta: T, k: f64) -> f64 {
    let rows = match op {
        Op::GemvN => a.rows(),
        _ => a.cols(),
    };
    let cols = x.len();
    let norm_a = (0..rows)
        .map(|i| (0..cols).map(|j| operator_entry(op, a, i, j).modulus()).sum::<f64>())
        .fold(0.0, f64::max);
    let norm_x = x.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    let norm_y = y.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    k * T::PRECISION.epsilon() * (alpha.modulus() * norm_a * norm_x + beta.modulus() * norm_y)
}

/// Largest component-wise modulus difference.
pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (*p - *q).modulus()).fold(0.0, f64::max)
}

/// Overwrites the unreferenced triangle of a square matrix buffer with
/// `poison`, leaving diagonal blocks of size `nb` intact when `keep_diag` is
/// set.
pub fn poison_unreferenced<T: Scalar>(data: &mut [T], d: usize, ld: usize, uplo: Uplo, nb: usize, keep_diag: bool, poison: T) {
    for j in 0..d {
        for i in 0..d {
            let in_diag = keep_diag && i / nb == j / nb;
            if uplo.is_unreferenced(i, j) && !in_diag {
                data[i + j * ld] = poison;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn symmetric_entry_mirrors() {
        let a = Matrix::from_fn(3, 3, |i, j| (10 * i + j) as f64);
        let v = a.view();
        assert_eq!(operator_entry(Op::SymvLower, &v, 0, 2), 20.0);
        assert_eq!(operator_entry(Op::SymvUpper, &v, 2, 0), 2.0);
    }

    #[test]
    fn small_gemv() {
        let a = Matrix::from_fn(2, 2, |i, j| (i * 2 + j + 1) as f64);
        let y = reference_mv(Op::GemvN, &a.view(), &[1.0, 1.0], &[1.0, 1.0], 1.0, 1.0);
        assert_eq!(y, vec![4.0, 8.0]);
        let yt = reference_mv(Op::GemvT, &a.view(), &[1.0, 0.0], &[0.0, 0.0], 2.0, 0.0);
        assert_eq!(yt, vec![2.0, 4.0]);
    }
}
