#![allow(dead_code)]

use blockmv::kernel::Op;
use blockmv::matrix::{Matrix, MatrixView, Uplo};
use blockmv::precision::Scalar;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c<T: Scalar>(v: T) -> Complex64 {
    Complex64::new(v.re(), v.im())
}

/// Dense `op(A)` in Complex64, built only from the entries `op` references.
pub fn operator<T: Scalar>(op: Op, a: &MatrixView<'_, T>) -> Vec<Vec<Complex64>> {
    let (m, n) = (a.rows(), a.cols());
    let (rows, cols) = if op == Op::GemvN { (m, n) } else { (n, m) };
    let lower = matches!(op, Op::SymvLower | Op::HemvLower);
    let herm = matches!(op, Op::HemvLower | Op::HemvUpper);
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| match op {
                    Op::GemvN => c(a.get(i, j)),
                    Op::GemvT => c(a.get(j, i)),
                    Op::GemvC => c(a.get(j, i)).conj(),
                    _ => {
                        let stored = if lower { i >= j } else { i <= j };
                        let v = if stored { c(a.get(i, j)) } else { c(a.get(j, i)) };
                        if herm && i == j {
                            Complex64::new(v.re, 0.0)
                        } else if herm && !stored {
                            v.conj()
                        } else {
                            v
                        }
                    }
                })
                .collect()
        })
        .collect()
}

pub struct OracleResult {
    pub y: Vec<Complex64>,
    /// `|alpha| ||op(A)||_inf ||x||_inf + |beta| ||y||_inf`.
    pub scale: f64,
}

pub fn oracle<T: Scalar>(op: Op, a: &MatrixView<'_, T>, x: &[T], y: &[T], alpha: T, beta: T) -> OracleResult {
    let opa = operator(op, a);
    let out = opa
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let acc: Complex64 = row.iter().zip(x).map(|(&aij, &xj)| aij * c(xj)).sum();
            let base = if beta.is_zero() { Complex64::new(0.0, 0.0) } else { c(beta) * c(y[i]) };
            base + c(alpha) * acc
        })
        .collect();
    let norm_a = opa.iter().map(|r| r.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max);
    let inf = |v: &[T]| v.iter().map(|e| e.modulus()).fold(0.0, f64::max);
    let beta_term = if beta.is_zero() { 0.0 } else { beta.modulus() * inf(y) };
    OracleResult {
        y: out,
        scale: alpha.modulus() * norm_a * inf(x) + beta_term,
    }
}

/// Largest deviation from the oracle in units of `eps * scale`.
pub fn scaled_error<T: Scalar>(op: Op, a: &MatrixView<'_, T>, x: &[T], y: &[T], alpha: T, beta: T, got: &[T]) -> f64 {
    let want = oracle(op, a, x, y, alpha, beta);
    assert_eq!(got.len(), want.y.len());
    let err = got.iter().zip(&want.y).map(|(g, w)| (c(*g) - w).norm()).fold(0.0, f64::max);
    if want.scale == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / (T::PRECISION.epsilon() * want.scale)
    }
}

/// Largest difference between two results in units of `eps * scale`.
pub fn scaled_diff<T: Scalar>(a: &[T], b: &[T], scale: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let d = a.iter().zip(b).map(|(p, q)| (c(*p) - c(*q)).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        d
    } else {
        d / (T::PRECISION.epsilon() * scale)
    }
}

/// Overwrites every unreferenced entry with NaN.
pub fn poison<T: Scalar>(a: &mut Matrix<T>, uplo: Uplo) {
    let (m, n, ld) = (a.rows(), a.cols(), a.ld());
    let nan = T::from_parts(f64::NAN, f64::NAN);
    let data = a.data_mut();
    for j in 0..n {
        for i in 0..m {
            if uplo.is_unreferenced(i, j) {
                data[j * ld + i] = nan;
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pick<'a, X>(r: &mut ChaCha8Rng, xs: &'a [X]) -> &'a X {
    &xs[r.gen_range(0..xs.len())]
}

/// Distinct `seg`-byte windows touched by `len` elements starting at element
/// `start`, by walking every element.
pub fn windows_touched(start: usize, len: usize, b: usize, seg: usize) -> u64 {
    let mut count = 0;
    let mut last = None;
    for e in start..start + len {
        for w in [e * b / seg, ((e + 1) * b - 1) / seg] {
            if last != Some(w) {
                count += 1;
                last = Some(w);
            }
        }
    }
    count
}
