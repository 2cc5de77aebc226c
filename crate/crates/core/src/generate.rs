//! Seeded random operands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::matrix::Matrix;
use crate::precision::Scalar;

/// Deterministic generator of uniform `[-1, 1)` entries (both parts for
/// complex types).
pub struct Operands {
    rng: ChaCha8Rng,
}

impl Operands {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn scalar<T: Scalar>(&mut self) -> T {
        let re = self.rng.gen_range(-1.0..1.0);
        let im = if T::PRECISION.is_complex() {
            self.rng.gen_range(-1.0..1.0)
        } else {
            0.0
        };
        T::from_parts(re, im)
    }

    pub fn vector<T: Scalar>(&mut self, len: usize) -> Vec<T> {
        (0..len).map(|_| self.scalar()).collect()
    }

    /// Random `rows x cols` matrix with leading dimension `ld`; padding rows
    /// stay zero.
    pub fn matrix<T: Scalar>(&mut self, rows: usize, cols: usize, ld: usize) -> Result<Matrix<T>> {
        let mut m = Matrix::zeros_with_ld(rows, cols, ld)?;
        m.fill_with(|_, _| self.scalar());
        Ok(m)
    }
}
