//! Column-major storage and views.
//!
//! An allocation is one flat buffer with a leading dimension. Submatrices are
//! described by `(row_offset, col_offset, m, n)` into the parent buffer and
//! never copy data. Element `(i, j)` of a view lives at linear index
//! `(col_offset + j) * ld + row_offset + i`.

use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};
use crate::precision::{Precision, Scalar};

/// Smallest multiple of `pad_to` that is `>= m`.
pub fn padded_ld(m: usize, pad_to: usize) -> usize {
    m.div_ceil(pad_to) * pad_to
}

/// Owned column-major allocation.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    ld: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Zero matrix with `ld = rows`.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::zeros_with_ld(rows, cols, rows.max(1)).expect("ld = rows is always valid")
    }

    pub fn zeros_with_ld(rows: usize, cols: usize, ld: usize) -> Result<Self> {
        if ld < rows.max(1) {
            return Err(Error::InvalidDimension(format!("ld {ld} < rows {rows}")));
        }
        Ok(Self {
            rows,
            cols,
            ld,
            data: vec![T::zero(); ld * cols],
        })
    }

    /// Zero-initialized allocation whose leading dimension is padded up to a
    /// multiple of `pad_to` elements.
    pub fn padded(rows: usize, cols: usize, pad_to: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "padded allocation needs positive dimensions, got {rows}x{cols}"
            )));
        }
        if pad_to == 0 {
            return Err(Error::InvalidDimension("pad_to must be positive".into()));
        }
        Self::zeros_with_ld(rows, cols, padded_ld(rows, pad_to))
    }

    /// Padding that keeps every column start segment aligned.
    pub fn segment_aligned(rows: usize, cols: usize, segment_bytes: usize) -> Result<Self> {
        Self::padded(rows, cols, (segment_bytes / T::PRECISION.element_bytes()).max(1))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.fill_with(&mut f);
        m
    }

    pub fn fill_with(&mut self, mut f: impl FnMut(usize, usize) -> T) {
        for j in 0..self.cols {
            for i in 0..self.rows {
                self.data[j * self.ld + i] = f(i, j);
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ld(&self) -> usize {
        self.ld
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.ld + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.ld + i] = v;
    }

    pub fn view(&self) -> MatrixView<'_, T> {
        MatrixView {
            data: &self.data,
            m: self.rows,
            n: self.cols,
            ld: self.ld,
            row_offset: 0,
            col_offset: 0,
        }
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("ld", &self.ld)
            .finish_non_exhaustive()
    }
}

/// Data-free description of where a view's elements live in its parent buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub n: usize,
    pub ld: usize,
    pub row_offset: usize,
    pub col_offset: usize,
}

impl Layout {
    pub fn linear_index(&self, i: usize, j: usize) -> usize {
        (self.col_offset + j) * self.ld + self.row_offset + i
    }

    /// Inverse of [`Layout::linear_index`] for addresses inside the view.
    pub fn decode(&self, linear: usize) -> Option<(usize, usize)> {
        let col = linear / self.ld;
        let row = linear % self.ld;
        let j = col.checked_sub(self.col_offset)?;
        let i = row.checked_sub(self.row_offset)?;
        (i < self.m && j < self.n).then_some((i, j))
    }

    pub fn sub(&self, row: usize, col: usize, m: usize, n: usize) -> Layout {
        Layout {
            m,
            n,
            ld: self.ld,
            row_offset: self.row_offset + row,
            col_offset: self.col_offset + col,
        }
    }
}

/// Borrowed column-major view into a parent allocation.
#[derive(Clone, Copy)]
pub struct MatrixView<'a, T> {
    data: &'a [T],
    m: usize,
    n: usize,
    ld: usize,
    row_offset: usize,
    col_offset: usize,
}

impl<'a, T: Scalar> MatrixView<'a, T> {
    /// Wraps a raw column-major buffer.
    pub fn new(data: &'a [T], m: usize, n: usize, ld: usize) -> Result<Self> {
        Self::with_offsets(data, m, n, ld, 0, 0)
    }

    pub fn with_offsets(
        data: &'a [T],
        m: usize,
        n: usize,
        ld: usize,
        row_offset: usize,
        col_offset: usize,
    ) -> Result<Self> {
        if ld < (m + row_offset).max(1) {
            return Err(Error::InvalidDimension(format!(
                "ld {ld} < m {m} + row offset {row_offset}"
            )));
        }
        if m > 0 && n > 0 {
            let last = (col_offset + n - 1) * ld + row_offset + m - 1;
            if last >= data.len() {
                return Err(Error::InvalidDimension(format!(
                    "view {m}x{n} at ({row_offset},{col_offset}) with ld {ld} exceeds buffer of {} elements",
                    data.len()
                )));
            }
        }
        Ok(Self {
            data,
            m,
            n,
            ld,
            row_offset,
            col_offset,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn ld(&self) -> usize {
        self.ld
    }

    pub fn row_offset(&self) -> usize {
        self.row_offset
    }

    pub fn col_offset(&self) -> usize {
        self.col_offset
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn data(&self) -> &'a [T] {
        self.data
    }

    pub fn layout(&self) -> Layout {
        Layout {
            m: self.m,
            n: self.n,
            ld: self.ld,
            row_offset: self.row_offset,
            col_offset: self.col_offset,
        }
    }

    pub fn linear_index(&self, i: usize, j: usize) -> usize {
        self.layout().linear_index(i, j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.m && j < self.n, "({i},{j}) outside {}x{}", self.m, self.n);
        self.data[(self.col_offset + j) * self.ld + self.row_offset + i]
    }

    /// Submatrix view relative to this view; no data is copied.
    pub fn submatrix(&self, row: usize, col: usize, m: usize, n: usize) -> Result<Self> {
        if row + m > self.m || col + n > self.n {
            return Err(Error::OffsetOutOfRange(format!(
                "submatrix {m}x{n} at ({row},{col}) exceeds {}x{}",
                self.m, self.n
            )));
        }
        Ok(Self {
            data: self.data,
            m,
            n,
            ld: self.ld,
            row_offset: self.row_offset + row,
            col_offset: self.col_offset + col,
        })
    }

    /// Copies the view into a fresh unpadded allocation.
    pub fn to_matrix(&self) -> Matrix<T> {
        Matrix::from_fn(self.m, self.n, |i, j| self.get(i, j))
    }
}

impl<T> fmt::Debug for MatrixView<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixView")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("ld", &self.ld)
            .field("row_offset", &self.row_offset)
            .field("col_offset", &self.col_offset)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Uplo {
    Lower,
    Upper,
}

impl Uplo {
    /// True when `(i, j)` lies strictly inside the opposite triangle.
    pub fn is_unreferenced(self, i: usize, j: usize) -> bool {
        match self {
            Uplo::Lower => i < j,
            Uplo::Upper => i > j,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'L' => Some(Uplo::Lower),
            'U' => Some(Uplo::Upper),
            _ => None,
        }
    }
}

/// Square view of a symmetric or Hermitian matrix of which only the `uplo`
/// triangle is meaningful.
///
/// Kernels read through [`HermitianView::read`], which counts any access to
/// the opposite triangle outside a diagonal block as a violation.
#[derive(Debug)]
pub struct HermitianView<'a, T> {
    base: MatrixView<'a, T>,
    uplo: Uplo,
    nb: usize,
    violations: Cell<u64>,
}

impl<'a, T: Scalar> HermitianView<'a, T> {
    pub fn new(base: MatrixView<'a, T>, uplo: Uplo, nb: usize) -> Result<Self> {
        if base.rows() != base.cols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                base.rows(),
                base.cols()
            )));
        }
        Ok(Self {
            base,
            uplo,
            nb: nb.max(1),
            violations: Cell::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    pub fn uplo(&self) -> Uplo {
        self.uplo
    }

    pub fn base(&self) -> MatrixView<'a, T> {
        self.base
    }

    pub fn block_size(&self) -> usize {
        self.nb
    }

    /// Guarded element read in this view's coordinates.
    #[inline]
    pub fn read(&self, i: usize, j: usize) -> T {
        if i / self.nb != j / self.nb && self.uplo.is_unreferenced(i, j) {
            self.violations.set(self.violations.get() + 1);
        }
        self.base.get(i, j)
    }

    pub fn violations(&self) -> u64 {
        self.violations.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn padded_leading_dimensions() {
        assert_eq!(Matrix::<f32>::padded(100, 10, 32).unwrap().ld(), 128);
        assert_eq!(Matrix::<f32>::padded(32, 32, 32).unwrap().ld(), 32);
        assert_eq!(Matrix::<f64>::padded(16383, 4, 16).unwrap().ld(), 16384);
    }

    #[test]
    fn padded_is_zeroed() {
        let m = Matrix::<f64>::padded(5, 3, 8).unwrap();
        assert!(m.data().iter().all(|v| *v == 0.0));
        assert_eq!(m.data().len(), 8 * 3);
    }

    #[test]
    fn padded_rejects_zero_dims() {
        assert!(Matrix::<f32>::padded(0, 4, 32).is_err());
        assert!(Matrix::<f32>::padded(4, 0, 32).is_err());
        assert!(Matrix::<f32>::padded(4, 4, 0).is_err());
    }

    #[test]
    fn submatrix_shares_parent_buffer() {
        let a = Matrix::<f64>::from_fn(6, 5, |i, j| (10 * i + j) as f64);
        let v = a.view().submatrix(2, 1, 3, 3).unwrap();
        assert_eq!(v.get(0, 0), 21.0);
        assert_eq!(v.get(2, 2), 43.0);
        assert_eq!(v.linear_index(0, 0), 6 + 2);
        assert!(std::ptr::eq(v.data(), a.data()));
        assert!(a.view().submatrix(4, 0, 3, 1).is_err());
    }

    #[test]
    fn view_bounds_checked() {
        let buf = vec![0.0f32; 10];
        assert!(MatrixView::new(&buf, 4, 3, 4).is_err());
        assert!(MatrixView::new(&buf, 4, 2, 4).is_ok());
        assert!(MatrixView::new(&buf, 5, 2, 4).is_err());
    }

    #[test]
    fn guard_flags_opposite_triangle() {
        let a = Matrix::<f64>::zeros(64, 64);
        let h = HermitianView::new(a.view(), Uplo::Lower, 32).unwrap();
        h.read(40, 3);
        h.read(3, 10); // upper half of a diagonal block is allowed
        assert_eq!(h.violations(), 0);
        h.read(3, 40);
        assert_eq!(h.violations(), 1);
        let rect = Matrix::<f64>::zeros(4, 5);
        assert!(HermitianView::new(rect.view(), Uplo::Upper, 32).is_err());
    }

    proptest! {
        #[test]
        fn linear_index_round_trips(
            m in 1usize..40, n in 1usize..40, extra in 0usize..9,
            ro in 0usize..5, co in 0usize..5, i in 0usize..40, j in 0usize..40,
        ) {
            let layout = Layout { m, n, ld: m + ro + extra, row_offset: ro, col_offset: co };
            let (i, j) = (i % m, j % n);
            prop_assert_eq!(layout.decode(layout.linear_index(i, j)), Some((i, j)));
        }

        #[test]
        fn padded_ld_properties(m in 1usize..5000, pad in 1usize..300) {
            let ld = padded_ld(m, pad);
            prop_assert_eq!(ld % pad, 0);
            prop_assert!(ld >= m);
            prop_assert!(ld - m < pad);
        }
    }
}
