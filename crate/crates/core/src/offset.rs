//! Submatrix kernels that take the parent matrix plus offsets.
//!
//! The requested region is widened upward and leftward to the previous block
//! boundary of the parent allocation, so with a segment-aligned leading
//! dimension every column chunk a TB fetches starts on a segment boundary.
//! The widened rows and columns are read but masked out of the arithmetic.

use crate::device::DEFAULT_SEGMENT_BYTES;
use crate::error::{Error, Result};
use crate::kernel::{
    launch_diag, launch_gemv, launch_scal, launch_symv_offdiag, trace_masked, transpose_mode, Coefficients, Counters,
    ExecutionReport, KernelRequest, Mask, Op, SingleDevice,
};
use crate::matrix::{HermitianView, Layout, MatrixView};
use crate::partition::KernelConfig;
use crate::precision::{Precision, Scalar};

/// `y = alpha * op(A[row_off.., col_off..]) * x + beta * y` on a
/// `sub_m x sub_n` window of `parent`.
#[derive(Debug, Clone, Copy)]
pub struct OffsetRequest<'a, T> {
    pub op: Op,
    pub parent: MatrixView<'a, T>,
    pub row_off: usize,
    pub col_off: usize,
    pub sub_m: usize,
    pub sub_n: usize,
    pub x: &'a [T],
    pub y: &'a [T],
    pub alpha: T,
    pub beta: T,
    pub config: KernelConfig,
    pub segment_bytes: usize,
}

/// Widened region actually walked by an offset kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Padding {
    /// Leading rows read but ignored.
    pub top: usize,
    /// Leading columns read but ignored.
    pub left: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Padding {
    /// Elements read beyond the requested window.
    pub fn extra_elements(&self, sub_m: usize, sub_n: usize) -> usize {
        self.rows * self.cols - sub_m * sub_n
    }
}

/// Requested dimensions rounded up to a multiple of `nb`, capped by the
/// parent dimensions.
pub fn effective_dims(m: usize, n: usize, sub_m: usize, sub_n: usize, nb: usize) -> (usize, usize) {
    (m.min(sub_m.div_ceil(nb) * nb), n.min(sub_n.div_ceil(nb) * nb))
}

impl<'a, T: Scalar> OffsetRequest<'a, T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        op: Op,
        parent: MatrixView<'a, T>,
        row_off: usize,
        col_off: usize,
        sub_m: usize,
        sub_n: usize,
        x: &'a [T],
        y: &'a [T],
        alpha: T,
        beta: T,
        config: KernelConfig,
    ) -> Self {
        Self {
            op,
            parent,
            row_off,
            col_off,
            sub_m,
            sub_n,
            x,
            y,
            alpha,
            beta,
            config,
            segment_bytes: DEFAULT_SEGMENT_BYTES,
        }
    }

    pub fn with_segment_bytes(mut self, segment_bytes: usize) -> Self {
        self.segment_bytes = segment_bytes;
        self
    }

    /// The requested window as an ordinary view.
    pub fn submatrix(&self) -> Result<MatrixView<'a, T>> {
        self.parent.submatrix(self.row_off, self.col_off, self.sub_m, self.sub_n)
    }

    /// The same operation as a standard request on the window view.
    pub fn as_standard(&self) -> Result<KernelRequest<'a, T>> {
        Ok(KernelRequest::new(self.op, self.submatrix()?, self.x, self.y, self.alpha, self.beta, self.config)
            .with_segment_bytes(self.segment_bytes))
    }

    pub fn padding(&self) -> Result<Padding> {
        padding_for(self.op, &self.parent.layout(), self.row_off, self.col_off, self.sub_m, self.sub_n, self.config.nb)
    }

    fn widened(&self, pad: &Padding) -> Result<MatrixView<'a, T>> {
        let p = self.parent;
        MatrixView::with_offsets(
            p.data(),
            pad.rows,
            pad.cols,
            p.ld(),
            p.row_offset() + self.row_off - pad.top,
            p.col_offset() + self.col_off - pad.left,
        )
    }
}

fn padding_for(
    op: Op,
    parent: &Layout,
    row_off: usize,
    col_off: usize,
    sub_m: usize,
    sub_n: usize,
    nb: usize,
) -> Result<Padding> {
    if row_off + sub_m > parent.m || col_off + sub_n > parent.n {
        return Err(Error::OffsetOutOfRange(format!(
            "{sub_m}x{sub_n} window at ({row_off},{col_off}) exceeds parent {}x{}",
            parent.m, parent.n
        )));
    }
    let abs_row = parent.row_offset + row_off;
    let abs_col = parent.col_offset + col_off;
    let top = abs_row % nb;
    let left = if op.is_symmetric() {
        if sub_m != sub_n {
            return Err(Error::DimensionMismatch(format!(
                "{}: window must be square, got {sub_m}x{sub_n}",
                op.routine()
            )));
        }
        // The diagonal of the window has to stay on the block diagonal.
        if abs_col < top {
            return Err(Error::OffsetOutOfRange(format!(
                "{}: cannot widen window at column {abs_col} left by {top}",
                op.routine()
            )));
        }
        top
    } else {
        abs_col % nb
    };
    Ok(Padding {
        top,
        left,
        rows: top + sub_m,
        cols: left + sub_n,
    })
}

fn warn_unaligned(layout: &Layout, precision: Precision, segment_bytes: usize) {
    if !(layout.ld * precision.element_bytes()).is_multiple_of(segment_bytes) {
        log::warn!(
            "parent ld {} is not a multiple of {} {precision} elements; column starts stay unaligned",
            layout.ld,
            precision.elements_per_segment(segment_bytes)
        );
    }
}

fn padded_vector<T: Scalar>(lead: usize, v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); lead];
    out.extend_from_slice(v);
    out
}

/// GEMV on a window of the parent matrix, reading whole aligned blocks.
pub fn gemv_offset<T: Scalar>(req: &OffsetRequest<'_, T>) -> Result<ExecutionReport<T>> {
    if !req.op.is_gemv() {
        return Err(Error::IllegalArgument {
            routine: "gemv",
            position: 1,
            reason: format!("{:?} is not a GEMV operation", req.op),
        });
    }
    req.as_standard()?.validate()?;
    let pad = req.padding()?;
    warn_unaligned(&req.parent.layout(), T::PRECISION, req.segment_bytes);
    let mut counters = Counters::new(req.segment_bytes);
    if req.sub_m == 0 || req.sub_n == 0 || (req.alpha.is_zero() && req.beta.is_one()) {
        return Ok(ExecutionReport { y_out: req.y.to_vec(), counters });
    }
    let wide = req.widened(&pad)?;
    let mask = Mask { rows: pad.top, cols: pad.left };
    let (x_lead, y_lead) = if req.op == Op::GemvN { (pad.left, pad.top) } else { (pad.top, pad.left) };
    let x = padded_vector(x_lead, req.x);
    let mut y = padded_vector(y_lead, req.y);
    counters.push_launch(launch_scal(&mut y[y_lead..], req.beta, req.segment_bytes));
    if !req.alpha.is_zero() {
        counters.push_launch(launch_gemv(
            transpose_mode(req.op),
            &wide,
            mask,
            &x,
            &mut y,
            req.alpha,
            &req.config,
            req.segment_bytes,
        ));
    }
    y.drain(..y_lead);
    Ok(ExecutionReport { y_out: y, counters })
}

/// SYMV/HEMV on a square window whose diagonal lies on the parent's
/// diagonal offset by `row_off - col_off`.
pub fn symv_hemv_offset<T: Scalar>(req: &OffsetRequest<'_, T>) -> Result<ExecutionReport<T>> {
    let Some(uplo) = req.op.uplo() else {
        return Err(Error::IllegalArgument {
            routine: "symv",
            position: 1,
            reason: format!("{:?} is not a SYMV/HEMV operation", req.op),
        });
    };
    let pad = req.padding()?;
    req.as_standard()?.validate()?;
    warn_unaligned(&req.parent.layout(), T::PRECISION, req.segment_bytes);
    let mut counters = Counters::new(req.segment_bytes);
    if req.sub_m == 0 || (req.alpha.is_zero() && req.beta.is_one()) {
        return Ok(ExecutionReport { y_out: req.y.to_vec(), counters });
    }
    let wide = req.widened(&pad)?;
    let mask = Mask { rows: pad.top, cols: pad.left };
    let x = padded_vector(pad.top, req.x);
    let mut y = padded_vector(pad.top, req.y);
    let h = HermitianView::new(wide, uplo, req.config.nb)?;
    let src = SingleDevice::new(&h);
    let conj = req.op.conjugates();
    let (alpha, beta, cfg, seg) = (req.alpha, req.beta, &req.config, req.segment_bytes);
    counters.push_launch(launch_diag(&src, uplo, conj, mask, &x, &mut y, alpha, beta, cfg, seg));
    if !alpha.is_zero() {
        counters.push_launch(launch_symv_offdiag(&src, uplo, conj, mask, &x, &mut y, alpha, cfg, seg));
    }
    y.drain(..pad.top);
    Ok(ExecutionReport { y_out: y, counters })
}

/// Dispatches to [`gemv_offset`] or [`symv_hemv_offset`].
pub fn execute_offset<T: Scalar>(req: &OffsetRequest<'_, T>) -> Result<ExecutionReport<T>> {
    if req.op.is_gemv() {
        gemv_offset(req)
    } else {
        symv_hemv_offset(req)
    }
}

/// Counters of an offset kernel from layouts alone.
#[allow(clippy::too_many_arguments)]
pub fn trace_offset(
    op: Op,
    precision: Precision,
    parent: Layout,
    row_off: usize,
    col_off: usize,
    sub_m: usize,
    sub_n: usize,
    coefficients: Coefficients,
    config: &KernelConfig,
    segment_bytes: usize,
) -> Result<Counters> {
    config.validate()?;
    let pad = padding_for(op, &parent, row_off, col_off, sub_m, sub_n, config.nb)?;
    let wide = Layout {
        m: pad.rows,
        n: pad.cols,
        ld: parent.ld,
        row_offset: parent.row_offset + row_off - pad.top,
        col_offset: parent.col_offset + col_off - pad.left,
    };
    let mask = Mask { rows: pad.top, cols: pad.left };
    if sub_m == 0 || sub_n == 0 {
        return Ok(Counters::new(segment_bytes));
    }
    Ok(trace_masked(op, precision, wide, mask, coefficients, config, segment_bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::execute;
    use crate::matrix::Matrix;

    #[test]
    fn effective_dims_examples() {
        assert_eq!(effective_dims(16384, 16384, 16383, 16383, 32), (16384, 16384));
        assert_eq!(effective_dims(100, 100, 64, 64, 32), (64, 64));
        assert_eq!(effective_dims(100, 100, 90, 10, 32), (96, 32));
    }

    #[test]
    fn zero_offsets_match_standard_kernel() {
        let a = Matrix::from_fn(70, 50, |i, j| (i as f64 - j as f64) * 0.25);
        let x: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let y = vec![1.0; 70];
        let cfg = KernelConfig::new(32, 2, 2).unwrap();
        let off = OffsetRequest::new(Op::GemvN, a.view(), 0, 0, 70, 50, &x, &y, 2.0, 0.5, cfg);
        let std = execute(&off.as_standard().unwrap()).unwrap();
        assert_eq!(gemv_offset(&off).unwrap(), std);
    }

    #[test]
    fn padding_is_below_nb() {
        let layout = Layout { m: 300, n: 300, ld: 320, row_offset: 0, col_offset: 0 };
        let p = padding_for(Op::GemvT, &layout, 45, 70, 100, 100, 32).unwrap();
        assert_eq!(p, Padding { top: 13, left: 6, rows: 113, cols: 106 });
        assert!(padding_for(Op::SymvLower, &layout, 45, 70, 100, 90, 32).is_err());
        assert!(padding_for(Op::GemvN, &layout, 250, 0, 100, 10, 32).is_err());
    }
}
