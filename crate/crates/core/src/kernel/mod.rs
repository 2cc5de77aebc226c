//! Functional simulation of the blocked matrix-vector kernels.
//!
//! Each kernel runs TB by TB in sorted `(x̄, ȳ)` order. Inside a TB the
//! simulated threads follow the double-buffered half-block schedule: prefetch
//! the upper half block, then per block fetch the lower half, compute the
//! upper half, prefetch the next upper half, compute the lower half. Partial
//! products go through the same shared-memory reduction spaces the device
//! kernels use and land in `y` through (serialized) atomic adds.
//!
//! Atomic accumulation on a device is unordered; here it is deterministic, so
//! results differ from a naive loop only by reassociation.

mod gemv;
mod plan;
mod scal;
mod symv;
mod trace;

use std::fmt;

use crate::cost::TransactionLedger;
use crate::device::DEFAULT_SEGMENT_BYTES;
use crate::error::{Error, Result};
use crate::matrix::{HermitianView, Layout, MatrixView, Uplo};
use crate::partition::KernelConfig;
use crate::precision::{Precision, Scalar};

pub(crate) use gemv::{launch_gemv, trace_gemv};
pub(crate) use plan::BlockColumnLayouts;
pub(crate) use symv::BlockColumns;
pub use scal::SCAL_TB_ELEMENTS;
pub(crate) use scal::launch_scal;
pub(crate) use symv::{launch_diag, launch_symv_offdiag, trace_diag, trace_symv_offdiag, SingleDevice};

/// Operation requested from the kernel layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    GemvN,
    GemvT,
    /// Conjugate transpose; same as `GemvT` for real precisions.
    GemvC,
    SymvLower,
    SymvUpper,
    HemvLower,
    HemvUpper,
}

impl Op {
    pub fn is_gemv(self) -> bool {
        matches!(self, Op::GemvN | Op::GemvT | Op::GemvC)
    }

    pub fn is_symmetric(self) -> bool {
        !self.is_gemv()
    }

    pub fn uplo(self) -> Option<Uplo> {
        match self {
            Op::SymvLower | Op::HemvLower => Some(Uplo::Lower),
            Op::SymvUpper | Op::HemvUpper => Some(Uplo::Upper),
            _ => None,
        }
    }

    /// Whether mirrored or transposed elements are conjugated.
    pub fn conjugates(self) -> bool {
        matches!(self, Op::GemvC | Op::HemvLower | Op::HemvUpper)
    }

    pub fn gemv_from_char(trans: char) -> Result<Op> {
        match trans.to_ascii_uppercase() {
            'N' => Ok(Op::GemvN),
            'T' => Ok(Op::GemvT),
            'C' => Ok(Op::GemvC),
            other => Err(Error::IllegalArgument {
                routine: "gemv",
                position: 1,
                reason: format!("trans must be N, T or C, got `{other}`"),
            }),
        }
    }

    pub fn symmetric_from_char(uplo: char, hermitian: bool) -> Result<Op> {
        let routine = if hermitian { "hemv" } else { "symv" };
        let uplo = Uplo::from_char(uplo).ok_or_else(|| Error::IllegalArgument {
            routine,
            position: 1,
            reason: format!("uplo must be U or L, got `{uplo}`"),
        })?;
        Ok(match (uplo, hermitian) {
            (Uplo::Lower, false) => Op::SymvLower,
            (Uplo::Upper, false) => Op::SymvUpper,
            (Uplo::Lower, true) => Op::HemvLower,
            (Uplo::Upper, true) => Op::HemvUpper,
        })
    }

    pub(crate) fn routine(self) -> &'static str {
        match self {
            Op::GemvN | Op::GemvT | Op::GemvC => "gemv",
            Op::SymvLower | Op::SymvUpper => "symv",
            Op::HemvLower | Op::HemvUpper => "hemv",
        }
    }
}

/// Transpose mode of a GEMV accumulation kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Trans {
    No,
    Yes { conj: bool },
}

/// Which kernel a launch ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Scal,
    GemvN,
    GemvT,
    SymvOffDiag,
    DiagBlock,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Scal => "scal",
            KernelKind::GemvN => "gemv_n",
            KernelKind::GemvT => "gemv_t",
            KernelKind::SymvOffDiag => "symv_offdiag",
            KernelKind::DiagBlock => "diag_block",
        })
    }
}

/// A full `y = alpha * op(A) * x + beta * y` request.
#[derive(Debug, Clone, Copy)]
pub struct KernelRequest<'a, T> {
    pub op: Op,
    pub a: MatrixView<'a, T>,
    pub x: &'a [T],
    pub y: &'a [T],
    pub alpha: T,
    pub beta: T,
    pub config: KernelConfig,
    pub segment_bytes: usize,
}

impl<'a, T: Scalar> KernelRequest<'a, T> {
    pub fn new(
        op: Op,
        a: MatrixView<'a, T>,
        x: &'a [T],
        y: &'a [T],
        alpha: T,
        beta: T,
        config: KernelConfig,
    ) -> Self {
        Self {
            op,
            a,
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

    /// Output length.
    pub fn out_len(&self) -> usize {
        match self.op {
            Op::GemvN => self.a.rows(),
            _ => self.a.cols(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let routine = self.op.routine();
        self.config.validate()?;
        if self.segment_bytes == 0 {
            return Err(Error::InvalidDimension("segment_bytes must be positive".into()));
        }
        let (m, n) = (self.a.rows(), self.a.cols());
        if self.op.is_symmetric() && m != n {
            return Err(Error::DimensionMismatch(format!(
                "{routine}: matrix must be square, got {m}x{n}"
            )));
        }
        let (x_len, y_len) = match self.op {
            Op::GemvN => (n, m),
            _ => (m, n),
        };
        let (x_pos, y_pos) = if self.op.is_gemv() { (7, 10) } else { (6, 9) };
        if self.x.len() != x_len {
            return Err(Error::DimensionMismatch(format!(
                "{routine} parameter {x_pos}: x has length {}, expected {x_len}",
                self.x.len()
            )));
        }
        if self.y.len() != y_len {
            return Err(Error::DimensionMismatch(format!(
                "{routine} parameter {y_pos}: y has length {}, expected {y_len}",
                self.y.len()
            )));
        }
        Ok(())
    }
}

/// Counters of one TB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TbRecord {
    pub x_coord: usize,
    pub y_coord: usize,
    pub start: usize,
    pub workload: usize,
    pub reductions: u64,
    pub atomic_adds: u64,
}

/// Counters of one kernel launch.
#[derive(Debug, Clone, PartialEq)]
pub struct LaunchRecord {
    pub kind: KernelKind,
    pub tb_count: usize,
    pub flops: u64,
    pub atomic_adds: u64,
    pub reduction_events: u64,
    pub guard_violations: u64,
    pub ledger: TransactionLedger,
    pub tbs: Vec<TbRecord>,
}

impl LaunchRecord {
    pub(crate) fn new(kind: KernelKind, segment_bytes: usize) -> Self {
        Self {
            kind,
            tb_count: 0,
            flops: 0,
            atomic_adds: 0,
            reduction_events: 0,
            guard_violations: 0,
            ledger: TransactionLedger::new(segment_bytes),
            tbs: Vec::new(),
        }
    }

    pub(crate) fn push_tb(&mut self, tb: TbRecord) {
        self.tb_count += 1;
        self.atomic_adds += tb.atomic_adds;
        self.reduction_events += tb.reductions;
        self.tbs.push(tb);
    }
}

/// Aggregated counters over a sequence of launches.
#[derive(Debug, Clone, PartialEq)]
pub struct Counters {
    pub bytes_read: u64,
    pub bytes_written: u64,
    /// Segment-sized transactions, matrix and vectors.
    pub transactions: u64,
    /// Real flops of the operation actually carried out.
    pub flops: u64,
    pub atomic_adds: u64,
    pub tb_count: u64,
    pub reduction_events: u64,
    pub guard_violations: u64,
    pub ledger: TransactionLedger,
    pub launches: Vec<LaunchRecord>,
}

impl Counters {
    pub fn new(segment_bytes: usize) -> Self {
        Self {
            bytes_read: 0,
            bytes_written: 0,
            transactions: 0,
            flops: 0,
            atomic_adds: 0,
            tb_count: 0,
            reduction_events: 0,
            guard_violations: 0,
            ledger: TransactionLedger::new(segment_bytes),
            launches: Vec::new(),
        }
    }

    pub fn push_launch(&mut self, launch: LaunchRecord) {
        self.ledger.merge(&launch.ledger);
        self.flops += launch.flops;
        self.atomic_adds += launch.atomic_adds;
        self.tb_count += launch.tb_count as u64;
        self.reduction_events += launch.reduction_events;
        self.guard_violations += launch.guard_violations;
        self.launches.push(launch);
        self.refresh_traffic();
    }

    pub fn merge(&mut self, other: &Counters) {
        for launch in &other.launches {
            self.push_launch(launch.clone());
        }
    }

    fn refresh_traffic(&mut self) {
        self.bytes_read = self.ledger.bytes_read();
        self.bytes_written = self.ledger.bytes_written();
        self.transactions = self.ledger.total_segments();
    }

    /// Kernel kinds in launch order.
    pub fn kernels(&self) -> Vec<KernelKind> {
        self.launches.iter().map(|l| l.kind).collect()
    }

    pub fn launched(&self, kind: KernelKind) -> bool {
        self.launches.iter().any(|l| l.kind == kind)
    }

    pub fn launch(&self, kind: KernelKind) -> Option<&LaunchRecord> {
        self.launches.iter().find(|l| l.kind == kind)
    }
}

/// Output vector plus the counters of every launch that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport<T> {
    pub y_out: Vec<T>,
    pub counters: Counters,
}

/// Leading rows/columns of a view that are read but ignored in computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Mask {
    pub rows: usize,
    pub cols: usize,
}

pub(crate) fn transpose_mode(op: Op) -> Trans {
    match op {
        Op::GemvN => Trans::No,
        Op::GemvT => Trans::Yes { conj: false },
        _ => Trans::Yes { conj: true },
    }
}

fn accumulate_only<T: Scalar>(
    req: &KernelRequest<'_, T>,
    kind: KernelKind,
    op_ok: bool,
) -> Result<ExecutionReport<T>> {
    if !op_ok {
        return Err(Error::IllegalArgument {
            routine: req.op.routine(),
            position: 1,
            reason: format!("{kind} kernel cannot run {:?}", req.op),
        });
    }
    req.validate()?;
    let mut y = req.y.to_vec();
    let mut counters = Counters::new(req.segment_bytes);
    let launch = match kind {
        KernelKind::GemvN | KernelKind::GemvT => launch_gemv(
            transpose_mode(req.op),
            &req.a,
            Mask::default(),
            req.x,
            &mut y,
            req.alpha,
            &req.config,
            req.segment_bytes,
        ),
        KernelKind::SymvOffDiag | KernelKind::DiagBlock => {
            let uplo = req.op.uplo().expect("symmetric op");
            let h = HermitianView::new(req.a, uplo, req.config.nb)?;
            let src = SingleDevice::new(&h);
            if kind == KernelKind::SymvOffDiag {
                launch_symv_offdiag(&src, uplo, req.op.conjugates(), Mask::default(), req.x, &mut y, req.alpha, &req.config, req.segment_bytes)
            } else {
                launch_diag(&src, uplo, req.op.conjugates(), Mask::default(), req.x, &mut y, req.alpha, req.beta, &req.config, req.segment_bytes)
            }
        }
        KernelKind::Scal => unreachable!(),
    };
    counters.push_launch(launch);
    Ok(ExecutionReport { y_out: y, counters })
}

/// Non-transposed accumulation kernel: `y_out = y + alpha * A * x`.
pub fn run_gemv_n<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    accumulate_only(req, KernelKind::GemvN, req.op == Op::GemvN)
}

/// Transposed accumulation kernel: `y_out = y + alpha * op(A) * x` with
/// `op` the transpose (`GemvT`) or conjugate transpose (`GemvC`).
pub fn run_gemv_t<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    accumulate_only(req, KernelKind::GemvT, matches!(req.op, Op::GemvT | Op::GemvC))
}

/// Off-diagonal part of SYMV/HEMV: `y_out = y + alpha * Â * x`, where `Â`
/// holds every off-diagonal block of the matrix reconstructed from the stored
/// triangle.
pub fn run_symv_offdiag<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    accumulate_only(req, KernelKind::SymvOffDiag, req.op.is_symmetric())
}

/// Diagonal-block kernel with the fused beta scaling:
/// `y_out[seg] = beta * y[seg] + alpha * D_k * x[seg]` for every diagonal
/// block `D_k`.
pub fn run_diag_block<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    accumulate_only(req, KernelKind::DiagBlock, req.op.is_symmetric())
}

/// `y <- beta * y`. A zero beta writes zeros without reading `y`.
pub fn run_scal<T: Scalar>(y: &[T], beta: T) -> ExecutionReport<T> {
    let mut out = y.to_vec();
    let mut counters = Counters::new(DEFAULT_SEGMENT_BYTES);
    counters.push_launch(launch_scal(&mut out, beta, DEFAULT_SEGMENT_BYTES));
    ExecutionReport { y_out: out, counters }
}

/// Standard GEMV entry point: a SCAL launch for beta, then the accumulation
/// kernel. Returns early without touching the matrix when `alpha = 0` and
/// `beta = 1`, or when a dimension is zero.
pub fn gemv<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    if !req.op.is_gemv() {
        return Err(Error::IllegalArgument {
            routine: "gemv",
            position: 1,
            reason: format!("{:?} is not a GEMV operation", req.op),
        });
    }
    req.validate()?;
    let mut y = req.y.to_vec();
    let mut counters = Counters::new(req.segment_bytes);
    let (m, n) = (req.a.rows(), req.a.cols());
    if m == 0 || n == 0 || (req.alpha.is_zero() && req.beta.is_one()) {
        return Ok(ExecutionReport { y_out: y, counters });
    }
    counters.push_launch(launch_scal(&mut y, req.beta, req.segment_bytes));
    if !req.alpha.is_zero() {
        counters.push_launch(launch_gemv(
            transpose_mode(req.op),
            &req.a,
            Mask::default(),
            req.x,
            &mut y,
            req.alpha,
            &req.config,
            req.segment_bytes,
        ));
    }
    Ok(ExecutionReport { y_out: y, counters })
}

/// Standard SYMV/HEMV entry point: the diagonal-block kernel (with beta
/// fused), then the off-diagonal kernel. No SCAL launch.
pub fn symv_hemv<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    let Some(uplo) = req.op.uplo() else {
        return Err(Error::IllegalArgument {
            routine: "symv",
            position: 1,
            reason: format!("{:?} is not a SYMV/HEMV operation", req.op),
        });
    };
    req.validate()?;
    let mut y = req.y.to_vec();
    let mut counters = Counters::new(req.segment_bytes);
    let d = req.a.rows();
    if d == 0 || (req.alpha.is_zero() && req.beta.is_one()) {
        return Ok(ExecutionReport { y_out: y, counters });
    }
    let h = HermitianView::new(req.a, uplo, req.config.nb)?;
    let src = SingleDevice::new(&h);
    let conj = req.op.conjugates();
    counters.push_launch(launch_diag(&src, uplo, conj, Mask::default(), req.x, &mut y, req.alpha, req.beta, &req.config, req.segment_bytes));
    if !req.alpha.is_zero() {
        counters.push_launch(launch_symv_offdiag(&src, uplo, conj, Mask::default(), req.x, &mut y, req.alpha, &req.config, req.segment_bytes));
    }
    Ok(ExecutionReport { y_out: y, counters })
}

/// Dispatches to [`gemv`] or [`symv_hemv`].
pub fn execute<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<ExecutionReport<T>> {
    if req.op.is_gemv() {
        gemv(req)
    } else {
        symv_hemv(req)
    }
}

/// Counters [`execute`] would produce, derived from the access schedule alone.
pub(crate) fn trace_request<T: Scalar>(req: &KernelRequest<'_, T>) -> Result<Counters> {
    req.validate()?;
    Ok(trace_masked(
        req.op,
        T::PRECISION,
        req.a.layout(),
        Mask::default(),
        Coefficients::of(req.alpha, req.beta),
        &req.config,
        req.segment_bytes,
    ))
}

/// Which special values `alpha` and `beta` take; all that the access
/// schedule depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coefficients {
    pub alpha_zero: bool,
    pub beta_zero: bool,
    pub beta_one: bool,
}

impl Coefficients {
    /// Nonzero alpha, beta neither zero nor one.
    pub const GENERAL: Coefficients = Coefficients {
        alpha_zero: false,
        beta_zero: false,
        beta_one: false,
    };

    pub fn of<T: Scalar>(alpha: T, beta: T) -> Self {
        Self {
            alpha_zero: alpha.is_zero(),
            beta_zero: beta.is_zero(),
            beta_one: beta.is_one(),
        }
    }
}

/// Counters of a full operation on a matrix with the given layout, without
/// touching any data.
pub fn trace_op(
    op: Op,
    precision: Precision,
    layout: Layout,
    coefficients: Coefficients,
    config: &KernelConfig,
    segment_bytes: usize,
) -> Result<Counters> {
    config.validate()?;
    if op.is_symmetric() && layout.m != layout.n {
        return Err(Error::DimensionMismatch(format!(
            "{}: matrix must be square, got {}x{}",
            op.routine(),
            layout.m,
            layout.n
        )));
    }
    Ok(trace_masked(op, precision, layout, Mask::default(), coefficients, config, segment_bytes))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn trace_masked(
    op: Op,
    precision: Precision,
    layout: Layout,
    mask: Mask,
    coefficients: Coefficients,
    config: &KernelConfig,
    segment_bytes: usize,
) -> Counters {
    let mut counters = Counters::new(segment_bytes);
    let (m, n) = (layout.m, layout.n);
    let Coefficients { alpha_zero, beta_zero, beta_one } = coefficients;
    if m == 0 || n == 0 || (alpha_zero && beta_one) {
        return counters;
    }
    let alpha_nonzero = !alpha_zero;
    if let Some(uplo) = op.uplo() {
        let cols = plan::BlockColumnLayouts::single(layout, config.nb);
        counters.push_launch(trace_diag(&cols, precision, uplo, mask, alpha_nonzero, beta_zero, config, segment_bytes));
        if alpha_nonzero {
            counters.push_launch(trace_symv_offdiag(&cols, precision, uplo, mask, config, segment_bytes));
        }
    } else {
        let (out, masked) = if op == Op::GemvN { (m, mask.rows) } else { (n, mask.cols) };
        counters.push_launch(scal::trace_scal(out - masked, precision.element_bytes(), beta_zero, precision, segment_bytes));
        if alpha_nonzero {
            counters.push_launch(trace_gemv(transpose_mode(op), layout, precision, mask, config, segment_bytes));
        }
    }
    counters
}
