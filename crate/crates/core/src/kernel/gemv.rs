use super::plan::{gemv_plans, BlockRect, TbPlan};
use super::trace::Tracer;
use super::{KernelKind, LaunchRecord, Mask, TbRecord, Trans};
use crate::cost::VectorPhase;
use crate::matrix::{Layout, MatrixView};
use crate::partition::KernelConfig;
use crate::precision::{Precision, Scalar};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(super) enum Half {
    Upper,
    Lower,
}

/// Per-thread register buffers for one half block, laid out as
/// `[(p * thread_cols + q) * len + e]` for thread `(p, q)` and element `e`.
pub(super) struct HalfBlock<T> {
    pub half: usize,
    pub thread_cols: usize,
    pub len: usize,
    pub vals: Vec<T>,
    /// Frame coordinates of element `(p, q, e) = (0, 0, 0)`.
    pub row0: usize,
    pub col0: usize,
}

impl<T: Scalar> HalfBlock<T> {
    pub fn new(cfg: &KernelConfig) -> Self {
        let half = cfg.half_block();
        Self {
            half,
            thread_cols: cfg.thread_columns(),
            len: cfg.buffer_len(),
            vals: vec![T::zero(); half * cfg.nb],
            row0: 0,
            col0: 0,
        }
    }

    /// Loads half `which` of the block whose top-left frame element is
    /// `(row0, col0)`. Threads outside `rows x cols` read nothing and hold
    /// zero; `load` returns `None` for masked elements, which are read but
    /// held as zero. Returns the number of unmasked in-bounds elements.
    pub fn fetch(
        &mut self,
        which: Half,
        row0: usize,
        col0: usize,
        rows: usize,
        cols: usize,
        load: &impl Fn(usize, usize) -> Option<T>,
    ) -> u64 {
        let off = if which == Half::Upper { 0 } else { self.half };
        self.row0 = row0 + off;
        self.col0 = col0;
        let mut valid = 0;
        for p in 0..self.half {
            let row = self.row0 + p;
            for q in 0..self.thread_cols {
                for e in 0..self.len {
                    let col = col0 + q * self.len + e;
                    let v = if row < rows && col < cols {
                        match load(row, col) {
                            Some(v) => {
                                valid += 1;
                                v
                            }
                            None => T::zero(),
                        }
                    } else {
                        T::zero()
                    };
                    self.vals[(p * self.thread_cols + q) * self.len + e] = v;
                }
            }
        }
        valid
    }

    /// `acc[p * thread_cols + q] += sum_e buf(p, q, e) * x[x_base + q * len + e]`.
    pub fn row_products(&self, acc: &mut [T], x: &[T], x_base: usize) {
        for p in 0..self.half {
            for q in 0..self.thread_cols {
                let slot = p * self.thread_cols + q;
                let mut sum = acc[slot];
                for e in 0..self.len {
                    if let Some(&xv) = x.get(x_base + q * self.len + e) {
                        sum += self.vals[slot * self.len + e] * xv;
                    }
                }
                acc[slot] = sum;
            }
        }
    }

    /// `vres(p, q, e) += op(buf(p, q, e)) * x[x_base + p]`.
    pub fn column_products(&self, vres: &mut [T], x: &[T], x_base: usize, conj: bool) {
        for p in 0..self.half {
            let Some(&xv) = x.get(x_base + p) else { continue };
            let span = p * self.thread_cols * self.len..(p + 1) * self.thread_cols * self.len;
            for (acc, &v) in vres[span.clone()].iter_mut().zip(&self.vals[span]) {
                *acc += if conj { v.conj() } else { v } * xv;
            }
        }
    }
}

/// Row-wise reduction through reduction space 1 (`nb x 2Q̄`): row `p` takes
/// the upper accumulators, row `half + p` the lower ones.
pub(super) fn reduce_rows<T: Scalar>(ures: &[T], lres: &[T], cfg: &KernelConfig, out: &mut Vec<T>) {
    let half = cfg.half_block();
    let tc = cfg.thread_columns();
    let mut space = vec![T::zero(); cfg.reduction_space_rows()];
    for p in 0..half {
        for q in 0..tc {
            space[p * tc + q] = ures[p * tc + q];
            space[(half + p) * tc + q] = lres[p * tc + q];
        }
    }
    out.clear();
    out.extend((0..cfg.nb).map(|row| {
        let mut r = T::zero();
        for q in 0..tc {
            r += space[row * tc + q];
        }
        r
    }));
}

/// Column-wise reduction through reduction space 2 (`nb/2 x nb`).
pub(super) fn reduce_cols<T: Scalar>(vres: &[T], cfg: &KernelConfig, out: &mut Vec<T>) {
    let half = cfg.half_block();
    let nb = cfg.nb;
    // vres is already laid out as space[p * nb + q * L + e].
    debug_assert_eq!(vres.len(), cfg.reduction_space_cols());
    out.clear();
    out.extend((0..nb).map(|col| {
        let mut r = T::zero();
        for p in 0..half {
            r += vres[p * nb + col];
        }
        r
    }));
}

fn kind_of(trans: Trans) -> KernelKind {
    match trans {
        Trans::No => KernelKind::GemvN,
        Trans::Yes { .. } => KernelKind::GemvT,
    }
}

/// One GEMV accumulation launch: `y += alpha * op(A) * x`, where rows and
/// columns covered by `mask` are read but contribute nothing.
#[allow(clippy::too_many_arguments)]
pub(crate) fn launch_gemv<T: Scalar>(
    trans: Trans,
    a: &MatrixView<'_, T>,
    mask: Mask,
    x: &[T],
    y: &mut [T],
    alpha: T,
    cfg: &KernelConfig,
    segment_bytes: usize,
) -> LaunchRecord {
    let (m, n) = (a.rows(), a.cols());
    let layout = a.layout();
    let transposed = trans != Trans::No;
    let conj = matches!(trans, Trans::Yes { conj: true });
    let mut rec = LaunchRecord::new(kind_of(trans), segment_bytes);
    let mut tracer = Tracer::new(T::PRECISION, segment_bytes);
    let (x_masked, out_masked) = if transposed { (mask.rows, mask.cols) } else { (mask.cols, mask.rows) };
    tracer.vector(VectorPhase::XRead, x.len() - x_masked);

    let load = |i: usize, j: usize| (i >= mask.rows && j >= mask.cols).then(|| a.get(i, j));
    let nb = cfg.nb;
    let slots = cfg.half_block() * cfg.thread_columns();
    let mut upper = HalfBlock::new(cfg);
    let mut lower = HalfBlock::new(cfg);
    let mut ures = vec![T::zero(); slots];
    let mut lres = vec![T::zero(); slots];
    let mut vres = vec![T::zero(); cfg.reduction_space_cols()];
    let mut r = Vec::with_capacity(nb);
    let mut products = 0u64;

    for plan in gemv_plans(m, n, transposed, cfg) {
        let w = plan.workload();
        ures.fill(T::zero());
        lres.fill(T::zero());
        vres.fill(T::zero());
        // Idle TBs still reduce and add their (zero) partial sums.
        if w > 0 {
            let rect = |k: usize| {
                let (br, bc) = plan.block(k);
                BlockRect::new(m, n, nb, br, bc)
            };
            let first = rect(0);
            tracer.block(&layout, &first);
            products += upper.fetch(Half::Upper, first.row0, first.col0, m, n, &load);
            for j in 0..w {
                let cur = rect(j);
                products += lower.fetch(Half::Lower, cur.row0, cur.col0, m, n, &load);
                if transposed {
                    upper.column_products(&mut vres, x, upper.row0, conj);
                } else {
                    upper.row_products(&mut ures, x, cur.col0);
                }
                if j + 1 != w {
                    let next = rect(j + 1);
                    tracer.block(&layout, &next);
                    products += upper.fetch(Half::Upper, next.row0, next.col0, m, n, &load);
                }
                if transposed {
                    lower.column_products(&mut vres, x, lower.row0, conj);
                } else {
                    lower.row_products(&mut lres, x, cur.col0);
                }
            }
        }
        if transposed {
            reduce_cols(&vres, cfg, &mut r);
        } else {
            reduce_rows(&ures, &lres, cfg, &mut r);
        }
        let seg0 = plan.fixed * nb;
        for (k, v) in r.iter().enumerate() {
            if let Some(slot) = y.get_mut(seg0 + k) {
                *slot += alpha * *v;
            }
        }
        rec.push_tb(tb_record(&plan, 1, 1));
    }
    let p = T::PRECISION;
    let outputs = y.len() - out_masked;
    rec.flops = products * (p.flops_per_mul() + p.flops_per_add()) + outputs as u64 * p.flops_per_mul();
    rec.ledger = tracer.finish();
    rec
}

pub(super) fn tb_record(plan: &TbPlan, reductions: u64, atomic_adds: u64) -> TbRecord {
    TbRecord {
        x_coord: plan.assignment.x_coord,
        y_coord: plan.assignment.y_coord,
        start: plan.assignment.start,
        workload: plan.assignment.workload,
        reductions,
        atomic_adds,
    }
}

/// Counters of [`launch_gemv`] from the schedule alone.
pub(crate) fn trace_gemv(
    trans: Trans,
    layout: Layout,
    precision: Precision,
    mask: Mask,
    cfg: &KernelConfig,
    segment_bytes: usize,
) -> LaunchRecord {
    let (m, n) = (layout.m, layout.n);
    let transposed = trans != Trans::No;
    let mut rec = LaunchRecord::new(kind_of(trans), segment_bytes);
    let mut tracer = Tracer::new(precision, segment_bytes);
    let (x_len, x_masked, out_len, out_masked) = if transposed {
        (m, mask.rows, n, mask.cols)
    } else {
        (n, mask.cols, m, mask.rows)
    };
    tracer.vector(VectorPhase::XRead, x_len - x_masked);
    for plan in gemv_plans(m, n, transposed, cfg) {
        let w = plan.workload();
        for k in 0..w {
            let (br, bc) = plan.block(k);
            tracer.block(&layout, &BlockRect::new(m, n, cfg.nb, br, bc));
        }
        rec.push_tb(tb_record(&plan, 1, 1));
    }
    let products = ((m - mask.rows) * (n - mask.cols)) as u64;
    rec.flops = products * (precision.flops_per_mul() + precision.flops_per_add())
        + (out_len - out_masked) as u64 * precision.flops_per_mul();
    rec.ledger = tracer.finish();
    rec
}
