use super::gemv::{reduce_cols, reduce_rows, tb_record, Half, HalfBlock};
use super::plan::{symv_plans, BlockColumnLayouts, BlockRect};
use super::trace::Tracer;
use super::{KernelKind, LaunchRecord, Mask, TbRecord};
use crate::cost::VectorPhase;
use crate::matrix::{HermitianView, Uplo};
use crate::partition::KernelConfig;
use crate::precision::{Precision, Scalar};

/// Source of the block-column panels a symmetric launch works on.
pub(crate) trait BlockColumns<T> {
    fn layouts(&self) -> &BlockColumnLayouts;
    /// Element at global row `i`, column `c` of owned panel `local`.
    fn read(&self, local: usize, i: usize, c: usize) -> T;
    fn violations(&self) -> u64;
}

/// Every block column of a single matrix.
pub(crate) struct SingleDevice<'h, 'a, T> {
    view: &'h HermitianView<'a, T>,
    cols: BlockColumnLayouts,
}

impl<'h, 'a, T: Scalar> SingleDevice<'h, 'a, T> {
    pub fn new(view: &'h HermitianView<'a, T>) -> Self {
        let nb = view.block_size();
        Self {
            view,
            cols: BlockColumnLayouts::single(view.base().layout(), nb),
        }
    }
}


impl<T: Scalar> BlockColumns<T> for SingleDevice<'_, '_, T> {
    fn layouts(&self) -> &BlockColumnLayouts {
        &self.cols
    }

    fn read(&self, local: usize, i: usize, c: usize) -> T {
        self.view.read(i, self.cols.owned[local] * self.cols.nb + c)
    }

    fn violations(&self) -> u64 {
        self.view.violations()
    }
}

fn panel_rect(cols: &BlockColumnLayouts, local: usize, br: usize) -> BlockRect {
    let panel = cols.panel(local);
    let row0 = br * cols.nb;
    BlockRect {
        row0,
        rows: cols.nb.min(cols.d - row0),
        col0: 0,
        cols: panel.n,
    }
}

fn valid(extent: usize, start: usize, mask: usize) -> usize {
    (start + extent).saturating_sub(start.max(mask))
}

/// Off-diagonal kernel: for every stored off-diagonal block `B` at block
/// position `(r, c)`, `y[r] += alpha * B x[c]` right after the block and
/// `y[c] += alpha * op(B)^T x[r]` once per TB, `op` conjugating for HEMV.
#[allow(clippy::too_many_arguments)]
pub(crate) fn launch_symv_offdiag<T: Scalar, S: BlockColumns<T>>(
    src: &S,
    uplo: Uplo,
    conj: bool,
    mask: Mask,
    x: &[T],
    y: &mut [T],
    alpha: T,
    cfg: &KernelConfig,
    segment_bytes: usize,
) -> LaunchRecord {
    let cols = src.layouts();
    let nb = cols.nb;
    let before = src.violations();
    let mut rec = LaunchRecord::new(KernelKind::SymvOffDiag, segment_bytes);
    let mut tracer = Tracer::new(T::PRECISION, segment_bytes);
    tracer.vector(VectorPhase::XRead, x.len() - mask.rows);

    let slots = cfg.half_block() * cfg.thread_columns();
    let mut upper = HalfBlock::new(cfg);
    let mut lower = HalfBlock::new(cfg);
    let mut ures = vec![T::zero(); slots];
    let mut lres = vec![T::zero(); slots];
    let mut vres = vec![T::zero(); cfg.reduction_space_cols()];
    let mut r = Vec::with_capacity(nb);
    let mut products = 0u64;

    let plans = symv_plans(cols, uplo, cfg);
    for plan in &plans {
        let w = plan.workload();
        let local = plan.assignment.x_coord;
        let bc = plan.fixed;
        let col_base = bc * nb;
        let panel_cols = cols.panel(local).n;
        let load = |i: usize, c: usize| (i >= mask.rows && col_base + c >= mask.cols).then(|| src.read(local, i, c));
        let rect = |k: usize| panel_rect(cols, local, plan.block(k).0);
        vres.fill(T::zero());
        if w > 0 {
            let first = rect(0);
            tracer.block(cols.panel(local), &first);
            products += upper.fetch(Half::Upper, first.row0, 0, cols.d, panel_cols, &load);
        }
        for j in 0..w {
            let cur = rect(j);
            ures.fill(T::zero());
            lres.fill(T::zero());
            products += lower.fetch(Half::Lower, cur.row0, 0, cols.d, panel_cols, &load);
            upper.row_products(&mut ures, x, col_base);
            upper.column_products(&mut vres, x, upper.row0, conj);
            if j + 1 != w {
                let next = rect(j + 1);
                tracer.block(cols.panel(local), &next);
                products += upper.fetch(Half::Upper, next.row0, 0, cols.d, panel_cols, &load);
            }
            lower.row_products(&mut lres, x, col_base);
            lower.column_products(&mut vres, x, lower.row0, conj);
            reduce_rows(&ures, &lres, cfg, &mut r);
            for (k, v) in r.iter().enumerate().take(cur.rows) {
                y[cur.row0 + k] += alpha * *v;
            }
        }
        reduce_cols(&vres, cfg, &mut r);
        for (k, v) in r.iter().enumerate().take(panel_cols) {
            y[col_base + k] += alpha * *v;
        }
        let events = w as u64 + 1;
        rec.push_tb(tb_record(plan, events, events));
    }
    let p = T::PRECISION;
    rec.flops = 2 * products * (p.flops_per_mul() + p.flops_per_add());
    rec.guard_violations = src.violations() - before;
    rec.ledger = tracer.finish();
    rec
}

/// Diagonal-block kernel: each TB loads one diagonal block, rebuilds the
/// unstored triangle by mirroring (conjugated for HEMV, with a real
/// diagonal), and writes `y[k] = beta * y[k] + alpha * D_k x[k]`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn launch_diag<T: Scalar, S: BlockColumns<T>>(
    src: &S,
    uplo: Uplo,
    conj: bool,
    mask: Mask,
    x: &[T],
    y: &mut [T],
    alpha: T,
    beta: T,
    cfg: &KernelConfig,
    segment_bytes: usize,
) -> LaunchRecord {
    let cols = src.layouts();
    let nb = cols.nb;
    let before = src.violations();
    let alpha_nonzero = !alpha.is_zero();
    let beta_zero = beta.is_zero();
    let mut tile = vec![T::zero(); nb * nb];
    for (local, &bc) in cols.owned.iter().enumerate() {
        let g0 = bc * nb;
        let size = cols.panel(local).n;
        let mut t = vec![T::zero(); size];
        if alpha_nonzero {
            let stored = |r: usize, c: usize| match uplo {
                Uplo::Lower => r >= c,
                Uplo::Upper => r <= c,
            };
            for c in 0..size {
                for r in 0..size {
                    if stored(r, c) {
                        tile[c * nb + r] = src.read(local, g0 + r, c);
                    }
                }
            }
            for c in 0..size {
                for r in 0..size {
                    let v = if r == c {
                        if conj {
                            tile[c * nb + r].real_only()
                        } else {
                            tile[c * nb + r]
                        }
                    } else if stored(r, c) {
                        tile[c * nb + r]
                    } else if conj {
                        tile[r * nb + c].conj()
                    } else {
                        tile[r * nb + c]
                    };
                    if g0 + r >= mask.rows && g0 + c >= mask.cols {
                        t[r] += v * x[g0 + c];
                    }
                }
            }
        }
        for (r, tr) in t.iter().enumerate() {
            let row = g0 + r;
            if row < mask.rows {
                continue;
            }
            let scaled = if beta_zero { T::zero() } else { beta * y[row] };
            y[row] = if alpha_nonzero { scaled + alpha * *tr } else { scaled };
        }
    }
    let mut rec = trace_diag(cols, T::PRECISION, uplo, mask, alpha_nonzero, beta_zero, cfg, segment_bytes);
    rec.guard_violations = src.violations() - before;
    rec
}

/// Counters of [`launch_diag`] from the schedule alone.
#[allow(clippy::too_many_arguments)]
pub(crate) fn trace_diag(
    cols: &BlockColumnLayouts,
    precision: Precision,
    _uplo: Uplo,
    mask: Mask,
    alpha_nonzero: bool,
    beta_zero: bool,
    _cfg: &KernelConfig,
    segment_bytes: usize,
) -> LaunchRecord {
    let nb = cols.nb;
    let mut rec = LaunchRecord::new(KernelKind::DiagBlock, segment_bytes);
    let mut tracer = Tracer::new(precision, segment_bytes);
    let mut outputs = 0usize;
    let mut products = 0u64;
    for (local, &bc) in cols.owned.iter().enumerate() {
        let g0 = bc * nb;
        let size = cols.panel(local).n;
        let rows = valid(size, g0, mask.rows);
        outputs += rows;
        if alpha_nonzero {
            tracer.block(cols.panel(local), &panel_rect(cols, local, bc));
            products += (rows * valid(size, g0, mask.cols)) as u64;
        }
        rec.push_tb(TbRecord {
            x_coord: local,
            y_coord: 0,
            start: bc,
            workload: 1,
            reductions: u64::from(alpha_nonzero),
            atomic_adds: 0,
        });
    }
    let (mul, add) = (precision.flops_per_mul(), precision.flops_per_add());
    if alpha_nonzero {
        tracer.vector(VectorPhase::XRead, outputs);
        rec.flops += products * (mul + add) + outputs as u64 * mul;
    }
    if !beta_zero {
        tracer.vector(VectorPhase::YRead, outputs);
        rec.flops += outputs as u64 * mul;
    }
    tracer.vector(VectorPhase::YWrite, outputs);
    rec.ledger = tracer.finish();
    rec
}

/// Counters of [`launch_symv_offdiag`] from the schedule alone.
pub(crate) fn trace_symv_offdiag(
    cols: &BlockColumnLayouts,
    precision: Precision,
    uplo: Uplo,
    mask: Mask,
    cfg: &KernelConfig,
    segment_bytes: usize,
) -> LaunchRecord {
    let nb = cols.nb;
    let mut rec = LaunchRecord::new(KernelKind::SymvOffDiag, segment_bytes);
    let mut tracer = Tracer::new(precision, segment_bytes);
    tracer.vector(VectorPhase::XRead, cols.d - mask.rows);
    let mut products = 0u64;
    for plan in symv_plans(cols, uplo, cfg) {
        let w = plan.workload();
        let local = plan.assignment.x_coord;
        let panel = cols.panel(local);
        let col_valid = valid(panel.n, plan.fixed * nb, mask.cols);
        for k in 0..w {
            let rect = panel_rect(cols, local, plan.block(k).0);
            tracer.block(panel, &rect);
            products += (valid(rect.rows, rect.row0, mask.rows) * col_valid) as u64;
        }
        let events = w as u64 + 1;
        rec.push_tb(tb_record(&plan, events, events));
    }
    rec.flops = 2 * products * (precision.flops_per_mul() + precision.flops_per_add());
    rec.ledger = tracer.finish();
    rec
}
