//! TB schedules: which blocks each TB visits, in which order.

use crate::matrix::{Layout, Uplo};
use crate::partition::{assignments, total_workload_gemv, total_workload_symv, KernelConfig, TbAssignment};

/// Direction a TB walks through the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Walk {
    /// Fixed block row, advancing block columns.
    Horizontal,
    /// Fixed block column, advancing block rows.
    Vertical,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TbPlan {
    pub assignment: TbAssignment,
    /// Block row (horizontal walk) or block column (vertical walk).
    pub fixed: usize,
    /// Block index along the walk that the share's block 0 maps to.
    pub base: usize,
    pub walk: Walk,
}

impl TbPlan {
    /// `(block_row, block_col)` of the `k`-th block this TB processes.
    pub fn block(&self, k: usize) -> (usize, usize) {
        let along = self.base + self.assignment.start + k;
        match self.walk {
            Walk::Horizontal => (self.fixed, along),
            Walk::Vertical => (along, self.fixed),
        }
    }

    pub fn workload(&self) -> usize {
        self.assignment.workload
    }
}

/// Clipped extent of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct BlockRect {
    pub row0: usize,
    pub rows: usize,
    pub col0: usize,
    pub cols: usize,
}

impl BlockRect {
    pub fn new(m: usize, n: usize, nb: usize, br: usize, bc: usize) -> Self {
        let row0 = br * nb;
        let col0 = bc * nb;
        Self {
            row0,
            rows: nb.min(m.saturating_sub(row0)),
            col0,
            cols: nb.min(n.saturating_sub(col0)),
        }
    }
}

/// TBs of a GEMV accumulation launch, sorted by `(x̄, ȳ)`.
pub(crate) fn gemv_plans(m: usize, n: usize, transposed: bool, cfg: &KernelConfig) -> Vec<TbPlan> {
    let (fixed_dim, walk_dim, walk) = if transposed {
        (n, m, Walk::Vertical)
    } else {
        (m, n, Walk::Horizontal)
    };
    let x_bar = fixed_dim.div_ceil(cfg.nb);
    let total = total_workload_gemv(walk_dim, cfg.nb);
    (0..x_bar)
        .flat_map(|x| {
            assignments(x, total, cfg.y_bar).map(move |assignment| TbPlan {
                assignment,
                fixed: x,
                base: 0,
                walk,
            })
        })
        .collect()
}

/// Block columns handled by one launch of a symmetric kernel, with the
/// layout of each column panel in whatever buffer holds it.
#[derive(Debug, Clone)]
pub(crate) struct BlockColumnLayouts {
    pub d: usize,
    pub nb: usize,
    /// Global block-column indices, ascending.
    pub owned: Vec<usize>,
    /// Layout of each owned panel: all `d` rows, up to `nb` columns.
    pub panels: Vec<Layout>,
}

impl BlockColumnLayouts {
    pub fn single(layout: Layout, nb: usize) -> Self {
        let d = layout.m;
        let blocks = d.div_ceil(nb);
        let owned: Vec<usize> = (0..blocks).collect();
        let panels = owned
            .iter()
            .map(|&bc| layout.sub(0, bc * nb, d, nb.min(d - bc * nb)))
            .collect();
        Self { d, nb, owned, panels }
    }

    /// Layout of the panel holding global block column `bc`.
    pub fn panel(&self, local: usize) -> &Layout {
        &self.panels[local]
    }
}

/// TBs of the off-diagonal symmetric launch. The TB grid's x̄ runs over the
/// owned block columns; TBs always walk vertically.
pub(crate) fn symv_plans(cols: &BlockColumnLayouts, uplo: Uplo, cfg: &KernelConfig) -> Vec<TbPlan> {
    cols.owned
        .iter()
        .enumerate()
        .flat_map(|(x, &bc)| {
            let total = total_workload_symv(cols.d, cols.nb, bc, uplo);
            let base = match uplo {
                Uplo::Lower => bc + 1,
                Uplo::Upper => 0,
            };
            assignments(x, total, cfg.y_bar).map(move |assignment| TbPlan {
                assignment,
                fixed: bc,
                base,
                walk: Walk::Vertical,
            })
        })
        .collect()
}
