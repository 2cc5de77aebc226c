//! Grid design arithmetic: grid shape, per-TB workload share and start block.
//!
//! The per-TB share uses `W` (the block count of one block row/column) in
//! both the share and the start formulas. Those are the only forms for which
//! the shares tile `[0, W)` exactly.

use crate::error::{Error, Result};
use crate::matrix::Uplo;

/// The tuning triple `(nb, Q̄, Ȳ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KernelConfig {
    /// Square block edge; also the thread-row count of a TB.
    pub nb: usize,
    /// Thread columns per TB.
    pub q_bar: usize,
    /// TBs cooperating on one block row/column.
    pub y_bar: usize,
}

impl KernelConfig {
    pub fn new(nb: usize, q_bar: usize, y_bar: usize) -> Result<Self> {
        let cfg = Self { nb, q_bar, y_bar };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidConfig {
            nb: self.nb,
            q_bar: self.q_bar,
            y_bar: self.y_bar,
            reason: reason.into(),
        };
        if self.nb == 0 || !self.nb.is_multiple_of(2) {
            return Err(bad("nb must be a positive even number"));
        }
        if self.q_bar == 0 {
            return Err(bad("q_bar must be positive"));
        }
        if self.y_bar == 0 {
            return Err(bad("y_bar must be at least 1"));
        }
        if !self.nb.is_multiple_of(2 * self.q_bar) {
            return Err(bad("nb / (2 q_bar) must be a positive integer"));
        }
        Ok(())
    }

    /// Register buffer length per thread per half block.
    pub fn buffer_len(&self) -> usize {
        self.nb / (2 * self.q_bar)
    }

    pub fn half_block(&self) -> usize {
        self.nb / 2
    }

    /// Thread columns after reorganizing the TB as `nb/2 x 2Q̄`.
    pub fn thread_columns(&self) -> usize {
        2 * self.q_bar
    }

    pub fn threads_per_tb(&self) -> usize {
        self.nb * self.q_bar
    }

    /// Shared-memory elements for the row-wise reduction (`nb * 2Q̄`).
    pub fn reduction_space_rows(&self) -> usize {
        self.nb * 2 * self.q_bar
    }

    /// Shared-memory elements for the column-wise reduction (`nb/2 * nb`).
    pub fn reduction_space_cols(&self) -> usize {
        self.nb / 2 * self.nb
    }

    pub fn grid(&self, dim: usize) -> GridShape {
        GridShape {
            x_bar: dim.div_ceil(self.nb),
            y_bar: self.y_bar,
        }
    }
}

impl std::fmt::Display for KernelConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.nb, self.q_bar, self.y_bar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub x_bar: usize,
    pub y_bar: usize,
}

impl GridShape {
    pub fn total_tbs(&self) -> usize {
        self.x_bar * self.y_bar
    }
}

/// Starting block and block count of one TB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TbAssignment {
    pub x_coord: usize,
    pub y_coord: usize,
    pub start: usize,
    pub workload: usize,
}

impl TbAssignment {
    /// A TB with no blocks exits without writing.
    pub fn is_idle(&self) -> bool {
        self.workload == 0
    }
}

/// Number of block rows (non-transposed) or block columns (transposed).
pub fn grid_x(m: usize, n: usize, nb: usize, transposed: bool) -> usize {
    let dim = if transposed { n } else { m };
    dim.div_ceil(nb)
}

pub fn total_workload_gemv(d: usize, nb: usize) -> usize {
    d.div_ceil(nb)
}

/// Off-diagonal blocks in block column `i` of the stored triangle.
pub fn total_workload_symv(d: usize, nb: usize, i: usize, uplo: Uplo) -> usize {
    let blocks = d.div_ceil(nb);
    debug_assert!(i < blocks);
    match uplo {
        Uplo::Lower => blocks - i - 1,
        Uplo::Upper => i,
    }
}

/// `(w, s)` of TB `y_coord` among `y_bar` TBs sharing `total` blocks.
pub fn tb_share(total: usize, y_bar: usize, y_coord: usize) -> (usize, usize) {
    debug_assert!(y_coord < y_bar);
    let base = total / y_bar;
    let rem = total % y_bar;
    let w = base + usize::from(y_coord < rem);
    let s = y_coord * base + y_coord.min(rem);
    (w, s)
}

/// Assignments of one block row/column, sorted by `y_coord`.
pub fn assignments(x_coord: usize, total: usize, y_bar: usize) -> impl Iterator<Item = TbAssignment> {
    (0..y_bar).map(move |y_coord| {
        let (workload, start) = tb_share(total, y_bar, y_coord);
        TbAssignment {
            x_coord,
            y_coord,
            start,
            workload,
        }
    })
}
