//! Multi-device variants over a 1D cyclic block-column distribution.
//!
//! Block column `j` (width `nb_cols`, the last one possibly narrower) lives on
//! device `j mod G`, packed left to right in a local allocation whose leading
//! dimension is padded to whole segments. Every device keeps its own copy of
//! `x` and a full-length partial `y`; the host adds the partial vectors in
//! device order. For transposed GEMV each device owns the `y` segments of its
//! block columns and the host scatters them instead.
//!
//! Device 0 (or the owner of a row block, for the symmetric kernels) is the
//! one that folds `beta * y` into its partial result, so with one device
//! every operation is bit-identical to the single-device entry points.

use std::sync::Arc;
use std::thread;

use crate::device::DEFAULT_SEGMENT_BYTES;
use crate::error::{Error, Result};
use crate::kernel::{
    launch_diag, launch_gemv, launch_scal, launch_symv_offdiag, transpose_mode, BlockColumns, Counters, ExecutionReport,
    Mask, Op,
};
use crate::matrix::{padded_ld, Layout, Matrix, MatrixView, Uplo};
use crate::partition::KernelConfig;
use crate::precision::Scalar;
use crate::queue::{Completion, Queue};

/// Block columns of one device, packed.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPanel<T> {
    pub device: usize,
    /// Global block-column indices, ascending.
    pub block_cols: Vec<usize>,
    pub matrix: Matrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributedMatrix<T> {
    global_m: usize,
    global_n: usize,
    nb_cols: usize,
    locals: Vec<LocalPanel<T>>,
}

/// Device owning global block column `block_col`.
pub fn owner(block_col: usize, devices: usize) -> usize {
    block_col % devices
}

/// Global block columns held by `device`.
pub fn owned_block_columns(n: usize, nb_cols: usize, devices: usize, device: usize) -> Vec<usize> {
    (device..n.div_ceil(nb_cols)).step_by(devices).collect()
}

/// Number of matrix columns held by `device`.
pub fn local_columns(n: usize, nb_cols: usize, devices: usize, device: usize) -> usize {
    owned_block_columns(n, nb_cols, devices, device)
        .iter()
        .map(|&b| nb_cols.min(n - b * nb_cols))
        .sum()
}

/// Elements a device must allocate for its share of an `m x n` matrix when
/// the local leading dimension is padded to `pad_to` elements.
pub fn local_allocation_elements(m: usize, n: usize, nb_cols: usize, devices: usize, device: usize, pad_to: usize) -> usize {
    padded_ld(m.max(1), pad_to) * local_columns(n, nb_cols, devices, device)
}

impl<T: Scalar> DistributedMatrix<T> {
    /// Splits `a` into `devices` packed local matrices.
    pub fn distribute(a: &MatrixView<'_, T>, nb_cols: usize, devices: usize) -> Result<Self> {
        Self::distribute_padded(a, nb_cols, devices, DEFAULT_SEGMENT_BYTES)
    }

    pub fn distribute_padded(a: &MatrixView<'_, T>, nb_cols: usize, devices: usize, segment_bytes: usize) -> Result<Self> {
        if devices == 0 {
            return Err(Error::InvalidDimension("device count must be at least 1".into()));
        }
        if nb_cols == 0 {
            return Err(Error::InvalidDimension("block-column width must be positive".into()));
        }
        let (m, n) = (a.rows(), a.cols());
        let pad_to = T::PRECISION.elements_per_segment(segment_bytes).max(1);
        let ld = padded_ld(m.max(1), pad_to);
        let locals = (0..devices)
            .map(|device| {
                let block_cols = owned_block_columns(n, nb_cols, devices, device);
                let width = local_columns(n, nb_cols, devices, device);
                let mut matrix = Matrix::zeros_with_ld(m, width, ld)?;
                let mut lc = 0;
                for &b in &block_cols {
                    for j in b * nb_cols..(b * nb_cols + nb_cols).min(n) {
                        for i in 0..m {
                            matrix.set(i, lc, a.get(i, j));
                        }
                        lc += 1;
                    }
                }
                Ok(LocalPanel { device, block_cols, matrix })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            global_m: m,
            global_n: n,
            nb_cols,
            locals,
        })
    }

    /// Reassembles the global matrix.
    pub fn gather(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.global_m, self.global_n);
        for local in &self.locals {
            let mut lc = 0;
            for &b in &local.block_cols {
                for j in b * self.nb_cols..(b * self.nb_cols + self.nb_cols).min(self.global_n) {
                    for i in 0..self.global_m {
                        out.set(i, j, local.matrix.get(i, lc));
                    }
                    lc += 1;
                }
            }
        }
        out
    }

    pub fn global_rows(&self) -> usize {
        self.global_m
    }

    pub fn global_cols(&self) -> usize {
        self.global_n
    }

    /// Block-column width of the distribution.
    pub fn block_width(&self) -> usize {
        self.nb_cols
    }

    pub fn device_count(&self) -> usize {
        self.locals.len()
    }

    pub fn local(&self, device: usize) -> &LocalPanel<T> {
        &self.locals[device]
    }

    pub fn locals(&self) -> &[LocalPanel<T>] {
        &self.locals
    }

    /// Global column index of each local column of `device`.
    pub fn global_columns(&self, device: usize) -> Vec<usize> {
        self.locals[device]
            .block_cols
            .iter()
            .flat_map(|&b| b * self.nb_cols..(b * self.nb_cols + self.nb_cols).min(self.global_n))
            .collect()
    }
}

/// Per-device counters plus the merged view.
#[derive(Debug, Clone, PartialEq)]
pub struct MgpuReport<T> {
    pub y_out: Vec<T>,
    pub devices: Vec<Counters>,
    pub merged: Counters,
}

impl<T> MgpuReport<T> {
    pub fn into_execution_report(self) -> ExecutionReport<T> {
        ExecutionReport {
            y_out: self.y_out,
            counters: self.merged,
        }
    }
}

fn merge_reports<T>(y_out: Vec<T>, devices: Vec<Counters>, segment_bytes: usize) -> MgpuReport<T> {
    let mut merged = Counters::new(segment_bytes);
    for c in &devices {
        merged.merge(c);
    }
    MgpuReport { y_out, devices, merged }
}

fn check_lengths<T>(routine: &'static str, x: &[T], x_len: usize, y: &[T], y_len: usize, pos: (usize, usize)) -> Result<()> {
    if x.len() != x_len {
        return Err(Error::DimensionMismatch(format!(
            "{routine} parameter {}: x has length {}, expected {x_len}",
            pos.0,
            x.len()
        )));
    }
    if y.len() != y_len {
        return Err(Error::DimensionMismatch(format!(
            "{routine} parameter {}: y has length {}, expected {y_len}",
            pos.1,
            y.len()
        )));
    }
    Ok(())
}

/// Multi-device GEMV. `op` is `GemvN`, `GemvT` or `GemvC`.
#[allow(clippy::too_many_arguments)]
pub fn gemv_mgpu<T: Scalar>(
    dist: &DistributedMatrix<T>,
    x: &[T],
    y: &[T],
    alpha: T,
    beta: T,
    op: Op,
    config: &KernelConfig,
) -> Result<MgpuReport<T>> {
    if !op.is_gemv() {
        return Err(Error::IllegalArgument {
            routine: "gemv",
            position: 1,
            reason: format!("{op:?} is not a GEMV operation"),
        });
    }
    config.validate()?;
    let (m, n) = (dist.global_m, dist.global_n);
    let transposed = op != Op::GemvN;
    let (x_len, y_len) = if transposed { (m, n) } else { (n, m) };
    check_lengths("gemv", x, x_len, y, y_len, (7, 10))?;
    let seg = DEFAULT_SEGMENT_BYTES;
    let g = dist.device_count();
    if m == 0 || n == 0 || (alpha.is_zero() && beta.is_one()) {
        return Ok(merge_reports(y.to_vec(), vec![Counters::new(seg); g], seg));
    }
    let trans = transpose_mode(op);
    let outputs: Vec<(Vec<T>, Counters)> = thread::scope(|s| {
        let handles: Vec<_> = (0..g)
            .map(|device| {
                s.spawn(move || {
                    let local = &dist.locals[device];
                    let cols = dist.global_columns(device);
                    let mut counters = Counters::new(seg);
                    let (lx, mut ly) = if transposed {
                        (x.to_vec(), cols.iter().map(|&j| y[j]).collect::<Vec<_>>())
                    } else if device == 0 {
                        (cols.iter().map(|&j| x[j]).collect(), y.to_vec())
                    } else {
                        (cols.iter().map(|&j| x[j]).collect(), vec![T::zero(); m])
                    };
                    if transposed || device == 0 {
                        counters.push_launch(launch_scal(&mut ly, beta, seg));
                    }
                    if !alpha.is_zero() && !cols.is_empty() {
                        let view = local.matrix.view();
                        counters.push_launch(launch_gemv(trans, &view, Mask::default(), &lx, &mut ly, alpha, config, seg));
                    }
                    (ly, counters)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("device thread")).collect()
    });
    let mut y_out;
    if transposed {
        y_out = vec![T::zero(); n];
        for (device, (ly, _)) in outputs.iter().enumerate() {
            for (k, j) in dist.global_columns(device).into_iter().enumerate() {
                y_out[j] = ly[k];
            }
        }
    } else {
        y_out = outputs[0].0.clone();
        for (ly, _) in &outputs[1..] {
            for (acc, v) in y_out.iter_mut().zip(ly) {
                *acc += *v;
            }
        }
    }
    Ok(merge_reports(y_out, outputs.into_iter().map(|(_, c)| c).collect(), seg))
}

/// One device's panels seen as block columns of the global symmetric matrix.
struct DevicePanels<'a, T> {
    local: &'a LocalPanel<T>,
    cols: crate::kernel::BlockColumnLayouts,
    uplo: Uplo,
    violations: std::cell::Cell<u64>,
}

impl<'a, T: Scalar> DevicePanels<'a, T> {
    fn new(local: &'a LocalPanel<T>, d: usize, nb: usize, uplo: Uplo) -> Self {
        let base = local.matrix.view().layout();
        let mut panels = Vec::with_capacity(local.block_cols.len());
        let mut lc = 0;
        for &b in &local.block_cols {
            let w = nb.min(d - b * nb);
            panels.push(base.sub(0, lc, d, w));
            lc += w;
        }
        Self {
            local,
            cols: crate::kernel::BlockColumnLayouts {
                d,
                nb,
                owned: local.block_cols.clone(),
                panels,
            },
            uplo,
            violations: std::cell::Cell::new(0),
        }
    }
}

impl<T: Scalar> BlockColumns<T> for DevicePanels<'_, T> {
    fn layouts(&self) -> &crate::kernel::BlockColumnLayouts {
        &self.cols
    }

    fn read(&self, local: usize, i: usize, c: usize) -> T {
        let nb = self.cols.nb;
        let bc = self.cols.owned[local];
        if i / nb != bc && self.uplo.is_unreferenced(i, bc * nb + c) {
            self.violations.set(self.violations.get() + 1);
        }
        let p: &Layout = &self.cols.panels[local];
        self.local.matrix.data()[p.linear_index(i, c)]
    }

    fn violations(&self) -> u64 {
        self.violations.get()
    }
}

/// Multi-device SYMV/HEMV on a triangle-stored matrix distributed with
/// `nb_cols = config.nb`.
#[allow(clippy::too_many_arguments)]
pub fn symv_hemv_mgpu<T: Scalar>(
    dist: &DistributedMatrix<T>,
    x: &[T],
    y: &[T],
    alpha: T,
    beta: T,
    op: Op,
    config: &KernelConfig,
) -> Result<MgpuReport<T>> {
    let Some(uplo) = op.uplo() else {
        return Err(Error::IllegalArgument {
            routine: "symv",
            position: 1,
            reason: format!("{op:?} is not a SYMV/HEMV operation"),
        });
    };
    config.validate()?;
    let d = dist.global_m;
    if dist.global_n != d {
        return Err(Error::DimensionMismatch(format!(
            "symmetric matrix must be square, got {}x{}",
            d, dist.global_n
        )));
    }
    if dist.nb_cols != config.nb {
        return Err(Error::InvalidConfig {
            nb: config.nb,
            q_bar: config.q_bar,
            y_bar: config.y_bar,
            reason: format!("distribution block width {} must equal nb", dist.nb_cols),
        });
    }
    check_lengths("symv", x, d, y, d, (6, 9))?;
    let seg = DEFAULT_SEGMENT_BYTES;
    let g = dist.device_count();
    if d == 0 || (alpha.is_zero() && beta.is_one()) {
        return Ok(merge_reports(y.to_vec(), vec![Counters::new(seg); g], seg));
    }
    let nb = config.nb;
    let conj = op.conjugates();
    let outputs: Vec<(Vec<T>, Counters)> = thread::scope(|s| {
        let handles: Vec<_> = (0..g)
            .map(|device| {
                s.spawn(move || {
                    let local = &dist.locals[device];
                    let mut counters = Counters::new(seg);
                    let mut ly = vec![T::zero(); d];
                    for &b in &local.block_cols {
                        let rows = b * nb..(b * nb + nb).min(d);
                        ly[rows.clone()].copy_from_slice(&y[rows]);
                    }
                    if local.block_cols.is_empty() {
                        return (ly, counters);
                    }
                    let src = DevicePanels::new(local, d, nb, uplo);
                    counters.push_launch(launch_diag(&src, uplo, conj, Mask::default(), x, &mut ly, alpha, beta, config, seg));
                    if !alpha.is_zero() {
                        counters.push_launch(launch_symv_offdiag(&src, uplo, conj, Mask::default(), x, &mut ly, alpha, config, seg));
                    }
                    (ly, counters)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("device thread")).collect()
    });
    let mut y_out = outputs[0].0.clone();
    for (ly, _) in &outputs[1..] {
        for (acc, v) in y_out.iter_mut().zip(ly) {
            *acc += *v;
        }
    }
    Ok(merge_reports(y_out, outputs.into_iter().map(|(_, c)| c).collect(), seg))
}

/// [`gemv_mgpu`] or [`symv_hemv_mgpu`] submitted to `queue`.
#[allow(clippy::too_many_arguments)]
pub fn mgpu_async<T: Scalar>(
    queue: &Queue,
    dist: Arc<DistributedMatrix<T>>,
    x: Vec<T>,
    y: Vec<T>,
    alpha: T,
    beta: T,
    op: Op,
    config: KernelConfig,
) -> Completion<Result<MgpuReport<T>>> {
    queue.submit(move || {
        if op.is_gemv() {
            gemv_mgpu(&dist, &x, &y, alpha, beta, op, &config)
        } else {
            symv_hemv_mgpu(&dist, &x, &y, alpha, beta, op, &config)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_ownership() {
        assert_eq!(owned_block_columns(256, 32, 4, 1), vec![1, 5]);
        assert_eq!(owned_block_columns(100, 32, 3, 0), vec![0, 3]);
        assert_eq!(local_columns(100, 32, 3, 0), 36);
        assert_eq!(local_columns(100, 32, 3, 2), 32);
        assert_eq!(local_columns(10, 32, 3, 2), 0);
        assert_eq!(owner(7, 4), 3);
    }

    #[test]
    fn allocation_is_padded() {
        assert_eq!(local_allocation_elements(100, 100, 32, 3, 0, 32), 128 * 36);
    }

    #[test]
    fn single_device_is_the_matrix() {
        let a = Matrix::from_fn(40, 70, |i, j| (i * 70 + j) as f32);
        let dist = DistributedMatrix::distribute(&a.view(), 32, 1).unwrap();
        assert_eq!(dist.local(0).matrix.view().to_matrix(), a);
        assert_eq!(dist.local(0).matrix.ld(), 64);
    }
}
