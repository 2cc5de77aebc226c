//! y = A(17:, 5:) x on a sub-window: the standard kernel pays for the
//! misaligned start, the offset kernel widens the window back onto segment
//! boundaries and masks the padding.

use blockmv::kernel::execute;
use blockmv::generate::Operands;
use blockmv::kernel::Op;
use blockmv::matrix::{padded_ld, Matrix};
use blockmv::offset::{execute_offset, OffsetRequest};
use blockmv::partition::KernelConfig;
use blockmv::reference::max_abs_diff;

fn main() -> blockmv::Result<()> {
    let n = 1024;
    let (row_off, col_off) = (17, 5);
    let (sub_m, sub_n) = (n - row_off, n - col_off);
    let mut g = Operands::new(3);
    let parent: Matrix<f32> = g.matrix(n, n, padded_ld(n, 32))?;
    let x = g.vector::<f32>(sub_n);
    let y = g.vector::<f32>(sub_m);
    let cfg = KernelConfig::new(32, 2, 1)?;

    let req = OffsetRequest::new(Op::GemvN, parent.view(), row_off, col_off, sub_m, sub_n, &x, &y, 1.0, 0.0, cfg);
    let standard = execute(&req.as_standard()?)?;
    let offset = execute_offset(&req)?;
    let pad = req.padding()?;

    let s = standard.counters.ledger.matrix;
    let o = offset.counters.ledger.matrix;
    println!("window {sub_m}x{sub_n} at ({row_off}, {col_off}), padding {} rows {} cols", pad.top, pad.left);
    println!("standard kernel: {} segments ({:.3}x the aligned {})", s.segments, s.segments as f64 / s.ideal_segments as f64, s.ideal_segments);
    println!("offset kernel:   {} segments (aligned {}), {} extra elements read", o.segments, o.ideal_segments, pad.extra_elements(sub_m, sub_n));
    println!("max output difference: {:.2e}", max_abs_diff(&standard.y_out, &offset.y_out));
    Ok(())
}
