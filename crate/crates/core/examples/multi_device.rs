//! SGEMV and SSYMV over four simulated devices with a cyclic block-column
//! layout, synchronously and through an asynchronous queue.

use std::sync::Arc;

use blockmv::generate::Operands;
use blockmv::kernel::{execute, KernelRequest, Op};
use blockmv::matrix::Matrix;
use blockmv::mgpu::{gemv_mgpu, mgpu_async, symv_hemv_mgpu, DistributedMatrix};
use blockmv::partition::KernelConfig;
use blockmv::queue::Queue;
use blockmv::reference::max_abs_diff;

fn main() -> blockmv::Result<()> {
    let d = 1000;
    let devices = 4;
    let cfg = KernelConfig::new(64, 4, 2)?;
    let mut g = Operands::new(21);
    let a: Matrix<f32> = g.matrix(d, d, d)?;
    let x = g.vector::<f32>(d);
    let y = g.vector::<f32>(d);

    let dist = DistributedMatrix::distribute_padded(&a.view(), cfg.nb, devices, 128)?;
    for dev in 0..devices {
        let panel = dist.local(dev);
        println!("device {dev}: block columns {:?}, local {}x{} (ld {})", panel.block_cols, panel.matrix.rows(), panel.matrix.cols(), panel.matrix.ld());
    }

    for op in [Op::GemvN, Op::GemvT, Op::SymvUpper] {
        let multi = if op.is_gemv() {
            gemv_mgpu(&dist, &x, &y, 1.0, 1.0, op, &cfg)?
        } else {
            symv_hemv_mgpu(&dist, &x, &y, 1.0, 1.0, op, &cfg)?
        };
        let single = execute(&KernelRequest::new(op, a.view(), &x, &y, 1.0, 1.0, cfg))?;
        let bytes: Vec<u64> = multi.devices.iter().map(|c| c.bytes_read).collect();
        println!("{op:?}: |multi - single| = {:.2e}, bytes read per device {bytes:?}", max_abs_diff(&multi.y_out, &single.y_out));
    }

    let queue = Queue::new("host");
    let dist = Arc::new(dist);
    let pending = mgpu_async(&queue, dist.clone(), x.clone(), y.clone(), 2.0, 0.0, Op::SymvLower, cfg);
    println!("submitted SYMV to queue `{}`; doing other work", queue.name());
    let report = pending.wait()?;
    println!("async SYMV finished: {} flops on {} devices", report.merged.flops, report.devices.len());
    Ok(())
}
