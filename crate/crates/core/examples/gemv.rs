//! One simulated DGEMV in each transpose mode, checked against the host
//! reference, with the counters the simulator collects.

use blockmv::device::builtin_k20c_profile;
use blockmv::generate::Operands;
use blockmv::kernel::{execute, KernelRequest, Op};
use blockmv::matrix::Matrix;
use blockmv::partition::KernelConfig;
use blockmv::reference::{error_bound, max_abs_diff, reference_mv};

fn main() -> blockmv::Result<()> {
    let (m, n) = (700, 450);
    let mut g = Operands::new(7);
    let a: Matrix<f64> = g.matrix(m, n, m.next_multiple_of(16))?;
    let cfg = KernelConfig::new(64, 4, 2)?;
    let profile = builtin_k20c_profile();

    for op in [Op::GemvN, Op::GemvT] {
        let (xl, yl) = if op == Op::GemvN { (n, m) } else { (m, n) };
        let x = g.vector::<f64>(xl);
        let y = g.vector::<f64>(yl);
        let rep = execute(&KernelRequest::new(op, a.view(), &x, &y, 2.0, 0.5, cfg))?;
        let want = reference_mv(op, &a.view(), &x, &y, 2.0, 0.5);
        let err = max_abs_diff(&rep.y_out, &want);
        let bound = error_bound(op, &a.view(), &x, &y, 2.0, 0.5, 50.0);
        let c = &rep.counters;
        println!("{op:?} {m}x{n} with {cfg}: max error {err:.2e} (bound {bound:.2e})");
        println!(
            "  launches {:?}, {} flops, {} segments, {} atomics over {} TBs, {:.1} predicted Gflop/s",
            c.kernels(),
            c.flops,
            c.transactions,
            c.atomic_adds,
            c.tb_count,
            blockmv::cost::predicted_gflops(c, &profile)
        );
    }
    Ok(())
}
