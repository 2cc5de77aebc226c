//! ZHEMV on a lower-stored matrix whose upper triangle holds NaN: the result
//! stays finite because only the stored triangle is ever read.

use blockmv::generate::Operands;
use blockmv::kernel::{execute, KernelKind, KernelRequest, Op};
use blockmv::matrix::{Matrix, Uplo};
use blockmv::partition::KernelConfig;
use blockmv::reference::{max_abs_diff, poison_unreferenced, reference_mv};
use num_complex::Complex64;

fn main() -> blockmv::Result<()> {
    let d = 333;
    let mut g = Operands::new(11);
    let mut a: Matrix<Complex64> = g.matrix(d, d, d)?;
    let cfg = KernelConfig::new(32, 2, 4)?;
    let clean = a.clone();
    poison_unreferenced(a.data_mut(), d, d, Uplo::Lower, cfg.nb, false, Complex64::new(f64::NAN, f64::NAN));

    let x = g.vector::<Complex64>(d);
    let y = g.vector::<Complex64>(d);
    let alpha = Complex64::new(1.0, -0.5);
    let beta = Complex64::new(0.25, 0.0);
    let rep = execute(&KernelRequest::new(Op::HemvLower, a.view(), &x, &y, alpha, beta, cfg))?;
    let want = reference_mv(Op::HemvLower, &clean.view(), &x, &y, alpha, beta);
    println!("ZHEMV d={d} {cfg}: max error {:.2e}", max_abs_diff(&rep.y_out, &want));
    println!("  unstored reads: {}", rep.counters.guard_violations);
    for l in &rep.counters.launches {
        println!("  {:<13} {:>4} TBs  {:>7} reductions  {:>5} atomics", l.kind.to_string(), l.tb_count, l.reduction_events, l.atomic_adds);
    }
    assert!(!rep.counters.launched(KernelKind::Scal));
    Ok(())
}
