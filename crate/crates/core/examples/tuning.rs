//! Two-stage tuning of DSYMV, then the Ȳ sweep of DGEMV around a size where
//! the last execution round is nearly empty.

use blockmv::device::builtin_k20c_profile;
use blockmv::kernel::Op;
use blockmv::partition::KernelConfig;
use blockmv::precision::Precision;
use blockmv::tuner::Tuner;

fn main() -> blockmv::Result<()> {
    let profile = builtin_k20c_profile();
    let sizes: Vec<usize> = (1..=16).map(|k| k * 512).collect();

    let symv = Tuner::new(Op::SymvLower, Precision::D, profile.clone());
    let coarse = symv.coarse_tune(&sizes)?;
    println!("DSYMV coarse winner: {}", coarse.best);
    let fine = symv.fine_tune(coarse.best, &sizes)?;
    for (d, cfg, g) in &fine.per_size {
        println!("  d={d:>5}  best {cfg}  {g:.2} Gflop/s");
    }
    println!("DSYMV recommendation: {}", fine.recommendation);

    let gemv = Tuner::new(Op::GemvN, Precision::D, profile);
    let fine = gemv.fine_tune(KernelConfig::new(64, 8, 1)?, &[1792, 13312])?;
    for e in &fine.evaluations {
        println!(
            "DGEMV {} d={:>5}: {:.2} Gflop/s, TB_R={}, atomics={}",
            e.config,
            e.size,
            e.predicted_gflops,
            e.tb_r(),
            e.atomic_adds
        );
    }
    Ok(())
}
