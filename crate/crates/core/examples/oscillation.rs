//! Predicted DGEMV throughput across sizes: dips follow the number of TBs left
//! for the last execution round, and Ȳ > 1 fills those rounds.

use blockmv::device::builtin_k20c_profile;
use blockmv::kernel::Op;
use blockmv::partition::KernelConfig;
use blockmv::precision::Precision;
use blockmv::tuner::Tuner;

fn main() -> blockmv::Result<()> {
    let tuner = Tuner::new(Op::GemvN, Precision::D, builtin_k20c_profile());
    println!("{:>6}  {:>5}  {:>9}  {:>9}", "d", "TB_R", "Y=1", "Y=4");
    for d in (1..=24).map(|k| k * 448) {
        let one = tuner.evaluate(&KernelConfig::new(64, 8, 1)?, d)?;
        let four = tuner.evaluate(&KernelConfig::new(64, 8, 4)?, d)?;
        println!("{d:>6}  {:>5}  {:>9.2}  {:>9.2}", one.tb_r(), one.predicted_gflops, four.predicted_gflops);
    }
    Ok(())
}
