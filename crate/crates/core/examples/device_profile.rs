//! Loading a device profile from a key=value file and comparing what the
//! model predicts on it with the built-in device.

use blockmv::device::{builtin_k20c_profile, DeviceProfile};
use blockmv::kernel::{trace_op, Coefficients, Op};
use blockmv::matrix::Layout;
use blockmv::partition::KernelConfig;
use blockmv::precision::Precision;

fn main() -> blockmv::Result<()> {
    let text = "# a wider, slower part\nsm_count=30\nsegment_bytes=128\nbw_copy=120\nbw_scale=118\nbw_add=125\nbw_triad=126\nb_max=160\n";
    let path = std::env::temp_dir().join("wide.profile");
    std::fs::write(&path, text).map_err(|source| blockmv::Error::Io { path: path.clone(), source })?;
    let custom = DeviceProfile::load(&path)?;

    let cfg = KernelConfig::new(32, 2, 2)?;
    let d = 4096;
    let layout = Layout { m: d, n: d, ld: d, row_offset: 0, col_offset: 0 };
    let counters = trace_op(Op::SymvLower, Precision::S, layout, Coefficients::GENERAL, &cfg, 128)?;
    for profile in [builtin_k20c_profile(), custom] {
        println!(
            "{:<12} {:>2} SMs {:>6.1} GB/s: SSYMV d={d} {:.1} Gflop/s",
            profile.name,
            profile.sm_count,
            profile.sustained_bandwidth(),
            blockmv::cost::predicted_gflops(&counters, &profile)
        );
    }
    print!("\nserialized:\n{}", builtin_k20c_profile().to_kv_string());
    Ok(())
}
