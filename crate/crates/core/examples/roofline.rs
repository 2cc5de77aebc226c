//! Operational intensities and bandwidth-bound peaks for the built-in device
//! and for the same device with ECC enabled.

use blockmv::device::{builtin_k20c_ecc_profile, builtin_k20c_profile};
use blockmv::precision::Precision;
use blockmv::roofline::{intensity_exact, roofline_csv, sustained_peak, table, Family};

fn main() {
    print!("{}", roofline_csv(&builtin_k20c_profile(), None, true));

    let ecc = builtin_k20c_ecc_profile();
    println!("\nwith ECC ({:.1} GB/s sustained):", ecc.sustained_bandwidth());
    for rec in table() {
        println!("  {:?} {:<9} peak {:>7.2} Gflop/s", rec.precision, rec.family.to_string(), sustained_peak(&ecc, rec.precision, rec.family));
    }

    println!("\nexact DGEMV intensity approaching its limit:");
    for n in [16u64, 256, 4096, 65536] {
        println!("  n={n:>6}: {:.5} flop/byte", intensity_exact(Precision::D, Family::Gemv, n));
    }
}
