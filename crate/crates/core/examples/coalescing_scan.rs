//! Matrix-read segments of the standard kernel as the submatrix offset
//! walks over one segment, for every precision.

use blockmv::cli::offset_scan_csv;
use blockmv::kernel::Op;
use blockmv::partition::KernelConfig;
use blockmv::precision::Precision;

fn main() -> blockmv::Result<()> {
    let cfg = KernelConfig::new(32, 2, 1)?;
    for p in Precision::ALL {
        let table = offset_scan_csv(Op::GemvN, p, 2048, 0..=33, &cfg, 128)?;
        let inflation: Vec<String> = table
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{:.2}", f[2].parse::<f64>().unwrap())
            })
            .collect();
        println!("{p:?} ({} elements per segment): {}", p.elements_per_segment(128), inflation.join(" "));
    }
    Ok(())
}
