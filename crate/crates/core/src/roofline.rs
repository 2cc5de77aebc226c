//! Operational intensity and bandwidth-bound peak performance.
//!
//! Flops count, per output element, a length-`n` dot product, the `alpha`
//! and `beta` multiplies and the final add. `x` is read once and `y` read and
//! written once; the matrix is read in full for GEMV and as one triangle for
//! SYMV/HEMV.

use std::fmt::{self, Write as _};

use crate::device::DeviceProfile;
use crate::precision::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gemv,
    SymvHemv,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Gemv, Family::SymvHemv];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gemv => "GEMV",
            Family::SymvHemv => "SYMV_HEMV",
        })
    }
}

/// Real flops of one `n x n` operation.
pub fn flop_count(precision: Precision, _family: Family, n: u64) -> u64 {
    if precision.is_complex() {
        8 * n * n + 12 * n
    } else {
        2 * n * n + 2 * n
    }
}

/// Ideal bytes moved by one `n x n` operation.
pub fn byte_count(precision: Precision, family: Family, n: u64) -> u64 {
    let b = precision.element_bytes() as u64;
    match family {
        Family::Gemv => (n * n + 3 * n) * b,
        Family::SymvHemv => (n * (n + 1) / 2 + 3 * n) * b,
    }
}

pub fn intensity_exact(precision: Precision, family: Family, n: u64) -> f64 {
    flop_count(precision, family, n) as f64 / byte_count(precision, family, n) as f64
}

/// Limit of [`intensity_exact`] as `n` grows.
pub fn intensity_asymptotic(precision: Precision, family: Family) -> f64 {
    let lead_flops = if precision.is_complex() { 8.0 } else { 2.0 };
    let lead_bytes = match family {
        Family::Gemv => 1.0,
        Family::SymvHemv => 0.5,
    };
    lead_flops / (lead_bytes * precision.element_bytes() as f64)
}

/// Bandwidth-bound peak in Gflop/s.
pub fn sustained_peak(profile: &DeviceProfile, precision: Precision, family: Family) -> f64 {
    intensity_asymptotic(precision, family) * profile.sustained_bandwidth()
}

/// One row of the intensity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityRecord {
    pub precision: Precision,
    pub family: Family,
    pub intensity_asymptotic: f64,
}

impl IntensityRecord {
    pub fn new(precision: Precision, family: Family) -> Self {
        Self {
            precision,
            family,
            intensity_asymptotic: intensity_asymptotic(precision, family),
        }
    }

    pub fn flops(&self, n: u64) -> u64 {
        flop_count(self.precision, self.family, n)
    }

    pub fn bytes(&self, n: u64) -> u64 {
        byte_count(self.precision, self.family, n)
    }

    pub fn intensity_exact(&self, n: u64) -> f64 {
        intensity_exact(self.precision, self.family, n)
    }

    /// Flop polynomial as printed in the CSV.
    pub fn flops_formula(&self) -> &'static str {
        if self.precision.is_complex() {
            "8n^2+12n"
        } else {
            "2n^2+2n"
        }
    }

    pub fn bytes_formula(&self) -> String {
        let b = self.precision.element_bytes();
        match self.family {
            Family::Gemv => format!("{b}(n^2+3n)"),
            Family::SymvHemv => format!("{b}(0.5n^2+3.5n)"),
        }
    }
}

/// All eight (precision, family) rows.
pub fn table() -> Vec<IntensityRecord> {
    Family::ALL
        .iter()
        .flat_map(|&f| Precision::ALL.iter().map(move |&p| IntensityRecord::new(p, f)))
        .collect()
}

/// Reference peaks in Gflop/s for the built-in device profile with ECC
/// off, as printed (two decimals).
pub fn reference_peak(precision: Precision, family: Family) -> f64 {
    use Precision::*;
    match (family, precision) {
        (Family::Gemv, S) => 87.62,
        (Family::Gemv, D) => 43.81,
        (Family::Gemv, C) => 175.24,
        (Family::Gemv, Z) => 87.62,
        (Family::SymvHemv, S) => 175.24,
        (Family::SymvHemv, D) => 87.62,
        (Family::SymvHemv, C) => 338.90,
        (Family::SymvHemv, Z) => 175.24,
    }
}

/// Explanation when the reference peak disagrees with `I * B` by more than
/// rounding.
pub fn reference_note(profile: &DeviceProfile, precision: Precision, family: Family) -> Option<String> {
    let model = sustained_peak(profile, precision, family);
    let printed = reference_peak(precision, family);
    let rel = (printed - model).abs() / model;
    // Anything beyond half a unit in the last printed digit.
    ((printed - model).abs() > 0.005 + 1e-9).then(|| {
        format!(
            "reference {printed:.2} differs from I*Bmax = {model:.2} by {:.2}%",
            rel * 100.0
        )
    })
}

/// Schema version of [`roofline_csv`] output.
pub const ROOFLINE_CSV_VERSION: u32 = 1;
pub const ROOFLINE_CSV_HEADER: &str = "precision,family,n,flops,bytes,intensity,peak,reference_peak,note";

/// Roofline table for `profile`. `n = None` gives the asymptotic rows with
/// the polynomials spelled out; `Some(n)` evaluates them. Reference peaks
/// are only compared against the reference profile.
pub fn roofline_csv(profile: &DeviceProfile, n: Option<u64>, reference: bool) -> String {
    let mut out = String::new();
    writeln!(out, "{ROOFLINE_CSV_HEADER}").unwrap();
    for rec in table() {
        let (p, f) = (rec.precision, rec.family);
        let peak = sustained_peak(profile, p, f);
        let (n_col, flops, bytes, intensity, row_peak) = match n {
            None => ("inf".to_string(), rec.flops_formula().to_string(), rec.bytes_formula(), rec.intensity_asymptotic, peak),
            Some(n) => {
                let i = rec.intensity_exact(n);
                (n.to_string(), rec.flops(n).to_string(), rec.bytes(n).to_string(), i, i * profile.sustained_bandwidth())
            }
        };
        let (ref_peak, note) = if reference {
            (reference_peak(p, f).to_string(), reference_note(profile, p, f).unwrap_or_default())
        } else {
            (String::new(), String::new())
        };
        writeln!(out, "{p},{f},{n_col},{flops},{bytes},{intensity},{row_peak},{ref_peak},{note}").unwrap();
    }
    out
}
