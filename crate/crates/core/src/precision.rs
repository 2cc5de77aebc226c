//! Precision tags and the scalar trait the kernels are generic over.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::{Complex32, Complex64};

use crate::error::Error;

/// One of the four BLAS precisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    S,
    D,
    C,
    Z,
}

impl Precision {
    pub const ALL: [Precision; 4] = [Precision::S, Precision::D, Precision::C, Precision::Z];

    /// Bytes per element; a complex element counts its (re, im) pair.
    pub const fn element_bytes(self) -> usize {
        match self {
            Precision::S => 4,
            Precision::D | Precision::C => 8,
            Precision::Z => 16,
        }
    }

    pub const fn is_complex(self) -> bool {
        matches!(self, Precision::C | Precision::Z)
    }

    /// Real flops for one multiply: a complex multiply is 4 mul + 2 add.
    pub const fn flops_per_mul(self) -> u64 {
        if self.is_complex() {
            6
        } else {
            1
        }
    }

    pub const fn flops_per_add(self) -> u64 {
        if self.is_complex() {
            2
        } else {
            1
        }
    }

    /// Machine epsilon of the underlying real type.
    pub fn epsilon(self) -> f64 {
        match self {
            Precision::S | Precision::C => f32::EPSILON as f64,
            Precision::D | Precision::Z => f64::EPSILON,
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Precision::S => 's',
            Precision::D => 'd',
            Precision::C => 'c',
            Precision::Z => 'z',
        }
    }

    /// Elements per memory segment, i.e. the row-offset granularity at which a
    /// column read stays segment aligned.
    pub const fn elements_per_segment(self, segment_bytes: usize) -> usize {
        segment_bytes / self.element_bytes()
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Precision::S => "S",
            Precision::D => "D",
            Precision::C => "C",
            Precision::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s" => Ok(Precision::S),
            "d" => Ok(Precision::D),
            "c" => Ok(Precision::C),
            "z" => Ok(Precision::Z),
            other => Err(Error::InvalidDimension(format!("unknown precision `{other}`"))),
        }
    }
}

/// Element type of a simulated matrix or vector.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + fmt::Debug
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    const PRECISION: Precision;

    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    /// Drops the imaginary part (identity for real types).
    fn real_only(self) -> Self;
    fn modulus(self) -> f64;
    fn from_parts(re: f64, im: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;

    fn is_zero(self) -> bool {
        self == Self::zero()
    }

    fn is_one(self) -> bool {
        self == Self::one()
    }
}

macro_rules! real_scalar {
    ($t:ty, $p:expr) => {
        impl Scalar for $t {
            const PRECISION: Precision = $p;
            fn zero() -> Self {
                0.0
            }
            fn one() -> Self {
                1.0
            }
            fn conj(self) -> Self {
                self
            }
            fn real_only(self) -> Self {
                self
            }
            fn modulus(self) -> f64 {
                (self as f64).abs()
            }
            fn from_parts(re: f64, _im: f64) -> Self {
                re as $t
            }
            fn re(self) -> f64 {
                self as f64
            }
            fn im(self) -> f64 {
                0.0
            }
        }
    };
}

macro_rules! complex_scalar {
    ($t:ty, $r:ty, $p:expr) => {
        impl Scalar for $t {
            const PRECISION: Precision = $p;
            fn zero() -> Self {
                <$t>::new(0.0, 0.0)
            }
            fn one() -> Self {
                <$t>::new(1.0, 0.0)
            }
            fn conj(self) -> Self {
                <$t>::conj(&self)
            }
            fn real_only(self) -> Self {
                <$t>::new(self.re, 0.0)
            }
            fn modulus(self) -> f64 {
                (self.re as f64).hypot(self.im as f64)
            }
            fn from_parts(re: f64, im: f64) -> Self {
                <$t>::new(re as $r, im as $r)
            }
            fn re(self) -> f64 {
                self.re as f64
            }
            fn im(self) -> f64 {
                self.im as f64
            }
        }
    };
}

real_scalar!(f32, Precision::S);
real_scalar!(f64, Precision::D);
complex_scalar!(Complex32, f32, Precision::C);
complex_scalar!(Complex64, f64, Precision::Z);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_table() {
        let rows: Vec<_> = Precision::ALL
            .iter()
            .map(|p| (p.element_bytes(), p.flops_per_mul(), p.flops_per_add()))
            .collect();
        assert_eq!(rows, vec![(4, 1, 1), (8, 1, 1), (8, 6, 2), (16, 6, 2)]);
    }

    #[test]
    fn scalar_tags_match_sizes() {
        assert_eq!(std::mem::size_of::<f32>(), f32::PRECISION.element_bytes());
        assert_eq!(std::mem::size_of::<f64>(), f64::PRECISION.element_bytes());
        assert_eq!(std::mem::size_of::<Complex32>(), Complex32::PRECISION.element_bytes());
        assert_eq!(std::mem::size_of::<Complex64>(), Complex64::PRECISION.element_bytes());
    }

    #[test]
    fn parse_letters() {
        assert_eq!("z".parse::<Precision>().unwrap(), Precision::Z);
        assert_eq!("S".parse::<Precision>().unwrap(), Precision::S);
        assert!("q".parse::<Precision>().is_err());
    }

    #[test]
    fn segment_granularity() {
        let g: Vec<_> = Precision::ALL.iter().map(|p| p.elements_per_segment(128)).collect();
        assert_eq!(g, vec![32, 16, 16, 8]);
    }
}
