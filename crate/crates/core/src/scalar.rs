//! Numeric abstraction shared by the growth and statistics code.
//!
//! Growth ratios, quantiles and posteriors are computed over any [`Scalar`]:
//! `f32`, `f64`, or the exact rational [`Ratio<i64>`]. The rational
//! instantiation gives bit-exact answers for small inputs and is used in
//! tests as a rounding-free reference.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Largest integer not greater than `self`.
    fn floor(self) -> Self;

    /// `false` for NaN, `true` otherwise.
    fn is_comparable(self) -> bool {
        true
    }

    /// Product of `factors`; the empty product is one.
    fn product(factors: &[Self]) -> Self {
        factors.iter().fold(Self::one(), |acc, &f| acc * f)
    }

    fn from_i64_lossy(v: i64) -> Self {
        Self::from_i64(v).expect("i64 is representable in every scalar")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 is representable in every scalar")
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn floor(self) -> Self {
                <$t>::floor(self)
            }

            fn is_comparable(self) -> bool {
                !self.is_nan()
            }

            /// Plain product, redone in log space when it overflows or
            /// underflows.
            fn product(factors: &[Self]) -> Self {
                if factors.iter().any(|f| f.is_zero()) {
                    return 0.0;
                }
                let direct: $t = factors.iter().product();
                if direct.is_normal() || factors.iter().any(|f| !f.is_finite()) {
                    return direct;
                }
                let negatives = factors.iter().filter(|f| **f < 0.0).count();
                let magnitude = factors.iter().map(|f| f.abs().ln()).sum::<$t>().exp();
                if negatives % 2 == 1 {
                    -magnitude
                } else {
                    magnitude
                }
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Ratio<i64> {
    fn floor(self) -> Self {
        Ratio::floor(&self)
    }
}
