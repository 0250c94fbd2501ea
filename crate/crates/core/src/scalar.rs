//! Numeric abstractions shared by the statistics and the classifiers.
//!
//! Counting statistics (chi-square, kappa, accuracy) only need field
//! arithmetic, so they are generic over [`Scalar`] and can run on exact
//! rationals as well as floats. The classifiers need transcendental
//! functions and are generic over [`Real`].

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, Num, ToPrimitive};

/// A number type that counting statistics can be evaluated in.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_count(n: u64) -> Self;

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(&self) -> f64;
}

/// Floating-point scalar usable by the classifiers.
pub trait Real: Scalar + Float + Display + FromStr + Default {
    fn from_f64(v: f64) -> Self;
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_count(n: u64) -> Self {
                n as $t
            }

            #[inline]
            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }

        impl Real for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

macro_rules! impl_ratio_scalar {
    ($t:ty) => {
        impl Scalar for Ratio<$t> {
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(<$t>::try_from(n).expect("count exceeds rational range"))
            }

            fn to_f64_lossy(&self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }
        }
    };
}

impl_ratio_scalar!(i64);
impl_ratio_scalar!(i128);

impl Scalar for Ratio<BigInt> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
