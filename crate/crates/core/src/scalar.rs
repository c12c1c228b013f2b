//! Numeric bounds shared by the scoring code.
//!
//! Ranking needs logarithms, so BM25 is written against [`Scalar`] (any
//! IEEE float). The answer-overlap metrics only ever divide counts, so they
//! are written against the weaker [`Fraction`] bound, which exact rationals
//! such as [`num_rational::Ratio<i64>`] also satisfy.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Floating-point type usable for BM25 scores and report aggregates.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Anything closed under the four operations that can represent a ratio of
/// counts exactly or approximately.
pub trait Fraction: Num + Copy + PartialOrd + FromPrimitive + Debug {
    fn ratio(num: usize, den: usize) -> Self {
        debug_assert!(den != 0);
        Self::from_usize(num).expect("count representable") / Self::from_usize(den).expect("count representable")
    }
}

impl<T> Fraction for T where T: Num + Copy + PartialOrd + FromPrimitive + Debug {}
