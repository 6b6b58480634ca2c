//! Numeric traits shared by the transistor model and the cycle engine.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{Bounded, Num, NumCast, PrimInt, ToPrimitive, Unsigned};

/// Scalar used for transistor counts, densities and areas.
///
/// Integer scalars (`u64`, `u128`) give exact counts; `f64` allows
/// fractional coefficients such as a density of 91.5 Mtx/mm².
pub trait Scalar:
    Num + NumCast + PartialOrd + Copy + Debug + Display + FromStr + serde::Serialize + Send + Sync
{
    fn from_count(n: u64) -> Self {
        <Self as NumCast>::from(n).expect("count representable in scalar")
    }

    /// Floor to a non-negative integer count. `None` if negative, NaN or too large.
    fn floor_count(self) -> Option<u64> {
        if self < Self::zero() {
            return None;
        }
        // `to_u64` truncates toward zero, which is floor for non-negative values.
        self.to_u64()
    }

    /// Floor to the nearest whole value of the scalar itself.
    fn floor(self) -> Option<Self> {
        self.floor_count().map(Self::from_count)
    }
}

impl Scalar for u64 {}
impl Scalar for u128 {}
impl Scalar for f64 {}

/// Unsigned word holding a BFS level. The maximum value is the
/// "unreached" sentinel, so the BFS predicate is a plain `<`.
pub trait LevelWord:
    PrimInt + Unsigned + Bounded + ToPrimitive + Hash + Debug + Display + Send + Sync + 'static
{
    fn unreached() -> Self {
        Self::max_value()
    }

    fn is_unreached(self) -> bool {
        self == Self::max_value()
    }

    /// `self + 1`, or `None` when the result would collide with the sentinel.
    fn successor(self) -> Option<Self> {
        self.checked_add(&Self::one()).filter(|n| !n.is_unreached())
    }

    fn from_u64(v: u64) -> Option<Self> {
        <Self as NumCast>::from(v)
    }
}

impl<T> LevelWord for T where
    T: PrimInt + Unsigned + Bounded + ToPrimitive + Hash + Debug + Display + Send + Sync + 'static
{
}
