//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Floating point scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("count not representable")
    }

    /// `2^e` for integer `e`.
    #[inline]
    fn exp2i(e: i32) -> Self {
        Self::lit(2.0).powi(e)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// Sup-norm distance between two points of equal dimension.
#[inline]
pub fn sup_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// Generator for one trial: a fixed seed with the trial index as stream, so
/// trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-17);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-14).abs() < 1e-20);
    }

    #[test]
    fn exp2i_matches_powers() {
        assert_eq!(f64::exp2i(-3), 0.125);
        assert_eq!(f32::exp2i(4), 16.0);
    }
}
