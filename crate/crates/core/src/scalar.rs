//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
///
/// Algorithms are written once against this trait. Tolerances quoted in the
/// documentation assume `f64`; the `f32` instantiation is useful for the
/// image pipelines where memory matters more than the last digits.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Tolerance used when validating that a distribution sums to one.
    #[inline]
    fn normalization_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sum of a slice.
pub fn sum<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum()
}

/// Normalizes `xs` in place and returns the previous total. Leaves the slice
/// untouched when the total is zero.
pub fn normalize<T: Real>(xs: &mut [T]) -> T {
    let total = sum(xs);
    if total > T::zero() {
        for x in xs.iter_mut() {
            *x /= total;
        }
    }
    total
}

/// Index of the largest element; ties go to the smallest index.
pub fn argmax<T: Real>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// `ln Σ exp(x_i)`, stable for large magnitudes.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

/// Checks that `p` is a probability vector (non-negative, sums to one).
pub fn is_distribution<T: Real>(p: &[T]) -> bool {
    !p.is_empty()
        && p.iter().all(|&x| x >= T::zero() && x.is_finite())
        && (sum(p) - T::one()).abs() <= T::normalization_tol()
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|&&x| x > T::zero())
        .map(|&x| -x * x.ln())
        .sum()
}
