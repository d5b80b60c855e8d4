//! Quartiles and the upper IQR fence.

use crate::error::{Result, TvrError};
use crate::scalar::Scalar;

/// Fewest samples for which quartiles are computed.
pub const MIN_SAMPLES: usize = 4;

/// Linear-interpolation quantile of already sorted values at position
/// `p * (len - 1)`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: T) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let last = sorted.len() - 1;
    let pos = p * T::from_usize(last).unwrap();
    let lo = pos.floor().to_usize().unwrap_or(0).min(last);
    let hi = (lo + 1).min(last);
    let frac = pos - T::from_usize(lo).unwrap();
    if frac == T::zero() || lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fence<T> {
    pub q1: T,
    pub q3: T,
    /// `q3 + factor * (q3 - q1)`.
    pub upper: T,
}

/// First and third quartiles of `values` and the upper outlier fence.
pub fn upper_fence<T: Scalar>(values: &[T], factor: T) -> Result<Fence<T>> {
    if values.len() < MIN_SAMPLES {
        return Err(TvrError::TooFewBlocks(values.len()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("scores are never NaN"));
    let q1 = quantile_sorted(&sorted, T::lit(0.25));
    let q3 = quantile_sorted(&sorted, T::lit(0.75));
    Ok(Fence {
        q1,
        q3,
        upper: q3 + factor * (q3 - q1),
    })
}
