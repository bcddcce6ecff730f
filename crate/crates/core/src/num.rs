//! Scalar abstraction shared by every metric kernel.
//!
//! All ratio/average computations are written once against [`Scalar`] and
//! instantiated for `f64` (the crate default, see [`crate::Real`]) or `f32`.

use num_traits::{Float, FromPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

pub trait Scalar: Float + FromPrimitive + Sum + Debug + Send + Sync + 'static {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite value")
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Sum + Debug + Send + Sync + 'static {}

/// `count / total` as a scalar. `total` must be non-zero.
pub fn ratio<F: Scalar>(count: usize, total: usize) -> F {
    debug_assert!(total > 0);
    F::from_count(count) / F::from_count(total)
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<F: Scalar>(values: &[F]) -> Option<F> {
    if values.is_empty() {
        return None;
    }
    let sum: F = values.iter().copied().sum();
    Some(sum / F::from_count(values.len()))
}

/// Population standard deviation (divides by `n`, not `n - 1`).
pub fn population_std<F: Scalar>(values: &[F]) -> Option<F> {
    let mu = mean(values)?;
    let var: F = values.iter().map(|&v| (v - mu) * (v - mu)).sum::<F>() / F::from_count(values.len());
    Some(var.sqrt())
}

/// Mean and population standard deviation in one call.
pub fn mean_std<F: Scalar>(values: &[F]) -> Option<(F, F)> {
    Some((mean(values)?, population_std(values)?))
}

/// Uniformly weighted line average: `sum_i (1/n) * v_i`.
pub fn line_mean<F: Scalar>(values: &[F]) -> Option<F> {
    let n = F::from_count(values.len());
    if values.is_empty() {
        return None;
    }
    Some(values.iter().map(|&v| v / n).sum())
}

/// Section-size weighted average: `sum_i (n_i / n) * v_i` with `n = sum_i n_i`.
///
/// Sections of size zero are not allowed; returns `None` when there is
/// nothing to weight.
pub fn size_weighted<F: Scalar>(sections: &[(usize, F)]) -> Option<F> {
    let total: usize = sections.iter().map(|&(n, _)| n).sum();
    if total == 0 || sections.iter().any(|&(n, _)| n == 0) {
        return None;
    }
    debug_assert_eq!(weight_total(sections.iter().map(|&(n, _)| n)), total);
    let n = F::from_count(total);
    Some(sections.iter().map(|&(size, v)| F::from_count(size) / n * v).sum())
}

/// Integer numerator total of the section weights. The weights `n_i / n`
/// sum to exactly one iff this equals `n`.
pub fn weight_total(sizes: impl IntoIterator<Item = usize>) -> usize {
    sizes.into_iter().sum()
}
