//! Order-independent mean accumulators.
//!
//! Every addend is quantized onto a fixed-point grid and summed into a wide
//! integer, so the result is bit-identical for any permutation of the same
//! addends. This is what makes the transform kernel exactly permutation
//! equivariant and independent of the parallel schedule.

use crate::scalar::Real;

/// 2^64, the grid for values in [0, 1].
const RATIO_SCALE: f64 = 18_446_744_073_709_551_616.0;
/// 2^56, the grid for (sums of weighted) logarithms.
const LOG_SCALE: f64 = 72_057_594_037_927_936.0;

/// Arithmetic mean of values in [0, 1].
pub(crate) struct RatioMean {
    sum: u128,
    count: u32,
}

impl RatioMean {
    pub fn new() -> Self {
        RatioMean { sum: 0, count: 0 }
    }

    #[inline]
    pub fn push<T: Real>(&mut self, ratio: T) {
        // Multiplying by a power of two is exact; the cast truncates,
        // quantizing with error below 2^-64.
        let scaled = ratio * T::from_f64_lossy(RATIO_SCALE);
        self.sum += scaled.to_u128().unwrap_or(0);
        self.count += 1;
    }

    pub fn mean<T: Real>(&self) -> T {
        debug_assert!(self.count > 0);
        let sum = self.sum as f64 / RATIO_SCALE;
        T::from_f64_lossy(sum / self.count as f64)
    }
}

/// Sum of (weighted) natural logarithms of values in (0, 1]; the value is
/// recovered as exp(sum), or exp(sum / count) for a geometric mean.
pub(crate) struct LogSum {
    sum: i128,
    count: u32,
}

impl LogSum {
    pub fn new() -> Self {
        LogSum { sum: 0, count: 0 }
    }

    /// Add one log term (must be ≤ 0 and finite).
    #[inline]
    pub fn push<T: Real>(&mut self, log_term: T) {
        let scaled = log_term * T::from_f64_lossy(LOG_SCALE);
        self.sum += scaled.to_i128().unwrap_or(0);
        self.count += 1;
    }

    /// Count a term that contributes log 1 = 0 (the 0/0 := 1 convention).
    #[inline]
    pub fn push_unit(&mut self) {
        self.count += 1;
    }

    fn log_sum(&self) -> f64 {
        self.sum as f64 / LOG_SCALE
    }

    /// exp(mean of pushed logs) — the geometric mean.
    pub fn geometric_mean<T: Real>(&self) -> T {
        debug_assert!(self.count > 0);
        T::from_f64_lossy((self.log_sum() / self.count as f64).exp())
    }

    /// exp(sum of pushed logs) — for weight-normalized hybridization.
    pub fn exp_sum<T: Real>(&self) -> T {
        T::from_f64_lossy(self.log_sum().exp())
    }
}
