//! Output heads and numerically stable log-probability helpers.

use crate::error::{Error, Result};

use super::activation::sigmoid;

/// Softmax with max-subtraction; the result sums to one for any finite input.
pub fn softmax(z: &[f64]) -> Result<Vec<f64>> {
    if z.iter().any(|v| v.is_nan()) {
        return Err(Error::NotANumber("softmax"));
    }
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

pub(crate) fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// `log(sum(exp(z)))`, skipping entries equal to `-inf`.
pub fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = z.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// Probability of stopping at the current step given its logit.
///
/// Saturates to exactly `1.0` / `0.0` in `f64` once `|logit|` exceeds about 37;
/// use [`log_step_probability`] and [`log_continue_probability`] for likelihoods.
pub fn step_probability(logit: f64) -> Result<f64> {
    if logit.is_nan() {
        return Err(Error::NotANumber("step_probability"));
    }
    Ok(sigmoid(logit))
}

/// `log(sigmoid(f))` without cancellation.
#[inline]
pub fn log_step_probability(f: f64) -> f64 {
    -softplus(-f)
}

/// `log(1 - sigmoid(f)) = -log(1 + e^f)`.
#[inline]
pub fn log_continue_probability(f: f64) -> f64 {
    -softplus(f)
}

/// `log(1 + e^x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
