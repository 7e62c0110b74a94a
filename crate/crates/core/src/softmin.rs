//! Temperature-controlled soft minimum.
//!
//! `min_tau(c) = sum_m c_m w_m` with `w_m = exp(-tau c_m) / sum_j exp(-tau c_j)`.
//! `tau = 0` gives the mean and `tau -> inf` the minimum. The exponent is
//! shifted by `min(c)` so large `tau * c` cannot underflow every weight.

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn weights(values: &[f64], tau: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = values.iter().map(|&c| libm::exp(-tau * (c - lo))).collect();
    let z: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= z;
    }
    w
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn check(values: &[f64], tau: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "temperature must be finite and >= 0, got {tau}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "soft-min values must be finite".into(),
        ));
    }
    Ok(())
}

pub fn soft_min(values: &[f64], tau: f64) -> Result<f64> {
    check(values, tau)?;
    Ok(soft_min_unchecked(values, tau))
}

pub(crate) fn soft_min_unchecked(values: &[f64], tau: f64) -> f64 {
    if tau == 0.0 {
        return mean(values);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let w = weights(values, tau);
    lo + values.iter().zip(&w).map(|(c, w)| (c - lo) * w).sum::<f64>()
}

/// Soft minimum together with its gradient with respect to `values`.
///
/// The weights depend on the values, so
/// `d min_tau / d c_m = w_m * (1 - tau * (c_m - min_tau))`.
pub fn soft_min_with_grad(values: &[f64], tau: f64) -> Result<(f64, Vec<f64>)> {
    check(values, tau)?;
    Ok(soft_min_with_grad_unchecked(values, tau))
}

pub(crate) fn soft_min_with_grad_unchecked(values: &[f64], tau: f64) -> (f64, Vec<f64>) {
    let mut grad = alloc::vec![0.0; values.len()];
    let s = soft_min_grad_into(values, tau, &mut grad);
    (s, grad)
}

/// Allocation-free variant for hot loops; `grad` must match `values` in length.
pub(crate) fn soft_min_grad_into(values: &[f64], tau: f64, grad: &mut [f64]) -> f64 {
    if tau == 0.0 {
        grad.fill(1.0 / values.len() as f64);
        return mean(values);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    for (g, &c) in grad.iter_mut().zip(values) {
        *g = libm::exp(-tau * (c - lo));
        z += *g;
    }
    // Accumulating offsets from the minimum keeps the result >= min exactly.
    let mut s = 0.0;
    for (g, &c) in grad.iter_mut().zip(values) {
        *g /= z;
        s += (c - lo) * *g;
    }
    s += lo;
    for (g, &c) in grad.iter_mut().zip(values) {
        *g *= 1.0 - tau * (c - s);
    }
    s
}
