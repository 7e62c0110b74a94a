//! Localization of uniform cubes and a Monte Carlo check of the `l0`
//! concentration inequality on the unit cube:
//! `P(dist(x, B) >= t) <= exp(-t^2 / n) / P(x in B)` for `x ~ Unif([0, 1]^n)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{outside_count, BoxRegion};

/// `log(1 / (1 - delta)) + n log(1 / a)`: the exponent for which
/// `Unif([0, a]^n)` is `(1, eps, delta)`-localized.
pub fn localization_eps_uniform(a: f64, n: usize, delta: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "side length must lie in (0, 1], got {a}"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidArgument(alloc::format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    Ok(-libm::log(1.0 - delta) - n as f64 * libm::log(a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConcentrationCheck {
    /// Monte Carlo estimate of `P(dist(x, B) >= t)`.
    pub lhs_estimate: f64,
    pub stderr: f64,
    /// `exp(-t^2 / n) / vol(B)`.
    pub rhs_bound: f64,
    /// `lhs_estimate <= rhs_bound + 3 * stderr`.
    pub pass: bool,
}

pub fn concentration_mc_check(
    region: &BoxRegion,
    t: usize,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationCheck> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if region.lower().iter().any(|&a| a < 0.0) || region.upper().iter().any(|&b| b > 1.0) {
        return Err(Error::InvalidArgument(
            "box must lie inside the unit cube".into(),
        ));
    }
    let volume = region.volume();
    if volume <= 0.0 {
        return Err(Error::ZeroVolume);
    }
    let n = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = alloc::vec![0.0; n];
    let mut hits = 0usize;
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen::<f64>();
        }
        if outside_count(&x, region.lower(), region.upper()) >= t {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let stderr = libm::sqrt(p * (1.0 - p) / samples as f64);
    let rhs_bound = libm::exp(-((t * t) as f64) / n as f64) / volume;
    Ok(ConcentrationCheck {
        lhs_estimate: p,
        stderr,
        rhs_bound,
        pass: p <= rhs_bound + 3.0 * stderr,
    })
}
