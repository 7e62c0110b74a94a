//! Central finite differences of the training loss at random generic points.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::train::{loss, loss_and_gradient, TrainConfig};
use crate::{predict, relaxed_certificate, BoxModel, BoxRegion, Dataset};

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
pub const FD_ABS_TOL: f64 = 1e-6;
/// Points closer than this to a kink of the loss are resampled.
const KINK_GAP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GradientCheck {
    pub points: usize,
    pub partials: usize,
    /// Largest `|fd - analytic| / (rel_tol * max(|fd|, |analytic|) + abs_tol)`.
    /// Values above 1 are failures.
    pub worst_ratio: f64,
    pub failures: usize,
    pub first_failure: Option<String>,
}

struct Point {
    model: BoxModel,
    batch: Dataset,
    config: TrainConfig,
}

fn shifted(model: &BoxModel, m: usize, i: usize, upper: bool, delta: f64) -> Result<BoxModel> {
    let mut boxes = model.boxes().to_vec();
    let (mut lo, mut hi) = (boxes[m].lower().to_vec(), boxes[m].upper().to_vec());
    if upper {
        hi[i] += delta;
    } else {
        lo[i] += delta;
    }
    boxes[m] = BoxRegion::new(lo, hi, boxes[m].label())?;
    BoxModel::new(boxes, model.num_classes())
}

fn near_kink(p: &Point) -> Result<bool> {
    for (x, _) in p.batch.iter() {
        for b in p.model.boxes() {
            let close = |c: &[f64]| x.iter().zip(c).any(|(xi, ci)| (xi - ci).abs() < KINK_GAP);
            if close(b.lower()) || close(b.upper()) {
                return Ok(true);
            }
        }
        let raw = relaxed_certificate(
            &p.model,
            x,
            predict(&p.model, x)?,
            p.config.tau,
            f64::INFINITY,
        )?;
        if (raw - p.config.clip).abs() < KINK_GAP {
            return Ok(true);
        }
    }
    Ok(false)
}

fn random_point(rng: &mut ChaCha8Rng) -> Result<Point> {
    loop {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(2..=6);
        let k = rng.gen_range(2..=3);
        let mut boxes = Vec::with_capacity(m);
        for j in 0..m {
            let mut lo = Vec::with_capacity(n);
            let mut hi = Vec::with_capacity(n);
            for _ in 0..n {
                let c: f64 = rng.gen();
                let w = rng.gen_range(0.05..0.4);
                lo.push(c - w);
                hi.push(c + w);
            }
            // Distinct labels on the first two boxes keep an opposing box around.
            let label = if j < 2 { j } else { rng.gen_range(0..k) };
            boxes.push(BoxRegion::new(lo, hi, label)?);
        }
        let count = rng.gen_range(1..=6);
        let pixels = (0..count * n).map(|_| rng.gen()).collect();
        let labels = (0..count).map(|_| rng.gen_range(0..k)).collect();
        let config = TrainConfig {
            tau: rng.gen_range(0.1..4.0),
            clip: if rng.gen_bool(0.3) {
                rng.gen_range(0.05..0.5)
            } else {
                50.0
            },
            ..TrainConfig::default()
        };
        let p = Point {
            model: BoxModel::new(boxes, k)?,
            batch: Dataset::new(pixels, labels, n, k)?,
            config,
        };
        if !near_kink(&p)? {
            return Ok(p);
        }
    }
}

/// Compares every partial derivative of the loss against central differences
/// at `points` random models, batches and configs.
pub fn gradient_check(points: usize, seed: u64) -> Result<GradientCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradientCheck {
        points,
        partials: 0,
        worst_ratio: 0.0,
        failures: 0,
        first_failure: None,
    };
    for trial in 0..points {
        let p = random_point(&mut rng)?;
        let (_, grad) = loss_and_gradient(&p.model, &p.batch, &p.config)?;
        for m in 0..p.model.len() {
            for i in 0..p.model.dim() {
                for upper in [false, true] {
                    let up = loss(
                        &shifted(&p.model, m, i, upper, FD_STEP)?,
                        &p.batch,
                        &p.config,
                    )?
                    .loss;
                    let dn = loss(
                        &shifted(&p.model, m, i, upper, -FD_STEP)?,
                        &p.batch,
                        &p.config,
                    )?
                    .loss;
                    let fd = (up - dn) / (2.0 * FD_STEP);
                    let g = if upper {
                        grad.upper(m)[i]
                    } else {
                        grad.lower(m)[i]
                    };
                    let ratio = (fd - g).abs() / (FD_REL_TOL * fd.abs().max(g.abs()) + FD_ABS_TOL);
                    report.partials += 1;
                    report.worst_ratio = report.worst_ratio.max(ratio);
                    if ratio > 1.0 {
                        report.failures += 1;
                        report.first_failure.get_or_insert_with(|| {
                            format!("point {trial}, box {m}, coordinate {i}, upper {upper}: analytic {g}, finite difference {fd}")
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn few_points_pass() {
        let r = gradient_check(5, 1).unwrap();
        assert_eq!(r.failures, 0, "{:?}", r.first_failure);
        assert!(r.partials >= 5 * 2 * 2 * 2);
    }
}
