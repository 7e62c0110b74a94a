//! Randomized sweeps that check the closed-form distance and the margin
//! certificate against brute force.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::attack::{exhaustive_attack, AttackBudget};
use crate::certify::cert;
use crate::error::{Error, Result};
use crate::geometry::{box_l0_distance, BoxRegion};
use crate::model::BoxModel;

/// Minimum of `||x - y||_0` over `y` in the box, with each `y_i` drawn from
/// `{x_i, a_i, b_i}`. Exponential in the dimension.
pub fn brute_force_l0_distance(x: &[f64], region: &BoxRegion) -> Result<usize> {
    let n = region.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if n > 16 {
        return Err(Error::InvalidArgument(
            "brute force is limited to 16 dimensions".into(),
        ));
    }
    let mut best = usize::MAX;
    let mut y = vec![0.0; n];
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        for i in 0..n {
            y[i] = match c % 3 {
                0 => x[i],
                1 => region.lower()[i],
                _ => region.upper()[i],
            };
            c /= 3;
        }
        let inside = (0..n).all(|i| region.lower()[i] <= y[i] && y[i] <= region.upper()[i]);
        if inside {
            best = best.min((0..n).filter(|&i| y[i] != x[i]).count());
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub max_dim: usize,
    pub max_boxes: usize,
    pub max_classes: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        Self {
            max_dim: 6,
            max_boxes: 5,
            max_classes: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub model: BoxModel,
    pub inputs: Vec<Vec<f64>>,
}

fn coordinate(rng: &mut ChaCha8Rng, grid: bool) -> f64 {
    if grid {
        f64::from(rng.gen_range(0..=10u8)) / 10.0
    } else {
        rng.gen::<f64>()
    }
}

/// Random small model plus inputs. Half the instances live on a 0.1 grid so
/// that inputs often sit exactly on box endpoints and distances tie.
pub fn random_instance(rng: &mut ChaCha8Rng, shape: InstanceShape, inputs: usize) -> Instance {
    let n = rng.gen_range(1..=shape.max_dim);
    let m = rng.gen_range(1..=shape.max_boxes);
    let k = rng.gen_range(2..=shape.max_classes);
    let grid = rng.gen_bool(0.5);
    let boxes: Vec<BoxRegion> = (0..m)
        .map(|_| {
            let (mut lo, mut hi) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let (p, q) = (coordinate(rng, grid), coordinate(rng, grid));
                lo.push(p.min(q));
                hi.push(p.max(q));
            }
            BoxRegion::new(lo, hi, rng.gen_range(0..k)).expect("ordered corners")
        })
        .collect();
    let model = BoxModel::new(boxes, k).expect("consistent boxes");
    let inputs = (0..inputs)
        .map(|_| {
            if rng.gen_bool(0.5) {
                (0..n).map(|_| coordinate(rng, grid)).collect()
            } else {
                // Start inside a box and scramble a few coordinates.
                let b = &model.boxes()[rng.gen_range(0..m)];
                (0..n)
                    .map(|i| {
                        if rng.gen_bool(0.3) {
                            coordinate(rng, grid)
                        } else {
                            let t = if grid {
                                f64::from(rng.gen_range(0..=2u8)) / 2.0
                            } else {
                                rng.gen::<f64>()
                            };
                            b.lower()[i] + t * (b.upper()[i] - b.lower()[i])
                        }
                    })
                    .collect()
            }
        })
        .collect();
    Instance { model, inputs }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoundnessReport {
    pub instances: usize,
    pub inputs: usize,
    /// Inputs where an attack within the certified radius changed the label.
    pub violations: usize,
    /// `radius_histogram[r]` counts inputs certified at exactly `r`.
    pub radius_histogram: Vec<usize>,
    /// Inputs where one more changed coordinate than certified flips the label.
    pub tight: usize,
    pub loose: usize,
    /// Inputs where the `radius + 1` attack would exceed the budget.
    pub gap_unresolved: usize,
}

/// Attacks every input at its certified radius and counts label changes,
/// which must be zero. Also records whether radius + 1 is attackable.
pub fn soundness_sweep(
    instances: usize,
    inputs_per_instance: usize,
    seed: u64,
    budget: AttackBudget,
) -> Result<SoundnessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SoundnessReport {
        instances,
        ..SoundnessReport::default()
    };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, InstanceShape::default(), inputs_per_instance);
        for x in &inst.inputs {
            let c = cert(&inst.model, x)?;
            let r = c.certified_radius;
            if report.radius_histogram.len() <= r {
                report.radius_histogram.resize(r + 1, 0);
            }
            report.radius_histogram[r] += 1;
            report.inputs += 1;
            if exhaustive_attack(&inst.model, x, r, budget)?.is_some() {
                report.violations += 1;
            }
            if r < inst.model.dim() {
                match exhaustive_attack(&inst.model, x, r + 1, budget) {
                    Ok(Some(_)) => report.tight += 1,
                    Ok(None) => report.loose += 1,
                    Err(Error::BudgetExceeded { .. }) => report.gap_unresolved += 1,
                    Err(e) => return Err(e),
                }
            } else {
                report.loose += 1;
            }
        }
    }
    Ok(report)
}

/// Compares [`box_l0_distance`] with [`brute_force_l0_distance`] on random
/// boxes and points; returns the number of mismatches.
pub fn distance_sweep(cases: usize, max_dim: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=max_dim);
        let grid = rng.gen_bool(0.5);
        let (mut lo, mut hi) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for _ in 0..n {
            let (p, q) = (coordinate(&mut rng, grid), coordinate(&mut rng, grid));
            lo.push(p.min(q));
            hi.push(p.max(q));
        }
        let region = BoxRegion::new(lo, hi, 0)?;
        let x: Vec<f64> = (0..n).map(|_| coordinate(&mut rng, grid)).collect();
        if box_l0_distance(&x, &region)? != brute_force_l0_distance(&x, &region)? {
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_examples() {
        let b = BoxRegion::new(vec![0.0; 3], vec![1.0; 3], 0).unwrap();
        assert_eq!(brute_force_l0_distance(&[2.0, 0.5, -1.0], &b).unwrap(), 2);
        assert_eq!(brute_force_l0_distance(&[0.5, 0.5, 0.5], &b).unwrap(), 0);
    }

    #[test]
    fn small_sweeps_pass() {
        assert_eq!(distance_sweep(200, 5, 11).unwrap(), 0);
        let r = soundness_sweep(10, 5, 3, super::super::DEFAULT_ATTACK_BUDGET).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.inputs, 50);
        assert_eq!(r.tight + r.loose + r.gap_unresolved, 50);
    }
}
