//! Exhaustive sparse attack on a box model.
//!
//! Along coordinate `i`, membership of `x_i` in every `[a_{m,i}, b_{m,i}]` is
//! constant on each cell of the arrangement cut out by the endpoints (each
//! endpoint is its own cell, as is each open gap between consecutive ones).
//! The exact distance to every box, and so the prediction, depends only on
//! those memberships. One representative per cell (the endpoints, the gap
//! midpoints and the domain bounds 0 and 1) is therefore enough to cover
//! every perturbation in `[0, 1]^n`.

use alloc::vec::Vec;

use crate::certify::predict;
use crate::error::{Error, Result};
use crate::model::BoxModel;

pub type AttackBudget = u128;

/// Default cap on the number of perturbed inputs an attack may evaluate.
pub const DEFAULT_ATTACK_BUDGET: AttackBudget = 50_000_000;

/// Sorted representatives of every arrangement cell of coordinate `i` inside `[0, 1]`.
pub fn arrangement_candidates(model: &BoxModel, i: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = Vec::with_capacity(2 * model.len() + 2);
    cuts.push(0.0);
    cuts.push(1.0);
    for b in model.boxes() {
        cuts.push(b.lower()[i].clamp(0.0, 1.0));
        cuts.push(b.upper()[i].clamp(0.0, 1.0));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(2 * cuts.len());
    for (j, &c) in cuts.iter().enumerate() {
        out.push(c);
        if let Some(&next) = cuts.get(j + 1) {
            out.push(0.5 * (c + next));
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, j| acc * (n - j) as u128 / (j as u128 + 1))
}

/// Searches every `x'` in `[0, 1]^n` differing from `x` in at most `k`
/// coordinates and returns the first one whose prediction differs from that
/// of `x`. `None` proves no such perturbation exists.
pub fn exhaustive_attack(
    model: &BoxModel,
    x: &[f64],
    k: usize,
    budget: AttackBudget,
) -> Result<Option<Vec<f64>>> {
    let n = model.dim();
    if k > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "attack budget {k} exceeds dimension {n}"
        )));
    }
    let original = predict(model, x)?;
    if k == 0 || model.distinct_labels().len() < 2 {
        return Ok(None);
    }

    let candidates: Vec<Vec<f64>> = (0..n).map(|i| arrangement_candidates(model, i)).collect();
    let widest = candidates.iter().map(Vec::len).max().unwrap_or(0) as u128;
    let mut total: u128 = 0;
    for size in 1..=k {
        total = total
            .saturating_add(binomial(n, size).saturating_mul(widest.saturating_pow(size as u32)));
    }
    if total > budget {
        return Err(Error::BudgetExceeded {
            candidates: total,
            budget,
        });
    }

    let mut probe = x.to_vec();
    let mut subset: Vec<usize> = Vec::with_capacity(k);
    let mut choice: Vec<usize> = Vec::with_capacity(k);
    for size in 1..=k {
        subset.clear();
        subset.extend(0..size);
        loop {
            choice.clear();
            choice.resize(size, 0);
            loop {
                for (&i, &c) in subset.iter().zip(&choice) {
                    probe[i] = candidates[i][c];
                }
                if predict(model, &probe)? != original {
                    return Ok(Some(probe));
                }
                if !advance(&mut choice, |pos| candidates[subset[pos]].len()) {
                    break;
                }
            }
            for &i in &subset {
                probe[i] = x[i];
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    Ok(None)
}

/// Odometer step over `choice[pos] < limit(pos)`; false once it wraps around.
fn advance(choice: &mut [usize], limit: impl Fn(usize) -> usize) -> bool {
    for pos in (0..choice.len()).rev() {
        choice[pos] += 1;
        if choice[pos] < limit(pos) {
            return true;
        }
        choice[pos] = 0;
    }
    false
}

fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for pos in (0..k).rev() {
        if subset[pos] < n - k + pos {
            subset[pos] += 1;
            for j in pos + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxRegion;
    use alloc::vec;

    fn region(lo: &[f64], hi: &[f64], label: usize) -> BoxRegion {
        BoxRegion::new(lo.to_vec(), hi.to_vec(), label).unwrap()
    }

    fn two_box() -> BoxModel {
        BoxModel::new(
            vec![
                region(&[0.0, 0.0, 0.0], &[0.3, 0.3, 0.3], 0),
                region(&[0.7, 0.7, 0.7], &[1.0, 1.0, 1.0], 1),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn zero_budget_finds_nothing() {
        assert_eq!(
            exhaustive_attack(&two_box(), &[0.1, 0.1, 0.1], 0, DEFAULT_ATTACK_BUDGET).unwrap(),
            None
        );
    }

    #[test]
    fn single_label_model_is_unattackable() {
        let model = BoxModel::new(vec![region(&[0.2, 0.2], &[0.4, 0.4], 1)], 2).unwrap();
        assert_eq!(
            exhaustive_attack(&model, &[0.0, 1.0], 2, DEFAULT_ATTACK_BUDGET).unwrap(),
            None
        );
    }

    #[test]
    fn full_budget_reaches_the_other_box() {
        let model = two_box();
        let x = [0.1, 0.1, 0.1];
        let adv = exhaustive_attack(&model, &x, 3, DEFAULT_ATTACK_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(predict(&model, &adv).unwrap(), 1);
        assert!(adv.iter().all(|v| (0.0..=1.0).contains(v)));
        // Margin 3 certifies one change; moving two coordinates into box 1 flips the label.
        assert_eq!(
            exhaustive_attack(&model, &x, 1, DEFAULT_ATTACK_BUDGET).unwrap(),
            None
        );
        let adv = exhaustive_attack(&model, &x, 2, DEFAULT_ATTACK_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!(adv.iter().zip(&x).filter(|(a, b)| a != b).count(), 2);
    }

    #[test]
    fn candidates_cover_every_cell() {
        let model = two_box();
        let c = arrangement_candidates(&model, 0);
        assert_eq!(c, vec![0.0, 0.15, 0.3, 0.5, 0.7, 0.85, 1.0]);
    }

    #[test]
    fn budget_guard() {
        let err = exhaustive_attack(&two_box(), &[0.1, 0.1, 0.1], 3, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let mut s = vec![0, 1];
        let mut seen = vec![s.clone()];
        while next_combination(&mut s, 4) {
            seen.push(s.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen.last().unwrap(), &vec![2, 3]);
    }
}
