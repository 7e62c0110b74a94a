//! Exact prediction and the margin certificate.
//!
//! With `d1` the distance to the nearest box and `d2` the distance to the
//! nearest box whose label differs from the prediction, changing `k`
//! coordinates moves every box distance by at most `k`. The prediction is
//! therefore stable whenever `2k < d2 - d1`, so the largest certified integer
//! budget is `floor((margin - 1) / 2)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::outside_count;
use crate::model::BoxModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertResult {
    pub predicted_label: usize,
    /// Index of the nearest box (lowest index among ties).
    pub nearest_box: usize,
    pub d1: usize,
    /// `None` when no box carries a different label (infinite distance).
    pub d2: Option<usize>,
    /// `d2 - d1`; `None` when `d2` is infinite.
    pub margin: Option<usize>,
    pub certified_radius: usize,
}

impl CertResult {
    pub(crate) fn from_distances(model: &BoxModel, distances: &[usize]) -> Self {
        let (nearest_box, d1) = argmin(distances);
        let predicted_label = model.boxes()[nearest_box].label();
        let d2 = model
            .boxes()
            .iter()
            .zip(distances)
            .filter(|(b, _)| b.label() != predicted_label)
            .map(|(_, &d)| d)
            .min();
        let margin = d2.map(|d2| d2 - d1);
        let certified_radius = match margin {
            None => model.dim(),
            Some(0) => 0,
            Some(m) => ((m - 1) / 2).min(model.dim()),
        };
        Self {
            predicted_label,
            nearest_box,
            d1,
            d2,
            margin,
            certified_radius,
        }
    }
}

fn argmin(distances: &[usize]) -> (usize, usize) {
    let mut best = (0, distances[0]);
    for (m, &d) in distances.iter().enumerate().skip(1) {
        if d < best.1 {
            best = (m, d);
        }
    }
    best
}

/// Exact `l0` distance from `x` to every box, in model order.
pub fn distances(model: &BoxModel, x: &[f64]) -> Result<Vec<usize>> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    model.check_input(x)?;
    Ok(model
        .boxes()
        .iter()
        .map(|b| outside_count(x, b.lower(), b.upper()))
        .collect())
}

/// Label of the nearest box; ties go to the lowest box index.
pub fn predict(model: &BoxModel, x: &[f64]) -> Result<usize> {
    let d = distances(model, x)?;
    Ok(model.boxes()[argmin(&d).0].label())
}

pub fn cert(model: &BoxModel, x: &[f64]) -> Result<CertResult> {
    let d = distances(model, x)?;
    Ok(CertResult::from_distances(model, &d))
}
