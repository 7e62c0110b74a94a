//! Certified accuracy as a function of the perturbation budget.

use alloc::vec;
use alloc::vec::Vec;

use crate::certify::cert;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::BoxModel;

/// `acc[k]` is the fraction of points that are correctly classified and
/// certified at budget `eps[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertCurve {
    eps: Vec<usize>,
    acc: Vec<f64>,
}

impl CertCurve {
    /// Budgets must be `0, 1, 2, ...` and accuracies non-increasing in `[0, 1]`.
    pub fn new(eps: Vec<usize>, acc: Vec<f64>) -> Result<Self> {
        if eps.is_empty() || eps.len() != acc.len() {
            return Err(Error::InvalidArgument(
                "curve needs matching, non-empty eps and acc".into(),
            ));
        }
        if eps.iter().enumerate().any(|(i, &e)| i != e) {
            return Err(Error::InvalidArgument(
                "curve budgets must be 0, 1, 2, ...".into(),
            ));
        }
        if acc.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidArgument(
                "curve accuracies must lie in [0, 1]".into(),
            ));
        }
        if acc.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "certified accuracy must be non-increasing".into(),
            ));
        }
        Ok(Self { eps, acc })
    }

    pub fn eps(&self) -> &[usize] {
        &self.eps
    }

    pub fn acc(&self) -> &[f64] {
        &self.acc
    }

    pub fn eps_max(&self) -> usize {
        self.eps.len() - 1
    }

    /// Accuracy at budget 0, i.e. clean accuracy.
    pub fn clean_accuracy(&self) -> f64 {
        self.acc[0]
    }

    pub fn median_certified_radius(&self) -> i64 {
        median_certified_radius(self)
    }
}

/// Certified accuracy for every budget `0..=eps_max`, from one pass that
/// histograms the certified radii of correctly classified points.
pub fn cert_acc_curve(model: &BoxModel, dataset: &Dataset, eps_max: usize) -> Result<CertCurve> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    if eps_max > dataset.dim() {
        return Err(Error::InvalidArgument(alloc::format!(
            "eps_max {eps_max} exceeds input dimension {}",
            dataset.dim()
        )));
    }
    let mut hist = vec![0usize; eps_max + 1];
    for (x, y) in dataset.iter() {
        let c = cert(model, x)?;
        if c.predicted_label == y {
            hist[c.certified_radius.min(eps_max)] += 1;
        }
    }
    let total = dataset.len() as f64;
    let mut acc = vec![0.0; eps_max + 1];
    let mut at_least = 0usize;
    for eps in (0..=eps_max).rev() {
        at_least += hist[eps];
        acc[eps] = at_least as f64 / total;
    }
    CertCurve::new((0..=eps_max).collect(), acc)
}

/// Largest budget with certified accuracy at least one half, or `-1`.
pub fn median_certified_radius(curve: &CertCurve) -> i64 {
    curve
        .acc
        .iter()
        .rposition(|&a| a >= 0.5)
        .map_or(-1, |i| curve.eps[i] as i64)
}
