//! Axis-aligned boxes and the two distances used on them.
//!
//! [`box_l0_distance`] is the exact `l0` distance from a point to a box: the
//! cheapest way into `B(a, b)` keeps every coordinate already inside
//! `[a_i, b_i]` and moves each of the others onto an endpoint, so the distance
//! is the count of coordinates outside their interval. Intervals are closed.
//!
//! [`conical_distance`] replaces each outside indicator with the hinge
//! `max(a_i - x_i, 0) + max(x_i - b_i, 0)`, which is continuous in the box
//! corners and is what training differentiates.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One labeled axis-aligned box `{x : lower <= x <= upper}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
    label: usize,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, label: usize) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBox("box must have at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().chain(upper.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidBox("corners must be finite"));
        }
        if lower.iter().zip(&upper).any(|(a, b)| a > b) {
            return Err(Error::InvalidBox("lower corner exceeds upper corner"));
        }
        Ok(Self {
            lower,
            upper,
            label,
        })
    }

    /// Box `[center - halfwidth, center + halfwidth]` in every coordinate.
    pub fn centered(center: &[f64], halfwidth: f64, label: usize) -> Result<Self> {
        let lower = center.iter().map(|c| c - halfwidth).collect();
        let upper = center.iter().map(|c| c + halfwidth).collect();
        Self::new(lower, upper, label)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && outside_count(x, &self.lower, &self.upper) == 0
    }

    /// Product of side lengths.
    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    /// Mutable access to both corners for optimizers. Callers must restore
    /// `lower <= upper` with [`BoxRegion::project`] afterwards.
    pub(crate) fn corners_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.lower, &mut self.upper)
    }

    /// Collapses every inverted interval onto its midpoint.
    pub fn project(&mut self) {
        for (a, b) in self.lower.iter_mut().zip(self.upper.iter_mut()) {
            if *a > *b {
                let mid = 0.5 * (*a + *b);
                *a = mid;
                *b = mid;
            }
        }
    }
}

#[inline]
pub(crate) fn outside_count(x: &[f64], lower: &[f64], upper: &[f64]) -> usize {
    x.iter()
        .zip(lower)
        .zip(upper)
        .map(|((&xi, &a), &b)| usize::from(xi < a || xi > b))
        .sum()
}

#[inline]
pub(crate) fn hinge_sum(x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(lower)
        .zip(upper)
        .map(|((&xi, &a), &b)| (a - xi).max(0.0) + (xi - b).max(0.0))
        .sum()
}

fn check_dim(x: &[f64], region: &BoxRegion) -> Result<()> {
    if x.len() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: region.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Number of coordinates of `x` that lie outside `[a_i, b_i]`.
pub fn box_l0_distance(x: &[f64], region: &BoxRegion) -> Result<usize> {
    check_dim(x, region)?;
    Ok(outside_count(x, &region.lower, &region.upper))
}

/// Sum over coordinates of `max(a_i - x_i, 0) + max(x_i - b_i, 0)`.
pub fn conical_distance(x: &[f64], region: &BoxRegion) -> Result<f64> {
    check_dim(x, region)?;
    Ok(hinge_sum(x, &region.lower, &region.upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit(n: usize) -> BoxRegion {
        BoxRegion::new(vec![0.0; n], vec![1.0; n], 0).unwrap()
    }

    #[test]
    fn inside_point_has_zero_distance() {
        assert_eq!(box_l0_distance(&[0.5, 0.5, 0.5], &unit(3)).unwrap(), 0);
        assert_eq!(conical_distance(&[0.5, 0.5, 0.5], &unit(3)).unwrap(), 0.0);
    }

    #[test]
    fn counts_coordinates_outside() {
        assert_eq!(box_l0_distance(&[2.0, 0.5, -1.0], &unit(3)).unwrap(), 2);
    }

    #[test]
    fn endpoints_are_inside() {
        assert_eq!(box_l0_distance(&[0.0, 1.0], &unit(2)).unwrap(), 0);
    }

    #[test]
    fn conical_examples() {
        let b = BoxRegion::new(vec![0.3], vec![0.7], 0).unwrap();
        assert!((conical_distance(&[0.0], &b).unwrap() - 0.3).abs() < 1e-15);
        let b = BoxRegion::new(vec![0.3, 0.3], vec![0.7, 0.7], 0).unwrap();
        assert!((conical_distance(&[0.0, 0.9], &b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = box_l0_distance(&[0.1, 0.2], &unit(3)).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                got: 2
            }
        );
        assert!(conical_distance(&[0.1], &unit(3)).is_err());
    }

    #[test]
    fn rejects_malformed_boxes() {
        assert!(BoxRegion::new(vec![], vec![], 0).is_err());
        assert!(BoxRegion::new(vec![0.0], vec![1.0, 2.0], 0).is_err());
        assert!(BoxRegion::new(vec![0.5], vec![0.4], 0).is_err());
        assert!(BoxRegion::new(vec![f64::NAN], vec![1.0], 0).is_err());
        assert!(BoxRegion::new(vec![0.5], vec![0.5], 0).is_ok());
    }

    #[test]
    fn projection_collapses_inverted_intervals() {
        let mut b = unit(2);
        b.corners_mut().0[1] = 1.5;
        b.project();
        assert_eq!(b.lower(), &[0.0, 1.25]);
        assert_eq!(b.upper(), &[1.0, 1.25]);
    }
}
