use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::BoxRegion;

/// Ordered collection of labeled boxes over `[0, 1]^n` inputs.
///
/// Box order matters: prediction ties go to the lowest index.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxModel {
    boxes: Vec<BoxRegion>,
    dim: usize,
    num_classes: usize,
}

impl BoxModel {
    pub fn new(boxes: Vec<BoxRegion>, num_classes: usize) -> Result<Self> {
        let first = boxes.first().ok_or(Error::EmptyModel)?;
        let dim = first.dim();
        for b in &boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.dim(),
                });
            }
            if b.label() >= num_classes {
                return Err(Error::LabelOutOfRange {
                    label: b.label(),
                    classes: num_classes,
                });
            }
        }
        Ok(Self {
            boxes,
            dim,
            num_classes,
        })
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub(crate) fn boxes_mut(&mut self) -> &mut [BoxRegion] {
        &mut self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Sorted distinct labels carried by the boxes.
    pub fn distinct_labels(&self) -> Vec<usize> {
        let mut labels: Vec<usize> = self.boxes.iter().map(BoxRegion::label).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn push(&mut self, region: BoxRegion) -> Result<()> {
        if region.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: region.dim(),
            });
        }
        if region.label() >= self.num_classes {
            return Err(Error::LabelOutOfRange {
                label: region.label(),
                classes: self.num_classes,
            });
        }
        self.boxes.push(region);
        Ok(())
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}
