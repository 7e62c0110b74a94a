use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Inputs in `[0, 1]^n` stored row-major, with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pixels: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(
        pixels: Vec<f64>,
        labels: Vec<usize>,
        dim: usize,
        num_classes: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "dataset dimension must be positive".into(),
            ));
        }
        if pixels.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                got: pixels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: num_classes,
            });
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("pixels must lie in [0, 1]".into()));
        }
        Ok(Self {
            pixels,
            labels,
            dim,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.pixels[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> + '_ {
        self.pixels
            .chunks_exact(self.dim)
            .zip(self.labels.iter().copied())
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut pixels = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            pixels.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            pixels,
            labels,
            dim: self.dim,
            num_classes: self.num_classes,
        }
    }

    /// Uniform subset of `count` rows without replacement.
    pub fn subsample(&self, count: usize, seed: u64) -> Result<Self> {
        if count > self.len() {
            return Err(Error::NotEnoughSamples {
                requested: count,
                available: self.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = index::sample(&mut rng, self.len(), count).into_vec();
        Ok(self.select(&picked))
    }
}
