//! Two classes drawn uniformly from disjoint `l_inf` balls.
//!
//! The balls are centered at `low * 1` and `high * 1` inside the unit cube
//! (the images of `-1` and `+1` under an affine map). Class 0 lives around
//! `low`, class 1 around `high`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::BoxRegion;
use crate::model::BoxModel;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub n: usize,
    /// Ball radius in unit-cube coordinates.
    pub eps_inf: f64,
    pub low_center: f64,
    pub high_center: f64,
    pub samples_per_class: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 8,
            eps_inf: 0.1,
            low_center: 0.25,
            high_center: 0.75,
            samples_per_class: 100,
            seed: 0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0
            || !(self.eps_inf >= 0.0)
            || !self.low_center.is_finite()
            || !self.high_center.is_finite()
        {
            return Err(Error::InvalidSynthSpec);
        }
        let inside = |c: f64| c - self.eps_inf >= 0.0 && c + self.eps_inf <= 1.0;
        let disjoint = self.low_center + self.eps_inf < self.high_center - self.eps_inf;
        if !inside(self.low_center) || !inside(self.high_center) || !disjoint {
            return Err(Error::InvalidSynthSpec);
        }
        Ok(())
    }

    fn ball(&self, class: usize) -> BoxRegion {
        let c = if class == 0 {
            self.low_center
        } else {
            self.high_center
        };
        BoxRegion::new(
            vec![c - self.eps_inf; self.n],
            vec![c + self.eps_inf; self.n],
            class,
        )
        .expect("validated spec")
    }
}

/// `samples_per_class` points from each ball, classes alternating.
pub fn synth_two_class(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = 2 * spec.samples_per_class;
    let mut pixels = Vec::with_capacity(total * spec.n);
    let mut labels = Vec::with_capacity(total);
    for i in 0..total {
        let class = i % 2;
        let c = if class == 0 {
            spec.low_center
        } else {
            spec.high_center
        };
        for _ in 0..spec.n {
            pixels.push(rng.gen_range(c - spec.eps_inf..=c + spec.eps_inf));
        }
        labels.push(class);
    }
    Dataset::new(pixels, labels, spec.n, 2)
}

/// The two-box classifier whose boxes are exactly the class balls.
pub fn true_ball_model(spec: &SynthSpec) -> Result<BoxModel> {
    spec.validate()?;
    BoxModel::new(vec![spec.ball(0), spec.ball(1)], 2)
}
