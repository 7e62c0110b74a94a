//! The `verify` suite: certificate soundness against exhaustive attacks, the
//! closed-form distance against brute force, loss gradients against finite
//! differences, and the concentration bound by Monte Carlo.

use boxnn_core::oracle::{
    concentration_mc_check, distance_sweep, gradient_check, soundness_sweep, GradientCheck,
    SoundnessReport, DEFAULT_ATTACK_BUDGET,
};
use boxnn_core::{BoxRegion, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub instances: usize,
    pub inputs_per_instance: usize,
    pub distance_cases: usize,
    pub gradient_points: usize,
    pub mc_boxes: usize,
    pub mc_dim: usize,
    pub mc_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 200,
            inputs_per_instance: 20,
            distance_cases: 1000,
            gradient_points: 100,
            mc_boxes: 20,
            mc_dim: 10,
            mc_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationSummary {
    pub checks: usize,
    pub failures: usize,
    /// Largest `lhs - rhs` seen, in units of the Monte Carlo standard error.
    pub worst_excess_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub soundness: SoundnessReport,
    pub distance_cases: usize,
    pub distance_mismatches: usize,
    pub gradient: GradientCheck,
    pub concentration: ConcentrationSummary,
    pub pass: bool,
}

/// Random box inside the unit cube with every side at least half the cube.
pub fn random_unit_box(rng: &mut ChaCha8Rng, dim: usize) -> BoxRegion {
    let (mut lo, mut hi) = (Vec::with_capacity(dim), Vec::with_capacity(dim));
    for _ in 0..dim {
        let width = rng.gen_range(0.5..=1.0);
        let start = rng.gen_range(0.0..=1.0 - width);
        lo.push(start);
        hi.push(start + width);
    }
    BoxRegion::new(lo, hi, 0).expect("ordered corners")
}

pub fn run(opts: &VerifyOptions) -> Result<VerifySummary> {
    let soundness = soundness_sweep(
        opts.instances,
        opts.inputs_per_instance,
        opts.seed,
        DEFAULT_ATTACK_BUDGET,
    )?;
    let distance_mismatches = distance_sweep(opts.distance_cases, 6, opts.seed)?;
    let gradient = gradient_check(opts.gradient_points, opts.seed)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut concentration = ConcentrationSummary {
        checks: 0,
        failures: 0,
        worst_excess_sigma: f64::NEG_INFINITY,
    };
    for b in 0..opts.mc_boxes {
        let region = random_unit_box(&mut rng, opts.mc_dim);
        for t in 1..=3 {
            let seed = opts.seed.wrapping_add((b * 3 + t) as u64);
            let r = concentration_mc_check(&region, t, opts.mc_samples, seed)?;
            concentration.checks += 1;
            concentration.failures += usize::from(!r.pass);
            let excess = (r.lhs_estimate - r.rhs_bound) / r.stderr.max(f64::MIN_POSITIVE);
            concentration.worst_excess_sigma = concentration.worst_excess_sigma.max(excess);
        }
    }
    let pass = soundness.violations == 0
        && distance_mismatches == 0
        && gradient.failures == 0
        && concentration.failures == 0;
    Ok(VerifySummary {
        soundness,
        distance_cases: opts.distance_cases,
        distance_mismatches,
        gradient,
        concentration,
        pass,
    })
}
