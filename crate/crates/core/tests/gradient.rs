//! Analytic loss gradients against central finite differences.

use boxnn_core::train::{loss_and_gradient, Gradient};
use boxnn_core::{loss, BoxModel, BoxRegion, Dataset, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;
const ABS_TOL: f64 = 1e-6;
/// Resample when any input coordinate, or the relaxed margin against the
/// clip, sits this close to a kink.
const KINK_GAP: f64 = 1e-3;

struct Point {
    model: BoxModel,
    batch: Dataset,
    config: TrainConfig,
}

fn with_corner(model: &BoxModel, m: usize, i: usize, upper: bool, delta: f64) -> BoxModel {
    let boxes = model
        .boxes()
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let (mut lo, mut hi) = (b.lower().to_vec(), b.upper().to_vec());
            if j == m {
                if upper {
                    hi[i] += delta;
                } else {
                    lo[i] += delta;
                }
            }
            BoxRegion::new(lo, hi, b.label()).unwrap()
        })
        .collect();
    BoxModel::new(boxes, model.num_classes()).unwrap()
}

fn near_kink(p: &Point) -> bool {
    for (x, _) in p.batch.iter() {
        for b in p.model.boxes() {
            for i in 0..x.len() {
                if (x[i] - b.lower()[i]).abs() < KINK_GAP || (x[i] - b.upper()[i]).abs() < KINK_GAP
                {
                    return true;
                }
            }
        }
        let predicted = boxnn_core::predict(&p.model, x).unwrap();
        let raw =
            boxnn_core::relaxed_certificate(&p.model, x, predicted, p.config.tau, f64::INFINITY)
                .unwrap();
        if (raw - p.config.clip).abs() < KINK_GAP {
            return true;
        }
    }
    // Any coordinate of a corner within the step of its partner corner would
    // trigger the a <= b constructor check when perturbed.
    p.model.boxes().iter().any(|b| {
        b.lower()
            .iter()
            .zip(b.upper())
            .any(|(a, u)| u - a < 10.0 * STEP)
    })
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(2..=6);
        let k = rng.gen_range(2..=3);
        let boxes = (0..m)
            .map(|j| {
                let (mut lo, mut hi) = (Vec::new(), Vec::new());
                for _ in 0..n {
                    let c = rng.gen::<f64>();
                    let w = rng.gen_range(0.05..0.4);
                    lo.push(c - w);
                    hi.push(c + w);
                }
                // First two boxes get distinct labels so an opposing box always exists.
                let label = if j < 2 { j } else { rng.gen_range(0..k) };
                BoxRegion::new(lo, hi, label).unwrap()
            })
            .collect();
        let model = BoxModel::new(boxes, k).unwrap();
        let count = rng.gen_range(1..=6);
        let pixels = (0..count * n).map(|_| rng.gen::<f64>()).collect();
        let labels = (0..count).map(|_| rng.gen_range(0..k)).collect();
        let batch = Dataset::new(pixels, labels, n, k).unwrap();
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
            model,
            batch,
            config,
        };
        if !near_kink(&p) {
            return p;
        }
    }
}

fn check(p: &Point, grad: &Gradient) -> Result<(), String> {
    for m in 0..p.model.len() {
        for i in 0..p.model.dim() {
            for upper in [false, true] {
                let up = loss(
                    &with_corner(&p.model, m, i, upper, STEP),
                    &p.batch,
                    &p.config,
                )
                .unwrap()
                .loss;
                let dn = loss(
                    &with_corner(&p.model, m, i, upper, -STEP),
                    &p.batch,
                    &p.config,
                )
                .unwrap()
                .loss;
                let fd = (up - dn) / (2.0 * STEP);
                let g = if upper {
                    grad.upper(m)[i]
                } else {
                    grad.lower(m)[i]
                };
                if (fd - g).abs() > REL_TOL * fd.abs().max(g.abs()) + ABS_TOL {
                    return Err(format!(
                        "box {m} coord {i} upper={upper}: analytic {g} vs finite difference {fd}"
                    ));
                }
            }
        }
    }
    Ok(())
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut nonzero = 0;
    for trial in 0..100 {
        let p = random_point(&mut rng);
        let (_, grad) = loss_and_gradient(&p.model, &p.batch, &p.config).unwrap();
        if let Err(msg) = check(&p, &grad) {
            panic!("point {trial}: {msg}");
        }
        nonzero += usize::from(
            (0..p.model.len())
                .any(|m| grad.lower(m).iter().chain(grad.upper(m)).any(|&g| g != 0.0)),
        );
    }
    // The check is vacuous if almost every gradient vanishes.
    assert!(
        nonzero >= 50,
        "only {nonzero} points had a non-zero gradient"
    );
}

#[test]
fn loss_is_invariant_to_batch_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let p = random_point(&mut rng);
        let mut order: Vec<usize> = (0..p.batch.len()).collect();
        order.reverse();
        let a = loss(&p.model, &p.batch, &p.config).unwrap().loss;
        let b = loss(&p.model, &p.batch.select(&order), &p.config)
            .unwrap()
            .loss;
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}
