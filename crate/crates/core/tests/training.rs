use boxnn_core::oracle::{synth_two_class, SynthSpec};
use boxnn_core::train::{apply_gradient, loss_and_gradient, train_with, Gradient};
use boxnn_core::{cert, cert_acc_curve, init_model, loss, train, BoxModel, Dataset, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synth() -> Dataset {
    synth_two_class(&SynthSpec::default()).unwrap()
}

fn synth_config() -> TrainConfig {
    TrainConfig {
        boxes: 2,
        epochs: 20,
        batch_size: 32,
        lr: 0.01,
        tau: 5.0,
        clip: 3.0,
        stratified: true,
        ..TrainConfig::default()
    }
}

fn random_dataset(rng: &mut ChaCha8Rng, len: usize, dim: usize, classes: usize) -> Dataset {
    let pixels = (0..len * dim).map(|_| rng.gen::<f64>()).collect();
    let labels = (0..len).map(|i| i % classes).collect();
    Dataset::new(pixels, labels, dim, classes).unwrap()
}

fn assert_ordered(model: &BoxModel) {
    for b in model.boxes() {
        assert!(b.lower().iter().zip(b.upper()).all(|(a, u)| a <= u));
    }
}

#[test]
fn zero_learning_rate_keeps_model() {
    let data = random_dataset(&mut ChaCha8Rng::seed_from_u64(1), 60, 5, 3);
    let config = TrainConfig {
        boxes: 9,
        epochs: 3,
        batch_size: 7,
        lr: 0.0,
        ..TrainConfig::default()
    };
    let trained = train(&data, &config).unwrap();
    assert_eq!(trained.model, init_model(&data, &config).unwrap());
}

#[test]
fn zero_epochs_returns_init() {
    let data = synth();
    let config = TrainConfig {
        epochs: 0,
        ..synth_config()
    };
    let trained = train(&data, &config).unwrap();
    assert_eq!(trained.model, init_model(&data, &config).unwrap());
    assert!(trained.history.is_empty());
}

#[test]
fn boxes_stay_ordered_after_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data = random_dataset(&mut rng, 80, 6, 2);
    let config = TrainConfig {
        boxes: 6,
        tau: 2.0,
        ..TrainConfig::default()
    };
    let mut model = init_model(&data, &config).unwrap();
    for _ in 0..50 {
        let (_, grad) = loss_and_gradient(&model, &data, &config).unwrap();
        // Huge steps force crossings that the projection has to repair.
        apply_gradient(&mut model, &grad, 1e3);
        assert_ordered(&model);
    }
    let mut wild = Gradient::zeros(model.len(), model.dim());
    for m in 0..model.len() {
        for i in 0..model.dim() {
            wild.lower_mut(m)[i] = rng.gen_range(-5.0..5.0);
            wild.upper_mut(m)[i] = rng.gen_range(-5.0..5.0);
        }
    }
    apply_gradient(&mut model, &wild, 1.0);
    assert_ordered(&model);

    let lively = TrainConfig {
        lr: 5.0,
        epochs: 5,
        ..config
    };
    train_with(&data, &lively, |e| assert_ordered(e.model)).unwrap();
}

#[test]
fn synthetic_objective_improves() {
    let data = synth();
    let config = synth_config();
    let before = -loss(&init_model(&data, &config).unwrap(), &data, &config)
        .unwrap()
        .loss;
    let trained = train(&data, &config).unwrap();
    let after = -loss(&trained.model, &data, &config).unwrap().loss;
    assert!(after > before, "objective went from {before} to {after}");
    assert_eq!(trained.history.len(), config.epochs);
}

#[test]
fn synthetic_training_separates_classes() {
    let data = synth();
    let trained = train(&data, &synth_config()).unwrap();
    let curve = cert_acc_curve(&trained.model, &data, data.dim()).unwrap();
    assert_eq!(curve.clean_accuracy(), 1.0);
    assert!(curve.median_certified_radius() >= 1);
}

#[test]
fn training_is_deterministic() {
    let data = random_dataset(&mut ChaCha8Rng::seed_from_u64(11), 120, 8, 3);
    let config = TrainConfig {
        boxes: 12,
        epochs: 4,
        batch_size: 16,
        seed: 99,
        ..TrainConfig::default()
    };
    let a = train(&data, &config).unwrap();
    let b = train(&data, &config).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.history, b.history);
}

/// Straight double loop over points and thresholds.
fn naive_curve(model: &BoxModel, data: &Dataset, eps_max: usize) -> Vec<f64> {
    (0..=eps_max)
        .map(|eps| {
            let hits = data
                .iter()
                .filter(|(x, y)| {
                    let c = cert(model, x).unwrap();
                    c.predicted_label == *y && c.certified_radius >= eps
                })
                .count();
            hits as f64 / data.len() as f64
        })
        .collect()
}

#[test]
fn curve_matches_naive_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 50, 6, 3);
        let config = TrainConfig {
            boxes: 9,
            epochs: 2,
            batch_size: 10,
            seed: rng.gen(),
            ..TrainConfig::default()
        };
        let model = train(&data, &config).unwrap().model;
        let curve = cert_acc_curve(&model, &data, 6).unwrap();
        assert_eq!(curve.acc(), naive_curve(&model, &data, 6).as_slice());
        assert!(curve.acc().windows(2).all(|w| w[0] >= w[1]));
    }
}
