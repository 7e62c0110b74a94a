//! Gradient training of box corners.
//!
//! The objective rewards a large relaxed margin on correctly classified points
//! and a small one on misclassified points:
//!
//! ```text
//! loss = -(1/N) sum_i s_i * min(softmin_other(x_i) - softmin_all(x_i), clip)
//! ```
//!
//! where both soft minima run over conical distances, `softmin_other` only
//! over boxes whose label differs from the exact prediction, and `s_i` is `+1`
//! for a correct exact prediction and `-1` otherwise. The exact prediction
//! (and so `s_i` and the "other" set) is recomputed every step and treated as
//! a constant. Box labels never change after initialization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{hinge_sum, BoxRegion};
use crate::model::BoxModel;
use crate::softmin::soft_min_grad_into;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    /// Number of boxes `M`.
    pub boxes: usize,
    /// Soft-min temperature.
    pub tau: f64,
    /// Upper clip on the relaxed certificate.
    pub clip: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Initial boxes are `[x - h, x + h]` around sampled training points.
    pub init_halfwidth: f64,
    /// Sample an equal share of initial boxes from every class instead of
    /// uniformly from the whole training set.
    pub stratified: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            boxes: 500,
            tau: 1.0,
            clip: 50.0,
            lr: 0.05,
            epochs: 30,
            batch_size: 256,
            seed: 0,
            init_halfwidth: 0.1,
            stratified: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.boxes == 0 {
            return bad("boxes must be >= 1".into());
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return bad(format!("tau must be finite and >= 0, got {}", self.tau));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip must be > 0, got {}", self.clip));
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return bad(format!("lr must be finite and >= 0, got {}", self.lr));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.init_halfwidth >= 0.0) || !self.init_halfwidth.is_finite() {
            return bad(format!(
                "init_halfwidth must be finite and >= 0, got {}",
                self.init_halfwidth
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossReport {
    pub loss: f64,
    /// Fraction of points the exact classifier gets right.
    pub accuracy: f64,
    /// Mean of the clipped relaxed certificate (before the sign flip).
    pub mean_relaxed_certificate: f64,
}

/// Gradient of the loss with respect to every box corner, laid out box by box.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Gradient {
    pub fn zeros(boxes: usize, dim: usize) -> Self {
        Self {
            dim,
            lower: vec![0.0; boxes * dim],
            upper: vec![0.0; boxes * dim],
        }
    }

    pub fn lower(&self, m: usize) -> &[f64] {
        &self.lower[m * self.dim..(m + 1) * self.dim]
    }

    pub fn upper(&self, m: usize) -> &[f64] {
        &self.upper[m * self.dim..(m + 1) * self.dim]
    }

    pub fn lower_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.lower[m * self.dim..(m + 1) * self.dim]
    }

    pub fn upper_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.upper[m * self.dim..(m + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|g| g.is_finite())
    }
}

fn sampled_indices(
    dataset: &Dataset,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let m = config.boxes;
    if m > dataset.len() {
        return Err(Error::NotEnoughSamples {
            requested: m,
            available: dataset.len(),
        });
    }
    if !config.stratified {
        return Ok(index::sample(rng, dataset.len(), m).into_vec());
    }
    let k = dataset.num_classes();
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &y) in dataset.labels().iter().enumerate() {
        pools[y].push(i);
    }
    for pool in &mut pools {
        pool.shuffle(rng);
    }
    // Round-robin over classes that still have points left.
    let mut picked = Vec::with_capacity(m);
    let mut cursor = vec![0usize; k];
    while picked.len() < m {
        for (class, pool) in pools.iter().enumerate() {
            if picked.len() == m {
                break;
            }
            if cursor[class] < pool.len() {
                picked.push(pool[cursor[class]]);
                cursor[class] += 1;
            }
        }
    }
    Ok(picked)
}

fn init_with_rng(
    dataset: &Dataset,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<BoxModel> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    config.validate()?;
    let picked = sampled_indices(dataset, config, rng)?;
    let boxes = picked
        .iter()
        .map(|&i| BoxRegion::centered(dataset.row(i), config.init_halfwidth, dataset.label(i)))
        .collect::<Result<Vec<_>>>()?;
    BoxModel::new(boxes, dataset.num_classes())
}

/// Boxes `[x - h, x + h]` around `M` training points drawn without
/// replacement. Deterministic in `config.seed`.
pub fn init_model(dataset: &Dataset, config: &TrainConfig) -> Result<BoxModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_with_rng(dataset, config, &mut rng)
}

fn opposing_boxes(model: &BoxModel, label: usize) -> Vec<usize> {
    model
        .boxes()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.label() != label)
        .map(|(m, _)| m)
        .collect()
}

/// `min(softmin_other - softmin_all, clip)` over conical distances, where
/// "other" means boxes whose label differs from `predicted`.
pub fn relaxed_certificate(
    model: &BoxModel,
    x: &[f64],
    predicted: usize,
    tau: f64,
    clip: f64,
) -> Result<f64> {
    model.check_input(x)?;
    let others = opposing_boxes(model, predicted);
    if others.is_empty() {
        return Err(Error::NoOpposingBox(predicted));
    }
    let cone: Vec<f64> = model
        .boxes()
        .iter()
        .map(|b| hinge_sum(x, b.lower(), b.upper()))
        .collect();
    let other_cone: Vec<f64> = others.iter().map(|&m| cone[m]).collect();
    let all = crate::softmin::soft_min(&cone, tau)?;
    let other = crate::softmin::soft_min(&other_cone, tau)?;
    Ok((other - all).min(clip))
}

/// Scratch space reused across samples.
struct Workspace {
    exact: Vec<usize>,
    cone: Vec<f64>,
    grad_all: Vec<f64>,
    other_cone: Vec<f64>,
    other_index: Vec<usize>,
    grad_other: Vec<f64>,
    coef: Vec<f64>,
}

impl Workspace {
    fn new(boxes: usize) -> Self {
        Self {
            exact: vec![0; boxes],
            cone: vec![0.0; boxes],
            grad_all: vec![0.0; boxes],
            other_cone: Vec::with_capacity(boxes),
            other_index: Vec::with_capacity(boxes),
            grad_other: vec![0.0; boxes],
            coef: vec![0.0; boxes],
        }
    }
}

const LANES: usize = 8;

/// Per-sample box coefficients below this fraction of `1/N` are skipped in
/// the backward pass. Soft-min weights of far boxes are ~exp(-tau * gap).
const NEGLIGIBLE: f64 = 1e-12;

/// Outside count and conical distance in one pass. Split into independent
/// lanes so the float sum vectorizes.
#[inline]
fn exact_and_cone(x: &[f64], lower: &[f64], upper: &[f64]) -> (usize, f64) {
    let mut outside = [0u64; LANES];
    let mut cone = [0.0f64; LANES];
    let (xc, lc, uc) = (
        x.chunks_exact(LANES),
        lower.chunks_exact(LANES),
        upper.chunks_exact(LANES),
    );
    let tail = xc.remainder().len();
    for ((xs, ls), us) in xc.zip(lc).zip(uc) {
        for j in 0..LANES {
            let (xi, a, bi) = (xs[j], ls[j], us[j]);
            outside[j] += u64::from(xi < a) + u64::from(xi > bi);
            cone[j] += (a - xi).max(0.0) + (xi - bi).max(0.0);
        }
    }
    let start = x.len() - tail;
    for i in start..x.len() {
        let (xi, a, bi) = (x[i], lower[i], upper[i]);
        outside[0] += u64::from(xi < a) + u64::from(xi > bi);
        cone[0] += (a - xi).max(0.0) + (xi - bi).max(0.0);
    }
    (outside.iter().sum::<u64>() as usize, cone.iter().sum())
}

struct SampleTerms {
    correct: bool,
    certificate: f64,
}

/// Forward pass for one sample. When `scale` is given, fills `ws.coef` with
/// `scale * d(s * certificate)/d(cone_m)`.
fn sample_terms(
    model: &BoxModel,
    x: &[f64],
    y: usize,
    config: &TrainConfig,
    ws: &mut Workspace,
    scale: Option<f64>,
) -> Result<SampleTerms> {
    for (m, b) in model.boxes().iter().enumerate() {
        let (outside, cone) = exact_and_cone(x, b.lower(), b.upper());
        ws.exact[m] = outside;
        ws.cone[m] = cone;
    }
    let mut nearest = 0;
    for m in 1..ws.exact.len() {
        if ws.exact[m] < ws.exact[nearest] {
            nearest = m;
        }
    }
    let predicted = model.boxes()[nearest].label();
    let sign = if predicted == y { 1.0 } else { -1.0 };

    ws.other_index.clear();
    ws.other_cone.clear();
    for (m, b) in model.boxes().iter().enumerate() {
        if b.label() != predicted {
            ws.other_index.push(m);
            ws.other_cone.push(ws.cone[m]);
        }
    }
    if ws.other_index.is_empty() {
        return Err(Error::NoOpposingBox(predicted));
    }
    let k = ws.other_index.len();
    let all = soft_min_grad_into(&ws.cone, config.tau, &mut ws.grad_all);
    let other = soft_min_grad_into(&ws.other_cone, config.tau, &mut ws.grad_other[..k]);
    let raw = other - all;
    let certificate = raw.min(config.clip);

    if let Some(scale) = scale {
        if raw > config.clip {
            ws.coef.fill(0.0);
        } else {
            for (c, g) in ws.coef.iter_mut().zip(&ws.grad_all) {
                *c = -scale * sign * g;
            }
            for (&m, g) in ws.other_index.iter().zip(&ws.grad_other[..k]) {
                ws.coef[m] += scale * sign * g;
            }
        }
    }
    Ok(SampleTerms {
        correct: predicted == y,
        certificate,
    })
}

fn accumulate(
    model: &BoxModel,
    data: &Dataset,
    rows: &[usize],
    config: &TrainConfig,
    mut grad: Option<&mut Gradient>,
) -> Result<LossReport> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: data.dim(),
        });
    }
    let n = rows.len() as f64;
    let dim = model.dim();
    let mut ws = Workspace::new(model.len());
    let mut objective = 0.0;
    let mut correct = 0usize;
    let mut cert_sum = 0.0;
    // Loss is -(1/N) sum s_i C_i, so each sample's coefficient is scaled by -1/N.
    let scale = grad.as_ref().map(|_| -1.0 / n);
    for &i in rows {
        let x = data.row(i);
        let terms = sample_terms(model, x, data.label(i), config, &mut ws, scale)?;
        let sign = if terms.correct { 1.0 } else { -1.0 };
        objective += sign * terms.certificate;
        cert_sum += terms.certificate;
        correct += usize::from(terms.correct);
        if let Some(g) = grad.as_deref_mut() {
            for (m, b) in model.boxes().iter().enumerate() {
                let coef = ws.coef[m];
                if coef.abs() < NEGLIGIBLE * scale.unwrap_or(0.0).abs() {
                    continue;
                }
                let gl = &mut g.lower[m * dim..(m + 1) * dim];
                let gu = &mut g.upper[m * dim..(m + 1) * dim];
                for ((((&xi, &a), &bi), ga), gb) in x
                    .iter()
                    .zip(b.lower())
                    .zip(b.upper())
                    .zip(gl.iter_mut())
                    .zip(gu.iter_mut())
                {
                    *ga += if a > xi { coef } else { 0.0 };
                    *gb -= if xi > bi { coef } else { 0.0 };
                }
            }
        }
    }
    Ok(LossReport {
        loss: -objective / n,
        accuracy: correct as f64 / n,
        mean_relaxed_certificate: cert_sum / n,
    })
}

/// Training loss on `batch`.
pub fn loss(model: &BoxModel, batch: &Dataset, config: &TrainConfig) -> Result<LossReport> {
    let rows: Vec<usize> = (0..batch.len()).collect();
    accumulate(model, batch, &rows, config, None)
}

/// Training loss on `batch` together with its gradient.
pub fn loss_and_gradient(
    model: &BoxModel,
    batch: &Dataset,
    config: &TrainConfig,
) -> Result<(LossReport, Gradient)> {
    let rows: Vec<usize> = (0..batch.len()).collect();
    let mut grad = Gradient::zeros(model.len(), model.dim());
    let report = accumulate(model, batch, &rows, config, Some(&mut grad))?;
    Ok((report, grad))
}

/// Plain gradient step on every corner followed by the `a <= b` projection.
pub fn apply_gradient(model: &mut BoxModel, grad: &Gradient, lr: f64) {
    for (m, b) in model.boxes_mut().iter_mut().enumerate() {
        let (lower, upper) = b.corners_mut();
        for (a, g) in lower.iter_mut().zip(grad.lower(m)) {
            *a -= lr * g;
        }
        for (u, g) in upper.iter_mut().zip(grad.upper(m)) {
            *u -= lr * g;
        }
        b.project();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: BoxModel,
    /// One report per epoch, averaged over that epoch's steps.
    pub history: Vec<LossReport>,
}

/// Progress notification passed to [`train_with`] observers.
#[derive(Debug)]
pub struct EpochEnd<'a> {
    pub epoch: usize,
    pub report: LossReport,
    pub model: &'a BoxModel,
}

pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<Trained> {
    train_with(dataset, config, |_| {})
}

/// Mini-batch gradient descent from [`init_model`]. Single-threaded and
/// deterministic in `config.seed`.
pub fn train_with<F>(dataset: &Dataset, config: &TrainConfig, mut on_epoch: F) -> Result<Trained>
where
    F: FnMut(&EpochEnd<'_>),
{
    config.validate()?;
    if config.boxes < dataset.num_classes() {
        return Err(Error::InvalidConfig(format!(
            "need at least one box per class: {} boxes for {} classes",
            config.boxes,
            dataset.num_classes()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = init_with_rng(dataset, config, &mut rng)?;
    if model.distinct_labels().len() < 2 {
        return Err(Error::InvalidConfig(
            "initial boxes carry a single label; use more boxes or stratified init".into(),
        ));
    }

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut grad = Gradient::zeros(model.len(), model.dim());
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = LossReport::default();
        for (step, rows) in order.chunks(config.batch_size).enumerate() {
            grad.lower.fill(0.0);
            grad.upper.fill(0.0);
            let r = accumulate(&model, dataset, rows, config, Some(&mut grad))?;
            if !r.loss.is_finite() || !grad.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, step });
            }
            let w = rows.len() as f64;
            sum.loss += r.loss * w;
            sum.accuracy += r.accuracy * w;
            sum.mean_relaxed_certificate += r.mean_relaxed_certificate * w;
            apply_gradient(&mut model, &grad, config.lr);
        }
        let total = dataset.len() as f64;
        let report = LossReport {
            loss: sum.loss / total,
            accuracy: sum.accuracy / total,
            mean_relaxed_certificate: sum.mean_relaxed_certificate / total,
        };
        history.push(report);
        on_epoch(&EpochEnd {
            epoch,
            report,
            model: &model,
        });
    }
    Ok(Trained { model, history })
}
