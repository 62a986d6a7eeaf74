//! Gradient training of one binary classifier.
//!
//! Gradients flow through the circuit by the parameter-shift rule: every
//! rotation generator has eigenvalues +-1/2, so the derivative of the
//! readout expectation with respect to one angle is exactly
//! `(g(angle + pi/2) - g(angle - pi/2)) / 2`. Kernel weights and biases pick
//! up the chain-rule factors of the affine patch response; regularization
//! contributes its closed form. The optimizer is Nesterov momentum: the
//! gradient is taken at the lookahead point `params + momentum * velocity`.

use crate::circuit::CircuitTemplate;
use crate::error::invalid;
use crate::fmath;
use crate::model::{bind_params, init_params, output_bias, classify, EncodedDataset, ParamLayout};
use crate::rng;
use crate::state::MeasurementMode;
use crate::{Error, Result};
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, LN_2};

/// Loss applied to the raw decision value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// log2(1 + exp(-y * raw * cost_scale))
    Log,
    /// (raw - y)^2
    Quadratic,
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Margin scale inside the logistic cost.
    pub cost_scale: f64,
    /// L2 coefficient on the whole trainable vector.
    pub weight_decay: f64,
    pub cost: CostKind,
    pub mode: MeasurementMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 100,
            batch_size: 64,
            learning_rate: 0.1,
            momentum: 0.9,
            cost_scale: 10.0,
            weight_decay: 0.0,
            cost: CostKind::Log,
            mode: MeasurementMode::Exact,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_size == 0 {
            return Err(invalid("iterations and batch size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(invalid("learning rate must be positive and finite"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid("momentum must lie in [0, 1)"));
        }
        let scale_ok = self.cost_scale.is_finite() && self.cost_scale > 0.0;
        let decay_ok = self.weight_decay.is_finite() && self.weight_decay >= 0.0;
        if !scale_ok || !decay_ok {
            return Err(invalid("cost scale must be positive and weight decay non-negative"));
        }
        Ok(())
    }
}

/// Numerically stable log2(1 + exp(-m)).
fn softplus_log2(neg_m: f64) -> f64 {
    // neg_m is -m. For large positive neg_m, exp overflows, so peel it off.
    if neg_m > 0.0 {
        (neg_m + fmath::log1p(fmath::exp(-neg_m))) / LN_2
    } else {
        fmath::log1p(fmath::exp(neg_m)) / LN_2
    }
}

/// Stable logistic sigmoid.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + fmath::exp(-x))
    } else {
        let e = fmath::exp(x);
        e / (1.0 + e)
    }
}

/// Data term of the cost for one sample (no regularization).
pub fn sample_cost(raw: f64, label: i32, cost_scale: f64, kind: CostKind) -> f64 {
    let y = label as f64;
    match kind {
        CostKind::Log => softplus_log2(-y * raw * cost_scale),
        CostKind::Quadratic => {
            let d = raw - y;
            d * d
        }
    }
}

/// d(sample_cost)/d(raw).
pub fn sample_cost_grad(raw: f64, label: i32, cost_scale: f64, kind: CostKind) -> f64 {
    let y = label as f64;
    match kind {
        CostKind::Log => -y * cost_scale / LN_2 * sigmoid(-y * raw * cost_scale),
        CostKind::Quadratic => 2.0 * (raw - y),
    }
}

fn reg_cost(params: &[f64], weight_decay: f64) -> f64 {
    if weight_decay == 0.0 {
        return 0.0;
    }
    weight_decay * params.iter().map(|p| p * p).sum::<f64>()
}

/// Derived measurement mode so repeated shot-based evaluations draw
/// different noise while staying reproducible.
fn salted_mode(mode: MeasurementMode, label: &str, salt: u64) -> MeasurementMode {
    match mode {
        MeasurementMode::Exact => MeasurementMode::Exact,
        MeasurementMode::Shots { count, seed } => MeasurementMode::Shots {
            count,
            seed: rng::derive_seed_indexed(seed, label, salt),
        },
    }
}

fn check_labels(data: &EncodedDataset) -> Result<()> {
    if data.is_empty() {
        return Err(invalid("cannot train or evaluate on an empty dataset"));
    }
    if data.labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(invalid("binary training expects labels +1 and -1"));
    }
    Ok(())
}

/// Mean cost of a batch, including the regularization term.
pub fn batch_cost(
    template: &CircuitTemplate,
    params: &[f64],
    data: &EncodedDataset,
    batch: &[usize],
    cfg: &TrainConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(invalid("cost of an empty batch is undefined"));
    }
    let layout = ParamLayout::of(template);
    let mut total = 0.0;
    for (k, &r) in batch.iter().enumerate() {
        let binding = bind_params(template, params, data.row(r))?;
        let mode = salted_mode(cfg.mode, "shots-cost", k as u64);
        let g = template.bind_and_run(&binding.features, &binding.theta, mode)?;
        total += sample_cost(g + output_bias(&layout, params), data.labels[r], cfg.cost_scale, cfg.cost);
    }
    Ok(total / batch.len() as f64 + reg_cost(params, cfg.weight_decay))
}

/// Mean batch cost and its exact gradient with respect to every trainable
/// parameter, evaluated by parameter shifts on the circuit angles.
pub fn cost_and_grad(
    template: &CircuitTemplate,
    params: &[f64],
    data: &EncodedDataset,
    batch: &[usize],
    cfg: &TrainConfig,
    shot_salt: &mut u64,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(invalid("gradient of an empty batch is undefined"));
    }
    let layout = ParamLayout::of(template);
    let slots = template.weight_count();
    let mut grad = alloc::vec![0.0; params.len()];
    let mut total_cost = 0.0;

    let run = |features: &[f64], theta: &[f64], salt: &mut u64| -> Result<f64> {
        let mode = salted_mode(cfg.mode, "shots-grad", *salt);
        *salt = salt.wrapping_add(1);
        template.bind_and_run(features, theta, mode)
    };

    for &r in batch {
        let row = data.row(r);
        let binding = bind_params(template, params, row)?;
        let mut theta = binding.theta;
        let g = run(&binding.features, &theta, shot_salt)?;
        let raw = g + output_bias(&layout, params);
        total_cost += sample_cost(raw, data.labels[r], cfg.cost_scale, cfg.cost);
        let dc_draw = sample_cost_grad(raw, data.labels[r], cfg.cost_scale, cfg.cost);

        for j in 0..slots {
            let original = theta[j];
            theta[j] = original + FRAC_PI_2;
            let g_plus = run(&binding.features, &theta, shot_salt)?;
            theta[j] = original - FRAC_PI_2;
            let g_minus = run(&binding.features, &theta, shot_salt)?;
            theta[j] = original;
            let dc_dangle = dc_draw * 0.5 * (g_plus - g_minus);
            if j < layout.kernel_count {
                let patch = &row[j * layout.kernel_len..(j + 1) * layout.kernel_len];
                let block = layout.kernel_block(j);
                for (w, x) in grad[block].iter_mut().zip(patch) {
                    *w += dc_dangle * x;
                }
                grad[layout.kernel_bias(j)] += dc_dangle;
            } else {
                grad[layout.direct_start() + (j - layout.kernel_count)] += dc_dangle;
            }
        }
        if let Some(b0) = layout.output_bias_index() {
            grad[b0] += dc_draw;
        }
    }

    let scale = 1.0 / batch.len() as f64;
    for (gi, p) in grad.iter_mut().zip(params) {
        *gi = *gi * scale + 2.0 * cfg.weight_decay * p;
        if !gi.is_finite() {
            return Err(Error::Numeric(alloc::format!("non-finite gradient entry {gi}")));
        }
    }
    let cost = total_cost * scale + reg_cost(params, cfg.weight_decay);
    if !cost.is_finite() {
        return Err(Error::Numeric(alloc::format!("non-finite cost {cost}")));
    }
    Ok((cost, grad))
}

/// One Nesterov update: evaluate the gradient at the lookahead point, fold
/// it into the velocity, and step.
pub fn nesterov_step(
    params: &mut [f64],
    velocity: &mut [f64],
    learning_rate: f64,
    momentum: f64,
    mut grad_at: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<()> {
    let lookahead: Vec<f64> = params
        .iter()
        .zip(velocity.iter())
        .map(|(p, v)| p + momentum * v)
        .collect();
    let grad = grad_at(&lookahead)?;
    if grad.len() != params.len() {
        return Err(Error::Mismatch {
            what: "gradient length",
            expected: params.len(),
            actual: grad.len(),
        });
    }
    for i in 0..params.len() {
        velocity[i] = momentum * velocity[i] - learning_rate * grad[i];
        params[i] += velocity[i];
        if !params[i].is_finite() {
            return Err(Error::Numeric(alloc::format!(
                "parameter {i} became non-finite during the update"
            )));
        }
    }
    Ok(())
}

/// Epoch-based mini-batch scheduler: each epoch visits every sample exactly
/// once in a freshly shuffled order; a short tail batch is used as-is.
pub struct EpochBatcher {
    order: Vec<usize>,
    cursor: usize,
    batch_size: usize,
    rng: rand_chacha::ChaCha8Rng,
}

impl EpochBatcher {
    pub fn new(n: usize, batch_size: usize, master_seed: u64, class_index: u64) -> Result<Self> {
        if n == 0 || batch_size == 0 {
            return Err(invalid("batcher needs samples and a positive batch size"));
        }
        let mut b = EpochBatcher {
            order: (0..n).collect(),
            cursor: 0,
            batch_size,
            rng: rng::stream_indexed(master_seed, "batch", class_index),
        };
        crate::dataset::shuffle(&mut b.order, &mut b.rng);
        Ok(b)
    }

    pub fn next_batch(&mut self) -> Vec<usize> {
        if self.cursor >= self.order.len() {
            crate::dataset::shuffle(&mut self.order, &mut self.rng);
            self.cursor = 0;
        }
        let end = core::cmp::min(self.cursor + self.batch_size, self.order.len());
        let batch = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        batch
    }
}

/// Wall-time source for history records; the core stays clock-free.
pub trait Clock {
    fn elapsed_seconds(&self) -> f64;
}

/// Reports zero forever (tests, no-timing contexts).
pub struct NullClock;

impl Clock for NullClock {
    fn elapsed_seconds(&self) -> f64 {
        0.0
    }
}

/// Metrics captured after each iteration's update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost_train: f64,
    pub cost_test: f64,
    pub acc_train: f64,
    pub acc_test: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub records: Vec<IterationRecord>,
}

impl TrainHistory {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// A trained parameter vector plus its per-iteration metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: Vec<f64>,
    pub history: TrainHistory,
}

/// Mean cost over a whole dataset (regularization included).
pub fn dataset_cost(
    template: &CircuitTemplate,
    params: &[f64],
    data: &EncodedDataset,
    cfg: &TrainConfig,
) -> Result<f64> {
    check_labels(data)?;
    let all: Vec<usize> = (0..data.len()).collect();
    batch_cost(template, params, data, &all, cfg)
}

/// Fraction of samples whose thresholded prediction matches the label.
pub fn dataset_accuracy(
    template: &CircuitTemplate,
    params: &[f64],
    data: &EncodedDataset,
    mode: MeasurementMode,
) -> Result<f64> {
    check_labels(data)?;
    let layout = ParamLayout::of(template);
    let mut hits = 0usize;
    for r in 0..data.len() {
        let binding = bind_params(template, params, data.row(r))?;
        let g = template.bind_and_run(&binding.features, &binding.theta, salted_mode(mode, "shots-acc", r as u64))?;
        if classify(g + output_bias(&layout, params)) == data.labels[r] {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Train one binary classifier from a fresh initialization.
///
/// Batches come from the "batch" stream and the initialization from the
/// "init" stream, both indexed by `class_index`, so ensemble members and
/// repeated runs are independent yet reproducible. History is recorded after
/// every update against the full train and test sets.
pub fn train(
    template: &CircuitTemplate,
    train_data: &EncodedDataset,
    test_data: &EncodedDataset,
    cfg: &TrainConfig,
    master_seed: u64,
    class_index: u64,
    clock: &dyn Clock,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_labels(train_data)?;
    check_labels(test_data)?;
    let mut params = init_params(template, master_seed, class_index);
    let mut velocity = alloc::vec![0.0; params.len()];
    let mut batcher = EpochBatcher::new(train_data.len(), cfg.batch_size, master_seed, class_index)?;
    let mut salt = 0u64;
    let mut records = Vec::with_capacity(cfg.iterations);
    for iteration in 1..=cfg.iterations {
        let batch = batcher.next_batch();
        nesterov_step(
            &mut params,
            &mut velocity,
            cfg.learning_rate,
            cfg.momentum,
            |lookahead| {
                cost_and_grad(template, lookahead, train_data, &batch, cfg, &mut salt)
                    .map(|(_, grad)| grad)
            },
        )?;
        let eval_cfg = TrainConfig {
            mode: salted_mode(cfg.mode, "shots-history", iteration as u64),
            ..*cfg
        };
        records.push(IterationRecord {
            iteration,
            cost_train: dataset_cost(template, &params, train_data, &eval_cfg)?,
            cost_test: dataset_cost(template, &params, test_data, &eval_cfg)?,
            acc_train: dataset_accuracy(template, &params, train_data, eval_cfg.mode)?,
            acc_test: dataset_accuracy(template, &params, test_data, eval_cfg.mode)?,
            wall_seconds: clock.elapsed_seconds(),
        });
    }
    Ok(TrainOutcome { params, history: TrainHistory { records } })
}
