//! One-vs-rest multiclass classification on top of binary training.
//!
//! Each class gets its own binary classifier (that class +1, the rest -1),
//! all sharing one circuit template. Prediction takes the class whose
//! classifier reports the largest raw decision value; ties resolve to the
//! lowest class id. Each member balances its own relabeled training set:
//! with n classes the positives are outnumbered roughly n-1 to 1, so the
//! minority side is oversampled with small Gaussian jitter in encoded space
//! until the two sides match.

use crate::circuit::CircuitTemplate;
use crate::error::invalid;
use crate::model::{bind_params, output_bias, EncodedDataset, ParamLayout};
use crate::rng;
use crate::state::MeasurementMode;
use crate::train::{self, Clock, TrainConfig, TrainOutcome};
use crate::Result;
use alloc::vec::Vec;
use rand::RngCore;

/// Distinct labels of an encoded dataset, ascending.
pub fn encoded_class_ids(data: &EncodedDataset) -> Vec<i32> {
    let mut ids: Vec<i32> = Vec::new();
    for &l in &data.labels {
        if !ids.contains(&l) {
            ids.push(l);
        }
    }
    ids.sort_unstable();
    ids
}

/// One-vs-rest labels: `positive` maps to +1, everything else to -1.
pub fn one_vs_rest_labels(labels: &[i32], positive: i32) -> Vec<i32> {
    labels.iter().map(|&l| if l == positive { 1 } else { -1 }).collect()
}

/// Oversample minority classes up to the majority count by duplicating
/// uniformly chosen members with Gaussian jitter (`sigma`) on every encoded
/// entry. Original rows are kept untouched at the front; synthetic rows are
/// appended class by class in ascending id order. A balanced dataset comes
/// back unchanged.
pub fn balance(data: &EncodedDataset, sigma: f64, master_seed: u64) -> Result<EncodedDataset> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(invalid("balance jitter must be non-negative"));
    }
    let classes = encoded_class_ids(data);
    let counts: Vec<usize> = classes
        .iter()
        .map(|&c| data.labels.iter().filter(|&&l| l == c).count())
        .collect();
    let target = *counts.iter().max().expect("dataset is non-empty");
    let mut rows = data.rows.clone();
    let mut labels = data.labels.clone();
    let mut rng = rng::stream(master_seed, "balance");
    for (&class, &count) in classes.iter().zip(&counts) {
        if count == target {
            continue;
        }
        let members: Vec<usize> = (0..data.len()).filter(|&r| data.labels[r] == class).collect();
        for _ in 0..target - count {
            let source = members[(rng.next_u64() % members.len() as u64) as usize];
            let base = data.row(source);
            for &x in base {
                rows.push(x + sigma * rng::gaussian(&mut rng));
            }
            labels.push(class);
        }
    }
    EncodedDataset::new(rows, data.row_len, labels, data.kind)
}

/// A trained one-vs-rest ensemble: parallel vectors of class ids and
/// parameter vectors, ascending by class id.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub class_ids: Vec<i32>,
    pub members: Vec<Vec<f64>>,
}

/// Training record of one ensemble: the model plus per-member histories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome {
    pub model: EnsembleModel,
    pub per_class: Vec<TrainOutcome>,
}

/// Train one classifier per class: relabel one vs rest, balance, train.
///
/// Member k (classes ascending) trains with `class_index = k`, so each gets
/// its own initialization, batch, and balance streams while the whole
/// ensemble stays reproducible from one seed.
pub fn train_ensemble(
    template: &CircuitTemplate,
    train_data: &EncodedDataset,
    test_data: &EncodedDataset,
    cfg: &TrainConfig,
    master_seed: u64,
    balance_sigma: f64,
    clock: &dyn Clock,
) -> Result<EnsembleOutcome> {
    let class_ids = encoded_class_ids(train_data);
    if class_ids.len() < 2 {
        return Err(invalid("an ensemble needs at least two classes"));
    }
    let mut members = Vec::with_capacity(class_ids.len());
    let mut per_class = Vec::with_capacity(class_ids.len());
    for (k, &class) in class_ids.iter().enumerate() {
        let outcome = train_ensemble_member(
            template, train_data, test_data, cfg, master_seed, k as u64, class, balance_sigma,
            clock,
        )?;
        members.push(outcome.params.clone());
        per_class.push(outcome);
    }
    Ok(EnsembleOutcome { model: EnsembleModel { class_ids, members }, per_class })
}

/// Train the single one-vs-rest member for `class`: relabel the training
/// split (class +1, rest -1), balance that binary set with a per-member
/// stream, and train on the result. Exposed so callers can schedule members
/// in parallel; `train_ensemble` runs them in order with `class_index` equal
/// to the class position.
#[allow(clippy::too_many_arguments)]
pub fn train_ensemble_member(
    template: &CircuitTemplate,
    train_data: &EncodedDataset,
    test_data: &EncodedDataset,
    cfg: &TrainConfig,
    master_seed: u64,
    class_index: u64,
    class: i32,
    balance_sigma: f64,
    clock: &dyn Clock,
) -> Result<TrainOutcome> {
    let relabeled = EncodedDataset::new(
        train_data.rows.clone(),
        train_data.row_len,
        one_vs_rest_labels(&train_data.labels, class),
        train_data.kind,
    )?;
    let member_seed = rng::derive_seed_indexed(master_seed, "balance-member", class_index);
    let train_bin = balance(&relabeled, balance_sigma, member_seed)?;
    let test_bin = EncodedDataset::new(
        test_data.rows.clone(),
        test_data.row_len,
        one_vs_rest_labels(&test_data.labels, class),
        test_data.kind,
    )?;
    train::train(template, &train_bin, &test_bin, cfg, master_seed, class_index, clock)
}

/// Raw decision value of every member for one encoded row.
pub fn ensemble_raw(
    template: &CircuitTemplate,
    model: &EnsembleModel,
    row: &[f64],
    mode: MeasurementMode,
) -> Result<Vec<f64>> {
    let layout = ParamLayout::of(template);
    let mut raws = Vec::with_capacity(model.members.len());
    for params in &model.members {
        let binding = bind_params(template, params, row)?;
        let g = template.bind_and_run(&binding.features, &binding.theta, mode)?;
        raws.push(g + output_bias(&layout, params));
    }
    Ok(raws)
}

/// Argmax over member responses; ties go to the earliest (lowest) class id.
pub fn argmax_class(class_ids: &[i32], raws: &[f64]) -> Result<i32> {
    if class_ids.is_empty() || class_ids.len() != raws.len() {
        return Err(invalid("class ids and responses must align and be non-empty"));
    }
    let mut best = 0;
    for k in 1..raws.len() {
        if raws[k] > raws[best] {
            best = k;
        }
    }
    Ok(class_ids[best])
}

/// Predicted class for one encoded row.
pub fn ensemble_classify(
    template: &CircuitTemplate,
    model: &EnsembleModel,
    row: &[f64],
    mode: MeasurementMode,
) -> Result<i32> {
    let raws = ensemble_raw(template, model, row, mode)?;
    argmax_class(&model.class_ids, &raws)
}

/// Predicted classes for a whole encoded dataset.
pub fn ensemble_predictions(
    template: &CircuitTemplate,
    model: &EnsembleModel,
    data: &EncodedDataset,
    mode: MeasurementMode,
) -> Result<Vec<i32>> {
    (0..data.len())
        .map(|r| ensemble_classify(template, model, data.row(r), mode))
        .collect()
}

/// Fraction of rows whose predicted class matches the label.
pub fn ensemble_accuracy(
    template: &CircuitTemplate,
    model: &EnsembleModel,
    data: &EncodedDataset,
    mode: MeasurementMode,
) -> Result<f64> {
    let predictions = ensemble_predictions(template, model, data, mode)?;
    let hits = predictions
        .iter()
        .zip(&data.labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(hits as f64 / data.len().max(1) as f64)
}

/// Confusion counts: rows are true classes, columns predicted classes, both
/// in `class_ids` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Confusion {
    pub class_ids: Vec<i32>,
    pub counts: Vec<Vec<usize>>,
}

impl Confusion {
    /// Row-normalized percentages (each true-class row sums to 100; an
    /// absent class yields a zero row).
    pub fn percent(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 })
                    .collect()
            })
            .collect()
    }

    /// Overall accuracy: trace over total.
    pub fn accuracy(&self) -> f64 {
        let total: usize = self.counts.iter().flatten().sum();
        if total == 0 {
            return 0.0;
        }
        let trace: usize = (0..self.class_ids.len()).map(|k| self.counts[k][k]).sum();
        trace as f64 / total as f64
    }
}

pub fn confusion_matrix(class_ids: &[i32], truth: &[i32], predicted: &[i32]) -> Result<Confusion> {
    if truth.len() != predicted.len() {
        return Err(crate::Error::Mismatch {
            what: "prediction count",
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let index_of = |label: i32| -> Result<usize> {
        class_ids
            .iter()
            .position(|&c| c == label)
            .ok_or_else(|| invalid(alloc::format!("label {label} is not a known class")))
    };
    let n = class_ids.len();
    let mut counts = alloc::vec![alloc::vec![0usize; n]; n];
    for (&t, &p) in truth.iter().zip(predicted) {
        counts[index_of(t)?][index_of(p)?] += 1;
    }
    Ok(Confusion { class_ids: class_ids.to_vec(), counts })
}
