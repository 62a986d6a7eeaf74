//! End-to-end runs: split, fit the encoder on the training side, encode,
//! train, evaluate.
//!
//! Everything here is sequential and deterministic; callers that want
//! parallelism map the per-split entry points (`run_binary_split`,
//! `run_ensemble_split`) over split indices themselves. Per-split seeds are
//! derived from the master seed and the split index, so a split computes the
//! same result whether it runs alone, in a fold loop, or concurrently.

use crate::circuit::{build_template, ArchId, CircuitTemplate, FSimParams};
use crate::dataset::{stratified_split, LabeledDataset, SplitIndices, SplitRatio};
use crate::encoding::{pad_and_tile, ConvSpec, FeatureSelector, SimpleEncoder};
use crate::error::invalid;
use crate::model::{EncodedDataset, EncodingKind};
use crate::multiclass::{
    confusion_matrix, ensemble_accuracy, ensemble_predictions, train_ensemble, Confusion,
    EnsembleOutcome,
};
use crate::rng;
use crate::train::{dataset_accuracy, train, Clock, TrainConfig, TrainOutcome};
use crate::Result;
use alloc::vec::Vec;

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub arch: ArchId,
    pub fsim: FSimParams,
    /// Patch geometry (image architectures only).
    pub conv: Option<ConvSpec>,
    /// Column selection for tabular data (ignored by image architectures).
    pub selector: FeatureSelector,
    /// Class mapped to +1 for binary runs; every other label maps to -1.
    pub positive_class: Option<i32>,
    pub ratio: SplitRatio,
    pub train: TrainConfig,
    /// Jitter used when an ensemble balances its training split.
    pub balance_sigma: f64,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn template(&self) -> Result<CircuitTemplate> {
        build_template(self.arch, self.fsim, if self.arch.is_image() { self.conv } else { None })
    }

    /// Seed scoped to one split so folds are independent streams.
    pub fn split_seed(&self, split_index: u64) -> u64 {
        rng::derive_seed_indexed(self.seed, "run", split_index)
    }
}

/// Split plus both encoded sides, labels still in their original classes.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSplit {
    pub split: SplitIndices,
    pub encoder: Option<SimpleEncoder>,
    pub train: EncodedDataset,
    pub test: EncodedDataset,
}

/// Stratify on the raw labels, then encode each side. Tabular data fits the
/// standardizer on the training rows only; images tile into patches.
pub fn split_and_encode(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    split_index: u64,
) -> Result<EncodedSplit> {
    let split = stratified_split(data, cfg.ratio, cfg.seed, split_index)?;
    let train_raw = data.subset(&split.train)?;
    let test_raw = data.subset(&split.test)?;
    if cfg.arch.is_image() {
        let spec = cfg.conv.ok_or_else(|| invalid("image runs need a patch geometry"))?;
        Ok(EncodedSplit {
            split,
            encoder: None,
            train: encode_image(&train_raw, &spec)?,
            test: encode_image(&test_raw, &spec)?,
        })
    } else {
        let columns = cfg.selector.resolve(&train_raw)?;
        let encoder = SimpleEncoder::fit(&train_raw, columns)?;
        Ok(EncodedSplit {
            split,
            train: encode_tabular(&train_raw, &encoder)?,
            test: encode_tabular(&test_raw, &encoder)?,
            encoder: Some(encoder),
        })
    }
}

pub fn encode_tabular(data: &LabeledDataset, encoder: &SimpleEncoder) -> Result<EncodedDataset> {
    let mut rows = Vec::with_capacity(data.len() * encoder.columns.len());
    for r in 0..data.len() {
        rows.extend_from_slice(&encoder.encode(data.row(r))?);
    }
    EncodedDataset::new(rows, encoder.columns.len(), data.labels().to_vec(), EncodingKind::Angles)
}

pub fn encode_image(data: &LabeledDataset, spec: &ConvSpec) -> Result<EncodedDataset> {
    let row_len = spec.patch_count() * spec.patch_len();
    let mut rows = Vec::with_capacity(data.len() * row_len);
    for r in 0..data.len() {
        rows.extend_from_slice(&pad_and_tile(data.row(r), spec)?);
    }
    EncodedDataset::new(rows, row_len, data.labels().to_vec(), EncodingKind::Patches)
}

fn to_binary(data: &EncodedDataset, positive: Option<i32>) -> Result<EncodedDataset> {
    let labels = match positive {
        Some(p) => crate::multiclass::one_vs_rest_labels(&data.labels, p),
        None => {
            if data.labels.iter().any(|&l| l != 1 && l != -1) {
                return Err(invalid(
                    "binary run on non-binary labels: set a positive class",
                ));
            }
            data.labels.clone()
        }
    };
    EncodedDataset::new(data.rows.clone(), data.row_len, labels, data.kind)
}

/// One trained binary classifier on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySplitRun {
    pub split_index: u64,
    pub encoded: EncodedSplit,
    pub outcome: TrainOutcome,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

pub fn run_binary_split(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    split_index: u64,
    clock: &dyn Clock,
) -> Result<BinarySplitRun> {
    let template = cfg.template()?;
    let mut encoded = split_and_encode(data, cfg, split_index)?;
    encoded.train = to_binary(&encoded.train, cfg.positive_class)?;
    encoded.test = to_binary(&encoded.test, cfg.positive_class)?;
    let outcome = train(
        &template,
        &encoded.train,
        &encoded.test,
        &cfg.train,
        cfg.split_seed(split_index),
        0,
        clock,
    )?;
    let train_accuracy =
        dataset_accuracy(&template, &outcome.params, &encoded.train, cfg.train.mode)?;
    let test_accuracy =
        dataset_accuracy(&template, &outcome.params, &encoded.test, cfg.train.mode)?;
    Ok(BinarySplitRun { split_index, encoded, outcome, train_accuracy, test_accuracy })
}

/// One trained ensemble on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSplitRun {
    pub split_index: u64,
    pub encoded: EncodedSplit,
    pub outcome: EnsembleOutcome,
    pub confusion: Confusion,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

pub fn run_ensemble_split(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    split_index: u64,
    clock: &dyn Clock,
) -> Result<EnsembleSplitRun> {
    let template = cfg.template()?;
    let encoded = split_and_encode(data, cfg, split_index)?;
    let outcome = train_ensemble(
        &template,
        &encoded.train,
        &encoded.test,
        &cfg.train,
        cfg.split_seed(split_index),
        cfg.balance_sigma,
        clock,
    )?;
    let predictions =
        ensemble_predictions(&template, &outcome.model, &encoded.test, cfg.train.mode)?;
    let confusion = confusion_matrix(&outcome.model.class_ids, &encoded.test.labels, &predictions)?;
    let train_accuracy =
        ensemble_accuracy(&template, &outcome.model, &encoded.train, cfg.train.mode)?;
    let test_accuracy = confusion.accuracy();
    Ok(EnsembleSplitRun { split_index, encoded, outcome, confusion, train_accuracy, test_accuracy })
}

/// Test accuracies across `splits` independent stratified splits, plus mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub per_split: Vec<f64>,
    pub mean: f64,
}

impl CrossValidation {
    fn from(per_split: Vec<f64>) -> Self {
        let mean = per_split.iter().sum::<f64>() / per_split.len().max(1) as f64;
        CrossValidation { per_split, mean }
    }
}

pub fn cross_validate_binary(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    splits: u64,
    clock: &dyn Clock,
) -> Result<CrossValidation> {
    if splits == 0 {
        return Err(invalid("cross-validation needs at least one split"));
    }
    let mut per_split = Vec::with_capacity(splits as usize);
    for s in 0..splits {
        per_split.push(run_binary_split(data, cfg, s, clock)?.test_accuracy);
    }
    Ok(CrossValidation::from(per_split))
}

pub fn cross_validate_ensemble(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    splits: u64,
    clock: &dyn Clock,
) -> Result<CrossValidation> {
    if splits == 0 {
        return Err(invalid("cross-validation needs at least one split"));
    }
    let mut per_split = Vec::with_capacity(splits as usize);
    for s in 0..splits {
        per_split.push(run_ensemble_split(data, cfg, s, clock)?.test_accuracy);
    }
    Ok(CrossValidation::from(per_split))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_parity;
    use crate::train::NullClock;
    use core::f64::consts::FRAC_PI_4;

    fn parity_cfg() -> PipelineConfig {
        PipelineConfig {
            arch: ArchId::SimpleA,
            fsim: FSimParams::default(),
            conv: None,
            selector: FeatureSelector::All,
            positive_class: None,
            ratio: SplitRatio::new(1, 1).unwrap(),
            train: TrainConfig {
                iterations: 5,
                batch_size: 8,
                learning_rate: 0.5,
                ..TrainConfig::default()
            },
            balance_sigma: 0.05,
            seed: 11,
        }
    }

    #[test]
    fn parity_bits_encode_to_quarter_turns() {
        let data = gen_parity(4).unwrap();
        let cfg = parity_cfg();
        let enc = split_and_encode(&data, &cfg, 0).unwrap();
        assert_eq!(enc.train.row_len, 4);
        assert_eq!(enc.train.len() + enc.test.len(), 16);
        // Bits are balanced per column across the full set; the split keeps
        // them near 0.5 mean, so angles are close to +-pi/4.
        for r in 0..enc.train.len() {
            for &a in enc.train.row(r) {
                assert!(
                    (a.abs() - FRAC_PI_4).abs() < 0.35,
                    "angle {a} strayed far from +-pi/4"
                );
            }
        }
        // Encoder statistics come from the train rows only.
        let encoder = enc.encoder.as_ref().unwrap();
        let train_raw = data.subset(&enc.split.train).unwrap();
        let n = train_raw.len() as f64;
        let mean0: f64 = (0..train_raw.len()).map(|r| train_raw.row(r)[0]).sum::<f64>() / n;
        assert!((encoder.mean[0] - mean0).abs() < 1e-15);
    }

    #[test]
    fn binary_split_runs_end_to_end_and_reproduces() {
        let data = gen_parity(4).unwrap();
        let cfg = parity_cfg();
        let run = run_binary_split(&data, &cfg, 0, &NullClock).unwrap();
        assert_eq!(run.outcome.history.records.len(), 5);
        assert!(run.train_accuracy >= 0.0 && run.train_accuracy <= 1.0);
        let again = run_binary_split(&data, &cfg, 0, &NullClock).unwrap();
        assert_eq!(run.outcome.params, again.outcome.params);
        assert_eq!(run.test_accuracy, again.test_accuracy);
        // A different split index trains on different data.
        let other = run_binary_split(&data, &cfg, 1, &NullClock).unwrap();
        assert_ne!(run.encoded.split, other.encoded.split);
    }

    #[test]
    fn binary_run_requires_signed_labels_or_a_positive_class() {
        // Parity labels are already +-1: fine with no positive class.
        let data = gen_parity(4).unwrap();
        assert!(run_binary_split(&data, &parity_cfg(), 0, &NullClock).is_ok());
        // A three-bit table cannot feed the four encoding angles.
        assert!(run_binary_split(&gen_parity(3).unwrap(), &parity_cfg(), 0, &NullClock).is_err());
        // 0/1/2 labels need an explicit positive class.
        let multi = LabeledDataset::new(
            alloc::vec!["a".into(), "b".into(), "c".into(), "d".into()],
            (0..24 * 4).map(|i| (i % 5) as f64).collect(),
            (0..24).map(|i| i % 3).collect(),
            4,
        )
        .unwrap();
        let cfg = PipelineConfig { ratio: SplitRatio::new(2, 1).unwrap(), ..parity_cfg() };
        assert!(run_binary_split(&multi, &cfg, 0, &NullClock).is_err());
        let cfg = PipelineConfig { positive_class: Some(2), ..cfg };
        let run = run_binary_split(&multi, &cfg, 0, &NullClock).unwrap();
        assert!(run.encoded.train.labels.iter().all(|&l| l == 1 || l == -1));
    }

    #[test]
    fn ensemble_split_reports_a_consistent_confusion() {
        let multi = LabeledDataset::new(
            alloc::vec!["a".into(), "b".into(), "c".into(), "d".into()],
            (0..30 * 4)
                .map(|i| ((i * 7 + (i / 4) % 3 * 31) % 11) as f64 * 0.1)
                .collect(),
            (0..30).map(|i| i % 3).collect(),
            4,
        )
        .unwrap();
        let cfg = PipelineConfig {
            ratio: SplitRatio::new(2, 1).unwrap(),
            train: TrainConfig {
                iterations: 3,
                batch_size: 10,
                ..TrainConfig::default()
            },
            ..parity_cfg()
        };
        let run = run_ensemble_split(&multi, &cfg, 0, &NullClock).unwrap();
        assert_eq!(run.outcome.model.class_ids, alloc::vec![0, 1, 2]);
        let total: usize = run.confusion.counts.iter().flatten().sum();
        assert_eq!(total, run.encoded.test.len());
        assert!((run.confusion.accuracy() - run.test_accuracy).abs() < 1e-15);
    }

    #[test]
    fn cross_validation_averages_split_accuracies() {
        let data = gen_parity(4).unwrap();
        let cfg = parity_cfg();
        let cv = cross_validate_binary(&data, &cfg, 3, &NullClock).unwrap();
        assert_eq!(cv.per_split.len(), 3);
        let mean = cv.per_split.iter().sum::<f64>() / 3.0;
        assert!((cv.mean - mean).abs() < 1e-15);
        // Fold results equal their standalone runs (parallel-safe seeds).
        for (s, &acc) in cv.per_split.iter().enumerate() {
            let solo = run_binary_split(&data, &cfg, s as u64, &NullClock).unwrap();
            assert_eq!(acc, solo.test_accuracy, "split {s}");
        }
        assert!(cross_validate_binary(&data, &cfg, 0, &NullClock).is_err());
    }
}
