//! Rayon-parallel drivers over the sequential library entry points.
//!
//! Seeds are derived per split and per ensemble member, so scheduling order
//! cannot influence results: each of these produces output bit-identical to
//! its sequential counterpart, only faster.

use crate::error::Result;
use quarc_core::dataset::LabeledDataset;
use quarc_core::multiclass::{
    confusion_matrix, encoded_class_ids, ensemble_accuracy, ensemble_predictions,
    train_ensemble_member, EnsembleModel, EnsembleOutcome,
};
use quarc_core::pipeline::{
    run_binary_split, split_and_encode, CrossValidation, EnsembleSplitRun, PipelineConfig,
};
use quarc_core::train::{Clock, TrainOutcome};
use rayon::prelude::*;

/// `run_ensemble_split` with members trained concurrently.
pub fn run_ensemble_split_parallel(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    split_index: u64,
    clock: &(dyn Clock + Sync),
) -> Result<EnsembleSplitRun> {
    let template = cfg.template()?;
    let encoded = split_and_encode(data, cfg, split_index)?;
    let seed = cfg.split_seed(split_index);
    let class_ids = encoded_class_ids(&encoded.train);
    if class_ids.len() < 2 {
        return Err(quarc_core::Error::InvalidArgument(
            "an ensemble needs at least two classes".into(),
        )
        .into());
    }
    let per_class: Vec<TrainOutcome> = class_ids
        .par_iter()
        .enumerate()
        .map(|(k, &class)| {
            train_ensemble_member(
                &template,
                &encoded.train,
                &encoded.test,
                &cfg.train,
                seed,
                k as u64,
                class,
                cfg.balance_sigma,
                clock,
            )
        })
        .collect::<quarc_core::Result<_>>()?;
    let members = per_class.iter().map(|o| o.params.clone()).collect();
    let outcome =
        EnsembleOutcome { model: EnsembleModel { class_ids, members }, per_class };

    let predictions =
        ensemble_predictions(&template, &outcome.model, &encoded.test, cfg.train.mode)?;
    let confusion =
        confusion_matrix(&outcome.model.class_ids, &encoded.test.labels, &predictions)?;
    let train_accuracy =
        ensemble_accuracy(&template, &outcome.model, &encoded.train, cfg.train.mode)?;
    let test_accuracy = confusion.accuracy();
    Ok(EnsembleSplitRun { split_index, encoded, outcome, confusion, train_accuracy, test_accuracy })
}

/// Cross-validation with splits (and members, for ensembles) in parallel.
pub fn cross_validate_parallel(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    splits: u64,
    ensemble: bool,
    clock: &(dyn Clock + Sync),
) -> Result<CrossValidation> {
    if splits == 0 {
        return Err(
            quarc_core::Error::InvalidArgument("cross-validation needs at least one split".into())
                .into(),
        );
    }
    let per_split: Vec<f64> = (0..splits)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            if ensemble {
                Ok(run_ensemble_split_parallel(data, cfg, s, clock)?.test_accuracy)
            } else {
                Ok(run_binary_split(data, cfg, s, clock)?.test_accuracy)
            }
        })
        .collect::<Result<_>>()?;
    let mean = per_split.iter().sum::<f64>() / per_split.len() as f64;
    Ok(CrossValidation { per_split, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use quarc_core::circuit::{ArchId, FSimParams};
    use quarc_core::dataset::SplitRatio;
    use quarc_core::encoding::FeatureSelector;
    use quarc_core::pipeline::run_ensemble_split;
    use quarc_core::train::{NullClock, TrainConfig};

    fn three_class_data() -> LabeledDataset {
        let names = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..36 {
            let class = i % 3;
            for f in 0..4 {
                features.push(class as f64 * 2.0 + ((i * 13 + f * 7) % 10) as f64 * 0.08);
            }
            labels.push(class);
        }
        LabeledDataset::new(names, features, labels, 4).unwrap()
    }

    fn cfg() -> PipelineConfig {
        PipelineConfig {
            arch: ArchId::SimpleB,
            fsim: FSimParams::default(),
            conv: None,
            selector: FeatureSelector::All,
            positive_class: None,
            ratio: SplitRatio::new(2, 1).unwrap(),
            train: TrainConfig {
                iterations: 4,
                batch_size: 12,
                learning_rate: 0.3,
                ..TrainConfig::default()
            },
            balance_sigma: 0.05,
            seed: 5,
        }
    }

    #[test]
    fn parallel_ensemble_matches_sequential_bit_for_bit() {
        let data = three_class_data();
        let cfg = cfg();
        let par = run_ensemble_split_parallel(&data, &cfg, 0, &NullClock).unwrap();
        let seq = run_ensemble_split(&data, &cfg, 0, &NullClock).unwrap();
        assert_eq!(par.outcome.model, seq.outcome.model);
        assert_eq!(par.confusion.counts, seq.confusion.counts);
        assert_eq!(par.test_accuracy, seq.test_accuracy);
        let histories_match = par
            .outcome
            .per_class
            .iter()
            .zip(&seq.outcome.per_class)
            .all(|(a, b)| a.history == b.history);
        assert!(histories_match);
    }

    #[test]
    fn parallel_crossval_matches_sequential_folds() {
        let data = three_class_data();
        let cfg = cfg();
        let par = cross_validate_parallel(&data, &cfg, 3, true, &NullClock).unwrap();
        for s in 0..3u64 {
            let solo = run_ensemble_split(&data, &cfg, s, &NullClock).unwrap();
            assert_eq!(par.per_split[s as usize], solo.test_accuracy, "split {s}");
        }
        assert!(cross_validate_parallel(&data, &cfg, 0, true, &NullClock).is_err());
    }
}
