//! Subcommand implementations. Every command creates the output directory,
//! writes the resolved configuration snapshot first, then its CSV artifacts.

use crate::checkpoint::{Checkpoint, CheckpointEncoding, CheckpointModel};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::loaders::{self, DatasetKind};
use crate::parallel::{cross_validate_parallel, run_ensemble_split_parallel};
use crate::report;
use crate::timer::WallClock;
use quarc_core::analysis::{
    compare_one, hardware_time_estimate, harmonic_scan, landscape_2d, slice_1d, ArchComparisonRow,
    LandscapeConfig, SweepCell, SweepOutcome, SWEEP_PHIS, SWEEP_THETAS,
};
use quarc_core::circuit::{catalog_entries, FSimParams};
use quarc_core::dataset::LabeledDataset;
use quarc_core::model::EncodedDataset;
use quarc_core::multiclass::{confusion_matrix, ensemble_predictions, one_vs_rest_labels, EnsembleModel};
use quarc_core::pipeline::{encode_image, encode_tabular, run_binary_split, PipelineConfig};
use quarc_core::train::dataset_accuracy;
use rayon::prelude::*;
use std::path::Path;

fn prepare(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    report::write_file(&out.join("resolved.cfg"), &cfg.snapshot())
}

fn load_data(cfg: &RunConfig) -> Result<LabeledDataset> {
    loaders::load(cfg.dataset, &cfg.data_dir, cfg.crop_col, cfg.parity_bits)
}

fn is_ensemble(data: &LabeledDataset) -> bool {
    data.class_ids().len() > 2
}

/// Map labels to +-1 for one binary classifier.
fn binarize(data: &EncodedDataset, positive: Option<i32>) -> Result<EncodedDataset> {
    let labels = match positive {
        Some(p) => one_vs_rest_labels(&data.labels, p),
        None => {
            if data.labels.iter().any(|&l| l != 1 && l != -1) {
                return Err(CliError::config(
                    "labels are not +-1; set positive_class to pick the +1 class",
                ));
            }
            data.labels.clone()
        }
    };
    Ok(EncodedDataset::new(data.rows.clone(), data.row_len, labels, data.kind)?)
}

pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let data = load_data(cfg)?;
    let pipe = cfg.pipeline()?;
    let clock = WallClock::new();

    let (encoding, model) = if is_ensemble(&data) {
        let run = run_ensemble_split_parallel(&data, &pipe, 0, &clock)?;
        let mut metrics = vec![
            ("train_accuracy".to_string(), run.train_accuracy),
            ("test_accuracy".to_string(), run.test_accuracy),
        ];
        for (k, class) in run.outcome.model.class_ids.iter().enumerate() {
            let member = &run.outcome.per_class[k];
            report::write_file(
                &out.join(format!("history_class{class}.csv")),
                &report::history_csv(&member.history),
            )?;
            let acc = member.history.records.last().map_or(f64::NAN, |r| r.acc_test);
            metrics.push((format!("class_{class}_test_accuracy"), acc));
            println!("class {class}: one-vs-rest test accuracy = {acc}");
        }
        report::write_file(&out.join("metrics.csv"), &report::metrics_csv(&metrics))?;
        report::write_file(
            &out.join("confusion_counts.csv"),
            &report::confusion_counts_csv(&run.confusion),
        )?;
        report::write_file(
            &out.join("confusion_percent.csv"),
            &report::confusion_percent_csv(&run.confusion),
        )?;
        println!(
            "split 0: train accuracy = {}, test accuracy = {}",
            run.train_accuracy, run.test_accuracy
        );
        let model = CheckpointModel::Ensemble {
            class_ids: run.outcome.model.class_ids.clone(),
            members: run.outcome.model.members.clone(),
        };
        (encoding_of(cfg, &data, &run.encoded.encoder)?, model)
    } else {
        let run = run_binary_split(&data, &pipe, 0, &clock)?;
        report::write_file(&out.join("history.csv"), &report::history_csv(&run.outcome.history))?;
        let metrics = vec![
            ("train_accuracy".to_string(), run.train_accuracy),
            ("test_accuracy".to_string(), run.test_accuracy),
        ];
        report::write_file(&out.join("metrics.csv"), &report::metrics_csv(&metrics))?;
        println!(
            "split 0: train accuracy = {}, test accuracy = {}",
            run.train_accuracy, run.test_accuracy
        );
        let model = CheckpointModel::Binary {
            positive: cfg.positive_class,
            params: run.outcome.params.clone(),
        };
        (encoding_of(cfg, &data, &run.encoded.encoder)?, model)
    };

    let ck = Checkpoint {
        dataset: cfg.dataset.name().to_string(),
        arch: cfg.arch,
        fsim: cfg.fsim(),
        encoding,
        model,
    };
    ck.save(&out.join("checkpoint.txt"))?;
    println!("checkpoint written to {}", out.join("checkpoint.txt").display());
    Ok(())
}

/// The encoding block a checkpoint records for this run.
fn encoding_of(
    cfg: &RunConfig,
    data: &LabeledDataset,
    encoder: &Option<quarc_core::encoding::SimpleEncoder>,
) -> Result<CheckpointEncoding> {
    if cfg.arch.is_image() {
        let conv = cfg
            .conv()?
            .ok_or_else(|| CliError::config("image architecture without patch geometry"))?;
        Ok(CheckpointEncoding::Patches { conv })
    } else {
        let enc = encoder
            .as_ref()
            .ok_or_else(|| CliError::config("tabular run produced no standardizer"))?;
        let columns =
            enc.columns.iter().map(|&i| data.feature_names()[i].clone()).collect();
        Ok(CheckpointEncoding::Angles {
            columns,
            mean: enc.mean.clone(),
            std: enc.std.clone(),
        })
    }
}

pub fn cmd_eval(cfg: &RunConfig, out: &Path) -> Result<()> {
    if cfg.checkpoint.is_empty() {
        return Err(CliError::config("eval needs a checkpoint path"));
    }
    let ck = Checkpoint::load(Path::new(&cfg.checkpoint))?;
    // The checkpoint names the dataset it was trained on; evaluation always
    // runs against that corpus, loaded from the configured data directory.
    let kind = DatasetKind::parse(&ck.dataset).map_err(|_| {
        CliError::data(format!("checkpoint names unknown dataset {:?}", ck.dataset))
    })?;
    let mut cfg = cfg.clone();
    cfg.dataset = kind;
    prepare(&cfg, out)?;

    let data = load_data(&cfg)?;
    let template = quarc_core::circuit::build_template(
        ck.arch,
        ck.fsim,
        match &ck.encoding {
            CheckpointEncoding::Patches { conv } => Some(*conv),
            CheckpointEncoding::Angles { .. } => None,
        },
    )?;
    let encoded = match &ck.encoding {
        CheckpointEncoding::Patches { conv } => encode_image(&data, conv)?,
        CheckpointEncoding::Angles { .. } => {
            let enc = ck.encoder_for(&data)?.expect("angles encoding carries a standardizer");
            encode_tabular(&data, &enc)?
        }
    };
    let mode = cfg.mode()?;

    match &ck.model {
        CheckpointModel::Binary { positive, params } => {
            let bin = binarize(&encoded, *positive)?;
            let accuracy = dataset_accuracy(&template, params, &bin, mode)?;
            let metrics = vec![
                ("accuracy".to_string(), accuracy),
                ("samples".to_string(), bin.len() as f64),
            ];
            report::write_file(&out.join("metrics.csv"), &report::metrics_csv(&metrics))?;
            println!("accuracy = {accuracy} over {} samples", bin.len());
        }
        CheckpointModel::Ensemble { class_ids, members } => {
            let model =
                EnsembleModel { class_ids: class_ids.clone(), members: members.clone() };
            let predictions = ensemble_predictions(&template, &model, &encoded, mode)?;
            let confusion = confusion_matrix(class_ids, &encoded.labels, &predictions)?;
            let accuracy = confusion.accuracy();
            let metrics = vec![
                ("accuracy".to_string(), accuracy),
                ("samples".to_string(), encoded.len() as f64),
            ];
            report::write_file(&out.join("metrics.csv"), &report::metrics_csv(&metrics))?;
            report::write_file(
                &out.join("confusion_counts.csv"),
                &report::confusion_counts_csv(&confusion),
            )?;
            report::write_file(
                &out.join("confusion_percent.csv"),
                &report::confusion_percent_csv(&confusion),
            )?;
            println!("accuracy = {accuracy} over {} samples", encoded.len());
        }
    }
    Ok(())
}

pub fn cmd_crossval(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let data = load_data(cfg)?;
    let pipe = cfg.pipeline()?;
    let clock = WallClock::new();
    let cv = cross_validate_parallel(&data, &pipe, cfg.splits, is_ensemble(&data), &clock)?;
    report::write_file(&out.join("crossval.csv"), &report::crossval_csv(&cv))?;
    for (i, acc) in cv.per_split.iter().enumerate() {
        println!("split {i}: test accuracy = {acc}");
    }
    println!("mean test accuracy = {}", cv.mean);
    Ok(())
}

pub fn cmd_landscape(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let data = load_data(cfg)?;
    let pipe = cfg.pipeline()?;
    let clock = WallClock::new();
    let template = pipe.template()?;
    let train_cfg = cfg.train_config()?;

    // Train on split 0, then scan the cost surface around the found optimum
    // on the test side.
    let (params, test_bin) = if is_ensemble(&data) {
        let run = run_ensemble_split_parallel(&data, &pipe, 0, &clock)?;
        let class_ids = &run.outcome.model.class_ids;
        let class = cfg.landscape_class.unwrap_or(class_ids[0]);
        let k = class_ids.iter().position(|&c| c == class).ok_or_else(|| {
            CliError::config(format!("landscape_class {class} is not a dataset class"))
        })?;
        let test = binarize(&run.encoded.test, Some(class))?;
        (run.outcome.model.members[k].clone(), test)
    } else {
        let run = run_binary_split(&data, &pipe, 0, &clock)?;
        // run_binary_split already binarized the encoded split.
        (run.outcome.params.clone(), run.encoded.test)
    };

    let lc = LandscapeConfig {
        seed: cfg.landscape_seed,
        half_range: cfg.landscape_half_range,
        grid: cfg.landscape_grid,
    };
    let landscape = landscape_2d(&template, &params, &test_bin, &train_cfg, &lc)?;
    report::write_file(&out.join("landscape.csv"), &report::landscape_csv(&landscape))?;
    report::write_file(&out.join("minima.csv"), &report::minima_csv(&landscape))?;
    let slice = slice_1d(&template, &params, &test_bin, &train_cfg, &lc)?;
    report::write_file(&out.join("slice.csv"), &report::slice_csv(&slice))?;
    println!("local minima found: {}", landscape.minima.len());
    for m in &landscape.minima {
        println!("minimum at ({}, {}): cost = {}, accuracy = {}", m.alpha, m.beta, m.cost, m.accuracy);
    }
    Ok(())
}

pub fn cmd_scan(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let pipe = cfg.pipeline()?;
    let template = pipe.template()?;
    // Probe each angle with everything else parked at zero.
    let features = vec![0.0; template.feature_count()];
    let theta = vec![0.0; template.weight_count()];
    let fits = harmonic_scan(&template, &features, &theta, cfg.scan_points, cfg.mode()?)?;
    report::write_file(&out.join("scan.csv"), &report::scan_csv(&fits))?;
    let worst = fits.iter().map(|f| f.fit.max_residual).fold(0.0f64, f64::max);
    println!("scanned {} angles, max harmonic residual = {worst}", fits.len());
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let data = load_data(cfg)?;
    let pipe = cfg.pipeline()?;
    let clock = WallClock::new();
    let ensemble = is_ensemble(&data);

    let mean_at = |fsim: FSimParams| -> Result<f64> {
        let cell = PipelineConfig { fsim, ..pipe.clone() };
        Ok(cross_validate_parallel(&data, &cell, cfg.splits, ensemble, &clock)?.mean)
    };
    let nominal = SweepCell {
        theta: pipe.fsim.theta,
        phi: pipe.fsim.phi,
        mean_test_accuracy: mean_at(pipe.fsim)?,
    };
    let grid: Vec<FSimParams> = SWEEP_THETAS
        .iter()
        .flat_map(|&theta| SWEEP_PHIS.iter().map(move |&phi| FSimParams { theta, phi }))
        .collect();
    let cells: Vec<SweepCell> = grid
        .par_iter()
        .map(|&fsim| -> Result<SweepCell> {
            Ok(SweepCell {
                theta: fsim.theta,
                phi: fsim.phi,
                mean_test_accuracy: mean_at(fsim)?,
            })
        })
        .collect::<Result<_>>()?;
    let sweep = SweepOutcome { nominal, cells };
    report::write_file(&out.join("sweep.csv"), &report::sweep_csv(&sweep))?;
    println!(
        "nominal (theta = {}, phi = {}): mean accuracy = {}",
        sweep.nominal.theta, sweep.nominal.phi, sweep.nominal.mean_test_accuracy
    );
    for c in &sweep.cells {
        println!("theta = {}, phi = {}: mean accuracy = {}", c.theta, c.phi, c.mean_test_accuracy);
    }
    Ok(())
}

pub fn cmd_arch_compare(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let data = load_data(cfg)?;
    if !is_ensemble(&data) {
        return Err(CliError::config(
            "arch-compare runs the image catalog and needs a multiclass image dataset",
        ));
    }
    let pipe = cfg.pipeline()?;
    let clock = WallClock::new();
    let rows: Vec<ArchComparisonRow> = catalog_entries()
        .par_iter()
        .map(|&entry| -> Result<ArchComparisonRow> {
            Ok(compare_one(&data, &pipe, entry, &clock)?)
        })
        .collect::<Result<_>>()?;
    report::write_file(&out.join("arch_compare.csv"), &report::arch_compare_csv(&rows))?;
    for r in &rows {
        println!(
            "{} {}x{} stride {}: params = {}, layers = {}, accuracy = {}",
            r.entry.arch.name(),
            r.entry.lrf,
            r.entry.lrf,
            r.entry.stride,
            r.params,
            r.layers,
            r.test_accuracy
        );
    }
    Ok(())
}

pub fn cmd_estimate_time(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let t = hardware_time_estimate(
        cfg.est_slots,
        cfg.est_shots,
        cfg.est_t_rep_us,
        cfg.est_rewrite_us,
        cfg.est_batch,
        cfg.est_iterations,
    )?;
    report::write_file(&out.join("estimate.csv"), &report::estimate_csv(&t))?;
    println!("t_grad = {} s", t.grad_us as f64 / 1e6);
    println!("per sample = {} s", t.per_sample_us as f64 / 1e6);
    println!("iteration = {} s", t.iteration_us as f64 / 1e6);
    println!("total = {} s", t.total_us as f64 / 1e6);
    Ok(())
}

pub fn cmd_gen_parity(cfg: &RunConfig, out: &Path) -> Result<()> {
    prepare(cfg, out)?;
    let data = quarc_core::dataset::gen_parity(cfg.parity_bits)?;
    let path = out.join("parity.csv");
    report::write_file(&path, &report::parity_csv(&data))?;
    println!("wrote {} rows to {}", data.len(), path.display());
    Ok(())
}
