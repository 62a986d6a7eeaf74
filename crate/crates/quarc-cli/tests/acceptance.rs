//! Acceptance gate: one test per published claim the artifact must
//! reproduce, each printing a single PASS or FAIL line with the measured
//! numbers (run with `-- --nocapture` to see them all).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use quarc_cli::config::{resolve, Overrides, RunConfig};
use quarc_cli::loaders::load;
use quarc_cli::parallel::{cross_validate_parallel, run_ensemble_split_parallel};
use quarc_core::analysis::{
    compare_one, hardware_time_estimate, harmonic_scan, robustness_sweep,
};
use quarc_core::circuit::{
    build_template, catalog_conv, catalog_entries, ArchId, CircuitTemplate, FSimParams,
};
use quarc_core::dataset::LabeledDataset;
use quarc_core::model::{init_params, EncodedDataset, EncodingKind, ParamLayout};
use quarc_core::pipeline::run_binary_split;
use quarc_core::rng;
use quarc_core::state::{GateOp, MeasurementMode, StateVector};
use quarc_core::train::{batch_cost, cost_and_grad, NullClock, TrainConfig};
use rand::RngCore;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

/// Preset configuration for one dataset, exactly as the CLI would resolve it
/// with no flags beyond `--dataset`.
fn preset(dataset: &str) -> RunConfig {
    let flags = Overrides { dataset: Some(dataset.into()), ..Overrides::default() };
    resolve("train", &flags).unwrap()
}

fn load_for(cfg: &RunConfig) -> LabeledDataset {
    load(cfg.dataset, &data_dir(), cfg.crop_col, cfg.parity_bits).unwrap()
}

/// Print the one-line verdict, then enforce it.
fn verdict(id: &str, ok: bool, detail: &str) {
    println!("criterion {id}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn template_for(arch: ArchId) -> CircuitTemplate {
    let conv = match arch {
        ArchId::ImageA => Some(catalog_conv(arch, 2, 1).unwrap()),
        ArchId::ImageB => Some(catalog_conv(arch, 2, 2).unwrap()),
        ArchId::ImageC => Some(catalog_conv(arch, 3, 2).unwrap()),
        _ => None,
    };
    build_template(arch, FSimParams::default(), conv).unwrap()
}

fn uniform(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

#[test]
fn criterion_01_parity_trains_to_perfect_accuracy() {
    let start = Instant::now();
    let cfg = preset("parity");
    assert!(cfg.iterations <= 200);
    let data = load_for(&cfg);
    let run = run_binary_split(&data, &cfg.pipeline().unwrap(), 0, &NullClock).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = run.train_accuracy == 1.0 && run.test_accuracy == 1.0 && secs < 60.0;
    verdict(
        "01",
        ok,
        &format!(
            "train {}, test {}, {} iterations, {secs:.1}s",
            run.train_accuracy, run.test_accuracy, cfg.iterations
        ),
    );
}

#[test]
fn criterion_02_cancer_cross_validation_lands_in_the_published_band() {
    let start = Instant::now();
    let cfg = preset("cancer");
    assert_eq!((cfg.ratio_train, cfg.ratio_test), (2, 1));
    assert_eq!(cfg.batch_size, 64);
    assert_eq!(cfg.splits, 6);
    let data = load_for(&cfg);
    let cv = cross_validate_parallel(&data, &cfg.pipeline().unwrap(), 6, false, &NullClock)
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (0.93..=0.98).contains(&cv.mean) && secs < 600.0;
    verdict("02", ok, &format!("mean test accuracy {:.4} over 6 splits, {secs:.1}s", cv.mean));
}

#[test]
fn criterion_03_wines_ensemble_meets_total_and_per_class_floors() {
    let cfg = preset("wines");
    assert!(cfg.iterations >= 10);
    assert_eq!(cfg.splits, 6);
    let data = load_for(&cfg);
    let pipeline = cfg.pipeline().unwrap();
    let mut totals = Vec::new();
    let mut weakest: f64 = 1.0;
    for s in 0..6 {
        let run = run_ensemble_split_parallel(&data, &pipeline, s, &NullClock).unwrap();
        totals.push(run.test_accuracy);
        for member in &run.outcome.per_class {
            weakest = weakest.min(member.history.last().unwrap().acc_test);
        }
    }
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    let ok = (0.90..=0.98).contains(&mean) && weakest >= 0.88;
    verdict(
        "03",
        ok,
        &format!("mean total accuracy {mean:.4}, weakest one-vs-rest member {weakest:.4}"),
    );
}

#[test]
fn criterion_04_digits_ensemble_meets_total_and_per_class_floors() {
    let start = Instant::now();
    let cfg = preset("mnist");
    assert_eq!(cfg.iterations, 100);
    assert_eq!(cfg.arch, ArchId::ImageC);
    assert_eq!((cfg.lrf, cfg.stride), (3, 2));
    let data = load_for(&cfg);
    let run = run_ensemble_split_parallel(&data, &cfg.pipeline().unwrap(), 0, &NullClock)
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert_eq!(run.outcome.model.class_ids.len(), 10);
    let weakest = run
        .outcome
        .per_class
        .iter()
        .map(|m| m.history.last().unwrap().acc_test)
        .fold(1.0f64, f64::min);
    let ok = run.test_accuracy >= 0.88 && weakest >= 0.90 && secs < 7200.0;
    verdict(
        "04",
        ok,
        &format!(
            "total accuracy {:.4}, weakest one-vs-rest member {weakest:.4}, {secs:.0}s",
            run.test_accuracy
        ),
    );
}

#[test]
fn criterion_05_architecture_table_counts_and_accuracy_ordering() {
    let entries = catalog_entries();
    let expected = [(248, 27), (92, 15), (164, 17), (244, 15), (376, 27)];
    let mut counts_ok = true;
    let mut counts = String::new();
    for (entry, (params, layers)) in entries.iter().zip(expected) {
        let conv = catalog_conv(entry.arch, entry.lrf, entry.stride).unwrap();
        let t = build_template(entry.arch, FSimParams::default(), Some(conv)).unwrap();
        counts_ok &=
            t.trainable_param_count() == params && t.layer_count() == layers;
        counts.push_str(&format!(
            " {}-{}x{}-s{}:{}p/{}l",
            entry.arch.name(),
            entry.lrf,
            entry.lrf,
            entry.stride,
            t.trainable_param_count(),
            t.layer_count()
        ));
    }

    let cfg = preset("mnist");
    let data = load_for(&cfg);
    let pipeline = cfg.pipeline().unwrap();
    // entries[0] is the large stride-1 model, entries[3] the default model.
    let big = compare_one(&data, &pipeline, entries[0], &NullClock).unwrap();
    let small = compare_one(&data, &pipeline, entries[3], &NullClock).unwrap();
    let bands_ok = (big.test_accuracy - 0.95).abs() <= 0.04
        && (small.test_accuracy - 0.90).abs() <= 0.04
        && big.test_accuracy > small.test_accuracy;
    verdict(
        "05",
        counts_ok && bands_ok,
        &format!(
            "counts{counts}; accuracy 2x2-s1 {:.4} > 3x3-s2 {:.4}",
            big.test_accuracy, small.test_accuracy
        ),
    );
}

#[test]
fn criterion_06_shift_rule_gradients_match_finite_differences() {
    let h = 1e-5;
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for arch in ArchId::ALL {
        let template = template_for(arch);
        let row_len = ParamLayout::of(&template).expected_row_len(&template);
        let mut drive = rng::stream(4242, arch.name());
        for draw in 0..20u64 {
            let rows: Vec<f64> = (0..row_len).map(|_| uniform(&mut drive, -1.0, 1.0)).collect();
            let labels = vec![if draw % 2 == 0 { 1 } else { -1 }];
            let kind =
                if arch.is_image() { EncodingKind::Patches } else { EncodingKind::Angles };
            let data = EncodedDataset::new(rows, row_len, labels, kind).unwrap();
            let mut params = init_params(&template, draw, 0);
            for p in params.iter_mut() {
                *p += uniform(&mut drive, -0.8, 0.8);
            }
            let cfg = TrainConfig { weight_decay: 0.1, ..TrainConfig::default() };
            let batch = [0usize];
            let mut salt = 0;
            let (_, grad) =
                cost_and_grad(&template, &params, &data, &batch, &cfg, &mut salt).unwrap();
            for _ in 0..3 {
                let i = (drive.next_u64() % params.len() as u64) as usize;
                let mut probe = params.clone();
                probe[i] = params[i] + h;
                let up = batch_cost(&template, &probe, &data, &batch, &cfg).unwrap();
                probe[i] = params[i] - h;
                let down = batch_cost(&template, &probe, &data, &batch, &cfg).unwrap();
                let fd = (up - down) / (2.0 * h);
                worst = worst.max((grad[i] - fd).abs());
                checked += 1;
            }
        }
    }
    let ok = worst < 1e-5;
    verdict(
        "06",
        ok,
        &format!(
            "{checked} components over {} architectures x 20 draws, worst |analytic - fd| = {worst:.2e}",
            ArchId::ALL.len()
        ),
    );
}

#[test]
fn criterion_07_every_circuit_angle_is_a_pure_first_harmonic() {
    let mut slots = 0usize;
    let mut worst: f64 = 0.0;
    for arch in ArchId::ALL {
        let template = template_for(arch);
        let mut drive = rng::stream(77, arch.name());
        let features: Vec<f64> =
            (0..template.feature_count()).map(|_| uniform(&mut drive, -1.0, 1.0)).collect();
        let theta: Vec<f64> =
            (0..template.weight_count()).map(|_| uniform(&mut drive, -2.0, 2.0)).collect();
        let fits =
            harmonic_scan(&template, &features, &theta, 16, MeasurementMode::Exact).unwrap();
        for f in &fits {
            worst = worst.max(f.fit.max_residual);
            slots += 1;
        }
    }
    let ok = worst < 1e-8;
    verdict("07", ok, &format!("{slots} angles scanned, worst residual {worst:.2e}"));
}

#[test]
fn criterion_08_entangler_detuning_leaves_accuracy_almost_unchanged() {
    let cfg = preset("cancer");
    let data = load_for(&cfg);
    let sweep = robustness_sweep(&data, &cfg.pipeline().unwrap(), 6, false, &NullClock).unwrap();
    let nominal = sweep.nominal.mean_test_accuracy;
    let worst = sweep
        .cells
        .iter()
        .map(|c| (c.mean_test_accuracy - nominal).abs())
        .fold(0.0f64, f64::max);
    let ok = sweep.cells.len() == 9 && worst <= 0.05;
    verdict(
        "08",
        ok,
        &format!("nominal {nominal:.4}, worst deviation over 3x3 grid {worst:.4}"),
    );
}

#[test]
fn criterion_09_hardware_time_projection_is_exact() {
    let t = hardware_time_estimate(15, 1000, 50, 1_450_000, 64, 100).unwrap();
    let grad_line = format!("t_grad = {} s", t.grad_us as f64 / 1e6);
    let ok = t.grad_us == 1_550_000
        && grad_line == "t_grad = 1.55 s"
        && t.per_sample_us == 3_000_000
        && t.iteration_us == 192_000_000
        && t.total_us == 19_200_000_000;
    verdict(
        "09",
        ok,
        &format!(
            "{grad_line}, iteration {} s, total {} s",
            t.iteration_us as f64 / 1e6,
            t.total_us as f64 / 1e6
        ),
    );
}

#[test]
fn criterion_10_runs_replay_byte_identically_from_their_snapshots() {
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-replay");
    let _ = fs::remove_dir_all(&tmp);
    fs::create_dir_all(&tmp).unwrap();
    let data = data_dir();
    let run = |args: &[&str]| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_quarc"))
            .args(args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    let artifacts = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };

    // Exact mode: an ensemble run replayed from its own snapshot.
    let first = tmp.join("first");
    let second = tmp.join("second");
    run(&[
        "train",
        "--dataset",
        "wines",
        "--data-dir",
        data.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    run(&[
        "train",
        "--config",
        first.join("resolved.cfg").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    let exact_ok = artifacts(&first) == artifacts(&second);

    // Shots mode: same master seed, same bytes.
    let sa = tmp.join("shots-a");
    let sb = tmp.join("shots-b");
    for out in [&sa, &sb] {
        run(&[
            "train",
            "--dataset",
            "parity",
            "--data-dir",
            data.to_str().unwrap(),
            "--shots",
            "128",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let shots_ok = artifacts(&sa) == artifacts(&sb);

    verdict(
        "10",
        exact_ok && shots_ok,
        &format!("exact replay identical: {exact_ok}, shots replay identical: {shots_ok}"),
    );
}

#[test]
fn criterion_11_simulator_unitarity_and_shot_statistics() {
    // Norm drift over random 100-gate programs.
    let mut drive = rng::stream(999, "acceptance-unitarity");
    let mut worst_norm: f64 = 0.0;
    for _ in 0..200 {
        let mut sv = StateVector::zero(4).unwrap();
        for _ in 0..100 {
            let qubit = (drive.next_u64() % 4) as usize;
            let angle = uniform(&mut drive, -3.0, 3.0);
            let gate = match drive.next_u64() % 3 {
                0 => GateOp::Rx { qubit, angle },
                1 => GateOp::Ry { qubit, angle },
                _ => GateOp::FSim {
                    a: qubit,
                    b: (qubit + 1) % 4,
                    theta: angle,
                    phi: uniform(&mut drive, -3.0, 3.0),
                },
            };
            sv.apply(&gate).unwrap();
        }
        let norm: f64 = sv.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        worst_norm = worst_norm.max((norm - 1.0).abs());
    }
    let norm_ok = worst_norm < 1e-10;

    // The entangler is unitary across a 5x5 grid of (theta, phi): the four
    // basis-state images must stay orthonormal.
    let pi = std::f64::consts::PI;
    let mut worst_gram: f64 = 0.0;
    for ti in 0..5 {
        for pj in 0..5 {
            let theta = pi * ti as f64 / 4.0;
            let phi = -pi + 2.0 * pi * pj as f64 / 4.0;
            let mut images = Vec::new();
            for basis in 0..4u32 {
                let mut sv = StateVector::zero(2).unwrap();
                // Rx(pi) flips a qubit up to a global phase, which cancels
                // in the Gram magnitudes.
                if basis & 1 != 0 {
                    sv.apply(&GateOp::Rx { qubit: 0, angle: pi }).unwrap();
                }
                if basis & 2 != 0 {
                    sv.apply(&GateOp::Rx { qubit: 1, angle: pi }).unwrap();
                }
                sv.apply(&GateOp::FSim { a: 0, b: 1, theta, phi }).unwrap();
                images.push(sv.amplitudes().to_vec());
            }
            for i in 0..4 {
                for j in 0..4 {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for (a, b) in images[i].iter().zip(&images[j]) {
                        let p = a.conj() * b;
                        re += p.re;
                        im += p.im;
                    }
                    let mag = (re * re + im * im).sqrt();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    worst_gram = worst_gram.max((mag - expected).abs());
                }
            }
        }
    }
    let gram_ok = worst_gram < 1e-12;

    // The identity setting really is the identity.
    let mut sv = StateVector::zero(2).unwrap();
    sv.apply(&GateOp::Ry { qubit: 0, angle: 0.7 }).unwrap();
    sv.apply(&GateOp::Rx { qubit: 1, angle: -1.3 }).unwrap();
    let before = sv.amplitudes().to_vec();
    sv.apply(&GateOp::FSim { a: 0, b: 1, theta: 0.0, phi: 0.0 }).unwrap();
    let identity_ok = sv
        .amplitudes()
        .iter()
        .zip(&before)
        .all(|(a, b)| (a - b).norm() < 1e-15);

    // Shot estimator spread matches sqrt((1 - g^2)/shots).
    let alpha = std::f64::consts::FRAC_PI_3; // g = cos(alpha) = 0.5
    let mut sv = StateVector::zero(1).unwrap();
    sv.apply(&GateOp::Ry { qubit: 0, angle: alpha }).unwrap();
    let g = sv.expect_z(0).unwrap();
    let shots = 1000u32;
    let trials = 1000u64;
    let estimates: Vec<f64> =
        (0..trials).map(|t| sv.sample_expect_z(0, shots, 31_000 + t).unwrap()).collect();
    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
        / (trials - 1) as f64;
    let sd = var.sqrt();
    let sd_theory = ((1.0 - g * g) / shots as f64).sqrt();
    let sd_ok = (sd - sd_theory).abs() / sd_theory < 0.20;
    let mean_ok = (mean - g).abs() < 4.0 * sd_theory / (trials as f64).sqrt();

    verdict(
        "11",
        norm_ok && gram_ok && identity_ok && sd_ok && mean_ok,
        &format!(
            "norm drift {worst_norm:.2e}, entangler gram error {worst_gram:.2e}, \
             shot sd {sd:.5} vs {sd_theory:.5}, shot mean {mean:.4} vs {g:.4}"
        ),
    );
}
