//! Run configuration: a flat key=value model with four precedence layers.
//!
//! Resolution order is defaults, then the dataset preset, then the config
//! file, then command-line flags. Every command writes the fully resolved
//! configuration next to its outputs as `resolved.cfg`; feeding that file
//! back through `--config` reproduces the run, because parsing a snapshot
//! and re-emitting it is a fixed point (floats are printed in shortest
//! round-trip form).

use crate::error::{CliError, Result};
use crate::loaders::DatasetKind;
use quarc_core::circuit::{catalog_conv, ArchId, FSimParams};
use quarc_core::dataset::SplitRatio;
use quarc_core::encoding::{ConvSpec, FeatureSelector};
use quarc_core::pipeline::PipelineConfig;
use quarc_core::state::MeasurementMode;
use quarc_core::train::{CostKind, TrainConfig};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Fully resolved settings for one command invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Subcommand that produced the snapshot (informational on replay).
    pub command: String,
    pub dataset: DatasetKind,
    pub data_dir: PathBuf,
    /// Checkpoint consumed by `eval` (empty when unused).
    pub checkpoint: String,
    pub parity_bits: usize,
    /// Column of the 8x8 source images dropped to reach 8x7.
    pub crop_col: usize,
    pub arch: ArchId,
    pub fsim_theta: f64,
    pub fsim_phi: f64,
    /// Square patch side for image architectures.
    pub lrf: usize,
    pub stride: usize,
    /// Feature selection in text form: "all", "named:a,b,c", or "stump:k".
    pub selector: String,
    pub positive_class: Option<i32>,
    pub ratio_train: u32,
    pub ratio_test: u32,
    pub splits: u64,
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub cost_scale: f64,
    pub weight_decay: f64,
    pub cost: CostKind,
    /// 0 = exact expectations; otherwise per-evaluation shot count.
    pub shots: u64,
    pub shot_seed: u64,
    pub balance_sigma: f64,
    pub seed: u64,
    pub threads: usize,
    pub landscape_seed: u64,
    pub landscape_half_range: f64,
    pub landscape_grid: usize,
    /// Ensemble member whose parameters the landscape scans (default: first).
    pub landscape_class: Option<i32>,
    pub scan_points: usize,
    pub est_slots: usize,
    pub est_shots: u64,
    pub est_t_rep_us: u64,
    pub est_rewrite_us: u64,
    pub est_batch: usize,
    pub est_iterations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            dataset: DatasetKind::Parity,
            data_dir: PathBuf::from("data"),
            checkpoint: String::new(),
            parity_bits: 4,
            crop_col: 7,
            arch: ArchId::SimpleA,
            fsim_theta: core::f64::consts::FRAC_PI_2,
            fsim_phi: 0.1 * core::f64::consts::PI,
            lrf: 3,
            stride: 2,
            selector: "all".into(),
            positive_class: None,
            ratio_train: 1,
            ratio_test: 1,
            splits: 1,
            iterations: 100,
            batch_size: 64,
            learning_rate: 0.1,
            momentum: 0.9,
            cost_scale: 10.0,
            weight_decay: 0.0,
            cost: CostKind::Log,
            shots: 0,
            shot_seed: 0,
            balance_sigma: 0.05,
            seed: 5,
            threads: 0,
            landscape_seed: 0,
            landscape_half_range: core::f64::consts::PI,
            landscape_grid: 41,
            landscape_class: None,
            scan_points: 64,
            est_slots: 15,
            est_shots: 1000,
            est_t_rep_us: 50,
            est_rewrite_us: 1_450_000,
            est_batch: 64,
            est_iterations: 100,
        }
    }
}

/// Flag overrides accepted by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub shots: Option<u64>,
    pub arch: Option<String>,
    pub dataset: Option<String>,
}

impl RunConfig {
    /// Per-dataset defaults: architecture, feature selection, split shape,
    /// and optimizer settings tuned for that corpus.
    fn apply_preset(&mut self, kind: DatasetKind) {
        self.dataset = kind;
        match kind {
            DatasetKind::Parity => {
                self.arch = ArchId::SimpleA;
                self.selector = "all".into();
                self.positive_class = None;
                self.ratio_train = 1;
                self.ratio_test = 1;
                self.splits = 1;
                self.iterations = 150;
                self.batch_size = 8;
                self.learning_rate = 0.1;
                self.weight_decay = 0.0;
            }
            DatasetKind::Cancer => {
                self.arch = ArchId::SimpleA;
                self.selector =
                    "named:worst radius,worst concave points,worst texture,mean texture".into();
                self.positive_class = Some(1);
                self.ratio_train = 2;
                self.ratio_test = 1;
                self.splits = 6;
                self.iterations = 25;
                self.batch_size = 64;
                self.learning_rate = 0.1;
                self.weight_decay = 0.0;
            }
            DatasetKind::Wines => {
                self.arch = ArchId::SimpleA;
                self.selector = "named:proline,flavanoids,color_intensity,alcohol".into();
                self.positive_class = None;
                self.ratio_train = 2;
                self.ratio_test = 1;
                self.splits = 6;
                self.iterations = 25;
                self.batch_size = 64;
                self.learning_rate = 0.1;
                self.weight_decay = 0.0;
            }
            DatasetKind::Mnist => {
                self.arch = ArchId::ImageC;
                self.lrf = 3;
                self.stride = 2;
                self.positive_class = None;
                self.ratio_train = 2;
                self.ratio_test = 1;
                self.splits = 1;
                self.iterations = 100;
                self.batch_size = 64;
                self.learning_rate = 0.02;
                self.weight_decay = 0.02;
            }
        }
    }

    /// Assign one key from its text form.
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                CliError::config(format!("key {key}: cannot parse {value:?}"))
            })
        }
        match key {
            "command" => self.command = value.to_string(),
            "dataset" => self.dataset = DatasetKind::parse(value)?,
            "data_dir" => self.data_dir = PathBuf::from(value),
            "checkpoint" => self.checkpoint = value.to_string(),
            "parity_bits" => self.parity_bits = num(key, value)?,
            "crop_col" => self.crop_col = num(key, value)?,
            "arch" => self.arch = ArchId::parse(value)?,
            "fsim_theta" => self.fsim_theta = num(key, value)?,
            "fsim_phi" => self.fsim_phi = num(key, value)?,
            "lrf" => self.lrf = num(key, value)?,
            "stride" => self.stride = num(key, value)?,
            "selector" => {
                parse_selector(value)?;
                self.selector = value.to_string();
            }
            "positive_class" => {
                self.positive_class =
                    if value == "none" { None } else { Some(num(key, value)?) };
            }
            "ratio_train" => self.ratio_train = num(key, value)?,
            "ratio_test" => self.ratio_test = num(key, value)?,
            "splits" => self.splits = num(key, value)?,
            "iterations" => self.iterations = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "momentum" => self.momentum = num(key, value)?,
            "cost_scale" => self.cost_scale = num(key, value)?,
            "weight_decay" => self.weight_decay = num(key, value)?,
            "cost" => {
                self.cost = match value {
                    "log" => CostKind::Log,
                    "quadratic" => CostKind::Quadratic,
                    other => {
                        return Err(CliError::config(format!(
                            "key cost: {other:?} is neither \"log\" nor \"quadratic\""
                        )))
                    }
                }
            }
            "shots" => self.shots = num(key, value)?,
            "shot_seed" => self.shot_seed = num(key, value)?,
            "balance_sigma" => self.balance_sigma = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "landscape_seed" => self.landscape_seed = num(key, value)?,
            "landscape_half_range" => self.landscape_half_range = num(key, value)?,
            "landscape_grid" => self.landscape_grid = num(key, value)?,
            "landscape_class" => {
                self.landscape_class =
                    if value == "none" { None } else { Some(num(key, value)?) };
            }
            "scan_points" => self.scan_points = num(key, value)?,
            "est_slots" => self.est_slots = num(key, value)?,
            "est_shots" => self.est_shots = num(key, value)?,
            "est_t_rep_us" => self.est_t_rep_us = num(key, value)?,
            "est_rewrite_us" => self.est_rewrite_us = num(key, value)?,
            "est_batch" => self.est_batch = num(key, value)?,
            "est_iterations" => self.est_iterations = num(key, value)?,
            other => {
                return Err(CliError::config(format!("unknown configuration key {other:?}")))
            }
        }
        Ok(())
    }

    /// The flat key=value snapshot, in fixed key order.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("command", self.command.clone());
        put("dataset", self.dataset.name().into());
        put("data_dir", self.data_dir.display().to_string());
        if !self.checkpoint.is_empty() {
            put("checkpoint", self.checkpoint.clone());
        }
        if self.dataset == DatasetKind::Parity {
            put("parity_bits", self.parity_bits.to_string());
        }
        if self.dataset == DatasetKind::Mnist {
            put("crop_col", self.crop_col.to_string());
        }
        put("arch", self.arch.name().into());
        put("fsim_theta", self.fsim_theta.to_string());
        put("fsim_phi", self.fsim_phi.to_string());
        if self.arch.is_image() {
            put("lrf", self.lrf.to_string());
            put("stride", self.stride.to_string());
        } else {
            put("selector", self.selector.clone());
        }
        put(
            "positive_class",
            self.positive_class.map_or("none".into(), |c| c.to_string()),
        );
        put("ratio_train", self.ratio_train.to_string());
        put("ratio_test", self.ratio_test.to_string());
        put("splits", self.splits.to_string());
        put("iterations", self.iterations.to_string());
        put("batch_size", self.batch_size.to_string());
        put("learning_rate", self.learning_rate.to_string());
        put("momentum", self.momentum.to_string());
        put("cost_scale", self.cost_scale.to_string());
        put("weight_decay", self.weight_decay.to_string());
        put(
            "cost",
            match self.cost {
                CostKind::Log => "log".into(),
                CostKind::Quadratic => "quadratic".into(),
            },
        );
        put("shots", self.shots.to_string());
        put("shot_seed", self.shot_seed.to_string());
        put("balance_sigma", self.balance_sigma.to_string());
        put("seed", self.seed.to_string());
        put("threads", self.threads.to_string());
        put("landscape_seed", self.landscape_seed.to_string());
        put("landscape_half_range", self.landscape_half_range.to_string());
        put("landscape_grid", self.landscape_grid.to_string());
        put(
            "landscape_class",
            self.landscape_class.map_or("none".into(), |c| c.to_string()),
        );
        put("scan_points", self.scan_points.to_string());
        put("est_slots", self.est_slots.to_string());
        put("est_shots", self.est_shots.to_string());
        put("est_t_rep_us", self.est_t_rep_us.to_string());
        put("est_rewrite_us", self.est_rewrite_us.to_string());
        put("est_batch", self.est_batch.to_string());
        put("est_iterations", self.est_iterations.to_string());
        out
    }

    /// Measurement mode implied by the shot settings.
    pub fn mode(&self) -> Result<MeasurementMode> {
        if self.shots == 0 {
            Ok(MeasurementMode::Exact)
        } else if self.shots > u32::MAX as u64 {
            Err(CliError::config(format!("shots = {} exceeds the supported range", self.shots)))
        } else {
            Ok(MeasurementMode::Shots { count: self.shots as u32, seed: self.shot_seed })
        }
    }

    pub fn fsim(&self) -> FSimParams {
        FSimParams { theta: self.fsim_theta, phi: self.fsim_phi }
    }

    pub fn conv(&self) -> Result<Option<ConvSpec>> {
        if self.arch.is_image() {
            Ok(Some(catalog_conv(self.arch, self.lrf, self.stride)?))
        } else {
            Ok(None)
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            iterations: self.iterations,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            cost_scale: self.cost_scale,
            weight_decay: self.weight_decay,
            cost: self.cost,
            mode: self.mode()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The library-side pipeline configuration this run drives.
    pub fn pipeline(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            arch: self.arch,
            fsim: self.fsim(),
            conv: self.conv()?,
            selector: parse_selector(&self.selector)?,
            positive_class: self.positive_class,
            ratio: SplitRatio::new(self.ratio_train, self.ratio_test)?,
            train: self.train_config()?,
            balance_sigma: self.balance_sigma,
            seed: self.seed,
        })
    }
}

/// "all" | "named:a,b,c" | "stump:k" into a library selector.
pub fn parse_selector(text: &str) -> Result<FeatureSelector> {
    if text == "all" {
        return Ok(FeatureSelector::All);
    }
    if let Some(names) = text.strip_prefix("named:") {
        let list: Vec<String> =
            names.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect();
        if list.is_empty() {
            return Err(CliError::config("selector \"named:\" lists no columns"));
        }
        return Ok(FeatureSelector::Named(list));
    }
    if let Some(k) = text.strip_prefix("stump:") {
        let k: usize = k
            .parse()
            .map_err(|_| CliError::config(format!("selector stump count {k:?} is not a number")))?;
        return Ok(FeatureSelector::StumpTopK(k));
    }
    Err(CliError::config(format!(
        "selector {text:?} is not \"all\", \"named:<columns>\", or \"stump:<k>\""
    )))
}

/// Key=value lines; '#' starts a comment; blank lines are skipped.
fn parse_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(format!(
                "{}: line {}: expected key = value, got {line:?}",
                path.display(),
                i + 1
            ))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Resolve the configuration for `command`: defaults, then the preset for
/// the dataset named by flags or file, then file entries, then flags.
pub fn resolve(command: &str, flags: &Overrides) -> Result<RunConfig> {
    let file_pairs = match &flags.config {
        Some(path) => parse_file(path)?,
        None => Vec::new(),
    };
    let dataset_name = flags
        .dataset
        .clone()
        .or_else(|| {
            file_pairs.iter().rev().find(|(k, _)| k == "dataset").map(|(_, v)| v.clone())
        })
        .unwrap_or_else(|| RunConfig::default().dataset.name().to_string());
    let kind = DatasetKind::parse(&dataset_name)?;

    let mut cfg = RunConfig::default();
    cfg.apply_preset(kind);
    for (key, value) in &file_pairs {
        cfg.set(key, value)?;
    }
    if let Some(d) = &flags.data_dir {
        cfg.data_dir = d.clone();
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(t) = flags.threads {
        cfg.threads = t;
    }
    if let Some(s) = flags.shots {
        cfg.shots = s;
    }
    if let Some(a) = &flags.arch {
        cfg.arch = ArchId::parse(a)?;
    }
    if let Some(d) = &flags.dataset {
        cfg.dataset = DatasetKind::parse(d)?;
    }
    cfg.command = command.to_string();
    Ok(cfg)
}
