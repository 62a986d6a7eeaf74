//! CSV ingestion with hard count validation.
//!
//! Every loader checks the parsed table against the expected
//! (samples, features, classes) triple for its dataset and refuses anything
//! that does not match exactly, so a truncated or mislabeled snapshot fails
//! loudly instead of skewing results.

use crate::error::{CliError, Result};
use quarc_core::dataset::{gen_parity, LabeledDataset};
use std::path::Path;

/// The datasets the pipeline knows how to run end to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Parity,
    Cancer,
    Wines,
    Mnist,
}

impl DatasetKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "parity" => Ok(DatasetKind::Parity),
            "cancer" => Ok(DatasetKind::Cancer),
            "wines" => Ok(DatasetKind::Wines),
            "mnist" => Ok(DatasetKind::Mnist),
            other => Err(CliError::config(format!(
                "unknown dataset {other:?} (expected parity, cancer, wines, or mnist)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DatasetKind::Parity => "parity",
            DatasetKind::Cancer => "cancer",
            DatasetKind::Wines => "wines",
            DatasetKind::Mnist => "mnist",
        }
    }

    /// Expected (samples, features, classes) after loading.
    pub fn expected(&self) -> (usize, usize, usize) {
        match self {
            DatasetKind::Parity => (16, 4, 2),
            DatasetKind::Cancer => (569, 30, 2),
            DatasetKind::Wines => (178, 13, 3),
            DatasetKind::Mnist => (1797, 56, 10),
        }
    }

    pub fn file_name(&self) -> Option<&'static str> {
        match self {
            DatasetKind::Parity => None,
            DatasetKind::Cancer => Some("cancer.csv"),
            DatasetKind::Wines => Some("wines.csv"),
            DatasetKind::Mnist => Some("digits.csv"),
        }
    }

    pub fn is_multiclass(&self) -> bool {
        self.expected().2 > 2
    }
}

/// Raw CSV table: a header naming every feature column plus "label", and one
/// numeric row per sample.
fn parse_csv(path: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::data(format!("{}: empty file", path.display())))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col = columns.iter().position(|&c| c == "label").ok_or_else(|| {
        CliError::data(format!("{}: header has no \"label\" column", path.display()))
    })?;
    let feature_names: Vec<String> = columns
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_col)
        .map(|(_, c)| c.to_string())
        .collect();
    let width = feature_names.len();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(CliError::data(format!(
                "{}: line {}: expected {} cells, found {}",
                path.display(),
                lineno + 1,
                columns.len(),
                cells.len()
            )));
        }
        for (c, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if c == label_col {
                let l: i32 = cell.parse().map_err(|_| {
                    CliError::data(format!(
                        "{}: line {}, column \"label\": {:?} is not an integer",
                        path.display(),
                        lineno + 1,
                        cell
                    ))
                })?;
                labels.push(l);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::data(format!(
                        "{}: line {}, column {:?}: {:?} is not a number",
                        path.display(),
                        lineno + 1,
                        columns[c],
                        cell
                    ))
                })?;
                features.push(v);
            }
        }
    }
    LabeledDataset::new(feature_names, features, labels, width)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn validate_counts(data: &LabeledDataset, kind: DatasetKind) -> Result<()> {
    let (samples, feats, classes) = kind.expected();
    if data.len() != samples || data.width() != feats || data.class_ids().len() != classes {
        return Err(CliError::data(format!(
            "{} dataset: expected {samples} samples x {feats} features with {classes} classes, \
             got {} x {} with {}",
            kind.name(),
            data.len(),
            data.width(),
            data.class_ids().len()
        )));
    }
    Ok(())
}

/// Tabular CSV (cancer, wines) validated against expected counts.
pub fn load_csv(path: &Path, kind: DatasetKind) -> Result<LabeledDataset> {
    let data = parse_csv(path)?;
    validate_counts(&data, kind)?;
    Ok(data)
}

/// Source pixel grid shape of the digits snapshot.
const DIGITS_SIDE: usize = 8;

/// Digit images: 64 source pixels per row, one column of the 8x8 grid
/// dropped (default: the rightmost), intensities scaled into [0, 1].
pub fn load_digits(path: &Path, crop_col: usize) -> Result<LabeledDataset> {
    if crop_col >= DIGITS_SIDE {
        return Err(CliError::config(format!(
            "crop column {crop_col} out of range (images are {DIGITS_SIDE} columns wide)"
        )));
    }
    let raw = parse_csv(path)?;
    if raw.width() != DIGITS_SIDE * DIGITS_SIDE {
        return Err(CliError::data(format!(
            "{}: expected {} pixel columns, got {}",
            path.display(),
            DIGITS_SIDE * DIGITS_SIDE,
            raw.width()
        )));
    }
    let max = (0..raw.len())
        .flat_map(|r| raw.row(r).iter().copied())
        .fold(0.0f64, f64::max);
    let scale = if max > 1.0 { 1.0 / max } else { 1.0 };

    let keep: Vec<usize> = (0..DIGITS_SIDE * DIGITS_SIDE)
        .filter(|i| i % DIGITS_SIDE != crop_col)
        .collect();
    let names: Vec<String> = keep.iter().map(|&i| raw.feature_names()[i].clone()).collect();
    let mut features = Vec::with_capacity(raw.len() * keep.len());
    for r in 0..raw.len() {
        let row = raw.row(r);
        features.extend(keep.iter().map(|&i| row[i] * scale));
    }
    let data = LabeledDataset::new(names, features, raw.labels().to_vec(), keep.len())
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    validate_counts(&data, DatasetKind::Mnist)?;
    Ok(data)
}

/// Load `kind` from `data_dir` (parity is generated, not read).
pub fn load(kind: DatasetKind, data_dir: &Path, crop_col: usize, parity_bits: usize) -> Result<LabeledDataset> {
    match kind {
        DatasetKind::Parity => {
            let data = gen_parity(parity_bits)?;
            if parity_bits == 4 {
                validate_counts(&data, kind)?;
            }
            Ok(data)
        }
        DatasetKind::Cancer | DatasetKind::Wines => {
            load_csv(&data_dir.join(kind.file_name().unwrap()), kind)
        }
        DatasetKind::Mnist => load_digits(&data_dir.join(kind.file_name().unwrap()), crop_col),
    }
}
