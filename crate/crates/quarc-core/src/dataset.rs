//! In-memory labeled datasets, the parity generator, and stratified splits.

use crate::error::invalid;
use crate::fmath;
use crate::rng;
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// A dense table of features plus one integer label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    feature_names: Vec<String>,
    features: Vec<f64>,
    labels: Vec<i32>,
    width: usize,
}

impl LabeledDataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        labels: Vec<i32>,
        width: usize,
    ) -> Result<Self> {
        if feature_names.len() != width {
            return Err(Error::Mismatch {
                what: "feature name count",
                expected: width,
                actual: feature_names.len(),
            });
        }
        if width == 0 {
            return Err(invalid("datasets need at least one feature column"));
        }
        if features.len() != labels.len() * width {
            return Err(Error::Mismatch {
                what: "feature buffer length",
                expected: labels.len() * width,
                actual: features.len(),
            });
        }
        Ok(LabeledDataset { feature_names, features, labels, width })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.features[r * self.width..(r + 1) * self.width]
    }

    pub fn label(&self, r: usize) -> i32 {
        self.labels[r]
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    /// Distinct labels in ascending order.
    pub fn class_ids(&self) -> Vec<i32> {
        let mut ids: Vec<i32> = Vec::new();
        for &l in &self.labels {
            if !ids.contains(&l) {
                ids.push(l);
            }
        }
        ids.sort_unstable();
        ids
    }

    /// Row indices carrying the given label, ascending.
    pub fn indices_of_class(&self, class: i32) -> Vec<usize> {
        (0..self.len()).filter(|&r| self.labels[r] == class).collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.width);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.len() {
                return Err(invalid("subset row index out of range"));
            }
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        LabeledDataset::new(self.feature_names.clone(), features, labels, self.width)
    }

    /// Replace every label via `f` (e.g. one-vs-rest relabeling).
    pub fn map_labels(&self, f: impl Fn(i32) -> i32) -> Self {
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            features: self.features.clone(),
            labels: self.labels.iter().map(|&l| f(l)).collect(),
            width: self.width,
        }
    }

    /// Append one row (used when oversampling minority classes).
    pub fn push_row(&mut self, row: &[f64], label: i32) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::Mismatch {
                what: "appended row width",
                expected: self.width,
                actual: row.len(),
            });
        }
        self.features.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }
}

/// All 2^n bitstrings labeled +1 for odd bit-parity, -1 for even.
///
/// Row r encodes the bits of r, least significant bit in the first column.
pub fn gen_parity(n_bits: usize) -> Result<LabeledDataset> {
    if n_bits == 0 || n_bits > 16 {
        return Err(invalid("parity generator supports 1..=16 bits"));
    }
    let rows = 1usize << n_bits;
    let names = (0..n_bits).map(|b| alloc::format!("bit{b}")).collect();
    let mut features = Vec::with_capacity(rows * n_bits);
    let mut labels = Vec::with_capacity(rows);
    for r in 0..rows {
        for b in 0..n_bits {
            features.push(((r >> b) & 1) as f64);
        }
        labels.push(if (r.count_ones() & 1) == 1 { 1 } else { -1 });
    }
    LabeledDataset::new(names, features, labels, n_bits)
}

/// Train:test proportions, e.g. 2:1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub test: u32,
}

impl SplitRatio {
    pub fn new(train: u32, test: u32) -> Result<Self> {
        if train == 0 || test == 0 {
            return Err(invalid("both split ratio terms must be positive"));
        }
        Ok(SplitRatio { train, test })
    }

    fn train_fraction(&self) -> f64 {
        self.train as f64 / (self.train + self.test) as f64
    }
}

/// Per-class train/test row indices for a stratified split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split: every class is shuffled and divided by the ratio
/// independently, so class proportions on each side deviate from the full
/// dataset by at most one sample per class. The returned index lists are
/// sorted (canonical order); per-class sizes round half up and are clamped
/// so each side keeps at least one sample of every class with two or more.
pub fn stratified_split(
    data: &LabeledDataset,
    ratio: SplitRatio,
    master_seed: u64,
    split_index: u64,
) -> Result<SplitIndices> {
    if data.len() < 2 {
        return Err(invalid("cannot split fewer than two samples"));
    }
    let frac = ratio.train_fraction();
    let mut rng = rng::stream_indexed(master_seed, "split", split_index);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in data.class_ids() {
        let mut idx = data.indices_of_class(class);
        let n_c = idx.len();
        shuffle(&mut idx, &mut rng);
        let mut n_train = fmath::round_half_up(n_c as f64 * frac) as usize;
        if n_c >= 2 {
            n_train = n_train.clamp(1, n_c - 1);
        } else {
            n_train = n_train.min(n_c);
        }
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Fisher-Yates shuffle (kept local so the core crate controls the exact
/// sequence of RNG draws).
pub(crate) fn shuffle<T>(items: &mut [T], rng: &mut impl rand::Rng) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}
