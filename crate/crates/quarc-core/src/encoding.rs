//! Feature-to-angle encodings.
//!
//! Simple (tabular) datasets go through column selection, per-column
//! standardization fitted on the training split, and arctan squashing into
//! (-pi/2, pi/2). Images go through zero padding, local-receptive-field
//! tiling with repeated traversals (re-uploading), and per-patch affine
//! kernels computed downstream.

use crate::dataset::LabeledDataset;
use crate::error::invalid;
use crate::fmath;
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// Which raw columns feed the four encoding angles.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSelector {
    /// Keep every column (datasets whose width already matches the circuit).
    All,
    /// Select columns by header name, in the given order.
    Named(Vec<String>),
    /// Rank columns by decision-stump training accuracy and keep the best k.
    StumpTopK(usize),
}

impl FeatureSelector {
    /// Resolve to column indices against a (training) dataset.
    pub fn resolve(&self, data: &LabeledDataset) -> Result<Vec<usize>> {
        match self {
            FeatureSelector::All => Ok((0..data.width()).collect()),
            FeatureSelector::Named(names) => names
                .iter()
                .map(|n| {
                    data.feature_names()
                        .iter()
                        .position(|h| h == n)
                        .ok_or_else(|| invalid(alloc::format!("no column named \"{n}\"")))
                })
                .collect(),
            FeatureSelector::StumpTopK(k) => stump_top_k(data, *k),
        }
    }
}

/// Fitted standardize-then-arctan encoder for tabular data.
///
/// Statistics come from the training split only; a zero-variance column is
/// centered and passed with unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleEncoder {
    pub columns: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl SimpleEncoder {
    pub fn fit(train: &LabeledDataset, columns: Vec<usize>) -> Result<Self> {
        if train.is_empty() {
            return Err(invalid("cannot fit an encoder on an empty dataset"));
        }
        for &c in &columns {
            if c >= train.width() {
                return Err(invalid("selector column out of range"));
            }
        }
        let n = train.len() as f64;
        let mut mean = Vec::with_capacity(columns.len());
        let mut std = Vec::with_capacity(columns.len());
        for &c in &columns {
            let mut sum = 0.0;
            for r in 0..train.len() {
                sum += train.row(r)[c];
            }
            let mu = sum / n;
            let mut sq = 0.0;
            for r in 0..train.len() {
                let d = train.row(r)[c] - mu;
                sq += d * d;
            }
            let var = sq / n;
            mean.push(mu);
            std.push(if var > 0.0 { fmath::sqrt(var) } else { 1.0 });
        }
        Ok(SimpleEncoder { columns, mean, std })
    }

    /// Angles for one raw row: arctan((x - mean)/std) per selected column.
    pub fn encode(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.columns.len());
        for (i, &c) in self.columns.iter().enumerate() {
            let x = *raw.get(c).ok_or(Error::Mismatch {
                what: "raw feature width",
                expected: c + 1,
                actual: raw.len(),
            })?;
            out.push(fmath::atan((x - self.mean[i]) / self.std[i]));
        }
        Ok(out)
    }
}

/// Geometry of the image encoding: padding, receptive field, stride, and
/// how many times the field traverses the image (each traversal gets its
/// own kernels downstream).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvSpec {
    pub image_rows: usize,
    pub image_cols: usize,
    pub pad_bottom_rows: usize,
    pub pad_right_cols: usize,
    pub lrf_rows: usize,
    pub lrf_cols: usize,
    pub stride: usize,
    pub passes: usize,
}

impl Default for ConvSpec {
    /// 8x7 image, zero bottom row (-> 9x7), 3x3 field, stride 2, two passes:
    /// 12 placements per pass, 24 patches.
    fn default() -> Self {
        ConvSpec {
            image_rows: 8,
            image_cols: 7,
            pad_bottom_rows: 1,
            pad_right_cols: 0,
            lrf_rows: 3,
            lrf_cols: 3,
            stride: 2,
            passes: 2,
        }
    }
}

fn placement_starts(padded: usize, lrf: usize, stride: usize) -> Vec<usize> {
    // ceil((padded-lrf)/stride)+1 placements; a final placement that would
    // overhang is shifted back flush with the edge.
    let span = padded - lrf;
    let count = span.div_ceil(stride) + 1;
    (0..count).map(|i| core::cmp::min(i * stride, span)).collect()
}

impl ConvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.image_rows == 0 || self.image_cols == 0 {
            return Err(invalid("image dimensions must be positive"));
        }
        if self.lrf_rows == 0 || self.lrf_cols == 0 || self.stride == 0 || self.passes == 0 {
            return Err(invalid("receptive field, stride, and passes must be positive"));
        }
        if self.lrf_rows > self.padded_rows() || self.lrf_cols > self.padded_cols() {
            return Err(invalid("receptive field exceeds the padded image"));
        }
        Ok(())
    }

    pub fn padded_rows(&self) -> usize {
        self.image_rows + self.pad_bottom_rows
    }

    pub fn padded_cols(&self) -> usize {
        self.image_cols + self.pad_right_cols
    }

    pub fn row_starts(&self) -> Vec<usize> {
        placement_starts(self.padded_rows(), self.lrf_rows, self.stride)
    }

    pub fn col_starts(&self) -> Vec<usize> {
        placement_starts(self.padded_cols(), self.lrf_cols, self.stride)
    }

    /// Field placements per traversal.
    pub fn placements(&self) -> usize {
        self.row_starts().len() * self.col_starts().len()
    }

    /// Total patches (and therefore kernels) over all traversals.
    pub fn patch_count(&self) -> usize {
        self.placements() * self.passes
    }

    /// Pixels per patch.
    pub fn patch_len(&self) -> usize {
        self.lrf_rows * self.lrf_cols
    }
}

/// Cut an image into patches: zero-pad, then emit row-major placements,
/// traversal after traversal, as one flat buffer of
/// `patch_count() * patch_len()` values.
pub fn pad_and_tile(image: &[f64], spec: &ConvSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if image.len() != spec.image_rows * spec.image_cols {
        return Err(Error::Mismatch {
            what: "image pixel count",
            expected: spec.image_rows * spec.image_cols,
            actual: image.len(),
        });
    }
    let (rows_p, cols_p) = (spec.padded_rows(), spec.padded_cols());
    let pixel = |r: usize, c: usize| -> f64 {
        if r < spec.image_rows && c < spec.image_cols {
            image[r * spec.image_cols + c]
        } else {
            0.0
        }
    };
    let row_starts = spec.row_starts();
    let col_starts = spec.col_starts();
    debug_assert!(row_starts.iter().all(|&r| r + spec.lrf_rows <= rows_p));
    debug_assert!(col_starts.iter().all(|&c| c + spec.lrf_cols <= cols_p));
    let mut out = Vec::with_capacity(spec.patch_count() * spec.patch_len());
    for _pass in 0..spec.passes {
        for &r0 in &row_starts {
            for &c0 in &col_starts {
                for dr in 0..spec.lrf_rows {
                    for dc in 0..spec.lrf_cols {
                        out.push(pixel(r0 + dr, c0 + dc));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Decision-stump ranking: each feature scored by the best single-threshold
/// split (majority class on each side), ties broken by lower column index.
pub fn stump_rank(data: &LabeledDataset) -> Result<Vec<usize>> {
    let classes = data.class_ids();
    if classes.len() < 2 {
        return Err(invalid("stump ranking needs at least two classes"));
    }
    let n = data.len();
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(data.width());
    for f in 0..data.width() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            data.row(a)[f]
                .partial_cmp(&data.row(b)[f])
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        // Sweep the threshold across sorted samples, tracking class counts on
        // the left side; right side is the complement.
        let mut total = alloc::vec![0usize; classes.len()];
        for r in 0..n {
            let ci = classes.iter().position(|&c| c == data.label(r)).unwrap();
            total[ci] += 1;
        }
        let mut left = alloc::vec![0usize; classes.len()];
        let mut best = *total.iter().max().unwrap(); // degenerate stump: all one side
        for (k, &idx) in order.iter().enumerate() {
            let ci = classes.iter().position(|&c| c == data.label(idx)).unwrap();
            left[ci] += 1;
            // Threshold between k and k+1 is only a real split when the
            // feature values differ.
            if k + 1 < n {
                let v0 = data.row(idx)[f];
                let v1 = data.row(order[k + 1])[f];
                if v0 == v1 {
                    continue;
                }
            } else {
                continue;
            }
            let maj_left = *left.iter().max().unwrap();
            let maj_right = left
                .iter()
                .zip(&total)
                .map(|(l, t)| t - l)
                .max()
                .unwrap();
            best = best.max(maj_left + maj_right);
        }
        scored.push((best as f64 / n as f64, f));
    }
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    Ok(scored.into_iter().map(|(_, f)| f).collect())
}

pub fn stump_top_k(data: &LabeledDataset, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > data.width() {
        return Err(invalid("stump selection size must be in 1..=feature count"));
    }
    let mut ranked = stump_rank(data)?;
    ranked.truncate(k);
    Ok(ranked)
}
