//! Trainable parameter vectors and their mapping onto circuit angles.
//!
//! A model is one flat `Vec<f64>`. Its layout depends on the template:
//!
//! * kernels first, one block per patch: `patch_len` weights then one bias;
//! * direct circuit angles (free rotation slots, then the closing stage);
//! * optionally a trailing output bias added to the circuit expectation.
//!
//! Simple templates have no kernels, so the vector is exactly the fifteen
//! direct angles.

use crate::circuit::CircuitTemplate;
use crate::rng;
use crate::{Error, Result};
use alloc::vec::Vec;
use rand::RngCore;

/// How an encoded row feeds the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingKind {
    /// Row entries are rotation angles passed as circuit features.
    Angles,
    /// Row entries are flattened image patches consumed by kernels.
    Patches,
}

/// Encoded samples as one dense buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub rows: Vec<f64>,
    pub row_len: usize,
    pub labels: Vec<i32>,
    pub kind: EncodingKind,
}

impl EncodedDataset {
    pub fn new(rows: Vec<f64>, row_len: usize, labels: Vec<i32>, kind: EncodingKind) -> Result<Self> {
        if row_len == 0 || rows.len() != labels.len() * row_len {
            return Err(Error::Mismatch {
                what: "encoded buffer length",
                expected: labels.len() * row_len,
                actual: rows.len(),
            });
        }
        Ok(EncodedDataset { rows, row_len, labels, kind })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r * self.row_len..(r + 1) * self.row_len]
    }
}

/// Index arithmetic for the flat parameter vector of one template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub kernel_count: usize,
    pub kernel_len: usize,
    pub direct_angles: usize,
    pub bias_trainable: bool,
}

impl ParamLayout {
    pub fn of(template: &CircuitTemplate) -> Self {
        let (kernel_count, kernel_len) = match template.conv() {
            Some(spec) => (spec.patch_count(), spec.patch_len()),
            None => (0, 0),
        };
        ParamLayout {
            kernel_count,
            kernel_len,
            direct_angles: template.direct_slot_count(),
            bias_trainable: template.arch.bias_trainable(),
        }
    }

    pub fn kernel_block(&self, i: usize) -> core::ops::Range<usize> {
        let start = i * (self.kernel_len + 1);
        start..start + self.kernel_len
    }

    pub fn kernel_bias(&self, i: usize) -> usize {
        i * (self.kernel_len + 1) + self.kernel_len
    }

    pub fn direct_start(&self) -> usize {
        self.kernel_count * (self.kernel_len + 1)
    }

    pub fn direct_range(&self) -> core::ops::Range<usize> {
        self.direct_start()..self.direct_start() + self.direct_angles
    }

    pub fn output_bias_index(&self) -> Option<usize> {
        self.bias_trainable.then(|| self.direct_start() + self.direct_angles)
    }

    pub fn trainable_len(&self) -> usize {
        self.direct_start() + self.direct_angles + usize::from(self.bias_trainable)
    }

    /// Row width the encoder must produce for this layout.
    pub fn expected_row_len(&self, template: &CircuitTemplate) -> usize {
        if self.kernel_count > 0 {
            self.kernel_count * self.kernel_len
        } else {
            template.feature_count()
        }
    }
}

/// Fresh parameters: kernel weights uniform in [-0.1, 0.1] from the "init"
/// stream (indexed by classifier), every other entry zero.
pub fn init_params(template: &CircuitTemplate, master_seed: u64, class_index: u64) -> Vec<f64> {
    let layout = ParamLayout::of(template);
    let mut params = alloc::vec![0.0; layout.trainable_len()];
    if layout.kernel_count > 0 {
        let mut rng = rng::stream_indexed(master_seed, "init", class_index);
        for i in 0..layout.kernel_count {
            for w in layout.kernel_block(i) {
                params[w] = uniform_01(&mut rng) * 0.2 - 0.1;
            }
        }
    }
    params
}

/// 53-bit uniform draw in [0, 1).
fn uniform_01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Features plus circuit angles for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub features: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Map one encoded row and the parameter vector onto circuit inputs.
///
/// Kernel-driven slots get `bias_i + w_i . patch_i`; direct slots copy their
/// parameters; simple templates pass the row through as features.
pub fn bind_params(template: &CircuitTemplate, params: &[f64], row: &[f64]) -> Result<Binding> {
    let layout = ParamLayout::of(template);
    if params.len() != layout.trainable_len() {
        return Err(Error::Mismatch {
            what: "trainable parameter count",
            expected: layout.trainable_len(),
            actual: params.len(),
        });
    }
    if row.len() != layout.expected_row_len(template) {
        return Err(Error::Mismatch {
            what: "encoded row length",
            expected: layout.expected_row_len(template),
            actual: row.len(),
        });
    }
    let mut theta = Vec::with_capacity(template.weight_count());
    for i in 0..layout.kernel_count {
        let weights = &params[layout.kernel_block(i)];
        let patch = &row[i * layout.kernel_len..(i + 1) * layout.kernel_len];
        let mut angle = params[layout.kernel_bias(i)];
        for (w, x) in weights.iter().zip(patch) {
            angle += w * x;
        }
        theta.push(angle);
    }
    theta.extend_from_slice(&params[layout.direct_range()]);
    debug_assert_eq!(theta.len(), template.weight_count());
    let features = if layout.kernel_count > 0 { Vec::new() } else { row.to_vec() };
    Ok(Binding { features, theta })
}

/// Output bias (zero when the family does not train one).
pub fn output_bias(layout: &ParamLayout, params: &[f64]) -> f64 {
    layout.output_bias_index().map_or(0.0, |i| params[i])
}

/// Decision value: circuit expectation plus the output bias.
pub fn predict_raw(
    template: &CircuitTemplate,
    params: &[f64],
    row: &[f64],
    mode: crate::state::MeasurementMode,
) -> Result<f64> {
    let layout = ParamLayout::of(template);
    let binding = bind_params(template, params, row)?;
    let g = template.bind_and_run(&binding.features, &binding.theta, mode)?;
    Ok(g + output_bias(&layout, params))
}

/// Binary decision: non-negative raw values map to +1.
pub fn classify(raw: f64) -> i32 {
    if raw >= 0.0 { 1 } else { -1 }
}
