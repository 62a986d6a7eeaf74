//! Trained-model checkpoints: a line-oriented text format that round-trips
//! every f64 exactly (floats are written in shortest round-trip form and
//! parsed back bit-identically).
//!
//! Layout, one item per line:
//!
//! ```text
//! quarc-checkpoint v1
//! dataset <name>
//! arch <arch-id>
//! fsim <theta> <phi>
//! encoding angles | encoding patches
//! columns <name>,<name>,...          (angles only)
//! mean <f64> <f64> ...               (angles only)
//! std <f64> <f64> ...                (angles only)
//! conv <rows> <cols> <pad_bottom> <pad_right> <lrf_rows> <lrf_cols> <stride> <passes>
//! model binary | model ensemble
//! positive <class>|none              (binary only)
//! classes <id>,<id>,...              (ensemble only)
//! params <n>                         (once per member, class order)
//! <n parameter lines>
//! end
//! ```

use crate::error::{CliError, Result};
use quarc_core::circuit::{ArchId, FSimParams};
use quarc_core::encoding::{ConvSpec, SimpleEncoder};
use quarc_core::dataset::LabeledDataset;
use std::fmt::Write as _;
use std::path::Path;

pub const HEADER: &str = "quarc-checkpoint v1";

/// How raw rows become circuit inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointEncoding {
    /// Standardize-then-arctan on named columns.
    Angles { columns: Vec<String>, mean: Vec<f64>, std: Vec<f64> },
    /// Image patch tiling.
    Patches { conv: ConvSpec },
}

/// The trained parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointModel {
    Binary { positive: Option<i32>, params: Vec<f64> },
    Ensemble { class_ids: Vec<i32>, members: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub dataset: String,
    pub arch: ArchId,
    pub fsim: FSimParams,
    pub encoding: CheckpointEncoding,
    pub model: CheckpointModel,
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "dataset {}", self.dataset);
        let _ = writeln!(out, "arch {}", self.arch.name());
        let _ = writeln!(out, "fsim {} {}", self.fsim.theta, self.fsim.phi);
        match &self.encoding {
            CheckpointEncoding::Angles { columns, mean, std } => {
                let _ = writeln!(out, "encoding angles");
                let _ = writeln!(out, "columns {}", columns.join(","));
                let _ = writeln!(out, "mean {}", floats(mean));
                let _ = writeln!(out, "std {}", floats(std));
            }
            CheckpointEncoding::Patches { conv } => {
                let _ = writeln!(out, "encoding patches");
                let _ = writeln!(
                    out,
                    "conv {} {} {} {} {} {} {} {}",
                    conv.image_rows,
                    conv.image_cols,
                    conv.pad_bottom_rows,
                    conv.pad_right_cols,
                    conv.lrf_rows,
                    conv.lrf_cols,
                    conv.stride,
                    conv.passes
                );
            }
        }
        match &self.model {
            CheckpointModel::Binary { positive, params } => {
                let _ = writeln!(out, "model binary");
                let _ = writeln!(
                    out,
                    "positive {}",
                    positive.map_or("none".to_string(), |c| c.to_string())
                );
                let _ = writeln!(out, "params {}", params.len());
                for p in params {
                    let _ = writeln!(out, "{p}");
                }
            }
            CheckpointModel::Ensemble { class_ids, members } => {
                let _ = writeln!(out, "model ensemble");
                let _ = writeln!(
                    out,
                    "classes {}",
                    class_ids.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                );
                for member in members {
                    let _ = writeln!(out, "params {}", member.len());
                    for p in member {
                        let _ = writeln!(out, "{p}");
                    }
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_text(&text).map_err(|e| match e {
            CliError::Data(msg) => CliError::data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut expect = |what: &str| -> Result<&str> {
            lines.next().ok_or_else(|| CliError::data(format!("truncated before {what}")))
        };

        if expect("header")? != HEADER {
            return Err(CliError::data(format!("not a {HEADER:?} file")));
        }
        let dataset = field(expect("dataset")?, "dataset")?.to_string();
        let arch = ArchId::parse(field(expect("arch")?, "arch")?)
            .map_err(|e| CliError::data(e.to_string()))?;
        let fsim_parts = float_list(field(expect("fsim")?, "fsim")?, "fsim")?;
        if fsim_parts.len() != 2 {
            return Err(CliError::data("fsim line needs exactly theta and phi"));
        }
        let fsim = FSimParams { theta: fsim_parts[0], phi: fsim_parts[1] };

        let encoding = match field(expect("encoding")?, "encoding")? {
            "angles" => {
                let columns: Vec<String> = field(expect("columns")?, "columns")?
                    .split(',')
                    .map(str::to_string)
                    .collect();
                let mean = float_list(field(expect("mean")?, "mean")?, "mean")?;
                let std = float_list(field(expect("std")?, "std")?, "std")?;
                if mean.len() != columns.len() || std.len() != columns.len() {
                    return Err(CliError::data("columns, mean, and std lengths disagree"));
                }
                CheckpointEncoding::Angles { columns, mean, std }
            }
            "patches" => {
                let nums = float_list(field(expect("conv")?, "conv")?, "conv")?;
                if nums.len() != 8 || nums.iter().any(|&x| x < 0.0 || x.fract() != 0.0) {
                    return Err(CliError::data("conv line needs eight non-negative integers"));
                }
                let conv = ConvSpec {
                    image_rows: nums[0] as usize,
                    image_cols: nums[1] as usize,
                    pad_bottom_rows: nums[2] as usize,
                    pad_right_cols: nums[3] as usize,
                    lrf_rows: nums[4] as usize,
                    lrf_cols: nums[5] as usize,
                    stride: nums[6] as usize,
                    passes: nums[7] as usize,
                };
                CheckpointEncoding::Patches { conv }
            }
            other => return Err(CliError::data(format!("unknown encoding {other:?}"))),
        };

        let read_params = |lines: &mut std::str::Lines| -> Result<Vec<f64>> {
            let head = lines
                .next()
                .ok_or_else(|| CliError::data("truncated before params"))?;
            let n: usize = field(head, "params")?
                .parse()
                .map_err(|_| CliError::data("params line needs a count"))?;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let line = lines
                    .next()
                    .ok_or_else(|| CliError::data("truncated inside a parameter block"))?;
                out.push(line.trim().parse::<f64>().map_err(|_| {
                    CliError::data(format!("bad parameter value {line:?}"))
                })?);
            }
            Ok(out)
        };

        let model = match field(expect("model")?, "model")? {
            "binary" => {
                let pos = field(expect("positive")?, "positive")?;
                let positive = if pos == "none" {
                    None
                } else {
                    Some(pos.parse::<i32>().map_err(|_| {
                        CliError::data(format!("bad positive class {pos:?}"))
                    })?)
                };
                let params = read_params(&mut lines)?;
                CheckpointModel::Binary { positive, params }
            }
            "ensemble" => {
                let ids: Vec<i32> = field(expect("classes")?, "classes")?
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse()
                            .map_err(|_| CliError::data(format!("bad class id {c:?}")))
                    })
                    .collect::<Result<_>>()?;
                let members: Vec<Vec<f64>> =
                    (0..ids.len()).map(|_| read_params(&mut lines)).collect::<Result<_>>()?;
                CheckpointModel::Ensemble { class_ids: ids, members }
            }
            other => return Err(CliError::data(format!("unknown model kind {other:?}"))),
        };

        match lines.next() {
            Some("end") => {}
            _ => return Err(CliError::data("missing \"end\" terminator")),
        }
        Ok(Checkpoint { dataset, arch, fsim, encoding, model })
    }

    /// Rebuild the standardizer against a freshly loaded dataset, resolving
    /// stored column names to current indices.
    pub fn encoder_for(&self, data: &LabeledDataset) -> Result<Option<SimpleEncoder>> {
        match &self.encoding {
            CheckpointEncoding::Patches { .. } => Ok(None),
            CheckpointEncoding::Angles { columns, mean, std } => {
                let mut indices = Vec::with_capacity(columns.len());
                for name in columns {
                    let idx = data
                        .feature_names()
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| {
                            CliError::data(format!(
                                "checkpoint column {name:?} is missing from the dataset"
                            ))
                        })?;
                    indices.push(idx);
                }
                Ok(Some(SimpleEncoder {
                    columns: indices,
                    mean: mean.clone(),
                    std: std.clone(),
                }))
            }
        }
    }
}

/// Strip a named prefix from a checkpoint line.
fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .map(str::trim)
        .ok_or_else(|| CliError::data(format!("expected a {key:?} line, got {line:?}")))
}

fn float_list(text: &str, key: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|x| {
            x.parse::<f64>()
                .map_err(|_| CliError::data(format!("{key} line: {x:?} is not a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_binary() -> Checkpoint {
        Checkpoint {
            dataset: "cancer".into(),
            arch: ArchId::SimpleA,
            fsim: FSimParams::default(),
            encoding: CheckpointEncoding::Angles {
                columns: vec!["worst radius".into(), "mean texture".into()],
                mean: vec![16.26918989898, -0.5],
                std: vec![3.5240543, 1.0000000000000002],
            },
            model: CheckpointModel::Binary {
                positive: Some(1),
                params: vec![0.1, -0.25, 3.0e-17, 1.0 / 3.0],
            },
        }
    }

    fn sample_ensemble() -> Checkpoint {
        Checkpoint {
            dataset: "mnist".into(),
            arch: ArchId::ImageC,
            fsim: FSimParams { theta: 0.2, phi: -0.4 },
            encoding: CheckpointEncoding::Patches { conv: ConvSpec::default() },
            model: CheckpointModel::Ensemble {
                class_ids: vec![0, 1, 2],
                members: vec![vec![0.5; 4], vec![-0.125; 4], vec![1e-300; 4]],
            },
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        for ck in [sample_binary(), sample_ensemble()] {
            let text = ck.to_text();
            let back = Checkpoint::from_text(&text).unwrap();
            assert_eq!(back, ck);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn header_and_structure_are_enforced() {
        assert!(Checkpoint::from_text("quarc-checkpoint v2\n").is_err());
        assert!(Checkpoint::from_text("").is_err());
        let good = sample_binary().to_text();
        let no_end = good.trim_end_matches("end\n");
        assert!(Checkpoint::from_text(no_end).is_err());
        let truncated: String = good.lines().take(8).collect::<Vec<_>>().join("\n");
        assert!(Checkpoint::from_text(&truncated).is_err());
    }

    #[test]
    fn encoder_resolves_columns_by_name() {
        let data = LabeledDataset::new(
            vec!["mean texture".into(), "worst radius".into()],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0, 1],
            2,
        )
        .unwrap();
        let enc = sample_binary().encoder_for(&data).unwrap().unwrap();
        // "worst radius" lives at index 1 in this dataset.
        assert_eq!(enc.columns, vec![1, 0]);
        let missing = LabeledDataset::new(
            vec!["alcohol".into()],
            vec![1.0, 2.0],
            vec![0, 1],
            1,
        )
        .unwrap();
        assert!(sample_binary().encoder_for(&missing).is_err());
    }
}
