//! CSV artifact writers.
//!
//! Every float is printed with the shortest representation that parses back
//! to the identical bits, so replaying a deterministic run reproduces each
//! file byte for byte.

use crate::error::{CliError, Result};
use quarc_core::analysis::{
    ArchComparisonRow, Landscape, Slice, SlotHarmonic, SweepOutcome, TimeEstimate,
};
use quarc_core::multiclass::Confusion;
use quarc_core::pipeline::CrossValidation;
use quarc_core::train::TrainHistory;
use std::fmt::Write as _;
use std::path::Path;

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Per-iteration curves. Wall times stay out of the file on purpose: every
/// artifact must replay byte-identically, and a timestamp never does.
pub fn history_csv(history: &TrainHistory) -> String {
    let mut out = String::from("iteration,cost_train,cost_test,acc_train,acc_test\n");
    for r in &history.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration, r.cost_train, r.cost_test, r.acc_train, r.acc_test
        );
    }
    out
}

/// Generic name,value table.
pub fn metrics_csv(rows: &[(String, f64)]) -> String {
    let mut out = String::from("metric,value\n");
    for (name, value) in rows {
        let _ = writeln!(out, "{name},{value}");
    }
    out
}

pub fn crossval_csv(cv: &CrossValidation) -> String {
    let mut out = String::from("split,test_accuracy\n");
    for (i, acc) in cv.per_split.iter().enumerate() {
        let _ = writeln!(out, "{i},{acc}");
    }
    let _ = writeln!(out, "mean,{}", cv.mean);
    out
}

pub fn landscape_csv(l: &Landscape) -> String {
    let mut out = String::from("alpha,beta,cost\n");
    let n = l.betas.len();
    for (i, &a) in l.alphas.iter().enumerate() {
        for (j, &b) in l.betas.iter().enumerate() {
            let _ = writeln!(out, "{a},{b},{}", l.cost[i * n + j]);
        }
    }
    out
}

pub fn minima_csv(l: &Landscape) -> String {
    let mut out = String::from("alpha,beta,cost,accuracy\n");
    for m in &l.minima {
        let _ = writeln!(out, "{},{},{},{}", m.alpha, m.beta, m.cost, m.accuracy);
    }
    out
}

pub fn slice_csv(s: &Slice) -> String {
    let mut out = String::from("alpha,cost\n");
    for (&a, &c) in s.alphas.iter().zip(&s.cost) {
        let _ = writeln!(out, "{a},{c}");
    }
    out
}

pub fn scan_csv(fits: &[SlotHarmonic]) -> String {
    let mut out = String::from("slot,amplitude,phase,offset,max_residual\n");
    for f in fits {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            f.slot, f.fit.amplitude, f.fit.phase, f.fit.offset, f.fit.max_residual
        );
    }
    out
}

pub fn sweep_csv(sweep: &SweepOutcome) -> String {
    let mut out = String::from("theta,phi,mean_test_accuracy,nominal\n");
    let _ = writeln!(
        out,
        "{},{},{},1",
        sweep.nominal.theta, sweep.nominal.phi, sweep.nominal.mean_test_accuracy
    );
    for c in &sweep.cells {
        let _ = writeln!(out, "{},{},{},0", c.theta, c.phi, c.mean_test_accuracy);
    }
    out
}

pub fn arch_compare_csv(rows: &[ArchComparisonRow]) -> String {
    let mut out = String::from("arch,lrf,stride,params,layers,test_accuracy\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{}x{},{},{},{},{}",
            r.entry.arch.name(),
            r.entry.lrf,
            r.entry.lrf,
            r.entry.stride,
            r.params,
            r.layers,
            r.test_accuracy
        );
    }
    out
}

pub fn estimate_csv(t: &TimeEstimate) -> String {
    let mut out = String::from("quantity,microseconds,seconds\n");
    for (name, us) in [
        ("gradient", t.grad_us),
        ("per_sample", t.per_sample_us),
        ("iteration", t.iteration_us),
        ("total", t.total_us),
    ] {
        let _ = writeln!(out, "{name},{us},{}", us as f64 / 1e6);
    }
    out
}

pub fn confusion_counts_csv(c: &Confusion) -> String {
    let mut out = String::from("true\\predicted");
    for id in &c.class_ids {
        let _ = write!(out, ",{id}");
    }
    out.push('\n');
    for (i, id) in c.class_ids.iter().enumerate() {
        let _ = write!(out, "{id}");
        for v in &c.counts[i] {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn confusion_percent_csv(c: &Confusion) -> String {
    let percent = c.percent();
    let mut out = String::from("true\\predicted");
    for id in &c.class_ids {
        let _ = write!(out, ",{id}");
    }
    out.push('\n');
    for (i, id) in c.class_ids.iter().enumerate() {
        let _ = write!(out, "{id}");
        for v in &percent[i] {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn parity_csv(data: &quarc_core::dataset::LabeledDataset) -> String {
    let mut out = data.feature_names().join(",");
    out.push_str(",label\n");
    for r in 0..data.len() {
        let row: Vec<String> = data.row(r).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{},{}", row.join(","), data.label(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use quarc_core::dataset::gen_parity;
    use quarc_core::multiclass::confusion_matrix;

    #[test]
    fn parity_table_lists_every_bit_string() {
        let csv = parity_csv(&gen_parity(4).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], "bit0,bit1,bit2,bit3,label");
        assert_eq!(lines[1], "0,0,0,0,-1");
        assert_eq!(lines[2], "1,0,0,0,1");
    }

    #[test]
    fn confusion_tables_share_the_header() {
        let c = confusion_matrix(&[0, 1], &[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        let counts = confusion_counts_csv(&c);
        assert!(counts.starts_with("true\\predicted,0,1\n"));
        assert!(counts.contains("0,1,1\n"));
        let percent = confusion_percent_csv(&c);
        assert!(percent.contains("1,0,100\n"));
    }

    #[test]
    fn floats_render_in_round_trip_form() {
        let rows = vec![("x".to_string(), 0.1 + 0.2), ("y".to_string(), 1.0)];
        let csv = metrics_csv(&rows);
        assert!(csv.contains("x,0.30000000000000004\n"));
        assert!(csv.contains("y,1\n"));
    }
}
