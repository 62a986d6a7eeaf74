//! Post-training analysis: cost landscapes, single-angle response fits,
//! entangler robustness sweeps, architecture comparison, and hardware
//! wall-time projections.

use crate::circuit::{catalog_conv, catalog_entries, CatalogEntry, CircuitTemplate, FSimParams};
use crate::dataset::LabeledDataset;
use crate::error::invalid;
use crate::fmath;
use crate::model::EncodedDataset;
use crate::pipeline::{
    cross_validate_binary, cross_validate_ensemble, run_ensemble_split, PipelineConfig,
};
use crate::rng;
use crate::state::MeasurementMode;
use crate::train::{batch_cost, dataset_accuracy, Clock, TrainConfig};
use crate::Result;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Two orthonormal random directions in parameter space, drawn from the
/// "landscape-dirs" stream and Gram-Schmidt orthogonalized.
pub fn landscape_directions(dim: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if dim < 2 {
        return Err(invalid("landscape directions need at least two dimensions"));
    }
    let mut rng = rng::stream(seed, "landscape-dirs");
    let mut d1: Vec<f64> = (0..dim).map(|_| rng::gaussian(&mut rng)).collect();
    let mut d2: Vec<f64> = (0..dim).map(|_| rng::gaussian(&mut rng)).collect();
    let norm = |v: &[f64]| fmath::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    let n1 = norm(&d1);
    if n1 == 0.0 {
        return Err(invalid("degenerate first landscape direction"));
    }
    d1.iter_mut().for_each(|x| *x /= n1);
    let dot: f64 = d1.iter().zip(&d2).map(|(a, b)| a * b).sum();
    d2.iter_mut().zip(&d1).for_each(|(x, u)| *x -= dot * u);
    let n2 = norm(&d2);
    if n2 < 1e-12 {
        return Err(invalid("landscape directions are collinear"));
    }
    d2.iter_mut().for_each(|x| *x /= n2);
    Ok((d1, d2))
}

/// Geometry of a landscape scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeConfig {
    pub seed: u64,
    /// Scan covers [-half_range, +half_range] along each direction.
    pub half_range: f64,
    /// Points per axis (odd keeps the center on the grid).
    pub grid: usize,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        LandscapeConfig { seed: 0, half_range: PI, grid: 41 }
    }
}

impl LandscapeConfig {
    fn validate(&self) -> Result<()> {
        if self.grid < 3 {
            return Err(invalid("landscape grids need at least three points per axis"));
        }
        if !(self.half_range.is_finite() && self.half_range > 0.0) {
            return Err(invalid("landscape half range must be positive"));
        }
        Ok(())
    }

    fn coords(&self) -> Vec<f64> {
        let n = self.grid;
        (0..n)
            .map(|k| -self.half_range + 2.0 * self.half_range * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// A local minimum of the scanned cost surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeMinimum {
    pub alpha_index: usize,
    pub beta_index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub cost: f64,
    pub accuracy: f64,
}

/// Cost over a plane through parameter space.
///
/// `cost[i * grid + j]` is the value at displacement
/// `alphas[i] * dir1 + betas[j] * dir2` from the center parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub dir1: Vec<f64>,
    pub dir2: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cost: Vec<f64>,
    pub minima: Vec<LandscapeMinimum>,
}

fn displaced(params: &[f64], d1: &[f64], a: f64, d2: &[f64], b: f64) -> Vec<f64> {
    params
        .iter()
        .zip(d1.iter().zip(d2))
        .map(|(p, (u, v))| p + a * u + b * v)
        .collect()
}

/// Strict local minima over the 8-neighborhood; border cells compare only
/// against neighbors that exist.
fn grid_minima(cost: &[f64], n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = cost[i * n + j];
            let mut is_min = true;
            'scan: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                        continue;
                    }
                    if cost[ni as usize * n + nj as usize] <= c {
                        is_min = false;
                        break 'scan;
                    }
                }
            }
            if is_min {
                out.push((i, j));
            }
        }
    }
    out
}

/// Scan the cost over a random two-dimensional plane through `params` and
/// locate its strict local minima, each annotated with the accuracy at that
/// displaced parameter vector. Cost and accuracy are computed on `data`
/// (typically the test split) with the cost settings of `cost_cfg`.
pub fn landscape_2d(
    template: &CircuitTemplate,
    params: &[f64],
    data: &EncodedDataset,
    cost_cfg: &TrainConfig,
    lc: &LandscapeConfig,
) -> Result<Landscape> {
    lc.validate()?;
    let (dir1, dir2) = landscape_directions(params.len(), lc.seed)?;
    let alphas = lc.coords();
    let betas = lc.coords();
    let all: Vec<usize> = (0..data.len()).collect();
    let n = lc.grid;
    let mut cost = Vec::with_capacity(n * n);
    for &a in &alphas {
        for &b in &betas {
            let p = displaced(params, &dir1, a, &dir2, b);
            cost.push(batch_cost(template, &p, data, &all, cost_cfg)?);
        }
    }
    let mut minima = Vec::new();
    for (i, j) in grid_minima(&cost, n) {
        let p = displaced(params, &dir1, alphas[i], &dir2, betas[j]);
        minima.push(LandscapeMinimum {
            alpha_index: i,
            beta_index: j,
            alpha: alphas[i],
            beta: betas[j],
            cost: cost[i * n + j],
            accuracy: dataset_accuracy(template, &p, data, cost_cfg.mode)?,
        });
    }
    Ok(Landscape { dir1, dir2, alphas, betas, cost, minima })
}

/// Cost along the first landscape direction only. With the same seed this
/// reproduces the 2D grid's `beta = 0` line exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub dir: Vec<f64>,
    pub alphas: Vec<f64>,
    pub cost: Vec<f64>,
}

pub fn slice_1d(
    template: &CircuitTemplate,
    params: &[f64],
    data: &EncodedDataset,
    cost_cfg: &TrainConfig,
    lc: &LandscapeConfig,
) -> Result<Slice> {
    lc.validate()?;
    let (dir1, dir2) = landscape_directions(params.len(), lc.seed)?;
    let alphas = lc.coords();
    let all: Vec<usize> = (0..data.len()).collect();
    let mut cost = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let p = displaced(params, &dir1, a, &dir2, 0.0);
        cost.push(batch_cost(template, &p, data, &all, cost_cfg)?);
    }
    Ok(Slice { dir: dir1, alphas, cost })
}

/// Least-squares fit of `A cos(angle - phase) + offset` through sampled
/// values, solved from the normal equations of the basis
/// `[cos, sin, 1]` by Cramer's rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub max_residual: f64,
}

pub fn fit_harmonic(angles: &[f64], values: &[f64]) -> Result<HarmonicFit> {
    if angles.len() != values.len() || angles.len() < 3 {
        return Err(invalid("harmonic fit needs at least three aligned samples"));
    }
    let (mut scc, mut scs, mut sc, mut sss, mut ss) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut rc, mut rs, mut r1) = (0.0, 0.0, 0.0);
    for (&t, &g) in angles.iter().zip(values) {
        let (c, s) = (fmath::cos(t), fmath::sin(t));
        scc += c * c;
        scs += c * s;
        sc += c;
        sss += s * s;
        ss += s;
        rc += g * c;
        rs += g * s;
        r1 += g;
    }
    let n = angles.len() as f64;
    let det3 = |m: [[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m = [[scc, scs, sc], [scs, sss, ss], [sc, ss, n]];
    let d = det3(m);
    if d.abs() < 1e-12 {
        return Err(invalid("harmonic fit is degenerate: angles lack spread"));
    }
    let col = |k: usize| {
        let mut mm = m;
        let rhs = [rc, rs, r1];
        for row in 0..3 {
            mm[row][k] = rhs[row];
        }
        det3(mm) / d
    };
    let (a, b, c) = (col(0), col(1), col(2));
    let mut max_residual = 0.0f64;
    for (&t, &g) in angles.iter().zip(values) {
        let fit = a * fmath::cos(t) + b * fmath::sin(t) + c;
        max_residual = max_residual.max(fmath::fabs(fit - g));
    }
    Ok(HarmonicFit {
        amplitude: fmath::hypot(a, b),
        phase: fmath::atan2(b, a),
        offset: c,
        max_residual,
    })
}

/// Per-slot harmonic response of the readout expectation.
///
/// Every rotation angle enters the expectation as a pure first harmonic, so
/// sweeping one slot while the rest stay fixed must fit
/// `A cos(angle - phase) + offset` to numerical precision in exact mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotHarmonic {
    pub slot: usize,
    pub fit: HarmonicFit,
}

pub fn harmonic_scan(
    template: &CircuitTemplate,
    features: &[f64],
    theta: &[f64],
    points: usize,
    mode: MeasurementMode,
) -> Result<Vec<SlotHarmonic>> {
    if points < 3 {
        return Err(invalid("harmonic scans need at least three sample angles"));
    }
    let angles: Vec<f64> = (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect();
    let mut out = Vec::with_capacity(theta.len());
    let mut work = theta.to_vec();
    for slot in 0..theta.len() {
        let original = work[slot];
        let mut values = Vec::with_capacity(points);
        for &t in &angles {
            work[slot] = t;
            values.push(template.bind_and_run(features, &work, mode)?);
        }
        work[slot] = original;
        out.push(SlotHarmonic { slot, fit: fit_harmonic(&angles, &values)? });
    }
    Ok(out)
}

/// Entangler angles probed by the robustness sweep.
pub const SWEEP_THETAS: [f64; 3] = [0.2 * PI, 0.5 * PI, 0.8 * PI];
/// Conditional phases probed by the robustness sweep.
pub const SWEEP_PHIS: [f64; 3] = [-0.5 * PI, 0.0, 0.5 * PI];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub theta: f64,
    pub phi: f64,
    pub mean_test_accuracy: f64,
}

/// The nominal-entangler reference plus the 3x3 grid, theta-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub nominal: SweepCell,
    pub cells: Vec<SweepCell>,
}

/// Retrain from scratch at each entangler setting and report mean test
/// accuracy over `splits` stratified splits. The nominal cell runs the
/// configuration exactly as given, so it reproduces a standalone
/// cross-validation bit for bit.
pub fn robustness_sweep(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    splits: u64,
    ensemble: bool,
    clock: &dyn Clock,
) -> Result<SweepOutcome> {
    let mean_at = |fsim: FSimParams| -> Result<f64> {
        let cell_cfg = PipelineConfig { fsim, ..cfg.clone() };
        Ok(if ensemble {
            cross_validate_ensemble(data, &cell_cfg, splits, clock)?.mean
        } else {
            cross_validate_binary(data, &cell_cfg, splits, clock)?.mean
        })
    };
    let nominal = SweepCell {
        theta: cfg.fsim.theta,
        phi: cfg.fsim.phi,
        mean_test_accuracy: mean_at(cfg.fsim)?,
    };
    let mut cells = Vec::with_capacity(9);
    for &theta in &SWEEP_THETAS {
        for &phi in &SWEEP_PHIS {
            cells.push(SweepCell {
                theta,
                phi,
                mean_test_accuracy: mean_at(FSimParams { theta, phi })?,
            });
        }
    }
    Ok(SweepOutcome { nominal, cells })
}

/// One row of the architecture comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchComparisonRow {
    pub entry: CatalogEntry,
    pub params: usize,
    pub layers: usize,
    pub test_accuracy: f64,
}

/// Train one catalog configuration on split 0 and report its table row.
pub fn compare_one(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    entry: CatalogEntry,
    clock: &dyn Clock,
) -> Result<ArchComparisonRow> {
    let conv = catalog_conv(entry.arch, entry.lrf, entry.stride)?;
    let entry_cfg = PipelineConfig { arch: entry.arch, conv: Some(conv), ..cfg.clone() };
    let template = entry_cfg.template()?;
    let run = run_ensemble_split(data, &entry_cfg, 0, clock)?;
    Ok(ArchComparisonRow {
        entry,
        params: template.trainable_param_count(),
        layers: template.layer_count(),
        test_accuracy: run.test_accuracy,
    })
}

/// All five catalog rows, in table order.
pub fn compare_architectures(
    data: &LabeledDataset,
    cfg: &PipelineConfig,
    clock: &dyn Clock,
) -> Result<Vec<ArchComparisonRow>> {
    catalog_entries()
        .iter()
        .map(|&entry| compare_one(data, cfg, entry, clock))
        .collect()
}

/// Gate-layer time and readout time of the target hardware.
pub const T_LAYER_NS: u64 = 80;
pub const T_READOUT_NS: u64 = 500;
/// Default shot repetition period (microseconds).
pub const DEFAULT_T_REP_US: u64 = 50;
/// Default control-system program-rewrite overhead per sample (microseconds).
pub const DEFAULT_REWRITE_US: u64 = 1_450_000;

/// Circuit execution time in nanoseconds for a given layer count.
pub fn circuit_time_ns(layers: usize) -> u64 {
    layers as u64 * T_LAYER_NS + T_READOUT_NS
}

/// Projected hardware wall times, exact in integer microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeEstimate {
    /// One full gradient of one sample: (2m + 1) circuit programs.
    pub grad_us: u64,
    pub per_sample_us: u64,
    pub iteration_us: u64,
    pub total_us: u64,
}

/// Project training wall time on shot-based hardware for a circuit with
/// `circuit_slots` shiftable angles.
pub fn hardware_time_estimate(
    circuit_slots: usize,
    shots: u64,
    t_rep_us: u64,
    rewrite_us: u64,
    batch: usize,
    iterations: usize,
) -> Result<TimeEstimate> {
    if shots == 0 {
        return Err(invalid("hardware estimates need a positive shot count"));
    }
    if circuit_slots == 0 || batch == 0 || iterations == 0 {
        return Err(invalid("hardware estimates need slots, batch, and iterations"));
    }
    let grad_us = (2 * circuit_slots as u64 + 1) * shots * t_rep_us;
    let per_sample_us = grad_us + rewrite_us;
    let iteration_us = batch as u64 * per_sample_us;
    let total_us = iterations as u64 * iteration_us;
    Ok(TimeEstimate { grad_us, per_sample_us, iteration_us, total_us })
}
