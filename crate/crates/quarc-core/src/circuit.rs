//! Parameterized four-qubit circuit templates.
//!
//! Every template is a fixed sequence of single-qubit rotations and two-qubit
//! fSim entanglers; only the rotation angles carry parameters. Angles come
//! from three sources: encoded features (simple templates fold them into the
//! first rotation layer), trainable weights, and for image templates the
//! per-patch kernel responses assembled upstream. A template knows nothing
//! about kernels: it consumes one flat angle buffer, one entry per rotation.

use crate::encoding::ConvSpec;
use crate::error::invalid;
use crate::state::{GateOp, MeasurementMode, StateVector};
use crate::{Error, Result};
use alloc::vec::Vec;

pub const QUBITS: usize = 4;

/// Rotation generator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Where one rotation's angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSlot {
    /// theta[i]
    Weight(usize),
    /// features[f] + theta[i] (re-uploading encoder layer)
    Merged { feature: usize, weight: usize },
}

/// One element of the template program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemplateOp {
    Rot { qubit: usize, axis: Axis, slot: ParamSlot },
    Ent { a: usize, b: usize },
}

/// Shared two-qubit gate parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FSimParams {
    pub theta: f64,
    pub phi: f64,
}

impl Default for FSimParams {
    /// Swap angle pi/2, conditional phase 0.1 pi.
    fn default() -> Self {
        FSimParams { theta: core::f64::consts::FRAC_PI_2, phi: 0.1 * core::f64::consts::PI }
    }
}

/// Template family identifier.
///
/// The `Simple*` variants encode four features directly; the `Image*`
/// variants host kernel-response angles from a convolutional front end and
/// differ in rotation-slot budget and depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArchId {
    SimpleA,
    SimpleB,
    SimpleC,
    SimpleD,
    ImageA,
    ImageB,
    ImageC,
}

impl ArchId {
    pub const ALL: [ArchId; 7] = [
        ArchId::SimpleA,
        ArchId::SimpleB,
        ArchId::SimpleC,
        ArchId::SimpleD,
        ArchId::ImageA,
        ArchId::ImageB,
        ArchId::ImageC,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "simple-a" => ArchId::SimpleA,
            "simple-b" => ArchId::SimpleB,
            "simple-c" => ArchId::SimpleC,
            "simple-d" => ArchId::SimpleD,
            "mnist-a" => ArchId::ImageA,
            "mnist-b" => ArchId::ImageB,
            "mnist-c" => ArchId::ImageC,
            other => return Err(invalid(alloc::format!("unknown architecture \"{other}\""))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ArchId::SimpleA => "simple-a",
            ArchId::SimpleB => "simple-b",
            ArchId::SimpleC => "simple-c",
            ArchId::SimpleD => "simple-d",
            ArchId::ImageA => "mnist-a",
            ArchId::ImageB => "mnist-b",
            ArchId::ImageC => "mnist-c",
        }
    }

    pub fn is_image(&self) -> bool {
        matches!(self, ArchId::ImageA | ArchId::ImageB | ArchId::ImageC)
    }

    /// Rotation slots available ahead of the closing single-qubit stage
    /// (image families only).
    pub fn slot_budget(&self) -> Option<usize> {
        match self {
            ArchId::ImageA => Some(49),
            ArchId::ImageB => Some(32),
            ArchId::ImageC => Some(24),
            _ => None,
        }
    }

    /// Whether the decision function carries a trainable output bias.
    /// The deepest image family keeps it frozen at zero.
    pub fn bias_trainable(&self) -> bool {
        matches!(self, ArchId::ImageB | ArchId::ImageC)
    }
}

impl core::fmt::Display for ArchId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// A bound-parameter circuit program plus its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTemplate {
    pub arch: ArchId,
    pub fsim: FSimParams,
    ops: Vec<TemplateOp>,
    layer_count: usize,
    weight_count: usize,
    feature_count: usize,
    conv: Option<ConvSpec>,
    conv_slot_count: usize,
    readout: usize,
}

struct Builder {
    ops: Vec<TemplateOp>,
    layers: usize,
    next: usize,
}

const PAIRS_OUTER: [(usize, usize); 2] = [(0, 1), (2, 3)];
const PAIRS_INNER: [(usize, usize); 1] = [(1, 2)];

fn axis_for(layer: usize) -> Axis {
    if layer.is_multiple_of(2) { Axis::X } else { Axis::Y }
}

fn pairs_for(layer: usize) -> &'static [(usize, usize)] {
    if layer.is_multiple_of(2) { &PAIRS_OUTER } else { &PAIRS_INNER }
}

impl Builder {
    fn new() -> Self {
        Builder { ops: Vec::new(), layers: 0, next: 0 }
    }

    /// One rotation on every qubit, same axis, fresh weight slots.
    fn rot_full(&mut self, axis: Axis) {
        for q in 0..QUBITS {
            self.ops.push(TemplateOp::Rot { qubit: q, axis, slot: ParamSlot::Weight(self.next + q) });
        }
        self.next += QUBITS;
        self.layers += 1;
    }

    /// Encoder layer: X rotations whose angles are feature q plus weight q.
    fn rot_merged(&mut self) {
        for q in 0..QUBITS {
            self.ops.push(TemplateOp::Rot {
                qubit: q,
                axis: Axis::X,
                slot: ParamSlot::Merged { feature: q, weight: self.next + q },
            });
        }
        self.next += QUBITS;
        self.layers += 1;
    }

    fn rot_single(&mut self, qubit: usize, axis: Axis) {
        self.ops.push(TemplateOp::Rot { qubit, axis, slot: ParamSlot::Weight(self.next) });
        self.next += 1;
        self.layers += 1;
    }

    /// Simultaneous entanglers form one layer.
    fn ent(&mut self, pairs: &[(usize, usize)]) {
        for &(a, b) in pairs {
            self.ops.push(TemplateOp::Ent { a, b });
        }
        self.layers += 1;
    }

    /// Closing y-x-y stage on the readout qubit; three layers, three slots.
    fn euler(&mut self, qubit: usize) {
        for axis in [Axis::Y, Axis::X, Axis::Y] {
            self.rot_single(qubit, axis);
        }
    }
}

/// Construct a template. Image architectures require a patch geometry whose
/// kernel count fits the slot budget; simple architectures take none.
pub fn build_template(arch: ArchId, fsim: FSimParams, conv: Option<ConvSpec>) -> Result<CircuitTemplate> {
    let mut b = Builder::new();
    let mut conv_slot_count = 0;
    match arch {
        ArchId::SimpleA => {
            b.rot_merged();
            b.ent(&[(0, 1)]);
            b.ent(&[(1, 2)]);
            b.ent(&[(2, 3)]);
            b.rot_full(Axis::X);
            b.rot_full(Axis::Y);
            b.ent(&[(2, 3)]);
            b.ent(&[(1, 2)]);
            b.ent(&[(0, 1)]);
            b.euler(0);
        }
        ArchId::SimpleB => {
            b.rot_merged();
            b.ent(&PAIRS_OUTER);
            b.ent(&PAIRS_INNER);
            b.rot_full(Axis::X);
            b.rot_full(Axis::Y);
            b.ent(&PAIRS_INNER);
            b.ent(&PAIRS_OUTER);
            b.euler(0);
        }
        ArchId::SimpleC => {
            b.rot_merged();
            b.ent(&PAIRS_OUTER);
            b.rot_full(Axis::X);
            b.ent(&PAIRS_INNER);
            b.rot_full(Axis::Y);
            b.ent(&PAIRS_OUTER);
            b.euler(0);
        }
        ArchId::SimpleD => {
            b.rot_merged();
            b.ent(&PAIRS_INNER);
            b.ent(&PAIRS_OUTER);
            b.rot_full(Axis::X);
            b.rot_full(Axis::Y);
            b.ent(&PAIRS_OUTER);
            b.ent(&PAIRS_INNER);
            b.euler(0);
        }
        ArchId::ImageA | ArchId::ImageB | ArchId::ImageC => {
            let spec = conv.ok_or_else(|| invalid("image architectures need a patch geometry"))?;
            spec.validate()?;
            let budget = arch.slot_budget().unwrap();
            conv_slot_count = spec.patch_count();
            if conv_slot_count > budget {
                return Err(invalid(alloc::format!(
                    "{} kernel angles exceed the {budget}-slot budget of {arch}",
                    conv_slot_count
                )));
            }
            match arch {
                // Twelve alternating rotation layers with entanglers between
                // them, a final extra rotation on the readout qubit, then the
                // closing stage. 12*4 + 1 = 49 slots.
                ArchId::ImageA => {
                    for l in 0..11 {
                        b.rot_full(axis_for(l));
                        b.ent(pairs_for(l));
                    }
                    b.rot_full(axis_for(11));
                    b.rot_single(0, Axis::X);
                    b.euler(0);
                }
                // Six (rotation, entangler) rounds plus two closing rotation
                // layers. 8*4 = 32 slots.
                ArchId::ImageB => {
                    for l in 0..6 {
                        b.rot_full(axis_for(l));
                        b.ent(pairs_for(l));
                    }
                    b.rot_full(axis_for(6));
                    b.rot_full(axis_for(7));
                    b.euler(0);
                }
                // Six (rotation, entangler) rounds. 6*4 = 24 slots.
                ArchId::ImageC => {
                    for l in 0..6 {
                        b.rot_full(axis_for(l));
                        b.ent(pairs_for(l));
                    }
                    b.euler(0);
                }
                _ => unreachable!(),
            }
        }
    }
    if !arch.is_image() && conv.is_some() {
        return Err(invalid("simple architectures take no patch geometry"));
    }
    debug_assert!(weights_are_dense(&b.ops, b.next));
    Ok(CircuitTemplate {
        arch,
        fsim,
        ops: b.ops,
        layer_count: b.layers,
        weight_count: b.next,
        feature_count: if arch.is_image() { 0 } else { QUBITS },
        conv,
        conv_slot_count,
        readout: 0,
    })
}

fn weights_are_dense(ops: &[TemplateOp], count: usize) -> bool {
    let mut seen = alloc::vec![false; count];
    for op in ops {
        if let TemplateOp::Rot { slot, .. } = op {
            let w = match slot {
                ParamSlot::Weight(w) => *w,
                ParamSlot::Merged { weight, .. } => *weight,
            };
            if w >= count || seen[w] {
                return false;
            }
            seen[w] = true;
        }
    }
    seen.iter().all(|&s| s)
}

impl CircuitTemplate {
    pub fn ops(&self) -> &[TemplateOp] {
        &self.ops
    }

    /// Hardware depth: number of sequential gate layers.
    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    /// Length of the angle buffer `bind_and_run` consumes.
    pub fn weight_count(&self) -> usize {
        self.weight_count
    }

    /// Encoded features expected per sample (zero for image templates).
    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn conv(&self) -> Option<&ConvSpec> {
        self.conv.as_ref()
    }

    /// Leading angle slots driven by kernel responses.
    pub fn conv_slot_count(&self) -> usize {
        self.conv_slot_count
    }

    /// Angle slots that are plain trainable weights (everything that is not
    /// kernel-driven, including the closing stage).
    pub fn direct_slot_count(&self) -> usize {
        self.weight_count - self.conv_slot_count
    }

    pub fn readout(&self) -> usize {
        self.readout
    }

    /// Total trainable scalars: kernel weights and biases, direct angles,
    /// and the output bias where the family trains one.
    pub fn trainable_param_count(&self) -> usize {
        let kernel_scalars = match &self.conv {
            Some(spec) => spec.patch_count() * (spec.patch_len() + 1),
            None => 0,
        };
        kernel_scalars + self.direct_slot_count() + usize::from(self.arch.bias_trainable())
    }

    fn resolve(&self, slot: &ParamSlot, features: &[f64], theta: &[f64]) -> f64 {
        match slot {
            ParamSlot::Weight(w) => theta[*w],
            ParamSlot::Merged { feature, weight } => features[*feature] + theta[*weight],
        }
    }

    /// Run the circuit on |0000> and return the readout-qubit z expectation.
    pub fn bind_and_run(&self, features: &[f64], theta: &[f64], mode: MeasurementMode) -> Result<f64> {
        if features.len() != self.feature_count {
            return Err(Error::Mismatch {
                what: "feature count",
                expected: self.feature_count,
                actual: features.len(),
            });
        }
        if theta.len() != self.weight_count {
            return Err(Error::Mismatch {
                what: "circuit angle count",
                expected: self.weight_count,
                actual: theta.len(),
            });
        }
        let mut state = StateVector::zero(QUBITS)?;
        for op in &self.ops {
            match op {
                TemplateOp::Rot { qubit, axis, slot } => {
                    let angle = self.resolve(slot, features, theta);
                    let gate = match axis {
                        Axis::X => GateOp::Rx { qubit: *qubit, angle },
                        Axis::Y => GateOp::Ry { qubit: *qubit, angle },
                    };
                    state.apply(&gate)?;
                }
                TemplateOp::Ent { a, b } => {
                    state.apply(&GateOp::FSim {
                        a: *a,
                        b: *b,
                        theta: self.fsim.theta,
                        phi: self.fsim.phi,
                    })?;
                }
            }
        }
        state.measure(self.readout, mode)
    }
}

/// One benchmark configuration: an image family with its receptive field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub arch: ArchId,
    pub lrf: usize,
    pub stride: usize,
}

/// The five image configurations compared in the benchmark table, in table
/// order.
pub fn catalog_entries() -> [CatalogEntry; 5] {
    [
        CatalogEntry { arch: ArchId::ImageA, lrf: 2, stride: 1 },
        CatalogEntry { arch: ArchId::ImageC, lrf: 2, stride: 2 },
        CatalogEntry { arch: ArchId::ImageB, lrf: 2, stride: 2 },
        CatalogEntry { arch: ArchId::ImageC, lrf: 3, stride: 2 },
        CatalogEntry { arch: ArchId::ImageA, lrf: 3, stride: 1 },
    ]
}

/// Canonical patch geometry for an image family on the 8x7 digit images.
///
/// Padding is the minimum making the stride tile exactly, except that
/// stride-1 configurations pad the width to a square 8x8 grid. The field
/// traverses the image `max(1, budget / placements)` times so kernels fill
/// as much of the slot budget as whole passes allow.
pub fn catalog_conv(arch: ArchId, lrf: usize, stride: usize) -> Result<ConvSpec> {
    let budget = arch
        .slot_budget()
        .ok_or_else(|| invalid("patch geometry applies to image architectures only"))?;
    if lrf == 0 || stride == 0 {
        return Err(invalid("receptive field and stride must be positive"));
    }
    let (rows, cols) = (8usize, 7usize);
    let pad_to = |dim: usize| -> usize {
        if stride == 1 {
            0
        } else {
            let rem = (dim.max(lrf) - lrf) % stride;
            if rem == 0 { 0 } else { stride - rem }
        }
    };
    let pad_bottom_rows = pad_to(rows);
    let mut pad_right_cols = pad_to(cols);
    if stride == 1 {
        pad_right_cols = rows - cols; // square grid convention
    }
    let mut spec = ConvSpec {
        image_rows: rows,
        image_cols: cols,
        pad_bottom_rows,
        pad_right_cols,
        lrf_rows: lrf,
        lrf_cols: lrf,
        stride,
        passes: 1,
    };
    spec.validate()?;
    let placements = spec.placements();
    if placements > budget {
        return Err(invalid(alloc::format!(
            "{placements} placements exceed the {budget}-slot budget of {arch}"
        )));
    }
    spec.passes = core::cmp::max(1, budget / placements);
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{GateOp, MeasurementMode, StateVector};
    use core::f64::consts::{FRAC_PI_2, PI};

    fn simple(arch: ArchId) -> CircuitTemplate {
        build_template(arch, FSimParams::default(), None).unwrap()
    }

    fn image(arch: ArchId, lrf: usize, stride: usize) -> CircuitTemplate {
        let conv = catalog_conv(arch, lrf, stride).unwrap();
        build_template(arch, FSimParams::default(), Some(conv)).unwrap()
    }

    #[test]
    fn simple_templates_have_fifteen_weights_and_documented_depths() {
        for (arch, layers) in [
            (ArchId::SimpleA, 12),
            (ArchId::SimpleB, 10),
            (ArchId::SimpleC, 9),
            (ArchId::SimpleD, 10),
        ] {
            let t = simple(arch);
            assert_eq!(t.weight_count(), 15, "{arch}");
            assert_eq!(t.trainable_param_count(), 15, "{arch}");
            assert_eq!(t.layer_count(), layers, "{arch}");
            assert_eq!(t.feature_count(), 4, "{arch}");
            assert_eq!(t.conv_slot_count(), 0, "{arch}");
        }
    }

    #[test]
    fn benchmark_catalog_counts_are_exact() {
        let expect = [
            (ArchId::ImageA, 2, 1, 248, 27),
            (ArchId::ImageC, 2, 2, 92, 15),
            (ArchId::ImageB, 2, 2, 164, 17),
            (ArchId::ImageC, 3, 2, 244, 15),
            (ArchId::ImageA, 3, 1, 376, 27),
        ];
        for (entry, (arch, lrf, stride, params, layers)) in
            catalog_entries().iter().zip(expect)
        {
            assert_eq!((entry.arch, entry.lrf, entry.stride), (arch, lrf, stride));
            let t = image(arch, lrf, stride);
            assert_eq!(t.trainable_param_count(), params, "{arch} {lrf}x{lrf} s{stride}");
            assert_eq!(t.layer_count(), layers, "{arch} {lrf}x{lrf} s{stride}");
        }
    }

    #[test]
    fn catalog_geometry_pads_and_passes_as_documented() {
        let c3 = catalog_conv(ArchId::ImageC, 3, 2).unwrap();
        assert_eq!((c3.pad_bottom_rows, c3.pad_right_cols), (1, 0));
        assert_eq!(c3.placements(), 12);
        assert_eq!(c3.passes, 2);

        let c2 = catalog_conv(ArchId::ImageC, 2, 2).unwrap();
        assert_eq!((c2.pad_bottom_rows, c2.pad_right_cols), (0, 1));
        assert_eq!(c2.placements(), 16);
        assert_eq!(c2.passes, 1);

        let b2 = catalog_conv(ArchId::ImageB, 2, 2).unwrap();
        assert_eq!(b2.placements(), 16);
        assert_eq!(b2.passes, 2);

        let a2 = catalog_conv(ArchId::ImageA, 2, 1).unwrap();
        assert_eq!((a2.padded_rows(), a2.padded_cols()), (8, 8));
        assert_eq!(a2.placements(), 49);
        assert_eq!(a2.passes, 1);

        let a3 = catalog_conv(ArchId::ImageA, 3, 1).unwrap();
        assert_eq!(a3.placements(), 36);
        assert_eq!(a3.passes, 1);
    }

    #[test]
    fn image_slot_arithmetic_decomposes() {
        // 24 slots: 24 kernels, 0 free; closing stage is separate.
        let t = image(ArchId::ImageC, 3, 2);
        assert_eq!(t.weight_count(), 24 + 3);
        assert_eq!(t.conv_slot_count(), 24);
        assert_eq!(t.direct_slot_count(), 3);
        // 16 kernels leave 8 free angles.
        let t = image(ArchId::ImageC, 2, 2);
        assert_eq!(t.weight_count(), 27);
        assert_eq!(t.conv_slot_count(), 16);
        assert_eq!(t.direct_slot_count(), 8 + 3);
        // Family a trains no output bias.
        let t = image(ArchId::ImageA, 3, 1);
        assert_eq!(t.weight_count(), 52);
        assert_eq!(t.conv_slot_count(), 36);
        assert_eq!(t.direct_slot_count(), 13 + 3);
    }

    #[test]
    fn every_template_rests_at_plus_one() {
        for arch in ArchId::ALL {
            let t = if arch.is_image() { image(arch, 2, 2) } else { simple(arch) };
            let g = t
                .bind_and_run(
                    &alloc::vec![0.0; t.feature_count()],
                    &alloc::vec![0.0; t.weight_count()],
                    MeasurementMode::Exact,
                )
                .unwrap();
            assert!((g - 1.0).abs() < 1e-12, "{arch}: g = {g}");
        }
    }

    #[test]
    fn merged_slots_add_features_and_weights() {
        let t = simple(ArchId::SimpleA);
        let mut theta = alloc::vec![0.15; 15];
        theta[2] = 0.3;
        let features = [0.4, -0.2, 0.55, 0.1];
        let g_split = t.bind_and_run(&features, &theta, MeasurementMode::Exact).unwrap();
        // Move each feature entirely into the weight slot.
        let mut merged_theta = theta.clone();
        for q in 0..4 {
            merged_theta[q] += features[q];
        }
        let g_folded = t
            .bind_and_run(&[0.0; 4], &merged_theta, MeasurementMode::Exact)
            .unwrap();
        assert!((g_split - g_folded).abs() < 1e-12);
    }

    // Structural oracle: simple-a re-built gate by gate on a raw register.
    #[test]
    fn simple_a_matches_a_hand_written_program() {
        let t = simple(ArchId::SimpleA);
        let features = [0.3, -0.7, 1.1, 0.45];
        let theta: alloc::vec::Vec<f64> =
            (0..15).map(|i| 0.1 * i as f64 - 0.6).collect();
        let g = t.bind_and_run(&features, &theta, MeasurementMode::Exact).unwrap();

        let fs = FSimParams::default();
        let mut s = StateVector::zero(4).unwrap();
        for q in 0..4 {
            s.apply(&GateOp::Rx { qubit: q, angle: features[q] + theta[q] }).unwrap();
        }
        for (a, b) in [(0, 1), (1, 2), (2, 3)] {
            s.apply(&GateOp::FSim { a, b, theta: fs.theta, phi: fs.phi }).unwrap();
        }
        for q in 0..4 {
            s.apply(&GateOp::Rx { qubit: q, angle: theta[4 + q] }).unwrap();
        }
        for q in 0..4 {
            s.apply(&GateOp::Ry { qubit: q, angle: theta[8 + q] }).unwrap();
        }
        for (a, b) in [(2, 3), (1, 2), (0, 1)] {
            s.apply(&GateOp::FSim { a, b, theta: fs.theta, phi: fs.phi }).unwrap();
        }
        s.apply(&GateOp::Ry { qubit: 0, angle: theta[12] }).unwrap();
        s.apply(&GateOp::Rx { qubit: 0, angle: theta[13] }).unwrap();
        s.apply(&GateOp::Ry { qubit: 0, angle: theta[14] }).unwrap();
        let oracle = s.expect_z(0).unwrap();
        assert!((g - oracle).abs() < 1e-13, "template {g} vs oracle {oracle}");
    }

    #[test]
    fn closing_stage_is_y_x_y_on_the_readout() {
        let t = simple(ArchId::SimpleA);
        let mut theta = alloc::vec![0.0; 15];
        // Outer slots share the y axis: angles add.
        theta[12] = 0.5;
        theta[14] = 0.3;
        let g = t.bind_and_run(&[0.0; 4], &theta, MeasurementMode::Exact).unwrap();
        assert!((g - 0.8f64.cos()).abs() < 1e-12);
        // A y(pi/2) then the middle slot: an x rotation fixes the state on
        // the x axis, so g stays 0 for any middle angle.
        let mut theta = alloc::vec![0.0; 15];
        theta[12] = FRAC_PI_2;
        theta[13] = 0.7;
        let g = t.bind_and_run(&[0.0; 4], &theta, MeasurementMode::Exact).unwrap();
        assert!(g.abs() < 1e-12, "middle stage must rotate about x, got {g}");
    }

    #[test]
    fn rotations_are_two_pi_periodic() {
        for arch in [ArchId::SimpleA, ArchId::SimpleC] {
            let t = simple(arch);
            let theta: alloc::vec::Vec<f64> =
                (0..15).map(|i| 0.37 * i as f64 - 1.8).collect();
            let features = [0.9, -0.4, 0.2, 1.3];
            let g0 = t.bind_and_run(&features, &theta, MeasurementMode::Exact).unwrap();
            for shifted_slot in [0usize, 7, 14] {
                let mut shifted = theta.clone();
                shifted[shifted_slot] += 2.0 * PI;
                let g1 = t.bind_and_run(&features, &shifted, MeasurementMode::Exact).unwrap();
                assert!((g0 - g1).abs() < 1e-9, "{arch} slot {shifted_slot}");
            }
        }
    }

    #[test]
    fn weight_slots_are_dense_and_unique_for_every_architecture() {
        for arch in ArchId::ALL {
            let t = if arch.is_image() {
                let (lrf, stride) = if arch == ArchId::ImageA { (3, 1) } else { (3, 2) };
                image(arch, lrf, stride)
            } else {
                simple(arch)
            };
            assert!(super::weights_are_dense(t.ops(), t.weight_count()), "{arch}");
            let rotations = t
                .ops()
                .iter()
                .filter(|op| matches!(op, TemplateOp::Rot { .. }))
                .count();
            assert_eq!(rotations, t.weight_count(), "{arch}: one slot per rotation");
        }
    }

    #[test]
    fn entangler_counts_match_the_layouts() {
        let count = |t: &CircuitTemplate| {
            t.ops().iter().filter(|op| matches!(op, TemplateOp::Ent { .. })).count()
        };
        assert_eq!(count(&simple(ArchId::SimpleA)), 6);
        assert_eq!(count(&simple(ArchId::SimpleB)), 6); // 2+1+1+2
        assert_eq!(count(&simple(ArchId::SimpleC)), 5); // 2+1+2
        assert_eq!(count(&simple(ArchId::SimpleD)), 6);
        // Image families: alternating 2,1,2,1,... per round.
        assert_eq!(count(&image(ArchId::ImageC, 3, 2)), 2 + 1 + 2 + 1 + 2 + 1);
        assert_eq!(count(&image(ArchId::ImageB, 2, 2)), 9);
        assert_eq!(count(&image(ArchId::ImageA, 3, 1)), 6 * 2 + 5);
    }

    #[test]
    fn misconfigured_builds_are_rejected() {
        assert!(build_template(ArchId::SimpleA, FSimParams::default(), Some(ConvSpec::default())).is_err());
        assert!(build_template(ArchId::ImageC, FSimParams::default(), None).is_err());
        // 4x4 stride-1 on 8x8 gives 25 placements > 24 budget.
        let too_many = ConvSpec {
            pad_bottom_rows: 0,
            pad_right_cols: 1,
            lrf_rows: 4,
            lrf_cols: 4,
            stride: 1,
            passes: 1,
            ..ConvSpec::default()
        };
        assert!(build_template(ArchId::ImageC, FSimParams::default(), Some(too_many)).is_err());
    }

    #[test]
    fn binding_validates_buffer_lengths() {
        let t = simple(ArchId::SimpleB);
        assert!(t.bind_and_run(&[0.0; 3], &alloc::vec![0.0; 15], MeasurementMode::Exact).is_err());
        assert!(t.bind_and_run(&[0.0; 4], &alloc::vec![0.0; 14], MeasurementMode::Exact).is_err());
        let t = image(ArchId::ImageC, 3, 2);
        assert!(t.bind_and_run(&[0.0; 4], &alloc::vec![0.0; 27], MeasurementMode::Exact).is_err());
        assert!(t.bind_and_run(&[], &alloc::vec![0.0; 24], MeasurementMode::Exact).is_err());
    }

    #[test]
    fn architecture_names_round_trip() {
        for arch in ArchId::ALL {
            assert_eq!(ArchId::parse(arch.name()).unwrap(), arch);
        }
        assert!(ArchId::parse("simple-e").is_err());
    }

    #[test]
    fn default_entangler_parameters() {
        let fs = FSimParams::default();
        assert!((fs.theta - FRAC_PI_2).abs() < 1e-15);
        assert!((fs.phi - 0.1 * PI).abs() < 1e-15);
    }
}
