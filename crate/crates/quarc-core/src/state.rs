//! Dense statevector simulation.
//!
//! Amplitudes are stored little-endian: qubit 0 is the least-significant
//! bit of the basis index, so `amps[0b10]` on two qubits means qubit 1
//! excited, qubit 0 in the ground state. All gates are exactly unitary up
//! to f64 rounding; a norm-drift bound of 1e-10 over hundred-gate
//! sequences is part of the test contract.

use crate::error::invalid;
use crate::fmath;
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rotation and entangler operations.
///
/// `Rx(q, a)` = exp(-i a X/2), `Ry(q, a)` = exp(-i a Y/2): generators have
/// eigenvalues +-1/2, which is what makes the +-pi/2 parameter-shift rule
/// exact. `FSim { theta, phi }` acts on the two-qubit subspace as
///
/// ```text
/// |00> -> |00>
/// |01> -> cos(theta)|01> - i sin(theta)|10>
/// |10> -> -i sin(theta)|01> + cos(theta)|10>
/// |11> -> exp(-i phi)|11>
/// ```
///
/// so `FSim(theta = pi/2, phi = 0)` is an iSWAP up to the -i factor and
/// `FSim(0, 0)` is the identity. The gate is symmetric in its two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    FSim { a: usize, b: usize, theta: f64, phi: f64 },
}

/// How a circuit's readout expectation is produced.
///
/// `Exact` returns the analytic <sigma_z>. `Shots` draws `count` Bernoulli
/// outcomes with p(+1) = (1 + <sigma_z>)/2 from a ChaCha stream seeded by
/// `seed` and returns the mean outcome; a fixed (count, seed) pair always
/// reproduces the same value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementMode {
    Exact,
    Shots { count: u32, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > 24 {
            return Err(invalid("qubit count must be in 1..=24"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(invalid("qubit index out of range"));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        match *gate {
            GateOp::Rx { qubit, angle } => {
                self.check_qubit(qubit)?;
                let (c, s) = (fmath::cos(angle / 2.0), fmath::sin(angle / 2.0));
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ];
                self.apply_single(qubit, &m);
            }
            GateOp::Ry { qubit, angle } => {
                self.check_qubit(qubit)?;
                let (c, s) = (fmath::cos(angle / 2.0), fmath::sin(angle / 2.0));
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ];
                self.apply_single(qubit, &m);
            }
            GateOp::FSim { a, b, theta, phi } => {
                self.check_qubit(a)?;
                self.check_qubit(b)?;
                if a == b {
                    return Err(invalid("entangler qubits must differ"));
                }
                self.apply_fsim(a, b, theta, phi);
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, qubit: usize, m: &[[Complex64; 2]; 2]) {
        let step = 1usize << qubit;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for off in 0..step {
                let i0 = base + off;
                let i1 = i0 | step;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * step;
        }
    }

    fn apply_fsim(&mut self, a: usize, b: usize, theta: f64, phi: f64) {
        let ma = 1usize << a;
        let mb = 1usize << b;
        let (c, s) = (fmath::cos(theta), fmath::sin(theta));
        let swap = Complex64::new(0.0, -s);
        let phase = Complex64::new(fmath::cos(phi), -fmath::sin(phi));
        for k in 0..self.amps.len() {
            let bit_a = k & ma != 0;
            let bit_b = k & mb != 0;
            if bit_a && bit_b {
                self.amps[k] *= phase;
            } else if bit_a && !bit_b {
                // Partner index has the excitation on the other qubit; the
                // mixing block is symmetric so the a/b labeling is immaterial.
                let j = k ^ ma ^ mb;
                let hi = self.amps[k];
                let lo = self.amps[j];
                self.amps[k] = c * hi + swap * lo;
                self.amps[j] = swap * hi + c * lo;
            }
        }
    }

    /// Analytic <sigma_z> on `qubit`: +1 for the ground component.
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = 1usize << qubit;
        let mut acc = 0.0;
        for (k, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            acc += if k & mask == 0 { p } else { -p };
        }
        Ok(acc)
    }

    /// Finite-shot estimate of <sigma_z>: `shots` Bernoulli draws with
    /// p(+1) = (1 + <sigma_z>)/2, returned as (n_plus - n_minus)/shots.
    pub fn sample_expect_z(&self, qubit: usize, shots: u32, seed: u64) -> Result<f64> {
        if shots == 0 {
            return Err(invalid("shot count must be positive"));
        }
        let exact = self.expect_z(qubit)?;
        let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut plus: u64 = 0;
        for _ in 0..shots {
            if rng.gen::<f64>() < p_plus {
                plus += 1;
            }
        }
        let minus = shots as u64 - plus;
        Ok((plus as f64 - minus as f64) / shots as f64)
    }

    /// Readout under either measurement mode.
    pub fn measure(&self, qubit: usize, mode: MeasurementMode) -> Result<f64> {
        match mode {
            MeasurementMode::Exact => self.expect_z(qubit),
            MeasurementMode::Shots { count, seed } => self.sample_expect_z(qubit, count, seed),
        }
    }
}
