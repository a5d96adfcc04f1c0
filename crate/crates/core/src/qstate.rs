//! Statevector simulation of the layered RY/RZ/CZ ansatz.
//!
//! Basis index `i` encodes qubit `k` in bit `k` (little-endian), so outcome
//! `i` of a measurement is pure action `i` of the player.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_dim, invalid, Error, Result};
use crate::game::MixedStrategy;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

/// Pure state of a `q`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    qubits: usize,
}

impl StateVector {
    /// `|0…0⟩` on `qubits` qubits.
    pub fn zero_state(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(invalid(format!("qubit count must be in 1..={MAX_QUBITS}, got {qubits}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amps, qubits })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.qubits {
            Err(Error::QubitOutOfRange { index: qubit, qubits: self.qubits })
        } else {
            Ok(())
        }
    }

    /// `RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]` on `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
        let bit = 1 << qubit;
        for base in (0..self.amps.len()).step_by(2 * bit) {
            for i in base..base + bit {
                let (a0, a1) = (self.amps[i], self.amps[i + bit]);
                self.amps[i] = a0 * c - a1 * s;
                self.amps[i + bit] = a0 * s + a1 * c;
            }
        }
        Ok(())
    }

    /// `RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})` on `qubit`.
    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
        let lo = Complex64::new(c, -s);
        let hi = Complex64::new(c, s);
        let bit = 1 << qubit;
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { lo } else { hi };
        }
        Ok(())
    }

    /// Controlled-Z between two distinct qubits.
    pub fn apply_cz(&mut self, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(invalid("CZ needs two distinct qubits"));
        }
        let mask = (1 << q1) | (1 << q2);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Outcome probabilities `|amp_i|²` of a computational-basis measurement.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Born distribution as a mixed strategy.
    pub fn born_distribution(&self) -> MixedStrategy {
        MixedStrategy::new(self.probabilities()).expect("unitary evolution keeps the state normalized")
    }

    /// Measures `shots` times and returns empirical outcome frequencies.
    pub fn sample_counts<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<MixedStrategy> {
        let freq = sample_frequencies(&self.probabilities(), shots, rng)?;
        MixedStrategy::new(freq)
    }
}

/// Draws `shots` outcomes from `probs` by inverse CDF and returns `n_i / S`.
pub fn sample_frequencies<R: Rng + ?Sized>(probs: &[f64], shots: usize, rng: &mut R) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(invalid("shot count must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = probs.iter().rposition(|&p| p > 0.0).ok_or_else(|| invalid("empty distribution"))?;
    let mut counts = vec![0u32; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    let inv = 1.0 / shots as f64;
    Ok(counts.into_iter().map(|c| c as f64 * inv).collect())
}

/// Shape of the hardware-efficient ansatz: `layers` repetitions of RY on
/// every qubit, RZ on every qubit, then a CZ ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    qubits: usize,
    layers: usize,
}

impl AnsatzSpec {
    pub fn new(qubits: usize, layers: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(invalid(format!("qubit count must be in 1..={MAX_QUBITS}, got {qubits}")));
        }
        if layers == 0 {
            return Err(invalid("ansatz needs at least one layer"));
        }
        Ok(AnsatzSpec { qubits, layers })
    }

    /// Ansatz whose register has exactly `actions` outcomes.
    pub fn for_actions(actions: usize, layers: usize) -> Result<Self> {
        if actions < 2 || !actions.is_power_of_two() {
            return Err(invalid(format!("action count {actions} is not a power of two ≥ 2")));
        }
        Self::new(actions.trailing_zeros() as usize, layers)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn outcomes(&self) -> usize {
        1 << self.qubits
    }

    /// `2·q·L`.
    pub fn param_count(&self) -> usize {
        2 * self.qubits * self.layers
    }

    /// Index of the RY angle of `qubit` in `layer`.
    pub fn ry_index(&self, layer: usize, qubit: usize) -> usize {
        layer * 2 * self.qubits + qubit
    }

    /// Index of the RZ angle of `qubit` in `layer`.
    pub fn rz_index(&self, layer: usize, qubit: usize) -> usize {
        layer * 2 * self.qubits + self.qubits + qubit
    }

    /// Runs the circuit on `|0…0⟩`.
    ///
    /// Parameters are layer-major; within a layer the RY angles for qubits
    /// `0..q` come first, then the RZ angles. The ring is `CZ(k, k+1)` for
    /// all `k` with wrap-around when `q ≥ 3`, a single `CZ(0, 1)` when
    /// `q = 2`, and absent when `q = 1`.
    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        check_dim(self.param_count(), params.len())?;
        let q = self.qubits;
        let mut s = StateVector::zero_state(q)?;
        for block in params.chunks_exact(2 * q) {
            let (ry, rz) = block.split_at(q);
            for (k, &angle) in ry.iter().enumerate() {
                s.apply_ry(k, angle)?;
            }
            for (k, &angle) in rz.iter().enumerate() {
                s.apply_rz(k, angle)?;
            }
            match q {
                1 => {}
                2 => s.apply_cz(0, 1)?,
                _ => {
                    for k in 0..q {
                        s.apply_cz(k, (k + 1) % q)?;
                    }
                }
            }
        }
        Ok(s)
    }

    /// Born probabilities of the prepared state.
    pub fn probabilities(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.prepare(params)?.probabilities())
    }
}
