//! Dense statevector engine.
//!
//! Holds the full complex amplitude vector of an n-qubit register and
//! applies gates by in-place stride iteration over amplitude pairs; the
//! full 2^n×2^n operator matrix is never materialized.
//!
//! Qubit indices are 1-based and qubit 1 owns the most significant bit of
//! the basis index (top wire of a circuit drawing). All operations take
//! `&mut self` on an exclusively-owned state; separate states can be
//! evaluated on separate threads freely.

use crate::error::{Error, Result};
use crate::gates::Mat2;
use num_complex::Complex64;

/// Largest register the engine accepts. 2^14 amplitudes keep every
/// supported circuit comfortably in cache-friendly territory.
pub const MAX_QUBITS: usize = 14;

/// 1-based qubit index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitIndex(usize);

impl QubitIndex {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::Validation("qubit indices are 1-based".into()));
        }
        Ok(QubitIndex(index))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for QubitIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Convenience constructor for literal indices; panics on 0.
pub fn q(index: usize) -> QubitIndex {
    QubitIndex::new(index).expect("qubit index must be >= 1")
}

/// Reduced density matrix of a 1- or 2-qubit subset, row-major.
#[derive(Clone, Debug)]
pub struct ReducedDensity {
    pub dim: usize,
    pub matrix: Vec<Complex64>,
}

impl ReducedDensity {
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.at(i, i)).sum()
    }

    /// Diagonal as real probabilities.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.at(i, i).re).collect()
    }
}

#[derive(Clone, Debug)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count {n} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Wrap an explicit amplitude vector; length must be a power of two and
    /// the norm must already be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Validation(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count {n} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        let state = StateVector { n_qubits: n, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "amplitude vector is not normalized (norm {norm})"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Bit position (from the least significant end) carrying `q`.
    fn bit(&self, q: QubitIndex) -> Result<usize> {
        if q.get() > self.n_qubits {
            return Err(Error::Validation(format!(
                "{q} out of range for {}-qubit state",
                self.n_qubits
            )));
        }
        Ok(self.n_qubits - q.get())
    }

    /// Apply a single-qubit unitary to qubit `target`.
    ///
    /// Unitarity is checked in debug builds only; the release hot loop
    /// trusts its callers.
    pub fn apply_single(&mut self, target: QubitIndex, u: &Mat2) -> Result<()> {
        #[cfg(debug_assertions)]
        if !u.is_unitary(1e-10) {
            return Err(Error::Validation("gate matrix is not unitary".into()));
        }
        let stride = 1usize << self.bit(target)?;
        let [[u00, u01], [u10, u11]] = u.0;
        let mut base = 0;
        while base < self.amps.len() {
            for i in base..base + stride {
                let j = i | stride;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = u00 * a + u01 * b;
                self.amps[j] = u10 * a + u11 * b;
            }
            base += stride << 1;
        }
        Ok(())
    }

    /// Apply `u` to `target` on the subspace where `control` is |1⟩.
    pub fn apply_controlled(
        &mut self,
        control: QubitIndex,
        target: QubitIndex,
        u: &Mat2,
    ) -> Result<()> {
        #[cfg(debug_assertions)]
        if !u.is_unitary(1e-10) {
            return Err(Error::Validation("gate matrix is not unitary".into()));
        }
        if control == target {
            return Err(Error::Validation(format!(
                "control and target both {control}"
            )));
        }
        let cmask = 1usize << self.bit(control)?;
        let stride = 1usize << self.bit(target)?;
        let [[u00, u01], [u10, u11]] = u.0;
        let mut base = 0;
        while base < self.amps.len() {
            for i in base..base + stride {
                if i & cmask != 0 {
                    let j = i | stride;
                    let a = self.amps[i];
                    let b = self.amps[j];
                    self.amps[i] = u00 * a + u01 * b;
                    self.amps[j] = u10 * a + u11 * b;
                }
            }
            base += stride << 1;
        }
        Ok(())
    }

    /// Pauli-X on one qubit (amplitude pair swap).
    pub fn apply_x(&mut self, target: QubitIndex) -> Result<()> {
        let stride = 1usize << self.bit(target)?;
        let mut base = 0;
        while base < self.amps.len() {
            for i in base..base + stride {
                self.amps.swap(i, i | stride);
            }
            base += stride << 1;
        }
        Ok(())
    }

    /// CNOT: swap the target pair wherever the control bit is set.
    pub fn apply_cnot(&mut self, control: QubitIndex, target: QubitIndex) -> Result<()> {
        if control == target {
            return Err(Error::Validation(format!(
                "control and target both {control}"
            )));
        }
        let cmask = 1usize << self.bit(control)?;
        let stride = 1usize << self.bit(target)?;
        let mut base = 0;
        while base < self.amps.len() {
            for i in base..base + stride {
                if i & cmask != 0 {
                    self.amps.swap(i, i | stride);
                }
            }
            base += stride << 1;
        }
        Ok(())
    }

    fn subset_bits(&self, qs: &[QubitIndex]) -> Result<Vec<usize>> {
        if qs.is_empty() || qs.len() > 2 {
            return Err(Error::Validation(format!(
                "measurement subsets must have 1 or 2 qubits, got {}",
                qs.len()
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Validation(format!("duplicate qubit {}", qs[0])));
        }
        qs.iter().map(|&qi| self.bit(qi)).collect()
    }

    /// Probabilities of each basis outcome on `qs`, all other qubits
    /// marginalized. The first listed qubit is the most significant bit of
    /// the outcome index.
    pub fn marginal_probs(&self, qs: &[QubitIndex]) -> Result<Vec<f64>> {
        let bits = self.subset_bits(qs)?;
        let mut probs = vec![0.0f64; 1 << bits.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            let mut outcome = 0usize;
            for &b in &bits {
                outcome = (outcome << 1) | ((idx >> b) & 1);
            }
            probs[outcome] += amp.norm_sqr();
        }
        Ok(probs)
    }

    /// Partial trace over the complement of `qs`.
    pub fn reduced_density(&self, qs: &[QubitIndex]) -> Result<ReducedDensity> {
        let bits = self.subset_bits(qs)?;
        let dim = 1usize << bits.len();
        // Maps a subset outcome to its contribution to the full basis index.
        let place = |outcome: usize| -> usize {
            bits.iter()
                .rev()
                .enumerate()
                .map(|(k, &b)| ((outcome >> k) & 1) << b)
                .sum()
        };
        let mask: usize = bits.iter().map(|&b| 1usize << b).sum();
        let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
        for env in 0..self.amps.len() {
            if env & mask != 0 {
                continue;
            }
            for row in 0..dim {
                let ar = self.amps[env | place(row)];
                for col in 0..dim {
                    let ac = self.amps[env | place(col)];
                    matrix[row * dim + col] += ar * ac.conj();
                }
            }
        }
        Ok(ReducedDensity { dim, matrix })
    }

    /// ⟨Z⟩ on one qubit: P(0) − P(1).
    pub fn expectation_z(&self, target: QubitIndex) -> Result<f64> {
        let mask = 1usize << self.bit(target)?;
        let mut acc = 0.0;
        for (idx, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            acc += if idx & mask == 0 { p } else { -p };
        }
        Ok(acc)
    }
}
