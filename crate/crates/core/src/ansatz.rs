//! Parameterized circuit templates and the reusable two-qubit blocks.
//!
//! A [`CircuitTemplate`] is an ordered list of gate placements whose angles
//! are looked up in a binding vector at evaluation time. Slots below
//! `n_params` are trainable; slots at `n_params` and above read from the
//! per-sample feature vector (encoding and re-encoding gates), so one
//! template describes the whole data-dependent circuit.

use crate::error::{Error, Result};
use crate::gates::Mat2;
use crate::state::{QubitIndex, StateVector};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U3,
    PauliX,
    Cnot,
    Crx,
    Crz,
}

impl GateKind {
    /// Number of angle slots the gate consumes.
    pub fn arity(self) -> usize {
        match self {
            GateKind::PauliX | GateKind::Cnot => 0,
            GateKind::U3 => 3,
            _ => 1,
        }
    }

    /// Controlled rotations need the four-term shift rule; plain rotations
    /// (including each U3 angle, which enters as a single Rz factor) use the
    /// two-term rule.
    pub fn is_controlled_rotation(self) -> bool {
        matches!(self, GateKind::Crx | GateKind::Crz)
    }
}

/// One gate in a template: kind, wire(s), and angle slot indices.
#[derive(Clone, Debug)]
pub struct GatePlacement {
    pub kind: GateKind,
    pub target: QubitIndex,
    pub control: Option<QubitIndex>,
    pub slots: Vec<usize>,
}

impl GatePlacement {
    fn single(kind: GateKind, target: QubitIndex, slots: Vec<usize>) -> Self {
        GatePlacement {
            kind,
            target,
            control: None,
            slots,
        }
    }

    fn controlled(
        kind: GateKind,
        control: QubitIndex,
        target: QubitIndex,
        slots: Vec<usize>,
    ) -> Self {
        GatePlacement {
            kind,
            target,
            control: Some(control),
            slots,
        }
    }
}

/// Angle sources for one evaluation: trainable parameters followed by the
/// per-sample feature angles.
#[derive(Clone, Copy)]
pub struct Binding<'a> {
    pub params: &'a [f64],
    pub features: &'a [f64],
}

impl Binding<'_> {
    fn value(&self, slot: usize) -> f64 {
        if slot < self.params.len() {
            self.params[slot]
        } else {
            self.features[slot - self.params.len()]
        }
    }
}

#[derive(Clone, Debug)]
pub struct CircuitTemplate {
    pub n_qubits: usize,
    pub placements: Vec<GatePlacement>,
    pub n_params: usize,
    pub n_feature_slots: usize,
}

impl CircuitTemplate {
    pub fn new(
        n_qubits: usize,
        placements: Vec<GatePlacement>,
        n_params: usize,
        n_feature_slots: usize,
    ) -> Result<Self> {
        let t = CircuitTemplate {
            n_qubits,
            placements,
            n_params,
            n_feature_slots,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let n_slots = self.n_params + self.n_feature_slots;
        for (i, p) in self.placements.iter().enumerate() {
            if p.slots.len() != p.kind.arity() {
                return Err(Error::Validation(format!(
                    "placement {i}: {:?} expects {} slots, got {}",
                    p.kind,
                    p.kind.arity(),
                    p.slots.len()
                )));
            }
            if let Some(&s) = p.slots.iter().find(|&&s| s >= n_slots) {
                return Err(Error::Validation(format!(
                    "placement {i}: slot {s} out of range ({n_slots} slots)"
                )));
            }
            if p.target.get() > self.n_qubits {
                return Err(Error::Validation(format!(
                    "placement {i}: target {} beyond {} qubits",
                    p.target, self.n_qubits
                )));
            }
            if let Some(c) = p.control {
                if c.get() > self.n_qubits {
                    return Err(Error::Validation(format!(
                        "placement {i}: control {c} beyond {} qubits",
                        self.n_qubits
                    )));
                }
                if c == p.target {
                    return Err(Error::Validation(format!(
                        "placement {i}: control equals target ({c})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Apply every placement in order.
    pub fn apply(&self, state: &mut StateVector, binding: &Binding) -> Result<()> {
        self.apply_shifted(state, binding, None)
    }

    /// Apply with one angle occurrence shifted: `(placement index, slot
    /// position within the placement, delta)`. This is the primitive the
    /// parameter-shift gradient is built on; a shared slot is shifted one
    /// occurrence at a time.
    pub fn apply_shifted(
        &self,
        state: &mut StateVector,
        binding: &Binding,
        shift: Option<(usize, usize, f64)>,
    ) -> Result<()> {
        self.apply_range(state, binding, 0, self.placements.len(), shift)
    }

    /// Apply placements `[from, to)` only. Lets the gradient reuse a cached
    /// prefix state and replay just the suffix behind each shifted gate.
    pub fn apply_range(
        &self,
        state: &mut StateVector,
        binding: &Binding,
        from: usize,
        to: usize,
        shift: Option<(usize, usize, f64)>,
    ) -> Result<()> {
        for (idx, p) in self.placements[from..to]
            .iter()
            .enumerate()
            .map(|(i, p)| (from + i, p))
        {
            let angle = |pos: usize| {
                let mut v = binding.value(p.slots[pos]);
                if let Some((pi, pp, delta)) = shift {
                    if pi == idx && pp == pos {
                        v += delta;
                    }
                }
                v
            };
            match p.kind {
                GateKind::Rx => state.apply_single(p.target, &Mat2::rx(angle(0)))?,
                GateKind::Ry => state.apply_single(p.target, &Mat2::ry(angle(0)))?,
                GateKind::Rz => state.apply_single(p.target, &Mat2::rz(angle(0)))?,
                GateKind::U3 => {
                    state.apply_single(p.target, &Mat2::u3(angle(0), angle(1), angle(2)))?
                }
                GateKind::PauliX => state.apply_x(p.target)?,
                GateKind::Cnot => state.apply_cnot(self.control_of(idx)?, p.target)?,
                GateKind::Crx => {
                    state.apply_controlled(self.control_of(idx)?, p.target, &Mat2::rx(angle(0)))?
                }
                GateKind::Crz => {
                    state.apply_controlled(self.control_of(idx)?, p.target, &Mat2::rz(angle(0)))?
                }
            }
        }
        Ok(())
    }

    fn control_of(&self, idx: usize) -> Result<QubitIndex> {
        self.placements[idx]
            .control
            .ok_or_else(|| Error::Validation(format!("placement {idx}: missing control qubit")))
    }

    /// Every (placement, slot position) pair bound to a trainable slot,
    /// grouped by slot. Entry `s` lists the occurrences of parameter `s`.
    pub fn occurrences(&self) -> Vec<Vec<(usize, usize)>> {
        let mut occ = vec![Vec::new(); self.n_params];
        for (i, p) in self.placements.iter().enumerate() {
            for (pos, &s) in p.slots.iter().enumerate() {
                if s < self.n_params {
                    occ[s].push((i, pos));
                }
            }
        }
        occ
    }

    /// Assemble the full circuit matrix column by column by applying the
    /// template to each basis state. Test and verification utility; not
    /// used on any evaluation path.
    pub fn assemble_matrix(&self, binding: &Binding) -> Result<Vec<Vec<Complex64>>> {
        let dim = 1usize << self.n_qubits;
        let mut cols = Vec::with_capacity(dim);
        for b in 0..dim {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[b] = Complex64::new(1.0, 0.0);
            let mut state = StateVector::from_amplitudes(amps)?;
            self.apply(&mut state, binding)?;
            cols.push(state.amplitudes().to_vec());
        }
        // Transpose columns into row-major storage.
        let mut matrix = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (col, amps) in cols.iter().enumerate() {
            for (row, &a) in amps.iter().enumerate() {
                matrix[row][col] = a;
            }
        }
        Ok(matrix)
    }
}

fn distinct(qa: QubitIndex, qb: QubitIndex) -> Result<()> {
    if qa == qb {
        return Err(Error::Validation(format!(
            "block needs two distinct qubits, got {qa} twice"
        )));
    }
    Ok(())
}

/// Two-qubit convolution block spanning SO(4): Ry pairs interleaved with
/// two CNOTs, `qa` the control. 6 angle slots, 8 placements in circuit
/// order.
pub fn conv_ansatz_so4(
    qa: QubitIndex,
    qb: QubitIndex,
    slots: &[usize; 6],
) -> Result<Vec<GatePlacement>> {
    distinct(qa, qb)?;
    Ok(vec![
        GatePlacement::single(GateKind::Ry, qa, vec![slots[0]]),
        GatePlacement::single(GateKind::Ry, qb, vec![slots[1]]),
        GatePlacement::controlled(GateKind::Cnot, qa, qb, vec![]),
        GatePlacement::single(GateKind::Ry, qa, vec![slots[2]]),
        GatePlacement::single(GateKind::Ry, qb, vec![slots[3]]),
        GatePlacement::controlled(GateKind::Cnot, qa, qb, vec![]),
        GatePlacement::single(GateKind::Ry, qa, vec![slots[4]]),
        GatePlacement::single(GateKind::Ry, qb, vec![slots[5]]),
    ])
}

/// Two-qubit convolution block spanning SU(4) up to global phase: U3 pairs
/// around a three-CNOT core. 15 angle slots, 10 placements. The first and
/// third CNOTs target `qa`, the middle one targets `qb`; with all angles
/// zero the block therefore reduces to SWAP, not identity.
pub fn conv_ansatz_su4(
    qa: QubitIndex,
    qb: QubitIndex,
    slots: &[usize; 15],
) -> Result<Vec<GatePlacement>> {
    distinct(qa, qb)?;
    Ok(vec![
        GatePlacement::single(GateKind::U3, qa, vec![slots[0], slots[1], slots[2]]),
        GatePlacement::single(GateKind::U3, qb, vec![slots[3], slots[4], slots[5]]),
        GatePlacement::controlled(GateKind::Cnot, qb, qa, vec![]),
        GatePlacement::single(GateKind::Rz, qa, vec![slots[6]]),
        GatePlacement::single(GateKind::Ry, qb, vec![slots[7]]),
        GatePlacement::controlled(GateKind::Cnot, qa, qb, vec![]),
        GatePlacement::single(GateKind::Ry, qb, vec![slots[8]]),
        GatePlacement::controlled(GateKind::Cnot, qb, qa, vec![]),
        GatePlacement::single(GateKind::U3, qa, vec![slots[9], slots[10], slots[11]]),
        GatePlacement::single(GateKind::U3, qb, vec![slots[12], slots[13], slots[14]]),
    ])
}

/// Pooling block concentrating two qubits into `kept`: CRz, X on the
/// control, CRx. The caller retires `control` from all later layers.
pub fn pooling_ansatz(
    control: QubitIndex,
    kept: QubitIndex,
    slots: &[usize; 2],
) -> Result<Vec<GatePlacement>> {
    distinct(control, kept)?;
    Ok(vec![
        GatePlacement::controlled(GateKind::Crz, control, kept, vec![slots[0]]),
        GatePlacement::single(GateKind::PauliX, control, vec![]),
        GatePlacement::controlled(GateKind::Crx, control, kept, vec![slots[1]]),
    ])
}

/// Bidirectional interaction block joining two output qubits: Ry pairs
/// around two opposing CRx gates. 8 angle slots (slot 6 drives the
/// q1-controlled CRx, slot 7 the q2-controlled one); identity at zero.
pub fn interaction_block(
    q1: QubitIndex,
    q2: QubitIndex,
    slots: &[usize; 8],
) -> Result<Vec<GatePlacement>> {
    distinct(q1, q2)?;
    Ok(vec![
        GatePlacement::single(GateKind::Ry, q1, vec![slots[0]]),
        GatePlacement::single(GateKind::Ry, q2, vec![slots[1]]),
        GatePlacement::controlled(GateKind::Crx, q1, q2, vec![slots[6]]),
        GatePlacement::single(GateKind::Ry, q1, vec![slots[2]]),
        GatePlacement::single(GateKind::Ry, q2, vec![slots[3]]),
        GatePlacement::controlled(GateKind::Crx, q2, q1, vec![slots[7]]),
        GatePlacement::single(GateKind::Ry, q1, vec![slots[4]]),
        GatePlacement::single(GateKind::Ry, q2, vec![slots[5]]),
    ])
}
