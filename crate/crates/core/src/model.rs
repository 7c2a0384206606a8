//! Model assembly: wires encoding layers, convolution rings, pooling
//! chains, and measurement heads into evaluable circuits.
//!
//! A convolution layer covers the surviving qubits as a ring in two
//! sublayers (even-offset neighbor pairs, then odd-offset pairs including
//! the wrap pair), every instance sharing the layer's parameter slice when
//! sharing is on. A pooling layer acts on disjoint neighbor pairs and
//! retires the lower-index qubit of each, so the highest-index qubit of a
//! register is the one that survives to measurement.

use crate::ansatz::{
    conv_ansatz_so4, conv_ansatz_su4, interaction_block, pooling_ansatz, Binding, CircuitTemplate,
    GateKind, GatePlacement,
};
use crate::encoding::amplitude_encode;
use crate::error::{Error, Result};
use crate::state::{QubitIndex, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const AMPLITUDE_FEATURES: usize = 16;
pub const PCA_FEATURES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvAnsatz {
    /// 6-parameter real block (SO(4) family).
    So4,
    /// 15-parameter general block (SU(4) family).
    Su4,
}

impl ConvAnsatz {
    pub fn params_per_block(self) -> usize {
        match self {
            ConvAnsatz::So4 => 6,
            ConvAnsatz::Su4 => 15,
        }
    }
}

impl std::fmt::Display for ConvAnsatz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvAnsatz::So4 => write!(f, "ansatz1"),
            ConvAnsatz::Su4 => write!(f, "ansatz2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// 8-qubit QCNN on angle-encoded PCA features, no re-encoding.
    Conventional,
    /// 8-qubit QCNN with selective feature re-encoding after the first two
    /// pooling layers.
    PcaReencoded,
    /// 4-qubit QCNN on an amplitude-encoded autoencoder latent.
    AeAmplitude,
    /// 12-qubit joint circuit: the re-encoded PCA register and the
    /// amplitude register coupled by an interaction block, trained on one
    /// shared loss.
    Joint,
    /// Sum-rule fusion of independently trained PcaReencoded and
    /// AeAmplitude models; has no circuit of its own.
    Ensemble,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Conventional => "conventional",
            ModelKind::PcaReencoded => "pca-reencoded",
            ModelKind::AeAmplitude => "ae-amplitude",
            ModelKind::Joint => "joint",
            ModelKind::Ensemble => "ensemble",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub ansatz: ConvAnsatz,
    /// Share each layer's parameter slice across its block instances.
    pub shared_layers: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, ansatz: ConvAnsatz) -> Self {
        ModelSpec {
            kind,
            ansatz,
            shared_layers: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Head {
    /// Standard-basis probabilities of the surviving qubit.
    BasisProbs,
    /// Softmax over the two final qubits' Pauli-Z expectations.
    SoftmaxZ,
}

/// Two nonnegative class scores summing to one, tagged with the head that
/// produced them.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PredictionVector {
    pub p: [f64; 2],
    pub head: Head,
}

impl PredictionVector {
    pub fn predicted_class(&self) -> usize {
        // Exact ties resolve to class 0.
        if self.p[1] > self.p[0] {
            1
        } else {
            0
        }
    }
}

/// Named contiguous region of the trainable parameter vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerSlice {
    pub label: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug)]
pub enum Measurement {
    BasisProbs(QubitIndex),
    SoftmaxZ(QubitIndex, QubitIndex),
}

/// A fully wired, evaluable model circuit.
#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub spec: ModelSpec,
    pub n_qubits: usize,
    pub template: CircuitTemplate,
    pub layout: Vec<LayerSlice>,
    pub measurement: Measurement,
    /// Angle-encoded feature count (feature slots in the template).
    pub n_angle_features: usize,
    /// Amplitude-encoded feature count loaded into the initial state.
    pub n_amplitude_features: usize,
    /// Qubits retired by each pooling layer, in circuit order.
    pub retired_per_pool: Vec<Vec<QubitIndex>>,
}

/// Per-sample classical inputs. Models read only the parts they use.
#[derive(Clone, Debug, Default)]
pub struct Sample {
    /// Scaled PCA features (rotation angles in [0, π]).
    pub pca_angles: Vec<f64>,
    /// Raw autoencoder latent (amplitude-normalized at encoding time).
    pub ae_features: Vec<f64>,
}

struct TemplateBuilder {
    ansatz: ConvAnsatz,
    shared: bool,
    placements: Vec<GatePlacement>,
    next_param: usize,
    layout: Vec<LayerSlice>,
    retired_per_pool: Vec<Vec<QubitIndex>>,
    feature_base: usize,
}

impl TemplateBuilder {
    fn alloc(&mut self, label: String, len: usize) -> Vec<usize> {
        let start = self.next_param;
        self.next_param += len;
        self.layout.push(LayerSlice { label, start, len });
        (start..start + len).collect()
    }

    fn conv_block(&mut self, qa: QubitIndex, qb: QubitIndex, slots: &[usize]) -> Result<()> {
        let block = match self.ansatz {
            ConvAnsatz::So4 => conv_ansatz_so4(qa, qb, slots.try_into().unwrap())?,
            ConvAnsatz::Su4 => conv_ansatz_su4(qa, qb, slots.try_into().unwrap())?,
        };
        self.placements.extend(block);
        Ok(())
    }

    /// Ring coverage of the survivors: even-offset pairs then odd-offset
    /// pairs with the wrap; a 2-qubit layer is a single application.
    fn conv_layer(&mut self, survivors: &[QubitIndex], label: &str) -> Result<()> {
        let k = survivors.len();
        if k < 2 || k % 2 != 0 {
            return Err(Error::Validation(format!(
                "convolution layer needs an even number of qubits >= 2, got {k}"
            )));
        }
        let mut pairs: Vec<(QubitIndex, QubitIndex)> = Vec::new();
        for i in (0..k).step_by(2) {
            pairs.push((survivors[i], survivors[i + 1]));
        }
        if k > 2 {
            for i in (1..k - 1).step_by(2) {
                pairs.push((survivors[i], survivors[i + 1]));
            }
            pairs.push((survivors[k - 1], survivors[0]));
        }
        let per_block = self.ansatz.params_per_block();
        let shared_slots = if self.shared {
            Some(self.alloc(label.to_string(), per_block))
        } else {
            None
        };
        for (i, &(qa, qb)) in pairs.iter().enumerate() {
            let slots = match &shared_slots {
                Some(s) => s.clone(),
                None => self.alloc(format!("{label}.{i}"), per_block),
            };
            self.conv_block(qa, qb, &slots)?;
        }
        Ok(())
    }

    /// Pool disjoint neighbor pairs, discarding the lower-index qubit of
    /// each; returns the kept qubits.
    fn pool_layer(&mut self, survivors: &[QubitIndex], label: &str) -> Result<Vec<QubitIndex>> {
        let k = survivors.len();
        if k < 2 || k % 2 != 0 {
            return Err(Error::Validation(format!(
                "pooling layer needs an even number of qubits >= 2, got {k}"
            )));
        }
        let shared_slots = if self.shared {
            Some(self.alloc(label.to_string(), 2))
        } else {
            None
        };
        let mut kept = Vec::with_capacity(k / 2);
        let mut retired = Vec::with_capacity(k / 2);
        for (i, pair) in survivors.chunks_exact(2).enumerate() {
            let slots = match &shared_slots {
                Some(s) => s.clone(),
                None => self.alloc(format!("{label}.{i}"), 2),
            };
            let block = pooling_ansatz(pair[0], pair[1], &[slots[0], slots[1]])?;
            self.placements.extend(block);
            retired.push(pair[0]);
            kept.push(pair[1]);
        }
        self.retired_per_pool.push(retired);
        Ok(kept)
    }

    fn angle_encoding(&mut self, qubits: &[QubitIndex], feature_indices: &[usize]) {
        for (&qi, &f) in qubits.iter().zip(feature_indices) {
            self.placements.push(GatePlacement {
                kind: GateKind::Ry,
                target: qi,
                control: None,
                slots: vec![self.feature_base + f],
            });
        }
    }

    /// Full conv/pool cascade of one register. Re-encoding, when enabled,
    /// replays the top-k feature slots onto the survivors after every
    /// pooling layer that is followed by another conv/pool stage.
    fn qcnn_register(
        &mut self,
        qubits: &[QubitIndex],
        label: &str,
        reencode: bool,
    ) -> Result<QubitIndex> {
        let mut survivors = qubits.to_vec();
        let stages = qubits.len().trailing_zeros() as usize;
        for stage in 1..=stages {
            self.conv_layer(&survivors, &format!("{label}.conv{stage}"))?;
            survivors = self.pool_layer(&survivors, &format!("{label}.pool{stage}"))?;
            if reencode && survivors.len() >= 2 {
                let feature_indices: Vec<usize> = (0..survivors.len()).collect();
                self.angle_encoding(&survivors, &feature_indices);
            }
        }
        Ok(survivors[0])
    }
}

/// Build the evaluable circuit for any single-circuit model kind.
/// `Ensemble` has no circuit; compile its two components separately.
pub fn build_circuit(spec: ModelSpec) -> Result<CompiledModel> {
    if spec.kind == ModelKind::Ensemble {
        return Err(Error::Config(
            "ensemble has no single circuit; train its components and fuse predictions".into(),
        ));
    }

    let (n_qubits, n_angle_features, n_amplitude_features) = match spec.kind {
        ModelKind::Conventional | ModelKind::PcaReencoded => (8, PCA_FEATURES, 0),
        ModelKind::AeAmplitude => (4, 0, AMPLITUDE_FEATURES),
        ModelKind::Joint => (12, PCA_FEATURES, AMPLITUDE_FEATURES),
        ModelKind::Ensemble => unreachable!(),
    };

    let n_params = model_param_count(spec);
    let mut b = TemplateBuilder {
        ansatz: spec.ansatz,
        shared: spec.shared_layers,
        placements: Vec::new(),
        next_param: 0,
        layout: Vec::new(),
        retired_per_pool: Vec::new(),
        feature_base: n_params,
    };

    let measurement = match spec.kind {
        ModelKind::Conventional | ModelKind::PcaReencoded => {
            let qubits: Vec<QubitIndex> = (1..=8).map(|i| QubitIndex::new(i).unwrap()).collect();
            b.angle_encoding(&qubits, &(0..PCA_FEATURES).collect::<Vec<_>>());
            let out = b.qcnn_register(&qubits, "pca", spec.kind == ModelKind::PcaReencoded)?;
            Measurement::BasisProbs(out)
        }
        ModelKind::AeAmplitude => {
            let qubits: Vec<QubitIndex> = (1..=4).map(|i| QubitIndex::new(i).unwrap()).collect();
            let out = b.qcnn_register(&qubits, "ae", false)?;
            Measurement::BasisProbs(out)
        }
        ModelKind::Joint => {
            let pca_qubits: Vec<QubitIndex> =
                (1..=8).map(|i| QubitIndex::new(i).unwrap()).collect();
            let ae_qubits: Vec<QubitIndex> =
                (9..=12).map(|i| QubitIndex::new(i).unwrap()).collect();
            b.angle_encoding(&pca_qubits, &(0..PCA_FEATURES).collect::<Vec<_>>());
            let pca_out = b.qcnn_register(&pca_qubits, "pca", true)?;
            let ae_out = b.qcnn_register(&ae_qubits, "ae", false)?;
            let slots = b.alloc("interaction".into(), 8);
            let block = interaction_block(pca_out, ae_out, &slots.try_into().unwrap())?;
            b.placements.extend(block);
            Measurement::SoftmaxZ(pca_out, ae_out)
        }
        ModelKind::Ensemble => unreachable!(),
    };

    debug_assert_eq!(b.next_param, n_params);
    let template = CircuitTemplate::new(n_qubits, b.placements, n_params, n_angle_features)?;

    Ok(CompiledModel {
        spec,
        n_qubits,
        template,
        layout: b.layout,
        measurement,
        n_angle_features,
        n_amplitude_features,
        retired_per_pool: b.retired_per_pool,
    })
}

/// Trainable parameter count for a spec, from the fixed layer structure.
pub fn model_param_count(spec: ModelSpec) -> usize {
    let per_block = spec.ansatz.params_per_block();
    let register = |width: usize| -> usize {
        let mut count = 0;
        let mut k = width;
        while k >= 2 {
            let conv_instances = if k == 2 { 1 } else { k };
            let pool_instances = k / 2;
            if spec.shared_layers {
                count += per_block + 2;
            } else {
                count += conv_instances * per_block + pool_instances * 2;
            }
            k /= 2;
        }
        count
    };
    match spec.kind {
        ModelKind::Conventional | ModelKind::PcaReencoded => register(8),
        ModelKind::AeAmplitude => register(4),
        ModelKind::Joint => register(8) + register(4) + 8,
        ModelKind::Ensemble => 0,
    }
}

static UNSCALED_WARNING: std::sync::Once = std::sync::Once::new();

impl CompiledModel {
    /// Initial state before the template runs: |0…0⟩, with the amplitude
    /// register (the trailing, least significant qubits) loaded from the
    /// normalized feature vector when the model uses one.
    pub(crate) fn initial_state(&self, sample: &Sample) -> Result<StateVector> {
        if self.n_amplitude_features == 0 {
            return StateVector::zero(self.n_qubits);
        }
        if sample.ae_features.len() != self.n_amplitude_features {
            return Err(Error::Validation(format!(
                "expected {} amplitude features, got {}",
                self.n_amplitude_features,
                sample.ae_features.len()
            )));
        }
        let encoded = amplitude_encode(&sample.ae_features)?;
        if encoded.n_qubits() == self.n_qubits {
            return Ok(encoded);
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        amps[..encoded.amplitudes().len()].copy_from_slice(encoded.amplitudes());
        StateVector::from_amplitudes(amps)
    }

    fn check_angle_features(&self, sample: &Sample) -> Result<()> {
        // A sample may carry feature kinds this model does not consume
        // (ensemble preprocessing fills both); only the consumed ones are
        // validated.
        if self.n_angle_features == 0 {
            return Ok(());
        }
        if sample.pca_angles.len() != self.n_angle_features {
            return Err(Error::Validation(format!(
                "expected {} angle features, got {}",
                self.n_angle_features,
                sample.pca_angles.len()
            )));
        }
        if sample
            .pca_angles
            .iter()
            .any(|&x| !(0.0..=PI + 1e-9).contains(&x))
        {
            UNSCALED_WARNING.call_once(|| {
                eprintln!(
                    "warning: angle-encoded features outside [0, {PI:.3}]; expected scaled inputs"
                );
            });
        }
        Ok(())
    }

    /// Raw head values: (P(0), P(1)) for a basis head, (z of the first
    /// measured qubit, z of the second) for a softmax head. One angle
    /// occurrence may be shifted, which is the gradient primitive.
    pub fn head_values(
        &self,
        params: &[f64],
        sample: &Sample,
        shift: Option<(usize, usize, f64)>,
    ) -> Result<[f64; 2]> {
        if params.len() != self.template.n_params {
            return Err(Error::Validation(format!(
                "expected {} parameters, got {}",
                self.template.n_params,
                params.len()
            )));
        }
        self.check_angle_features(sample)?;
        let mut state = self.initial_state(sample)?;
        let binding = Binding {
            params,
            features: &sample.pca_angles,
        };
        self.template.apply_shifted(&mut state, &binding, shift)?;
        self.measure_head(&state)
    }

    /// The statevector after encoding and the full circuit, before
    /// measurement.
    pub fn evolved_state(&self, params: &[f64], sample: &Sample) -> Result<StateVector> {
        if params.len() != self.template.n_params {
            return Err(Error::Validation(format!(
                "expected {} parameters, got {}",
                self.template.n_params,
                params.len()
            )));
        }
        self.check_angle_features(sample)?;
        let mut state = self.initial_state(sample)?;
        let binding = Binding {
            params,
            features: &sample.pca_angles,
        };
        self.template.apply(&mut state, &binding)?;
        Ok(state)
    }

    /// Head values of an already-evolved state.
    pub(crate) fn measure_head(&self, state: &StateVector) -> Result<[f64; 2]> {
        match &self.measurement {
            Measurement::BasisProbs(q) => {
                let probs = state.marginal_probs(&[*q])?;
                Ok([probs[0], probs[1]])
            }
            Measurement::SoftmaxZ(q1, q2) => {
                Ok([state.expectation_z(*q1)?, state.expectation_z(*q2)?])
            }
        }
    }

    pub(crate) fn validate_inputs(&self, params: &[f64], sample: &Sample) -> Result<()> {
        if params.len() != self.template.n_params {
            return Err(Error::Validation(format!(
                "expected {} parameters, got {}",
                self.template.n_params,
                params.len()
            )));
        }
        self.check_angle_features(sample)
    }

    /// Full forward pass to a normalized prediction.
    pub fn forward(&self, params: &[f64], sample: &Sample) -> Result<PredictionVector> {
        let head = self.head_values(params, sample, None)?;
        Ok(self.prediction_from_head(head))
    }

    pub fn prediction_from_head(&self, head: [f64; 2]) -> PredictionVector {
        match self.measurement {
            Measurement::BasisProbs(_) => PredictionVector {
                p: head,
                head: Head::BasisProbs,
            },
            Measurement::SoftmaxZ(_, _) => PredictionVector {
                p: softmax2(head[0], head[1]),
                head: Head::SoftmaxZ,
            },
        }
    }

    pub fn head_kind(&self) -> Head {
        match self.measurement {
            Measurement::BasisProbs(_) => Head::BasisProbs,
            Measurement::SoftmaxZ(_, _) => Head::SoftmaxZ,
        }
    }
}

/// Softmax over two logits; class 0 takes the first.
pub fn softmax2(z1: f64, z2: f64) -> [f64; 2] {
    let m = z1.max(z2);
    let (e1, e2) = ((z1 - m).exp(), (z2 - m).exp());
    [e1 / (e1 + e2), e2 / (e1 + e2)]
}

pub const BCE_EPSILON: f64 = 1e-12;

/// Binary cross-entropy against the true label, probabilities clamped to
/// [ε, 1−ε].
pub fn bce_loss(pred: &PredictionVector, label: u8) -> f64 {
    let clamp = |p: f64| p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    if label == 1 {
        -clamp(pred.p[1]).ln()
    } else {
        -clamp(pred.p[0]).ln()
    }
}

/// Loss computed straight from raw head values.
pub fn loss_from_head(head_kind: Head, head: [f64; 2], label: u8) -> f64 {
    let p = match head_kind {
        Head::BasisProbs => head,
        Head::SoftmaxZ => softmax2(head[0], head[1]),
    };
    bce_loss(&PredictionVector { p, head: head_kind }, label)
}

/// ∂loss/∂head for the chain rule. For a basis head the components are the
/// derivatives w.r.t. (P(0), P(1)); for a softmax head, w.r.t. (z1, z2).
pub fn dloss_dhead(head_kind: Head, head: [f64; 2], label: u8) -> [f64; 2] {
    match head_kind {
        Head::BasisProbs => {
            let inside = |p: f64| (BCE_EPSILON..=1.0 - BCE_EPSILON).contains(&p);
            let d0 = if label == 0 && inside(head[0]) {
                -1.0 / head[0]
            } else {
                0.0
            };
            let d1 = if label == 1 && inside(head[1]) {
                -1.0 / head[1]
            } else {
                0.0
            };
            [d0, d1]
        }
        Head::SoftmaxZ => {
            let p = softmax2(head[0], head[1]);
            [
                p[0] - if label == 0 { 1.0 } else { 0.0 },
                p[1] - if label == 1 { 1.0 } else { 0.0 },
            ]
        }
    }
}

/// Sum-rule fusion: add the two probability vectors and take the argmax;
/// an exact tie resolves to class 0. Both inputs must carry basis-probability
/// heads.
pub fn ensemble_predict(p1: &PredictionVector, p2: &PredictionVector) -> Result<usize> {
    if p1.head != Head::BasisProbs || p2.head != Head::BasisProbs {
        return Err(Error::Validation(
            "ensemble fusion expects basis-probability heads from both models".into(),
        ));
    }
    let summed = [p1.p[0] + p2.p[0], p1.p[1] + p2.p[1]];
    Ok(if summed[1] > summed[0] { 1 } else { 0 })
}
