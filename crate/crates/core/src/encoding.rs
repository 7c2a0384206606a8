//! Classical-to-quantum feature maps.
//!
//! Angle encoding rotates each qubit by its feature value (`Ry(x_i)`);
//! re-encoding replays the top-ranked features onto whatever qubits survive
//! pooling; amplitude encoding loads a normalized feature vector directly
//! into the basis amplitudes.

use crate::error::{Error, Result};
use crate::gates::Mat2;
use crate::state::{QubitIndex, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSource {
    Pca,
    Autoencoder,
}

/// Ordered classical features with provenance. PCA vectors are sorted by
/// descending explained variance, which is what licenses selective
/// re-encoding of a prefix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub source: FeatureSource,
    pub significance_ordered: bool,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, source: FeatureSource) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        let significance_ordered = source == FeatureSource::Pca;
        Ok(FeatureVector {
            values,
            source,
            significance_ordered,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Apply `Ry(x_i)` to qubit `qubits[i]` for each feature.
pub fn angle_encode(
    state: &mut StateVector,
    features: &[f64],
    qubits: &[QubitIndex],
) -> Result<()> {
    if features.len() != qubits.len() {
        return Err(Error::Validation(format!(
            "{} features for {} qubits",
            features.len(),
            qubits.len()
        )));
    }
    for w in 0..qubits.len() {
        for v in w + 1..qubits.len() {
            if qubits[w] == qubits[v] {
                return Err(Error::Validation(format!("duplicate qubit {}", qubits[w])));
            }
        }
    }
    for (&x, &qi) in features.iter().zip(qubits) {
        state.apply_single(qi, &Mat2::ry(x))?;
    }
    Ok(())
}

/// Re-encode the most significant `k = |surviving_qubits|` components of a
/// significance-ordered feature vector onto the surviving qubits, in index
/// order. Structurally identical to `angle_encode` on the feature prefix.
pub fn reencode(
    state: &mut StateVector,
    full_features: &FeatureVector,
    surviving_qubits: &[QubitIndex],
) -> Result<()> {
    if !full_features.significance_ordered {
        return Err(Error::Validation(
            "re-encoding requires significance-ordered (PCA-ranked) features".into(),
        ));
    }
    let k = surviving_qubits.len();
    if k > full_features.len() {
        return Err(Error::Validation(format!(
            "{k} surviving qubits but only {} features",
            full_features.len()
        )));
    }
    angle_encode(state, &full_features.values[..k], surviving_qubits)
}

/// Load a classical vector into basis amplitudes: amplitude `i` carries
/// `features[i] / ‖features‖`. Length must be a power of two; the all-zero
/// vector has no normalization and is rejected.
pub fn amplitude_encode(features: &[f64]) -> Result<StateVector> {
    if !features.len().is_power_of_two() || features.len() < 2 {
        return Err(Error::Validation(format!(
            "amplitude encoding needs a power-of-two feature count, got {}",
            features.len()
        )));
    }
    let norm = features.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Degenerate(
            "cannot amplitude-encode the all-zero vector".into(),
        ));
    }
    let amps: Vec<Complex64> = features
        .iter()
        .map(|&x| Complex64::new(x / norm, 0.0))
        .collect();
    StateVector::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::q;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_features_leave_state_unchanged() {
        let mut s = StateVector::zero(3).unwrap();
        angle_encode(&mut s, &[0.0, 0.0, 0.0], &[q(1), q(2), q(3)]).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pi_rotation_excites_qubit() {
        let mut s = StateVector::zero(1).unwrap();
        angle_encode(&mut s, &[PI], &[q(1)]).unwrap();
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_pi_gives_equal_superposition() {
        let mut s = StateVector::zero(1).unwrap();
        angle_encode(&mut s, &[FRAC_PI_2], &[q(1)]).unwrap();
        let r = 1.0 / 2.0f64.sqrt();
        assert!((s.amplitudes()[0].re - r).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - r).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_and_duplicates_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(angle_encode(&mut s, &[0.1], &[q(1), q(2)]).is_err());
        assert!(angle_encode(&mut s, &[0.1, 0.2], &[q(1), q(1)]).is_err());
    }

    fn pca_features(values: Vec<f64>) -> FeatureVector {
        FeatureVector::new(values, FeatureSource::Pca).unwrap()
    }

    #[test]
    fn reencode_prefix_matches_angle_encode() {
        let features = pca_features(vec![0.3, 1.1, 0.7, 2.0, 0.2, 0.9, 1.4, 0.5]);
        for k in [8usize, 4, 2] {
            let survivors: Vec<QubitIndex> = (1..=k).map(q).collect();
            let mut via_reencode = StateVector::zero(8).unwrap();
            reencode(&mut via_reencode, &features, &survivors).unwrap();
            let mut via_angle = StateVector::zero(8).unwrap();
            angle_encode(&mut via_angle, &features.values[..k], &survivors).unwrap();
            for (a, b) in via_reencode.amplitudes().iter().zip(via_angle.amplitudes()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn reencode_requires_ranked_features() {
        let mut unranked = pca_features(vec![0.5, 0.2]);
        unranked.source = FeatureSource::Autoencoder;
        unranked.significance_ordered = false;
        let mut s = StateVector::zero(2).unwrap();
        assert!(reencode(&mut s, &unranked, &[q(1)]).is_err());
    }

    #[test]
    fn amplitude_encode_basis_and_uniform_cases() {
        let mut one_hot = vec![0.0; 16];
        one_hot[3] = 1.0;
        let s = amplitude_encode(&one_hot).unwrap();
        assert_eq!(s.n_qubits(), 4);
        assert!((s.amplitudes()[3].re - 1.0).abs() < 1e-15);

        let s = amplitude_encode(&vec![1.0; 16]).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - 0.25).abs() < 1e-12);
        }

        let mut v = vec![0.0; 16];
        v[0] = 3.0;
        v[1] = 4.0;
        let s = amplitude_encode(&v).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-12);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-12);
    }

    #[test]
    fn amplitude_encode_rejects_zero_vector_and_bad_lengths() {
        assert!(matches!(
            amplitude_encode(&vec![0.0; 16]),
            Err(Error::Degenerate(_))
        ));
        assert!(amplitude_encode(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn amplitude_encode_is_unit_norm() {
        let v: Vec<f64> = (0..16).map(|i| (i as f64 - 7.3) * 0.11).collect();
        let s = amplitude_encode(&v).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_encoding_injective_on_zero_to_pi() {
        // Distinct angles in [0, π] give distinct |1⟩ marginals on |0⟩.
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * PI / 20.0).collect();
        let mut probs = Vec::new();
        for &x in &grid {
            let mut s = StateVector::zero(1).unwrap();
            angle_encode(&mut s, &[x], &[q(1)]).unwrap();
            probs.push(s.marginal_probs(&[q(1)]).unwrap()[1]);
        }
        for w in probs.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
