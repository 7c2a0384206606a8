//! Statevector QCNN simulator and training toolkit.
//!
//! A from-scratch dense statevector engine plus the variational circuit
//! blocks, classical feature extractors, and training/evaluation machinery
//! needed to run binary image classification experiments on MNIST-style
//! datasets. No external quantum or linear-algebra backend: gate
//! application is stride iteration over amplitude pairs, PCA is a cyclic
//! Jacobi eigendecomposition of the covariance, and gradients come from
//! exact parameter-shift rules (with a finite-difference mode kept as a
//! permanent cross-check).
//!
//! Qubit numbering is 1-based and qubit 1 is the most significant bit of
//! the basis index, matching top-to-bottom circuit diagrams: for a 2-qubit
//! register, basis index 2 = binary `10` = qubit 1 in |1⟩, qubit 2 in |0⟩.
//!
//! ```
//! use qcnn_core::model::{build_circuit, ConvAnsatz, ModelKind, ModelSpec, Sample};
//!
//! let model = build_circuit(ModelSpec::new(ModelKind::AeAmplitude, ConvAnsatz::So4))?;
//! let params = vec![0.3; model.template.n_params];
//! let sample = Sample { pca_angles: vec![], ae_features: (1..=16).map(f64::from).collect() };
//! let pred = model.forward(&params, &sample)?;
//! assert!((pred.p[0] + pred.p[1] - 1.0).abs() < 1e-9);
//! # Ok::<(), qcnn_core::Error>(())
//! ```

pub mod ansatz;
pub mod autoencoder;
pub(crate) mod binio;
pub mod data;
pub mod encoding;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pca;
pub mod report;
pub mod scaler;
pub mod state;
pub mod train;

pub use error::{Error, Result};
pub use state::{QubitIndex, StateVector};

// Complex amplitudes appear in the public API; re-export the crate so
// downstream users agree on the type.
pub use num_complex;
