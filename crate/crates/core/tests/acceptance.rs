//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line
//! with the measured value and its pinned threshold.
//!
//! Criteria 1–3 are pure compute and always run. Criteria 4 and 10 need
//! the MNIST/Fashion-MNIST IDX files (see the README for the expected
//! layout; `QCNN_DATA_DIR` overrides the default `data/` directory).
//! Criteria 5–9 additionally train the full training protocol — hours of
//! compute — so they are `#[ignore]` by default and run with
//! `cargo test -p qcnn-core --test acceptance -- --include-ignored`.
//! Trained-seed artifacts produced by the CLI (or a previous test run)
//! under `runs/acceptance/` are reused when their recorded protocol
//! matches the pinned one; otherwise the cell is recomputed here.

mod common;

use common::{dense_evolve, TestRng};
use num_complex::Complex64;
use qcnn_core::ansatz::{
    conv_ansatz_so4, conv_ansatz_su4, interaction_block, Binding, CircuitTemplate,
};
use qcnn_core::data::DatasetId;
use qcnn_core::experiment::{
    run_experiment_with_progress, ExperimentConfig, SeedArtifact, PCA_COMPONENTS,
};
use qcnn_core::model::{build_circuit, ConvAnsatz, ModelKind, ModelSpec, Sample};
use qcnn_core::state::{q, StateVector};
use qcnn_core::train::{gradient_with_mode, GradientMode, TrainConfig};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

const PROTOCOL_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn require_data_dir() -> PathBuf {
    common::data_dir().unwrap_or_else(|| {
        panic!(
            "dataset files not found: place the MNIST/Fashion-MNIST IDX files under data/ \
             (see README) or set QCNN_DATA_DIR"
        )
    })
}

/// Artifact reuse: a stored seed counts only if its recorded protocol is
/// exactly the pinned one.
fn artifact_matches(artifact: &SeedArtifact, config: &ExperimentConfig, seed: u64) -> bool {
    let want = TrainConfig {
        seed,
        ..config.train.clone()
    };
    artifact.seed == seed
        && artifact.train_config == want
        && artifact.scale_max == config.scale_max
        && artifact.shared_layers == config.shared_layers
        && artifact.key == config.key()
}

/// Mean test accuracy for a cell, from protocol-matched artifacts when all
/// seeds are present, otherwise by running the experiment here.
fn cell_mean_accuracy(config: &ExperimentConfig) -> f64 {
    let key = config.key();
    let dir = common::results_dir();
    let mut accs = Vec::new();
    for &seed in &config.seeds {
        let path = dir.join(format!(
            "{}_{}_{}_{}_seed{seed}.json",
            key.dataset, key.pair, key.model, key.ansatz
        ));
        match SeedArtifact::load(&path) {
            Ok(a) if artifact_matches(&a, config, seed) => accs.push(a.metrics.accuracy),
            _ => {
                accs.clear();
                break;
            }
        }
    }
    if accs.len() == config.seeds.len() {
        eprintln!(
            "cell {key}: using {} stored protocol-matched seeds",
            accs.len()
        );
        // Ascending-seed order is already the loop order here.
        return accs.iter().sum::<f64>() / accs.len() as f64;
    }

    eprintln!(
        "cell {key}: no stored artifacts, training {} seeds now",
        config.seeds.len()
    );
    let mut run_config = config.clone();
    run_config.out_dir = Some(dir.clone());
    let report = run_experiment_with_progress(&run_config, |o| {
        if let Some(m) = &o.metrics {
            eprintln!(
                "  seed {}: accuracy {:.4} ({}s)",
                o.seed,
                m.accuracy,
                o.wall_ms / 1000
            );
        } else {
            eprintln!("  seed {}: FAILED {:?}", o.seed, o.failure);
        }
    })
    .expect("experiment cell failed to run");
    assert!(
        !report.partial,
        "cell {key} had failed seeds: {:?}",
        report.outcomes
    );
    report.mean.expect("no successful seeds").accuracy
}

fn report_line(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

#[test]
fn criterion_01_gradient_oracle() {
    let started = Instant::now();
    let mut rng = TestRng::new(0x6a7d);
    let mut worst: f64 = 0.0;
    for kind in [
        ModelKind::Conventional,
        ModelKind::PcaReencoded,
        ModelKind::AeAmplitude,
        ModelKind::Joint,
    ] {
        for ansatz in [ConvAnsatz::So4, ConvAnsatz::Su4] {
            let model = build_circuit(ModelSpec::new(kind, ansatz)).unwrap();
            for trial in 0..20 {
                let params = rng.angles(model.template.n_params, 2.0 * PI);
                let sample = Sample {
                    pca_angles: rng.angles(model.n_angle_features, PI),
                    ae_features: rng.angles(model.n_amplitude_features, 1.0),
                };
                let label = (trial % 2) as u8;
                let batch = vec![(&sample, label)];
                let shift =
                    gradient_with_mode(&model, &params, &batch, GradientMode::ShiftRule, 0.0)
                        .unwrap();
                let fd =
                    gradient_with_mode(&model, &params, &batch, GradientMode::FiniteDiff, 1e-4)
                        .unwrap();
                for (i, (s, f)) in shift.iter().zip(&fd).enumerate() {
                    let err = (s - f).abs();
                    let tol = 1e-7 + 1e-4 * s.abs().max(f.abs());
                    assert!(
                        err <= tol,
                        "{kind}/{ansatz} trial {trial} param {i}: shift {s} vs fd {f}"
                    );
                    let rel = err / s.abs().max(f.abs()).max(1e-7);
                    worst = worst.max(rel);
                }
            }
        }
    }
    report_line(
        "criterion 1 (gradient oracle, 20 configs × 8 model variants)",
        true,
        &format!(
            "worst relative deviation {worst:.2e} within 1e-4; elapsed {:.1}s",
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_small_instance_circuit_oracle() {
    let started = Instant::now();
    let mut rng = TestRng::new(0x51);

    // Statevector forwards match the dense simulator for circuits on ≤ 4
    // qubits: every two-qubit block and the full 4-qubit model.
    for trial in 0..10 {
        let blocks: Vec<(Vec<qcnn_core::ansatz::GatePlacement>, usize)> = vec![
            (conv_ansatz_so4(q(1), q(2), &[0, 1, 2, 3, 4, 5]).unwrap(), 6),
            (
                conv_ansatz_su4(q(1), q(2), &std::array::from_fn(|i| i)).unwrap(),
                15,
            ),
            (
                qcnn_core::ansatz::pooling_ansatz(q(1), q(2), &[0, 1]).unwrap(),
                2,
            ),
            (
                interaction_block(q(1), q(2), &std::array::from_fn(|i| i)).unwrap(),
                8,
            ),
        ];
        for (placements, n_params) in blocks {
            let template = CircuitTemplate::new(2, placements, n_params, 0).unwrap();
            let params = rng.angles(n_params, 2.0 * PI);
            let mut engine = StateVector::zero(2).unwrap();
            template
                .apply(
                    &mut engine,
                    &Binding {
                        params: &params,
                        features: &[],
                    },
                )
                .unwrap();
            let oracle = dense_evolve(
                2,
                &template.placements,
                n_params,
                &params,
                &[],
                StateVector::zero(2).unwrap().amplitudes(),
            );
            for (a, b) in engine.amplitudes().iter().zip(&oracle) {
                assert!((a - b).norm() < 1e-10, "block mismatch at trial {trial}");
            }
        }
    }
    for ansatz in [ConvAnsatz::So4, ConvAnsatz::Su4] {
        let model = build_circuit(ModelSpec::new(ModelKind::AeAmplitude, ansatz)).unwrap();
        for _ in 0..5 {
            let params = rng.angles(model.template.n_params, 2.0 * PI);
            let features = rng.angles(16, 1.0);
            let sample = Sample {
                pca_angles: vec![],
                ae_features: features.clone(),
            };
            let engine = model.evolved_state(&params, &sample).unwrap();
            let start = qcnn_core::encoding::amplitude_encode(&features).unwrap();
            let oracle = dense_evolve(
                4,
                &model.template.placements,
                model.template.n_params,
                &params,
                &[],
                start.amplitudes(),
            );
            for (a, b) in engine.amplitudes().iter().zip(&oracle) {
                assert!((a - b).norm() < 1e-10, "4-qubit model mismatch");
            }
        }
    }

    // Three-CNOT core of the SU(4) block equals SWAP; zero-parameter SO(4)
    // block and interaction block equal identity.
    let close = |m: &[Vec<Complex64>], expect: &[[f64; 4]; 4]| {
        m.iter().enumerate().all(|(r, row)| {
            row.iter()
                .enumerate()
                .all(|(c, e)| (e - Complex64::new(expect[r][c], 0.0)).norm() < 1e-12)
        })
    };
    let id4 = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let swap4 = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let so4 = CircuitTemplate::new(
        2,
        conv_ansatz_so4(q(1), q(2), &[0, 1, 2, 3, 4, 5]).unwrap(),
        6,
        0,
    )
    .unwrap();
    let su4 = CircuitTemplate::new(
        2,
        conv_ansatz_su4(q(1), q(2), &std::array::from_fn(|i| i)).unwrap(),
        15,
        0,
    )
    .unwrap();
    let inter = CircuitTemplate::new(
        2,
        interaction_block(q(1), q(2), &std::array::from_fn(|i| i)).unwrap(),
        8,
        0,
    )
    .unwrap();
    let zeros6 = vec![0.0; 6];
    let zeros15 = vec![0.0; 15];
    let zeros8 = vec![0.0; 8];
    assert!(close(
        &so4.assemble_matrix(&Binding {
            params: &zeros6,
            features: &[]
        })
        .unwrap(),
        &id4
    ));
    assert!(close(
        &su4.assemble_matrix(&Binding {
            params: &zeros15,
            features: &[]
        })
        .unwrap(),
        &swap4
    ));
    assert!(close(
        &inter
            .assemble_matrix(&Binding {
                params: &zeros8,
                features: &[]
            })
            .unwrap(),
        &id4
    ));

    report_line(
        "criterion 2 (small-instance circuit oracle)",
        true,
        &format!(
            "all ≤4-qubit circuits within 1e-10 of the dense simulator; \
             SU(4) zero-angle core = SWAP; SO(4)/interaction zero-angle = identity; \
             elapsed {:.1}s",
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_03_so4_property() {
    let started = Instant::now();
    let template = CircuitTemplate::new(
        2,
        conv_ansatz_so4(q(1), q(2), &[0, 1, 2, 3, 4, 5]).unwrap(),
        6,
        0,
    )
    .unwrap();
    let mut rng = TestRng::new(0x504);
    for trial in 0..50 {
        let params = rng.angles(6, 2.0 * PI);
        let m = template
            .assemble_matrix(&Binding {
                params: &params,
                features: &[],
            })
            .unwrap();
        // Real to 1e-10.
        for row in &m {
            for e in row {
                assert!(e.im.abs() < 1e-10, "imaginary leak at trial {trial}");
            }
        }
        // Orthogonal to 1e-10.
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = (0..4).map(|k| m[k][i].re * m[k][j].re).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "orthogonality at trial {trial}");
            }
        }
        // det = +1 via the real 4×4 determinant.
        let det = det4(&m);
        assert!((det - 1.0).abs() < 1e-10, "det {det} at trial {trial}");
    }
    report_line(
        "criterion 3 (SO(4) membership, 50 draws)",
        true,
        &format!(
            "real, orthogonal, det +1 within 1e-10; elapsed {:.2}s",
            started.elapsed().as_secs_f64()
        ),
    );
}

fn det4(m: &[Vec<Complex64>]) -> f64 {
    fn det3(a: [[f64; 3]; 3]) -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }
    let mut det = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][cc] = m[r][c].re;
                    cc += 1;
                }
            }
        }
        det += if col % 2 == 0 { 1.0 } else { -1.0 } * m[0][col].re * det3(minor);
    }
    det
}

#[test]
fn criterion_04_dataset_fidelity() {
    let data_dir = require_data_dir();

    // Split sizes of the raw archives.
    let mnist_dir = data_dir.join("mnist");
    let (ti, tl) = qcnn_core::data::idx_paths(&mnist_dir, true);
    assert_eq!(qcnn_core::data::load_idx(&ti, &tl).unwrap().len(), 60000);
    let (ti, tl) = qcnn_core::data::idx_paths(&mnist_dir, false);
    assert_eq!(qcnn_core::data::load_idx(&ti, &tl).unwrap().len(), 10000);

    let expected = [
        (DatasetId::Mnist, (0u8, 1u8), 12665usize, 2115usize),
        (DatasetId::Mnist, (1, 2), 12700, 2167),
        (DatasetId::Mnist, (2, 3), 12089, 2042),
        (DatasetId::FashionMnist, (0, 1), 12000, 2000),
        (DatasetId::FashionMnist, (1, 3), 12000, 2000),
        (DatasetId::FashionMnist, (5, 9), 12000, 2000),
    ];
    for (dataset, pair, want_train, want_test) in expected {
        let config = ExperimentConfig::new(
            dataset,
            data_dir.clone(),
            pair,
            ModelKind::Conventional,
            ConvAnsatz::So4,
        );
        let (train, test) = qcnn_core::experiment::load_pair(&config).unwrap();
        assert_eq!(
            (train.len(), test.len()),
            (want_train, want_test),
            "{dataset} {}v{}",
            pair.0,
            pair.1
        );
    }
    report_line(
        "criterion 4 (dataset fidelity)",
        true,
        "filtered pair counts equal the published table exactly \
         (12665/2115, 12700/2167, 12089/2042, 3×12000/2000)",
    );
}

#[test]
#[ignore = "trains 5 seeds of the full protocol; run with --include-ignored (reuses runs/acceptance artifacts when present)"]
fn criterion_05_reencoded_mnist_0v1_accuracy() {
    let config = protocol_cell(
        DatasetId::Mnist,
        (0, 1),
        ModelKind::PcaReencoded,
        ConvAnsatz::Su4,
    );
    let mean = cell_mean_accuracy(&config);
    report_line(
        "criterion 5 (MNIST 0v1, re-encoded QCNN, SU(4) ansatz)",
        mean >= 0.97,
        &format!("mean accuracy {mean:.4} over 5 seeds, gate ≥ 0.97"),
    );

    // Loose descent check on the loss trace: the 20-iteration moving
    // average must have come down by the end of training.
    let trace_path =
        common::results_dir().join("mnist_0v1_pca-reencoded_ansatz2_seed1_pca-reencoded_trace.csv");
    let text = std::fs::read_to_string(&trace_path)
        .unwrap_or_else(|e| panic!("trace CSV missing at {}: {e}", trace_path.display()));
    let losses: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 200);
    let avg = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
    let head = avg(&losses[..20]);
    let tail = avg(&losses[180..]);
    assert!(
        tail < head,
        "20-iteration moving average failed to decrease: {head:.4} -> {tail:.4}"
    );
}

#[test]
#[ignore = "trains 5 seeds of the 12-qubit joint model; run with --include-ignored (reuses runs/acceptance artifacts when present)"]
fn criterion_06_joint_mnist_0v1_accuracy() {
    let config = protocol_cell(DatasetId::Mnist, (0, 1), ModelKind::Joint, ConvAnsatz::Su4);
    let mean = cell_mean_accuracy(&config);
    report_line(
        "criterion 6 (MNIST 0v1, joint model, SU(4) ansatz)",
        mean >= 0.985,
        &format!("mean accuracy {mean:.4} over 5 seeds, gate ≥ 0.985"),
    );
}

#[test]
#[ignore = "trains 5 seeds of the 12-qubit joint model; run with --include-ignored (reuses runs/acceptance artifacts when present)"]
fn criterion_07_joint_fashion_tshirt_trouser_accuracy() {
    let config = protocol_cell(
        DatasetId::FashionMnist,
        (0, 1),
        ModelKind::Joint,
        ConvAnsatz::So4,
    );
    let mean = cell_mean_accuracy(&config);
    report_line(
        "criterion 7 (Fashion T-shirt/Trouser, joint model, SO(4) ansatz)",
        mean >= 0.93,
        &format!("mean accuracy {mean:.4} over 5 seeds, gate ≥ 0.93"),
    );
}

#[test]
#[ignore = "trains 20 full-protocol runs; run with --include-ignored (reuses runs/acceptance artifacts when present)"]
fn criterion_08_reencoding_beats_conventional() {
    for (dataset, pair, name) in [
        (DatasetId::Mnist, (2u8, 3u8), "MNIST 2v3"),
        (DatasetId::FashionMnist, (0, 1), "Fashion T-shirt/Trouser"),
    ] {
        let reencoded = cell_mean_accuracy(&protocol_cell(
            dataset,
            pair,
            ModelKind::PcaReencoded,
            ConvAnsatz::Su4,
        ));
        let conventional = cell_mean_accuracy(&protocol_cell(
            dataset,
            pair,
            ModelKind::Conventional,
            ConvAnsatz::Su4,
        ));
        report_line(
            &format!("criterion 8 ({name}, re-encoded vs conventional, identical seeds/ansatz)"),
            reencoded > conventional,
            &format!("re-encoded {reencoded:.4} vs conventional {conventional:.4}"),
        );
    }
}

#[test]
#[ignore = "trains joint and ensemble cells; run with --include-ignored (reuses runs/acceptance artifacts when present)"]
fn criterion_09_joint_at_least_matches_ensemble() {
    let joint = cell_mean_accuracy(&protocol_cell(
        DatasetId::Mnist,
        (1, 2),
        ModelKind::Joint,
        ConvAnsatz::So4,
    ));
    let ensemble = cell_mean_accuracy(&protocol_cell(
        DatasetId::Mnist,
        (1, 2),
        ModelKind::Ensemble,
        ConvAnsatz::So4,
    ));
    report_line(
        "criterion 9 (MNIST 1v2, joint vs ensemble ordering)",
        joint >= ensemble - 0.005,
        &format!("joint {joint:.4} vs ensemble {ensemble:.4}, gate: joint ≥ ensemble − 0.005"),
    );
}

#[test]
fn criterion_10_experiment_determinism() {
    // Full pipeline repeated under one config and seed must reproduce its
    // metrics bit-for-bit. Uses a shortened protocol on the real data when
    // present, otherwise a synthetic IDX fixture; determinism does not
    // depend on either choice.
    let (config, _guard) = match common::data_dir() {
        Some(data_dir) => {
            let mut c = ExperimentConfig::new(
                DatasetId::Mnist,
                data_dir,
                (0, 1),
                ModelKind::AeAmplitude,
                ConvAnsatz::So4,
            );
            c.cache_dir = Some(common::cache_dir());
            (c, None)
        }
        None => {
            let dir = tempfile::tempdir().unwrap();
            synthetic_pair(dir.path());
            let c = ExperimentConfig::new(
                DatasetId::Mnist,
                dir.path().to_path_buf(),
                (0, 1),
                ModelKind::AeAmplitude,
                ConvAnsatz::So4,
            );
            (c, Some(dir))
        }
    };
    let mut config = config;
    config.seeds = vec![42];
    config.train.iterations = 6;
    config.train.batch_size = 10;

    let a = qcnn_core::experiment::run_experiment(&config).unwrap();
    let b = qcnn_core::experiment::run_experiment(&config).unwrap();
    let (ma, mb) = (
        a.outcomes[0].metrics.expect("first run failed"),
        b.outcomes[0].metrics.expect("second run failed"),
    );
    let identical = ma.accuracy.to_bits() == mb.accuracy.to_bits()
        && ma.precision.to_bits() == mb.precision.to_bits()
        && ma.recall.to_bits() == mb.recall.to_bits()
        && ma.f1.to_bits() == mb.f1.to_bits()
        && ma.counts == mb.counts
        && a.outcomes[0].final_train_loss.unwrap().to_bits()
            == b.outcomes[0].final_train_loss.unwrap().to_bits();
    report_line(
        "criterion 10 (experiment determinism)",
        identical,
        &format!(
            "repeated cell reproduced metrics bit-identically (accuracy {:.6})",
            ma.accuracy
        ),
    );
}

fn synthetic_pair(dir: &std::path::Path) {
    use qcnn_core::data::{write_idx_images, write_idx_labels};
    let mut rng = TestRng::new(5);
    for (prefix, n) in [("train", 60usize), ("t10k", 20usize)] {
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = (i % 2) as u8;
            images.push(
                (0..784)
                    .map(|p| {
                        let bright = (class == 0) == (p % 2 == 0);
                        (if bright { 180.0 } else { 40.0 } + rng.next_f64() * 30.0) as u8
                    })
                    .collect(),
            );
            labels.push(class);
        }
        write_idx_images(&dir.join(format!("{prefix}-images-idx3-ubyte")), &images).unwrap();
        write_idx_labels(&dir.join(format!("{prefix}-labels-idx1-ubyte")), &labels).unwrap();
    }
}

/// Reference-protocol cell: batch 25, 200 iterations, Nesterov 0.9/0.05,
/// shift-rule gradients, seeds 1–5, [0, π] feature scaling, shared layers.
fn protocol_cell(
    dataset: DatasetId,
    pair: (u8, u8),
    model: ModelKind,
    ansatz: ConvAnsatz,
) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(dataset, require_data_dir(), pair, model, ansatz);
    config.seeds = PROTOCOL_SEEDS.to_vec();
    config.cache_dir = Some(common::cache_dir());
    debug_assert_eq!(config.train.iterations, 200);
    debug_assert_eq!(config.train.batch_size, 25);
    debug_assert_eq!(PCA_COMPONENTS, 8);
    config
}
