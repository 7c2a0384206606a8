//! Fast self-checks behind the `verify` subcommand: structural gate
//! identities, the SO(4) property, shift-rule/finite-difference agreement,
//! and (when data is reachable) the published pair counts. The exhaustive
//! versions of these live in the test suites; this is the quick field
//! check.

use qcnn_core::ansatz::{
    conv_ansatz_so4, conv_ansatz_su4, interaction_block, Binding, CircuitTemplate,
};
use qcnn_core::data::DatasetId;
use qcnn_core::error::Result;
use qcnn_core::experiment::{load_pair, ExperimentConfig};
use qcnn_core::model::{build_circuit, ConvAnsatz, ModelKind, ModelSpec, Sample};
use qcnn_core::state::q;
use qcnn_core::train::{gradient_with_mode, GradientMode};
use std::f64::consts::PI;
use std::path::Path;

pub struct Outcome {
    pub passed: usize,
    pub failed: usize,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool, detail: &str) {
        if ok {
            self.passed += 1;
            println!("PASS  {name}");
        } else {
            self.failed += 1;
            println!("FAIL  {name}: {detail}");
        }
    }
}

fn pseudo_angles(seed: u64, n: usize, hi: f64) -> Vec<f64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 * hi
        })
        .collect()
}

fn matrix_is(
    template: &CircuitTemplate,
    params: &[f64],
    expect: &[[f64; 4]; 4],
    tol: f64,
) -> Result<bool> {
    use qcnn_core::num_complex::Complex64;
    let m = template.assemble_matrix(&Binding {
        params,
        features: &[],
    })?;
    for r in 0..4 {
        for c in 0..4 {
            if (m[r][c] - Complex64::new(expect[r][c], 0.0)).norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

const ID4: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];
const SWAP4: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn run(data_dir: Option<&Path>) -> Result<Outcome> {
    let mut out = Outcome {
        passed: 0,
        failed: 0,
    };

    // Zero-angle identities.
    let so4 = CircuitTemplate::new(2, conv_ansatz_so4(q(1), q(2), &[0, 1, 2, 3, 4, 5])?, 6, 0)?;
    out.check(
        "so4 block at zero angles is identity",
        matrix_is(&so4, &[0.0; 6], &ID4, 1e-12)?,
        "matrix mismatch",
    );
    let su4_slots: [usize; 15] = std::array::from_fn(|i| i);
    let su4 = CircuitTemplate::new(2, conv_ansatz_su4(q(1), q(2), &su4_slots)?, 15, 0)?;
    out.check(
        "su4 block at zero angles is swap (three-CNOT core)",
        matrix_is(&su4, &[0.0; 15], &SWAP4, 1e-12)?,
        "matrix mismatch",
    );
    let inter_slots: [usize; 8] = std::array::from_fn(|i| i);
    let inter = CircuitTemplate::new(2, interaction_block(q(1), q(2), &inter_slots)?, 8, 0)?;
    out.check(
        "interaction block at zero angles is identity",
        matrix_is(&inter, &[0.0; 8], &ID4, 1e-12)?,
        "matrix mismatch",
    );

    // SO(4) membership over random draws.
    let mut so4_ok = true;
    for trial in 0..50u64 {
        let params = pseudo_angles(trial + 1, 6, 2.0 * PI);
        let m = so4.assemble_matrix(&Binding {
            params: &params,
            features: &[],
        })?;
        for i in 0..4 {
            for j in 0..4 {
                if m[i][j].im.abs() > 1e-12 {
                    so4_ok = false;
                }
                let dot: f64 = (0..4).map(|k| m[k][i].re * m[k][j].re).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    so4_ok = false;
                }
            }
        }
    }
    out.check(
        "so4 block is real orthogonal over 50 draws",
        so4_ok,
        "property violated",
    );

    // Shift rule vs finite differences, one random configuration per kind.
    for kind in [
        ModelKind::Conventional,
        ModelKind::PcaReencoded,
        ModelKind::AeAmplitude,
        ModelKind::Joint,
    ] {
        let model = build_circuit(ModelSpec::new(kind, ConvAnsatz::So4))?;
        let params = pseudo_angles(11, model.template.n_params, 2.0 * PI);
        let sample = Sample {
            pca_angles: pseudo_angles(13, model.n_angle_features, PI),
            ae_features: pseudo_angles(17, model.n_amplitude_features, 1.0),
        };
        let batch = vec![(&sample, 1u8)];
        let shift = gradient_with_mode(&model, &params, &batch, GradientMode::ShiftRule, 0.0)?;
        let fd = gradient_with_mode(&model, &params, &batch, GradientMode::FiniteDiff, 1e-4)?;
        let ok = shift
            .iter()
            .zip(&fd)
            .all(|(a, b)| (a - b).abs() <= 1e-7 + 1e-4 * a.abs().max(b.abs()));
        out.check(
            &format!("shift rule matches finite differences ({kind})"),
            ok,
            "gradient mismatch",
        );
    }

    // Published pair counts, when the data is present.
    if let Some(dir) = data_dir {
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
                dir.to_path_buf(),
                pair,
                ModelKind::Conventional,
                ConvAnsatz::So4,
            );
            match load_pair(&config) {
                Ok((train, test)) => out.check(
                    &format!(
                        "{dataset} {}v{} counts {want_train}/{want_test}",
                        pair.0, pair.1
                    ),
                    train.len() == want_train && test.len() == want_test,
                    &format!("got {}/{}", train.len(), test.len()),
                ),
                Err(e) => out.check(
                    &format!("{dataset} {}v{} counts", pair.0, pair.1),
                    false,
                    &e.to_string(),
                ),
            }
        }
    } else {
        println!("SKIP  dataset counts (no --dataset-dir given)");
    }

    Ok(out)
}
