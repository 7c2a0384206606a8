use qcnn_core::model::{build_circuit, ConvAnsatz, ModelKind, ModelSpec, Sample};
use qcnn_core::train::{batch_loss, gradient};
use std::time::Instant;

fn angles(seed: u64, n: usize, hi: f64) -> Vec<f64> {
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

fn main() {
    for (kind, ansatz) in [
        (ModelKind::PcaReencoded, ConvAnsatz::Su4),
        (ModelKind::Joint, ConvAnsatz::So4),
        (ModelKind::Joint, ConvAnsatz::Su4),
    ] {
        let model = build_circuit(ModelSpec::new(kind, ansatz)).unwrap();
        let samples: Vec<Sample> = (0..25)
            .map(|i| Sample {
                pca_angles: angles(i, model.n_angle_features, 3.1),
                ae_features: angles(i + 99, model.n_amplitude_features, 1.0),
            })
            .collect();
        let params = angles(7, model.template.n_params, 6.2);
        let batch: Vec<(&Sample, u8)> = samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s, (i % 2) as u8))
            .collect();
        let t0 = Instant::now();
        let _ = batch_loss(&model, &params, &batch).unwrap();
        let fwd = t0.elapsed();
        let t0 = Instant::now();
        let g = gradient(&model, &params, &batch).unwrap();
        let dt = t0.elapsed();
        println!(
            "{kind}/{ansatz}: params={} fwd_batch={:?} grad_batch={:?} |g|={:.4}",
            model.template.n_params,
            fwd,
            dt,
            g.iter().map(|x| x * x).sum::<f64>().sqrt()
        );
    }
}
