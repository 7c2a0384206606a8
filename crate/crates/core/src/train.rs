//! Gradient computation and Nesterov-momentum mini-batch training.
//!
//! The shift-rule mode differentiates the measured head values exactly
//! (two-term rule for plain rotations, four-term rule for controlled
//! rotations) and chains through the loss analytically; a shared parameter
//! accumulates one shifted evaluation per gate occurrence. Finite
//! differences on the batch loss stay available as a permanent oracle.
//! Every floating-point reduction runs in a fixed order so a run is
//! bit-reproducible regardless of thread count.

use crate::error::{Error, Result};
use crate::model::{dloss_dhead, loss_from_head, CompiledModel, Sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientMode {
    ShiftRule,
    FiniteDiff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub seed: u64,
    pub gradient_mode: GradientMode,
    /// Step for the finite-difference mode.
    pub fd_step: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            momentum: 0.9,
            batch_size: 25,
            iterations: 200,
            seed: 0,
            gradient_mode: GradientMode::ShiftRule,
            fd_step: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Mean batch loss at the parameters in force at each iteration.
    pub losses: Vec<f64>,
    /// Cumulative wall time after each iteration, in milliseconds.
    pub wall_ms: Vec<u64>,
    pub final_params: Vec<f64>,
}

// Four-term shift rule for gates whose generator has eigenvalues {0, ±1/2}
// (controlled rotations): f' = c+·[f(+π/2) − f(−π/2)] − c−·[f(+3π/2) − f(−3π/2)].
const SHIFT_COEFF_NEAR: f64 = 0.42677669529663687; // (√2+1)/(4√2)
const SHIFT_COEFF_FAR: f64 = 0.07322330470336313; // (√2−1)/(4√2)

/// One trainable angle occurrence, in circuit order.
#[derive(Clone, Copy)]
struct Occurrence {
    slot: usize,
    placement: usize,
    pos: usize,
    controlled: bool,
}

/// ∂(mean batch loss)/∂θ for every trainable parameter.
pub fn gradient(
    model: &CompiledModel,
    params: &[f64],
    batch: &[(&Sample, u8)],
) -> Result<Vec<f64>> {
    gradient_with_mode(model, params, batch, GradientMode::ShiftRule, 0.0)
}

pub fn gradient_with_mode(
    model: &CompiledModel,
    params: &[f64],
    batch: &[(&Sample, u8)],
    mode: GradientMode,
    fd_step: f64,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::Degenerate("empty gradient batch".into()));
    }
    match mode {
        GradientMode::ShiftRule => shift_rule_gradient(model, params, batch),
        GradientMode::FiniteDiff => finite_diff_gradient(model, params, batch, fd_step),
    }
}

fn shift_rule_gradient(
    model: &CompiledModel,
    params: &[f64],
    batch: &[(&Sample, u8)],
) -> Result<Vec<f64>> {
    let head_kind = model.head_kind();

    // Occurrences sorted by circuit position so one forward sweep per
    // sample can serve every shift as a cached prefix.
    let mut occurrences: Vec<Occurrence> = Vec::new();
    for (slot, occ) in model.template.occurrences().iter().enumerate() {
        for &(placement, pos) in occ {
            occurrences.push(Occurrence {
                slot,
                placement,
                pos,
                controlled: model.template.placements[placement]
                    .kind
                    .is_controlled_rotation(),
            });
        }
    }
    occurrences.sort_by_key(|o| (o.placement, o.pos));

    // Per-sample gradients computed in parallel, then folded in sample
    // order so the reduction is bit-stable.
    let per_sample: Vec<Vec<f64>> = batch
        .par_iter()
        .map(|&(sample, label)| {
            sample_gradient(model, params, sample, label, head_kind, &occurrences)
        })
        .collect::<Result<_>>()?;

    let mut grad = vec![0.0f64; model.template.n_params];
    let scale = 1.0 / batch.len() as f64;
    for sample_grad in per_sample {
        for (g, s) in grad.iter_mut().zip(sample_grad) {
            *g += scale * s;
        }
    }
    Ok(grad)
}

/// d(loss)/dθ for one sample: advance a prefix state placement by
/// placement; at each trainable occurrence, branch off shifted suffix
/// evaluations; finish the sweep to get the unshifted head for the chain
/// rule.
fn sample_gradient(
    model: &CompiledModel,
    params: &[f64],
    sample: &Sample,
    label: u8,
    head_kind: crate::model::Head,
    occurrences: &[Occurrence],
) -> Result<Vec<f64>> {
    model.validate_inputs(params, sample)?;
    let binding = crate::ansatz::Binding {
        params,
        features: &sample.pca_angles,
    };
    let template = &model.template;
    let total = template.placements.len();

    let mut prefix = model.initial_state(sample)?;
    let mut cursor = 0usize;
    let mut dheads: Vec<(usize, [f64; 2])> = Vec::with_capacity(occurrences.len());

    let shifted_head =
        |prefix: &crate::state::StateVector, occ: &Occurrence, delta: f64| -> Result<[f64; 2]> {
            let mut state = prefix.clone();
            template.apply_range(
                &mut state,
                &binding,
                occ.placement,
                total,
                Some((occ.placement, occ.pos, delta)),
            )?;
            model.measure_head(&state)
        };

    for occ in occurrences {
        template.apply_range(&mut prefix, &binding, cursor, occ.placement, None)?;
        cursor = occ.placement;
        let dhead = if occ.controlled {
            let near_p = shifted_head(&prefix, occ, FRAC_PI_2)?;
            let near_m = shifted_head(&prefix, occ, -FRAC_PI_2)?;
            let far_p = shifted_head(&prefix, occ, 3.0 * FRAC_PI_2)?;
            let far_m = shifted_head(&prefix, occ, -3.0 * FRAC_PI_2)?;
            [
                SHIFT_COEFF_NEAR * (near_p[0] - near_m[0])
                    - SHIFT_COEFF_FAR * (far_p[0] - far_m[0]),
                SHIFT_COEFF_NEAR * (near_p[1] - near_m[1])
                    - SHIFT_COEFF_FAR * (far_p[1] - far_m[1]),
            ]
        } else {
            let plus = shifted_head(&prefix, occ, FRAC_PI_2)?;
            let minus = shifted_head(&prefix, occ, -FRAC_PI_2)?;
            [(plus[0] - minus[0]) / 2.0, (plus[1] - minus[1]) / 2.0]
        };
        dheads.push((occ.slot, dhead));
    }

    template.apply_range(&mut prefix, &binding, cursor, total, None)?;
    let head = model.measure_head(&prefix)?;
    let dl = dloss_dhead(head_kind, head, label);

    let mut grad = vec![0.0f64; template.n_params];
    for (slot, dhead) in dheads {
        grad[slot] += dl[0] * dhead[0] + dl[1] * dhead[1];
    }
    Ok(grad)
}

/// Central differences of the mean batch loss; the permanent oracle for the
/// shift rule.
fn finite_diff_gradient(
    model: &CompiledModel,
    params: &[f64],
    batch: &[(&Sample, u8)],
    h: f64,
) -> Result<Vec<f64>> {
    if h <= 0.0 {
        return Err(Error::Config(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let results: Vec<f64> = (0..params.len())
        .into_par_iter()
        .map(|k| {
            let mut shifted = params.to_vec();
            shifted[k] = params[k] + h;
            let plus = batch_loss(model, &shifted, batch)?;
            shifted[k] = params[k] - h;
            let minus = batch_loss(model, &shifted, batch)?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect::<Result<_>>()?;
    Ok(results)
}

/// Mean loss over a batch, reduced in sample order.
pub fn batch_loss(model: &CompiledModel, params: &[f64], batch: &[(&Sample, u8)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Degenerate("empty loss batch".into()));
    }
    let head_kind = model.head_kind();
    let losses: Vec<f64> = batch
        .par_iter()
        .map(|&(sample, label)| {
            let head = model.head_values(params, sample, None)?;
            Ok(loss_from_head(head_kind, head, label))
        })
        .collect::<Result<_>>()?;
    Ok(losses.iter().sum::<f64>() / batch.len() as f64)
}

/// Nesterov look-ahead step. The gradient must have been evaluated at
/// `params + momentum · velocity`; then `v ← μv − ηg` and `θ ← θ + v`.
pub fn nesterov_step(params: &mut [f64], velocity: &mut [f64], grad: &[f64], config: &TrainConfig) {
    debug_assert_eq!(params.len(), velocity.len());
    debug_assert_eq!(params.len(), grad.len());
    for ((p, v), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = config.momentum * *v - config.learning_rate * g;
        *p += *v;
    }
}

/// Point at which the Nesterov gradient is evaluated.
pub fn look_ahead(params: &[f64], velocity: &[f64], momentum: f64) -> Vec<f64> {
    params
        .iter()
        .zip(velocity)
        .map(|(&p, &v)| p + momentum * v)
        .collect()
}

/// Uniform parameter initialization on [0, 2π).
pub fn init_params(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect()
}

/// Mini-batch training: each iteration samples `batch_size` indices from
/// the seeded generator (storage order never enters the stream), evaluates
/// the Nesterov look-ahead gradient, and steps. The loss trace records the
/// batch loss at the pre-update parameters.
pub fn train(
    model: &CompiledModel,
    samples: &[Sample],
    labels: &[u8],
    config: &TrainConfig,
) -> Result<TrainTrace> {
    if samples.is_empty() {
        return Err(Error::Degenerate("empty training set".into()));
    }
    if samples.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} samples vs {} labels",
            samples.len(),
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init_params(model.template.n_params, &mut rng);
    let mut velocity = vec![0.0f64; params.len()];
    let mut losses = Vec::with_capacity(config.iterations);
    let mut wall_ms = Vec::with_capacity(config.iterations);
    let started = Instant::now();

    for _ in 0..config.iterations {
        let batch_indices = sample_indices(&mut rng, samples.len(), config.batch_size);
        let batch: Vec<(&Sample, u8)> = batch_indices
            .iter()
            .map(|&i| (&samples[i], labels[i]))
            .collect();

        losses.push(batch_loss(model, &params, &batch)?);

        let ahead = look_ahead(&params, &velocity, config.momentum);
        let grad = gradient_with_mode(model, &ahead, &batch, config.gradient_mode, config.fd_step)?;
        nesterov_step(&mut params, &mut velocity, &grad, config);
        wall_ms.push(started.elapsed().as_millis() as u64);
    }

    Ok(TrainTrace {
        losses,
        wall_ms,
        final_params: params,
    })
}

/// `count` distinct indices into `len` items from the seeded stream, or
/// every index when the dataset is smaller than the batch.
fn sample_indices(rng: &mut ChaCha8Rng, len: usize, count: usize) -> Vec<usize> {
    if count >= len {
        return (0..len).collect();
    }
    rand::seq::index::sample(rng, len, count).into_vec()
}

impl TrainTrace {
    /// Trace as CSV: `iteration,loss,wall_ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,loss,wall_ms\n");
        for (i, (loss, ms)) in self.losses.iter().zip(&self.wall_ms).enumerate() {
            out.push_str(&format!("{i},{loss:.17},{ms}\n"));
        }
        out
    }
}
