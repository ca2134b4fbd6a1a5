//! Analytic gradients against central finite differences on a small model.

use serde::Serialize;

use crate::corpus::TranslationInstance;
use crate::error::Result;
use crate::model::{EncoderKind, Model, ModelConfig, Parameters, PeepholeMode};
use crate::numkit::{finite_difference_grad, SeededRng};

/// Denominator floor of the relative error, so coordinates whose true
/// gradient is near zero are judged on absolute error.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckConfig {
    pub encoder: EncoderKind,
    pub peephole: PeepholeMode,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub source_vocab: usize,
    pub target_vocab: usize,
    pub sentence_len: usize,
    pub batch: usize,
    pub epsilon: f64,
    pub tolerance: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            encoder: EncoderKind::BiLstm,
            peephole: PeepholeMode::Full,
            embed_dim: 8,
            hidden_dim: 8,
            source_vocab: 30,
            target_vocab: 20,
            sentence_len: 6,
            batch: 4,
            epsilon: 1e-4,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub seed: u64,
    pub num_parameters: usize,
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub worst_tensor: String,
    pub worst_index: usize,
    pub passed: bool,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Random model and batch drawn from `seed`.
pub fn gradcheck_problem(seed: u64, config: &GradCheckConfig) -> (Model, Vec<TranslationInstance>) {
    let mut rng = SeededRng::new(seed);
    let model_cfg = ModelConfig {
        encoder: config.encoder,
        embed_dim: config.embed_dim,
        hidden_dim: config.hidden_dim,
        peephole: config.peephole,
    };
    let mut model = Model::init(model_cfg, config.source_vocab, config.target_vocab, &mut rng);
    // Move away from the zero-bias initialization so every gate sees a
    // generic operating point.
    for (_, t) in model.tensors_mut() {
        for v in t.iter_mut() {
            *v += rng.uniform(-0.3, 0.3);
        }
    }
    let batch = (0..config.batch)
        .map(|_| TranslationInstance {
            source_ids: (0..config.sentence_len).map(|_| rng.below(config.source_vocab) as u32).collect(),
            position: rng.below(config.sentence_len),
            target_id: rng.below(config.target_vocab) as u32,
        })
        .collect();
    (model, batch)
}

/// Compares every parameter coordinate's analytic gradient of the summed
/// batch loss with central differences.
pub fn gradient_check(seed: u64, config: &GradCheckConfig) -> Result<GradCheckReport> {
    let (model, batch) = gradcheck_problem(seed, config);
    let (_, grads) = model.loss_and_gradients(&batch);
    let analytic = grads.flatten();
    let x = model.flatten();
    let mut probe = model.clone();
    let numeric = finite_difference_grad(
        |flat| {
            probe.assign_flat(flat);
            probe.loss(&batch)
        },
        &x,
        config.epsilon,
    )?;

    let names: Vec<(String, usize)> = model.tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    let mut worst = (0.0f64, 0usize);
    let mut max_abs = 0.0f64;
    for (k, (&a, &n)) in analytic.iter().zip(&numeric).enumerate() {
        let rel = relative_error(a, n);
        max_abs = max_abs.max((a - n).abs());
        if rel > worst.0 || k == 0 {
            worst = (rel, k);
        }
    }
    let (mut tensor, mut index) = (String::new(), worst.1);
    for (name, len) in names {
        if index < len {
            tensor = name;
            break;
        }
        index -= len;
    }
    Ok(GradCheckReport {
        seed,
        num_parameters: x.len(),
        max_relative_error: worst.0,
        max_absolute_error: max_abs,
        worst_tensor: tensor,
        worst_index: index,
        passed: worst.0 < config.tolerance,
    })
}
