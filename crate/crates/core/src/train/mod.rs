//! Initialization, Adam, the training loop, perplexity, and checkpoints.

mod adam;
mod checkpoint;
mod gradcheck;
mod trainer;

use serde::{Deserialize, Serialize};

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointMeta, LabelSpace, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{gradcheck_problem, gradient_check, relative_error, GradCheckConfig, GradCheckReport, RELATIVE_ERROR_FLOOR};
pub use trainer::{mean_nll, perplexity, train, EarlyStopDecision, EarlyStopping, EvalRecord, TrainOutcome, Trainer};

use crate::model::{Model, ModelConfig};
use crate::numkit::SeededRng;

const INIT_STREAM: u64 = 1;
const HEAD_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Evaluate every this many updates; `None` means once per epoch.
    pub eval_every: Option<usize>,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub model: ModelConfig,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            eval_every: None,
            patience: 3,
            max_epochs: 20,
            seed: 1,
            model: ModelConfig::default(),
            adam: AdamConfig::default(),
        }
    }
}

/// Fresh model for the configured shape, seeded from `config.seed`.
pub fn init_model(config: &TrainConfig, src_vocab_size: usize, num_labels: usize) -> Model {
    let mut rng = SeededRng::new(config.seed).derive(INIT_STREAM);
    Model::init(config.model, src_vocab_size, num_labels, &mut rng)
}

/// Keeps the encoder of `pretrained` and puts a fresh Glorot-initialized
/// head over `num_labels` classes on top.
pub fn transfer_model(pretrained: &Model, config: &TrainConfig, num_labels: usize) -> Model {
    let mut rng = SeededRng::new(config.seed).derive(HEAD_STREAM);
    pretrained.with_new_head(num_labels, &mut rng)
}
