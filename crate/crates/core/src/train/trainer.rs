use rayon::prelude::*;

use super::{AdamState, TrainConfig};
use crate::corpus::TranslationInstance;
use crate::error::{Error, Result};
use crate::model::{Model, Parameters};
use crate::numkit::SeededRng;

/// Instances per gradient chunk. Fixed so the floating-point reduction order
/// does not depend on the number of worker threads.
const GRAD_CHUNK: usize = 8;

const SHUFFLE_STREAM: u64 = 2;

/// `exp(mean NLL)` over the instances.
pub fn perplexity(model: &Model, instances: &[TranslationInstance]) -> f64 {
    assert!(!instances.is_empty(), "perplexity of an empty instance set");
    mean_nll(model, instances).exp()
}

/// Mean negative log-likelihood; per-instance terms are summed in input order.
pub fn mean_nll(model: &Model, instances: &[TranslationInstance]) -> f64 {
    let nll: Vec<f64> = instances.par_iter().map(|i| model.instance_nll(i)).collect();
    nll.iter().sum::<f64>() / instances.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EarlyStopDecision {
    /// New best value; keep this checkpoint.
    Improved,
    Continue,
    Stop,
}

/// Stops after `patience` consecutive evaluations without improvement.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<f64>,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be at least 1");
        EarlyStopping { patience, best: None, stale: 0 }
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn observe(&mut self, value: f64) -> EarlyStopDecision {
        match self.best {
            Some(b) if value >= b => {
                self.stale += 1;
                if self.stale >= self.patience {
                    EarlyStopDecision::Stop
                } else {
                    EarlyStopDecision::Continue
                }
            }
            _ => {
                self.best = Some(value);
                self.stale = 0;
                EarlyStopDecision::Improved
            }
        }
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub epoch: usize,
    pub updates: usize,
    /// Mean per-instance training loss since the previous evaluation.
    pub train_loss: f64,
    pub dev_perplexity: Option<f64>,
}

impl EvalRecord {
    /// `updates<TAB>train_loss<TAB>dev_perplexity`
    pub fn to_tsv(&self) -> String {
        let dev = self.dev_perplexity.map_or_else(|| "NA".to_string(), |p| format!("{p:.6}"));
        format!("{}\t{:.6}\t{}", self.updates, self.train_loss, dev)
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters at the best dev evaluation (the final parameters when
    /// there is no dev set).
    pub best: Model,
    pub best_dev_perplexity: Option<f64>,
    pub history: Vec<EvalRecord>,
    pub epochs: usize,
    pub updates: usize,
    pub stopped_early: bool,
}

/// Owns the parameters and optimizer state during training.
pub struct Trainer {
    config: TrainConfig,
    model: Model,
    adam: AdamState,
    rng: SeededRng,
    grad_buffers: Vec<Model>,
    updates: usize,
    epochs: usize,
    order: Vec<usize>,
}

impl Trainer {
    pub fn new(model: Model, config: TrainConfig) -> Self {
        assert!(config.batch_size >= 1, "batch size must be at least 1");
        let adam = AdamState::new(config.adam, &model);
        let rng = SeededRng::new(config.seed).derive(SHUFFLE_STREAM);
        Trainer { config, model, adam, rng, grad_buffers: Vec::new(), updates: 0, epochs: 0, order: Vec::new() }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    /// Summed loss and gradient of `batch`; the gradient lands in
    /// `grad_buffers[0]`.
    fn batch_gradients(&mut self, batch: &[&TranslationInstance]) -> f64 {
        let chunks: Vec<&[&TranslationInstance]> = batch.chunks(GRAD_CHUNK).collect();
        while self.grad_buffers.len() < chunks.len() {
            self.grad_buffers.push(self.model.zeros_like());
        }
        let model = &self.model;
        let losses: Vec<f64> = self.grad_buffers[..chunks.len()]
            .par_iter_mut()
            .zip(chunks.par_iter())
            .map(|(buf, chunk)| {
                buf.zero_();
                chunk.iter().map(|inst| model.accumulate_gradients(inst, buf)).sum::<f64>()
            })
            .collect();
        let (head, rest) = self.grad_buffers.split_at_mut(1);
        let total = &mut head[0];
        for other in &rest[..chunks.len() - 1] {
            for ((_, dst), (_, src)) in total.tensors_mut().into_iter().zip(other.tensors()) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        losses.iter().sum()
    }

    /// One optimizer update on `batch`; returns the summed batch loss.
    pub fn step(&mut self, batch: &[&TranslationInstance]) -> Result<f64> {
        assert!(!batch.is_empty(), "empty batch");
        let loss = self.batch_gradients(batch);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { update: self.updates + 1, loss });
        }
        self.adam.step(&mut self.model, &self.grad_buffers[0])?;
        self.updates += 1;
        Ok(loss)
    }

    /// One shuffled pass. `after_update` runs after every update with the
    /// trainer, the summed batch loss and the batch size; returning `false`
    /// ends the epoch early.
    pub fn run_epoch_with<F>(&mut self, train: &[TranslationInstance], mut after_update: F) -> Result<()>
    where
        F: FnMut(&mut Trainer, f64, usize) -> Result<bool>,
    {
        assert!(!train.is_empty(), "empty training set");
        self.order.clear();
        self.order.extend(0..train.len());
        let mut order = std::mem::take(&mut self.order);
        self.rng.shuffle(&mut order);
        let result = (|| {
            for idx in order.chunks(self.config.batch_size) {
                let batch: Vec<&TranslationInstance> = idx.iter().map(|&i| &train[i]).collect();
                let loss = self.step(&batch)?;
                if !after_update(self, loss, batch.len())? {
                    break;
                }
            }
            Ok(())
        })();
        self.order = order;
        self.epochs += 1;
        result
    }

    /// One shuffled pass; returns the mean per-instance training loss.
    pub fn run_epoch(&mut self, train: &[TranslationInstance]) -> Result<f64> {
        let mut total = 0.0;
        self.run_epoch_with(train, |_, loss, _| {
            total += loss;
            Ok(true)
        })?;
        Ok(total / train.len() as f64)
    }
}

/// Trains with early stopping on dev perplexity.
///
/// Evaluates every `eval_every` updates (or once per epoch when unset), keeps
/// the parameters of the best evaluation, and stops after `patience`
/// evaluations without improvement or after `max_epochs`. With an empty dev
/// set the final parameters are returned.
pub fn train(
    model: Model,
    train_set: &[TranslationInstance],
    dev_set: &[TranslationInstance],
    config: &TrainConfig,
    mut log: impl FnMut(&EvalRecord),
) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::Invalid("training set is empty".into()));
    }
    for inst in train_set.iter().chain(dev_set) {
        model.check_instance(inst)?;
    }
    let mut trainer = Trainer::new(model, config.clone());
    let mut stopper = EarlyStopping::new(config.patience);
    let mut history = Vec::new();
    let mut best: Option<Model> = None;
    let mut stop = false;
    let mut loss_since_eval = 0.0;
    let mut count_since_eval = 0usize;

    let mut evaluate = |trainer: &Trainer, loss: f64, count: usize, history: &mut Vec<EvalRecord>| {
        let dev_perplexity = (!dev_set.is_empty()).then(|| perplexity(trainer.model(), dev_set));
        let record = EvalRecord {
            epoch: trainer.epochs(),
            updates: trainer.updates(),
            train_loss: if count > 0 { loss / count as f64 } else { f64::NAN },
            dev_perplexity,
        };
        log(&record);
        history.push(record);
        dev_perplexity
    };

    for _ in 0..config.max_epochs {
        trainer.run_epoch_with(train_set, |tr, loss, n| {
            loss_since_eval += loss;
            count_since_eval += n;
            if let Some(every) = config.eval_every {
                if tr.updates() % every == 0 {
                    let dev = evaluate(tr, loss_since_eval, count_since_eval, &mut history);
                    loss_since_eval = 0.0;
                    count_since_eval = 0;
                    if let Some(ppl) = dev {
                        match stopper.observe(ppl) {
                            EarlyStopDecision::Improved => best = Some(tr.model().clone()),
                            EarlyStopDecision::Continue => {}
                            EarlyStopDecision::Stop => {
                                stop = true;
                                return Ok(false);
                            }
                        }
                    }
                }
            }
            Ok(true)
        })?;
        if stop {
            break;
        }
        if config.eval_every.is_none() {
            let dev = evaluate(&trainer, loss_since_eval, count_since_eval, &mut history);
            loss_since_eval = 0.0;
            count_since_eval = 0;
            if let Some(ppl) = dev {
                match stopper.observe(ppl) {
                    EarlyStopDecision::Improved => best = Some(trainer.model().clone()),
                    EarlyStopDecision::Continue => {}
                    EarlyStopDecision::Stop => {
                        stop = true;
                        break;
                    }
                }
            }
        }
    }

    let epochs = trainer.epochs();
    let updates = trainer.updates();
    let best_dev_perplexity = stopper.best();
    let best = match best {
        Some(m) => m,
        None => trainer.into_model(),
    };
    Ok(TrainOutcome { best, best_dev_perplexity, history, epochs, updates, stopped_early: stop })
}
