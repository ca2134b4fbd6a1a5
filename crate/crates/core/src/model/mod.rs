//! Encoders, softmax heads, and exact gradients of the summed negative
//! log-likelihood.

mod encoder;
mod lstm;

use serde::{Deserialize, Serialize};

pub use encoder::{BiLstmEncoder, EmbeddingTable, ForwardLstmEncoder, EMBEDDING_INIT_RANGE};
pub use lstm::{lstm_step, LstmDirectionParams, PeepholeMode};

use crate::baselines::{MlpEncoder, MlpParams, MlpTrace};
use crate::corpus::TranslationInstance;
use crate::error::{Error, Result};
use crate::numkit::{init_matrix, log_sum_exp, softmax_stable, InitMode, Matrix, SeededRng};

/// Named views of every trainable tensor, in a fixed declared order.
pub trait Parameters {
    fn tensors(&self) -> Vec<(String, &[f64])>;
    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])>;

    fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn zero_(&mut self) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Concatenation of all tensors.
    fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    fn assign_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for (_, t) in self.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        assert_eq!(offset, flat.len(), "flat parameter length mismatch");
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    #[default]
    BiLstm,
    ForwardLstm,
    Mlp,
}

impl std::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "bilstm" | "bi_lstm" => Ok(EncoderKind::BiLstm),
            "forward" | "forward_lstm" => Ok(EncoderKind::ForwardLstm),
            "mlp" => Ok(EncoderKind::Mlp),
            other => Err(format!("unknown encoder `{other}` (expected bilstm, forward or mlp)")),
        }
    }
}

/// Shape of a model. `hidden_dim` is the per-direction size of the
/// bidirectional encoder; every encoder kind emits `2·hidden_dim` features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub encoder: EncoderKind,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub peephole: PeepholeMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { encoder: EncoderKind::BiLstm, embed_dim: 300, hidden_dim: 300, peephole: PeepholeMode::Full }
    }
}

impl ModelConfig {
    pub fn context_dim(&self) -> usize {
        2 * self.hidden_dim
    }
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Encoder {
    BiLstm(BiLstmEncoder),
    ForwardLstm(ForwardLstmEncoder),
    Mlp(MlpEncoder),
}

pub(crate) enum EncoderTrace {
    BiLstm(encoder::BiTrace),
    ForwardLstm(Vec<lstm::StepTrace>),
    Mlp(MlpTrace),
}

impl Encoder {
    pub fn init(config: &ModelConfig, vocab_size: usize, rng: &mut SeededRng) -> Self {
        let (v, d, h) = (vocab_size, config.embed_dim, config.hidden_dim);
        match config.encoder {
            EncoderKind::BiLstm => Encoder::BiLstm(BiLstmEncoder::init(v, d, h, config.peephole, rng)),
            EncoderKind::ForwardLstm => Encoder::ForwardLstm(ForwardLstmEncoder::init(v, d, h, config.peephole, rng)),
            EncoderKind::Mlp => Encoder::Mlp(MlpEncoder::init(v, d, h, rng)),
        }
    }

    /// All-zero parameters of the given shape.
    pub fn zeros(config: &ModelConfig, vocab_size: usize) -> Self {
        let (v, d, h) = (vocab_size, config.embed_dim, config.hidden_dim);
        let embeddings = EmbeddingTable::zeros(v, d);
        match config.encoder {
            EncoderKind::BiLstm => Encoder::BiLstm(BiLstmEncoder {
                embeddings,
                forward: LstmDirectionParams::zeros(d, h, config.peephole),
                backward: LstmDirectionParams::zeros(d, h, config.peephole),
            }),
            EncoderKind::ForwardLstm => Encoder::ForwardLstm(ForwardLstmEncoder {
                embeddings,
                forward: LstmDirectionParams::zeros(d, 2 * h, config.peephole),
            }),
            EncoderKind::Mlp => Encoder::Mlp(MlpEncoder { embeddings, mlp: MlpParams::zeros(d, 2 * h) }),
        }
    }

    pub fn kind(&self) -> EncoderKind {
        match self {
            Encoder::BiLstm(_) => EncoderKind::BiLstm,
            Encoder::ForwardLstm(_) => EncoderKind::ForwardLstm,
            Encoder::Mlp(_) => EncoderKind::Mlp,
        }
    }

    pub fn embeddings(&self) -> &EmbeddingTable {
        match self {
            Encoder::BiLstm(e) => &e.embeddings,
            Encoder::ForwardLstm(e) => &e.embeddings,
            Encoder::Mlp(e) => &e.embeddings,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Encoder::BiLstm(e) => e.output_dim(),
            Encoder::ForwardLstm(e) => e.output_dim(),
            Encoder::Mlp(e) => e.output_dim(),
        }
    }

    /// One context vector per position.
    pub fn encode(&self, ids: &[u32]) -> Vec<Vec<f64>> {
        match self {
            Encoder::BiLstm(e) => e.encode(ids),
            Encoder::ForwardLstm(e) => e.encode(ids),
            Encoder::Mlp(e) => e.encode(ids),
        }
    }

    /// Context vector at a single position.
    pub fn encode_at(&self, ids: &[u32], t: usize) -> Vec<f64> {
        self.encode_traced(ids, t).0
    }

    pub(crate) fn encode_traced(&self, ids: &[u32], t: usize) -> (Vec<f64>, EncoderTrace) {
        assert!(!ids.is_empty(), "cannot encode an empty sentence");
        match self {
            Encoder::BiLstm(e) => {
                let (h, tr) = e.encode_at(ids, t);
                (h, EncoderTrace::BiLstm(tr))
            }
            Encoder::ForwardLstm(e) => {
                let (h, tr) = e.encode_at(ids, t);
                (h, EncoderTrace::ForwardLstm(tr))
            }
            Encoder::Mlp(e) => {
                let (h, tr) = e.encode_at(ids, t);
                (h, EncoderTrace::Mlp(tr))
            }
        }
    }

    pub(crate) fn backprop(&self, ids: &[u32], t: usize, trace: &EncoderTrace, dh: &[f64], grads: &mut Encoder) {
        match (self, trace, grads) {
            (Encoder::BiLstm(e), EncoderTrace::BiLstm(tr), Encoder::BiLstm(g)) => e.backprop(ids, t, tr, dh, g),
            (Encoder::ForwardLstm(e), EncoderTrace::ForwardLstm(tr), Encoder::ForwardLstm(g)) => {
                e.backprop(ids, t, tr, dh, g)
            }
            (Encoder::Mlp(e), EncoderTrace::Mlp(tr), Encoder::Mlp(g)) => e.backprop(ids, t, tr, dh, g),
            _ => panic!("gradient buffer does not match the encoder kind"),
        }
    }
}

impl Parameters for Encoder {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        match self {
            Encoder::BiLstm(e) => {
                out.push(("embeddings".to_string(), e.embeddings.table.as_slice()));
                out.extend(e.forward.tensors().into_iter().map(|(n, t)| (format!("forward.{n}"), t)));
                out.extend(e.backward.tensors().into_iter().map(|(n, t)| (format!("backward.{n}"), t)));
            }
            Encoder::ForwardLstm(e) => {
                out.push(("embeddings".to_string(), e.embeddings.table.as_slice()));
                out.extend(e.forward.tensors().into_iter().map(|(n, t)| (format!("forward.{n}"), t)));
            }
            Encoder::Mlp(e) => {
                out.push(("embeddings".to_string(), e.embeddings.table.as_slice()));
                out.push(("mlp.weight".to_string(), e.mlp.weight.as_slice()));
                out.push(("mlp.bias".to_string(), &e.mlp.bias));
            }
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        match self {
            Encoder::BiLstm(e) => {
                out.push(("embeddings".to_string(), e.embeddings.table.as_mut_slice()));
                out.extend(e.forward.tensors_mut().into_iter().map(|(n, t)| (format!("forward.{n}"), t)));
                out.extend(e.backward.tensors_mut().into_iter().map(|(n, t)| (format!("backward.{n}"), t)));
            }
            Encoder::ForwardLstm(e) => {
                out.push(("embeddings".to_string(), e.embeddings.table.as_mut_slice()));
                out.extend(e.forward.tensors_mut().into_iter().map(|(n, t)| (format!("forward.{n}"), t)));
            }
            Encoder::Mlp(e) => {
                out.push(("embeddings".to_string(), e.embeddings.table.as_mut_slice()));
                out.push(("mlp.weight".to_string(), e.mlp.weight.as_mut_slice()));
                out.push(("mlp.bias".to_string(), &mut e.mlp.bias));
            }
        }
        out
    }
}

/// Softmax classifier over context vectors: `softmax(P·h + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftmaxHead {
    pub projection: Matrix,
    pub bias: Vec<f64>,
}

impl SoftmaxHead {
    pub fn zeros(labels: usize, input: usize) -> Self {
        SoftmaxHead { projection: Matrix::zeros(labels, input), bias: vec![0.0; labels] }
    }

    /// Glorot-uniform projection, zero bias.
    pub fn init(labels: usize, input: usize, rng: &mut SeededRng) -> Self {
        SoftmaxHead { projection: init_matrix(labels, input, InitMode::Glorot, rng), bias: vec![0.0; labels] }
    }

    pub fn num_labels(&self) -> usize {
        self.bias.len()
    }

    pub fn input_dim(&self) -> usize {
        self.projection.cols()
    }

    pub fn logits(&self, h: &[f64]) -> Vec<f64> {
        let mut u = self.bias.clone();
        self.projection.matvec_acc(h, &mut u);
        u
    }

    pub fn distribution(&self, h: &[f64]) -> Vec<f64> {
        softmax_stable(&self.logits(h))
    }
}

impl Parameters for SoftmaxHead {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        vec![("head.projection".into(), self.projection.as_slice()), ("head.bias".into(), &self.bias)]
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        vec![("head.projection".into(), self.projection.as_mut_slice()), ("head.bias".into(), &mut self.bias)]
    }
}

/// `softmax(head(encoder(ids)[t]))`.
pub fn head_distribution(head: &SoftmaxHead, h: &[f64]) -> Vec<f64> {
    assert_eq!(h.len(), head.input_dim(), "context vector length does not match the head");
    head.distribution(h)
}

/// Encoder plus output head. Also serves as its own gradient buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub encoder: Encoder,
    pub head: SoftmaxHead,
}

impl Model {
    /// Fresh model: embeddings uniform(±0.08), recurrent and peephole
    /// matrices orthogonal, other weights Glorot-uniform, biases zero.
    pub fn init(config: ModelConfig, vocab_size: usize, num_labels: usize, rng: &mut SeededRng) -> Self {
        let encoder = Encoder::init(&config, vocab_size, rng);
        let head = SoftmaxHead::init(num_labels, encoder.output_dim(), rng);
        Model { config, encoder, head }
    }

    pub fn zeros(config: ModelConfig, vocab_size: usize, num_labels: usize) -> Self {
        Model {
            config,
            encoder: Encoder::zeros(&config, vocab_size),
            head: SoftmaxHead::zeros(num_labels, config.context_dim()),
        }
    }

    /// Same encoder, new head over `num_labels` classes.
    pub fn with_new_head(&self, num_labels: usize, rng: &mut SeededRng) -> Self {
        Model {
            config: self.config,
            encoder: self.encoder.clone(),
            head: SoftmaxHead::init(num_labels, self.encoder.output_dim(), rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.zero_();
        z
    }

    pub fn vocab_size(&self) -> usize {
        self.encoder.embeddings().vocab_size()
    }

    pub fn num_labels(&self) -> usize {
        self.head.num_labels()
    }

    pub fn context_vectors(&self, ids: &[u32]) -> Vec<Vec<f64>> {
        self.encoder.encode(ids)
    }

    pub fn context_at(&self, ids: &[u32], t: usize) -> Vec<f64> {
        self.encoder.encode_at(ids, t)
    }

    /// Label distribution for the token at `t`.
    pub fn distribution(&self, ids: &[u32], t: usize) -> Vec<f64> {
        head_distribution(&self.head, &self.context_at(ids, t))
    }

    pub fn predict(&self, ids: &[u32], t: usize) -> u32 {
        let logits = self.head.logits(&self.context_at(ids, t));
        argmax(&logits) as u32
    }

    /// Rejects instances with ids the model cannot index.
    pub fn check_instance(&self, inst: &TranslationInstance) -> Result<()> {
        if inst.source_ids.is_empty() {
            return Err(Error::Invalid("instance with an empty sentence".into()));
        }
        if inst.position >= inst.source_ids.len() {
            return Err(Error::Invalid(format!(
                "position {} outside sentence of length {}",
                inst.position,
                inst.source_ids.len()
            )));
        }
        if let Some(&bad) = inst.source_ids.iter().find(|&&id| id as usize >= self.vocab_size()) {
            return Err(Error::Invalid(format!("source id {bad} outside vocabulary of {}", self.vocab_size())));
        }
        if inst.target_id as usize >= self.num_labels() {
            return Err(Error::Invalid(format!(
                "label id {} outside head of {} labels",
                inst.target_id,
                self.num_labels()
            )));
        }
        Ok(())
    }

    /// `-ln p(target | sentence, position)`.
    pub fn instance_nll(&self, inst: &TranslationInstance) -> f64 {
        let u = self.head.logits(&self.context_at(&inst.source_ids, inst.position));
        log_sum_exp(&u) - u[inst.target_id as usize]
    }

    /// Summed negative log-likelihood.
    pub fn loss(&self, batch: &[TranslationInstance]) -> f64 {
        batch.iter().map(|i| self.instance_nll(i)).sum()
    }

    /// Adds this instance's gradient into `grads` and returns its loss.
    pub fn accumulate_gradients(&self, inst: &TranslationInstance, grads: &mut Model) -> f64 {
        let ids = &inst.source_ids;
        let t = inst.position;
        let target = inst.target_id as usize;
        assert!(target < self.num_labels(), "label id {target} outside head");
        let (h, trace) = self.encoder.encode_traced(ids, t);
        let u = self.head.logits(&h);
        let lse = log_sum_exp(&u);
        let loss = lse - u[target];
        let mut du: Vec<f64> = u.iter().map(|&v| (v - lse).exp()).collect();
        du[target] -= 1.0;
        grads.head.projection.outer_acc(&du, &h);
        for (g, d) in grads.head.bias.iter_mut().zip(&du) {
            *g += d;
        }
        let mut dh = vec![0.0; h.len()];
        self.head.projection.matvec_t_acc(&du, &mut dh);
        self.encoder.backprop(ids, t, &trace, &dh, &mut grads.encoder);
        loss
    }

    /// Summed loss and its exact gradient, accumulated in batch order.
    pub fn loss_and_gradients(&self, batch: &[TranslationInstance]) -> (f64, Model) {
        assert!(!batch.is_empty(), "empty batch");
        let mut grads = self.zeros_like();
        let loss = batch.iter().map(|inst| self.accumulate_gradients(inst, &mut grads)).sum();
        (loss, grads)
    }
}

impl Parameters for Model {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut t = self.encoder.tensors();
        t.extend(self.head.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.head.tensors_mut());
        t
    }
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
