//! Comparison systems: an MLP over averaged context embeddings and a
//! context-insensitive nearest-neighbour predictor over type vectors.
//! The forward-only LSTM lives in [`crate::model::ForwardLstmEncoder`].

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::EmbeddingTable;
use crate::numkit::{axpy, cosine, init_matrix, InitMode, Matrix, SeededRng};
use crate::tasks::{rank_candidates, Candidate};

/// `tanh(W [x_t ; mean_{j≠t} x_j] + b)`; `W` is `2·d_h × 2d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl MlpParams {
    pub fn zeros(embed_dim: usize, output_dim: usize) -> Self {
        MlpParams { weight: Matrix::zeros(output_dim, 2 * embed_dim), bias: vec![0.0; output_dim] }
    }

    pub fn init(embed_dim: usize, output_dim: usize, rng: &mut SeededRng) -> Self {
        MlpParams {
            weight: init_matrix(output_dim, 2 * embed_dim, InitMode::Glorot, rng),
            bias: vec![0.0; output_dim],
        }
    }

    pub fn output_dim(&self) -> usize {
        self.bias.len()
    }
}

/// `[x_t ; mean of the other positions]`, zero mean for a one-word sentence.
fn mlp_input(embeddings: &EmbeddingTable, ids: &[u32], t: usize) -> Vec<f64> {
    assert!(!ids.is_empty(), "cannot encode an empty sentence");
    assert!(t < ids.len(), "position {t} outside sentence of length {}", ids.len());
    let d = embeddings.dim();
    let mut input = Vec::with_capacity(2 * d);
    input.extend_from_slice(embeddings.lookup(ids[t]));
    // Running mean: equal inputs give their value back exactly.
    let mut mean = vec![0.0; d];
    let mut k = 0.0;
    for (j, &id) in ids.iter().enumerate() {
        if j != t {
            k += 1.0;
            for (m, &x) in mean.iter_mut().zip(embeddings.lookup(id)) {
                *m += (x - *m) / k;
            }
        }
    }
    input.extend_from_slice(&mean);
    input
}

pub fn mlp_encode(p: &MlpParams, embeddings: &EmbeddingTable, ids: &[u32], t: usize) -> Vec<f64> {
    let input = mlp_input(embeddings, ids, t);
    let mut a = p.bias.clone();
    p.weight.matvec_acc(&input, &mut a);
    a.iter().map(|v| v.tanh()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpEncoder {
    pub embeddings: EmbeddingTable,
    pub mlp: MlpParams,
}

pub(crate) struct MlpTrace {
    input: Vec<f64>,
    hidden: Vec<f64>,
}

impl MlpEncoder {
    pub fn init(vocab_size: usize, dim: usize, hidden: usize, rng: &mut SeededRng) -> Self {
        let embeddings = EmbeddingTable::init(vocab_size, dim, rng);
        let mlp = MlpParams::init(dim, 2 * hidden, rng);
        MlpEncoder { embeddings, mlp }
    }

    pub fn output_dim(&self) -> usize {
        self.mlp.output_dim()
    }

    pub fn encode(&self, ids: &[u32]) -> Vec<Vec<f64>> {
        (0..ids.len()).map(|t| mlp_encode(&self.mlp, &self.embeddings, ids, t)).collect()
    }

    pub(crate) fn encode_at(&self, ids: &[u32], t: usize) -> (Vec<f64>, MlpTrace) {
        let input = mlp_input(&self.embeddings, ids, t);
        let mut a = self.mlp.bias.clone();
        self.mlp.weight.matvec_acc(&input, &mut a);
        let hidden: Vec<f64> = a.iter().map(|v| v.tanh()).collect();
        (hidden.clone(), MlpTrace { input, hidden })
    }

    pub(crate) fn backprop(&self, ids: &[u32], t: usize, trace: &MlpTrace, dh: &[f64], grads: &mut MlpEncoder) {
        let da: Vec<f64> = dh.iter().zip(&trace.hidden).map(|(g, h)| g * (1.0 - h * h)).collect();
        grads.mlp.weight.outer_acc(&da, &trace.input);
        axpy(1.0, &da, &mut grads.mlp.bias);
        let mut dz = vec![0.0; trace.input.len()];
        self.mlp.weight.matvec_t_acc(&da, &mut dz);
        let d = self.embeddings.dim();
        grads.embeddings.add_to_row(ids[t], &dz[..d]);
        if ids.len() > 1 {
            let scale = 1.0 / (ids.len() - 1) as f64;
            let dmean: Vec<f64> = dz[d..].iter().map(|v| v * scale).collect();
            for (j, &id) in ids.iter().enumerate() {
                if j != t {
                    grads.embeddings.add_to_row(id, &dmean);
                }
            }
        }
    }
}

/// Externally trained word-type vectors.
#[derive(Clone, Debug, Default)]
pub struct TypeVectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl TypeVectorTable {
    pub fn new(dim: usize) -> Self {
        TypeVectorTable { dim, vectors: HashMap::new() }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Invalid(format!("vector of length {} in a {}-dim table", vector.len(), self.dim)));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Text format: header `count dim`, then `word v1 … vdim` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `count dim` header"))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(1, "header must be `count dim`"))?;
        let [count, dim] = nums[..] else {
            return Err(Error::parse(1, "header must be `count dim`"));
        };
        let mut table = TypeVectorTable::new(dim);
        for (n, line) in lines {
            let line_no = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line");
            let vector = parts
                .map(|s| s.parse::<f64>().map_err(|_| Error::parse(line_no, format!("bad component `{s}`"))))
                .collect::<Result<Vec<f64>>>()?;
            if vector.len() != dim {
                return Err(Error::parse(line_no, format!("expected {dim} components, found {}", vector.len())));
            }
            table.vectors.insert(word.to_string(), vector);
        }
        if table.vectors.len() != count {
            return Err(Error::parse(1, format!("header announces {count} vectors, file has {}", table.vectors.len())));
        }
        Ok(table)
    }
}

/// Candidate whose type vector is closest (cosine) to the target's. Ties go
/// to the higher-ranked candidate. Candidates missing from the table are
/// skipped.
pub fn type_vector_predict(table: &TypeVectorTable, target: &str, candidates: &[Candidate]) -> Result<String> {
    let tv = table
        .get(target)
        .ok_or_else(|| Error::Lookup(format!("target `{target}` has no type vector")))?;
    let mut best: Option<(&Candidate, f64)> = None;
    for cand in rank_candidates(candidates) {
        let Some(cv) = table.get(&cand.word) else { continue };
        let sim = cosine(tv, cv);
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((cand, sim));
        }
    }
    best.map(|(c, _)| c.word.clone())
        .ok_or_else(|| Error::Lookup(format!("no candidate for `{target}` has a type vector")))
}
