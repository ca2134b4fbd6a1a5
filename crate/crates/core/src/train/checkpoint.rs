//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! magic      8 bytes   "WICCKPT\0"
//! version    u32
//! meta_len   u64
//! meta       meta_len bytes of UTF-8 JSON (configs, vocabularies, tensor table)
//! n_tensors  u32
//! repeated n_tensors times:
//!   len      u64
//!   values   len × f32
//! crc32      u32 over every byte from `version` up to here
//! ```
//!
//! Tensors are written in [`Parameters::tensors`] order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig, Parameters};

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"WICCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// What the output head predicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSpace {
    /// Target-language words; index 0 is the unknown token.
    Translation(Vocabulary),
    /// Task labels such as supersense tags.
    Tags(Vec<String>),
}

impl LabelSpace {
    pub fn len(&self) -> usize {
        match self {
            LabelSpace::Translation(v) => v.len(),
            LabelSpace::Tags(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        match self {
            LabelSpace::Translation(v) => v.word(id),
            LabelSpace::Tags(t) => t.get(id as usize).map(String::as_str),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    pub name: String,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub model: ModelConfig,
    pub train: Option<TrainConfig>,
    pub source_vocab: Vocabulary,
    pub labels: LabelSpace,
    #[serde(default)]
    pub tensors: Vec<TensorSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub model: Model,
}

impl Checkpoint {
    pub fn new(model: Model, source_vocab: Vocabulary, labels: LabelSpace, train: Option<TrainConfig>) -> Self {
        assert_eq!(model.vocab_size(), source_vocab.len(), "embedding rows must match the source vocabulary");
        assert_eq!(model.num_labels(), labels.len(), "head width must match the label space");
        let meta = CheckpointMeta { model: model.config, train, source_vocab, labels, tensors: Vec::new() };
        Checkpoint { meta, model }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut meta = self.meta.clone();
        meta.tensors = self
            .model
            .tensors()
            .iter()
            .map(|(name, t)| TensorSpec { name: name.clone(), len: t.len() })
            .collect();
        let meta_json = serde_json::to_vec(&meta).expect("checkpoint metadata serializes");

        let mut out = Vec::with_capacity(64 + meta_json.len() + 4 * self.model.num_parameters());
        out.extend_from_slice(&CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(meta_json.len() as u64).to_le_bytes());
        out.extend_from_slice(&meta_json);
        let tensors = self.model.tensors();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (_, t) in &tensors {
            out.extend_from_slice(&(t.len() as u64).to_le_bytes());
            for &v in t.iter() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out[CHECKPOINT_MAGIC.len()..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < CHECKPOINT_MAGIC.len() || bytes[..CHECKPOINT_MAGIC.len()] != CHECKPOINT_MAGIC {
            return Err(Error::Format("bad magic bytes; not a checkpoint file".into()));
        }
        let mut r = Reader { bytes, pos: CHECKPOINT_MAGIC.len() };
        let version = r.u32("version")?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {version}, this build reads version {CHECKPOINT_VERSION}"
            )));
        }
        let meta_len = r.u64("metadata length")? as usize;
        let meta_bytes = r.take(meta_len, "metadata")?;
        let n_tensors = r.u32("tensor count")? as usize;
        let mut payload = Vec::with_capacity(n_tensors);
        for k in 0..n_tensors {
            let len = r.u64("tensor length")? as usize;
            let raw = r.take(len.checked_mul(4).ok_or_else(|| Error::Corrupt("tensor length overflow".into()))?, "tensor data")
                .map_err(|_| Error::Corrupt(format!("tensor {k} truncated")))?;
            payload.push(raw);
        }
        let body_end = r.pos;
        let stored_crc = r.u32("checksum")?;
        if r.pos != bytes.len() {
            return Err(Error::Corrupt(format!("{} trailing bytes after checksum", bytes.len() - r.pos)));
        }
        let crc = crc32fast::hash(&bytes[CHECKPOINT_MAGIC.len()..body_end]);
        if crc != stored_crc {
            return Err(Error::Corrupt(format!("checksum mismatch (stored {stored_crc:08x}, computed {crc:08x})")));
        }

        let meta: CheckpointMeta = serde_json::from_slice(meta_bytes)
            .map_err(|e| Error::Corrupt(format!("metadata does not parse: {e}")))?;
        let mut model = Model::zeros(meta.model, meta.source_vocab.len(), meta.labels.len());
        {
            let tensors = model.tensors_mut();
            if tensors.len() != n_tensors || tensors.len() != meta.tensors.len() {
                return Err(Error::Corrupt(format!(
                    "expected {} tensors for this configuration, file has {n_tensors}",
                    tensors.len()
                )));
            }
            for (((name, dst), raw), spec) in tensors.into_iter().zip(&payload).zip(&meta.tensors) {
                if spec.name != name || spec.len != dst.len() || raw.len() != 4 * dst.len() {
                    return Err(Error::Corrupt(format!(
                        "tensor `{}` ({} values) does not match expected `{name}` ({} values)",
                        spec.name,
                        raw.len() / 4,
                        dst.len()
                    )));
                }
                for (d, chunk) in dst.iter_mut().zip(raw.chunks_exact(4)) {
                    let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
                    if !v.is_finite() {
                        return Err(Error::Corrupt(format!("non-finite value in tensor `{name}`")));
                    }
                    *d = v as f64;
                }
            }
        }
        Ok(Checkpoint { meta, model })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Corrupt(format!("file truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, checkpoint: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint.to_bytes()).map_err(|e| Error::file(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::file(path, e))?;
    Checkpoint::from_bytes(&bytes)
}
