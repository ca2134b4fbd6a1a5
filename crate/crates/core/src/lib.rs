//! Word-in-context representations learned by predicting lexical translations.
//!
//! A bidirectional LSTM reads a source sentence; the concatenated forward and
//! backward hidden states at a position are that token's context vector. The
//! encoder is pretrained with a softmax over aligned target-language words and
//! then reused for supersense tagging, lexical substitution, and translation
//! feature export.
//!
//! Module map:
//! - [`corpus`]: vocabularies, Pharaoh alignments, instance extraction
//! - [`numkit`]: dense kernels, initializers, seeded RNG, finite differences
//! - [`model`]: LSTM cell, encoders, softmax heads, exact gradients
//! - [`train`]: Adam, training loop with early stopping, checkpoints
//! - [`tasks`]: supersense evaluation, lexical substitution, feature export
//! - [`baselines`]: MLP and type-vector comparison systems
//! - [`cli`]: the `wic` command line

pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod model;
pub mod numkit;
pub mod tasks;
pub mod train;
mod util;

pub use error::{Error, Result};
