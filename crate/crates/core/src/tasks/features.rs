//! Lexical translation features for an external MT system.

use rayon::prelude::*;

use crate::corpus::{sentence_to_ids, tokenize, Vocabulary};
use crate::error::{Error, Result};
use crate::numkit::log_sum_exp;
use crate::model::Model;
use crate::util::format_significant;

/// A word in context and a candidate translation.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureQuery {
    pub tokens: Vec<String>,
    pub position: usize,
    pub target_word: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub source_word: String,
    pub target_word: String,
    pub p: f64,
    pub log_p: f64,
    /// The target word is not in the head's vocabulary; `p` is the unknown
    /// token's probability.
    pub target_oov: bool,
}

/// `tokenized sentence<TAB>position<TAB>target word` per line.
pub fn parse_queries(text: &str) -> Result<Vec<FeatureQuery>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(line_no, format!("expected 3 tab-separated fields, got {}", fields.len())));
        }
        let tokens = tokenize(fields[0]);
        let position: usize =
            fields[1].trim().parse().map_err(|_| Error::parse(line_no, format!("bad position `{}`", fields[1])))?;
        if position >= tokens.len() {
            return Err(Error::parse(
                line_no,
                format!("position {position} outside sentence of {} tokens", tokens.len()),
            ));
        }
        let target_word = fields[2].trim();
        if target_word.is_empty() || target_word.contains(char::is_whitespace) {
            return Err(Error::parse(line_no, "target must be a single word"));
        }
        out.push(FeatureQuery { tokens, position, target_word: target_word.to_string() });
    }
    Ok(out)
}

/// `p(target word | sentence, position)` and its log for every query.
pub fn export_translation_features(
    model: &Model,
    source_vocab: &Vocabulary,
    target_vocab: &Vocabulary,
    queries: &[FeatureQuery],
) -> Result<Vec<FeatureRecord>> {
    if model.num_labels() != target_vocab.len() {
        return Err(Error::Invalid(format!(
            "model head has {} labels, target vocabulary has {}",
            model.num_labels(),
            target_vocab.len()
        )));
    }
    Ok(queries
        .par_iter()
        .map(|q| {
            let ids = sentence_to_ids(&q.tokens, source_vocab);
            let u = model.head.logits(&model.context_at(&ids, q.position));
            let target = target_vocab.get(&q.target_word);
            let label = target.unwrap_or(target_vocab.unk_id()) as usize;
            let log_p = u[label] - log_sum_exp(&u);
            FeatureRecord {
                source_word: q.tokens[q.position].clone(),
                target_word: q.target_word.clone(),
                p: log_p.exp(),
                log_p,
                target_oov: target.is_none(),
            }
        })
        .collect())
}

/// `source<TAB>target<TAB>p<TAB>log_p`, 12 significant digits.
pub fn features_to_tsv(records: &[FeatureRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.source_word,
            r.target_word,
            format_significant(r.p, 12),
            format_significant(r.log_p, 12)
        ));
    }
    out
}
