//! Supersense tagging: data format, windowed instances, and
//! support-weighted precision / recall / F1.

use rayon::prelude::*;

use crate::corpus::{sentence_to_ids, TranslationInstance, Vocabulary};
use crate::error::{Error, Result};
use crate::model::Model;

/// Tokens on each side of the classified word is `n / 2`.
pub const DEFAULT_WINDOW: usize = 20;

pub const OUTSIDE: &str = "O";

const NOUN_SUPERSENSES: [&str; 26] = [
    "noun.Tops", "noun.act", "noun.animal", "noun.artifact", "noun.attribute", "noun.body",
    "noun.cognition", "noun.communication", "noun.event", "noun.feeling", "noun.food", "noun.group",
    "noun.location", "noun.motive", "noun.object", "noun.person", "noun.phenomenon", "noun.plant",
    "noun.possession", "noun.process", "noun.quantity", "noun.relation", "noun.shape", "noun.state",
    "noun.substance", "noun.time",
];

const VERB_SUPERSENSES: [&str; 15] = [
    "verb.body", "verb.change", "verb.cognition", "verb.communication", "verb.competition",
    "verb.consumption", "verb.contact", "verb.creation", "verb.emotion", "verb.motion",
    "verb.perception", "verb.possession", "verb.social", "verb.stative", "verb.weather",
];

/// Closed label set: `O` (id 0) followed by the noun and verb supersenses.
#[derive(Clone, Debug, PartialEq)]
pub struct TagInventory {
    tags: Vec<String>,
}

impl TagInventory {
    pub fn standard() -> Self {
        let tags = std::iter::once(OUTSIDE)
            .chain(NOUN_SUPERSENSES)
            .chain(VERB_SUPERSENSES)
            .map(str::to_string)
            .collect();
        TagInventory { tags }
    }

    pub fn from_tags(tags: Vec<String>) -> Result<Self> {
        if tags.first().map(String::as_str) != Some(OUTSIDE) {
            return Err(Error::Invalid(format!("tag inventory must start with `{OUTSIDE}`")));
        }
        Ok(TagInventory { tags })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn id(&self, tag: &str) -> Option<u32> {
        self.tags.iter().position(|t| t == tag).map(|i| i as u32)
    }

    pub fn tag(&self, id: u32) -> &str {
        &self.tags[id as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupersenseSentence {
    pub tokens: Vec<String>,
    pub labels: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupersenseDataset {
    pub sentences: Vec<SupersenseSentence>,
}

impl SupersenseDataset {
    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }
}

/// `token<TAB>label` lines, blank line between sentences. A label field
/// holding several senses (`;` or `|` separated) keeps the first one.
pub fn parse_supersense(text: &str, inventory: &TagInventory) -> Result<SupersenseDataset> {
    let mut sentences = Vec::new();
    let mut cur = SupersenseSentence { tokens: Vec::new(), labels: Vec::new() };
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            if !cur.tokens.is_empty() {
                sentences.push(std::mem::replace(&mut cur, SupersenseSentence { tokens: Vec::new(), labels: Vec::new() }));
            }
            continue;
        }
        let (token, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(line_no, "expected `token<TAB>label`"))?;
        let first = label.split([';', '|']).next().unwrap_or("").trim();
        let id = inventory
            .id(first)
            .ok_or_else(|| Error::parse(line_no, format!("label `{first}` is not in the tag inventory")))?;
        if token.trim().is_empty() {
            return Err(Error::parse(line_no, "empty token"));
        }
        cur.tokens.push(token.trim().to_string());
        cur.labels.push(id);
    }
    if !cur.tokens.is_empty() {
        sentences.push(cur);
    }
    Ok(SupersenseDataset { sentences })
}

/// Half-open token range `[start, end)` of the `n`-word window around `t`,
/// clipped at the sentence edges.
pub fn window_bounds(len: usize, t: usize, n: usize) -> (usize, usize) {
    assert!(t < len, "position outside sentence");
    let half = n / 2;
    (t.saturating_sub(half), (t + half + 1).min(len))
}

/// One instance per token, encoded within its window.
pub fn labeled_instances(dataset: &SupersenseDataset, vocab: &Vocabulary, window: usize) -> Vec<TranslationInstance> {
    let mut out = Vec::with_capacity(dataset.num_tokens());
    for s in &dataset.sentences {
        let ids = sentence_to_ids(&s.tokens, vocab);
        for (t, &label) in s.labels.iter().enumerate() {
            let (a, b) = window_bounds(ids.len(), t, window);
            out.push(TranslationInstance { source_ids: ids[a..b].to_vec(), position: t - a, target_id: label });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassScores {
    pub label: String,
    pub support: usize,
    pub predicted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupersenseReport {
    /// Classes with gold support, `O` excluded, in inventory order.
    pub per_class: Vec<ClassScores>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Token accuracy over every token, `O` included.
    pub accuracy: f64,
}

impl SupersenseReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\tsupport\tprecision\trecall\tf1\n");
        for c in &self.per_class {
            out.push_str(&format!("{}\t{}\t{:.4}\t{:.4}\t{:.4}\n", c.label, c.support, c.precision, c.recall, c.f1));
        }
        let support: usize = self.per_class.iter().map(|c| c.support).sum();
        out.push_str(&format!(
            "weighted\t{support}\t{:.4}\t{:.4}\t{:.4}\naccuracy\t\t{:.4}\n",
            self.precision, self.recall, self.f1, self.accuracy
        ));
        out
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class scores and their gold-support-weighted averages over non-`O`
/// classes.
pub fn score_supersense(gold: &[u32], predicted: &[u32], inventory: &TagInventory) -> SupersenseReport {
    assert_eq!(gold.len(), predicted.len(), "gold and predicted lengths differ");
    let k = inventory.len();
    let outside = inventory.id(OUTSIDE).expect("inventory has O");
    let mut support = vec![0usize; k];
    let mut npred = vec![0usize; k];
    let mut correct = vec![0usize; k];
    for (&g, &p) in gold.iter().zip(predicted) {
        support[g as usize] += 1;
        npred[p as usize] += 1;
        if g == p {
            correct[g as usize] += 1;
        }
    }
    let per_class: Vec<ClassScores> = (0..k)
        .filter(|&c| c as u32 != outside && support[c] > 0)
        .map(|c| {
            let precision = if npred[c] > 0 { correct[c] as f64 / npred[c] as f64 } else { 0.0 };
            let recall = correct[c] as f64 / support[c] as f64;
            ClassScores {
                label: inventory.tag(c as u32).to_string(),
                support: support[c],
                predicted: npred[c],
                correct: correct[c],
                precision,
                recall,
                f1: harmonic(precision, recall),
            }
        })
        .collect();
    let total: usize = per_class.iter().map(|c| c.support).sum();
    let weighted = |f: fn(&ClassScores) -> f64| {
        if total == 0 {
            0.0
        } else {
            per_class.iter().map(|c| c.support as f64 * f(c)).sum::<f64>() / total as f64
        }
    };
    let accuracy = if gold.is_empty() {
        0.0
    } else {
        gold.iter().zip(predicted).filter(|(g, p)| g == p).count() as f64 / gold.len() as f64
    };
    SupersenseReport {
        precision: weighted(|c| c.precision),
        recall: weighted(|c| c.recall),
        f1: weighted(|c| c.f1),
        per_class,
        accuracy,
    }
}

/// Tags every token from its windowed context vector and scores the result.
pub fn evaluate_supersense(
    model: &Model,
    dataset: &SupersenseDataset,
    vocab: &Vocabulary,
    inventory: &TagInventory,
    window: usize,
) -> Result<SupersenseReport> {
    if model.num_labels() != inventory.len() {
        return Err(Error::Invalid(format!(
            "model head has {} labels, tag inventory has {}",
            model.num_labels(),
            inventory.len()
        )));
    }
    let instances = labeled_instances(dataset, vocab, window);
    let predicted: Vec<u32> = instances.par_iter().map(|i| model.predict(&i.source_ids, i.position)).collect();
    let gold: Vec<u32> = instances.iter().map(|i| i.target_id).collect();
    Ok(score_supersense(&gold, &predicted, inventory))
}
