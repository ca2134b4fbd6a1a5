use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const UNK_ID: u32 = 0;

/// Frequency-ranked word/id map. Id 0 is always the unknown token.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, u64)>", into = "Vec<(String, u64)>")]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    id_of: HashMap<String, u32>,
}

impl Vocabulary {
    /// Vocabulary holding only the unknown token.
    pub fn unk_only() -> Self {
        Vocabulary::from_entries(vec![(UNK.to_string(), 0)]).expect("unk-only vocabulary")
    }

    /// Builds from `(word, count)` pairs in id order; entry 0 must be `<unk>`.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        match entries.first() {
            Some((w, _)) if w == UNK => {}
            _ => return Err(Error::Invalid(format!("vocabulary entry 0 must be {UNK}"))),
        }
        let mut id_of = HashMap::with_capacity(entries.len());
        for (id, (word, _)) in entries.iter().enumerate() {
            if id_of.insert(word.clone(), id as u32).is_some() {
                return Err(Error::Invalid(format!("duplicate vocabulary word `{word}`")));
            }
        }
        Ok(Vocabulary { entries, id_of })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; the unknown token is always present.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn unk_id(&self) -> u32 {
        UNK_ID
    }

    /// Id of `word`, or the unknown id.
    pub fn id(&self, word: &str) -> u32 {
        self.id_of.get(word).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.id_of.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.id_of.contains_key(word)
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.entries.get(id as usize).map(|(w, _)| w.as_str())
    }

    pub fn count(&self, id: u32) -> Option<u64> {
        self.entries.get(id as usize).map(|&(_, c)| c)
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, (word, count)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{id}\t{word}\t{count}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(line_no, "expected `id<TAB>word<TAB>count`"));
            }
            let id: usize = cols[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad id `{}`", cols[0])))?;
            if id != entries.len() {
                return Err(Error::parse(line_no, format!("ids must be dense and sorted, got {id}")));
            }
            let count: u64 = cols[2]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad count `{}`", cols[2])))?;
            entries.push((cols[1].to_string(), count));
        }
        Vocabulary::from_entries(entries)
    }
}

impl TryFrom<Vec<(String, u64)>> for Vocabulary {
    type Error = Error;

    fn try_from(entries: Vec<(String, u64)>) -> Result<Self> {
        Vocabulary::from_entries(entries)
    }
}

impl From<Vocabulary> for Vec<(String, u64)> {
    fn from(v: Vocabulary) -> Self {
        v.entries
    }
}

fn ranked(counts: &HashMap<String, u64>) -> Vec<(&String, u64)> {
    let mut types: Vec<(&String, u64)> = counts
        .iter()
        .filter(|(w, _)| w.as_str() != UNK)
        .map(|(w, &c)| (w, c))
        .collect();
    types.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    types
}

/// Ranks types by count (ties lexicographic), skips the `drop_top_k` most
/// frequent, and keeps the next `cap`. The unknown entry's count is the total
/// count of every type that did not get an id.
pub fn build_vocabulary(counts: &HashMap<String, u64>, cap: usize, drop_top_k: usize) -> Vocabulary {
    let types = ranked(counts);
    let kept_range = drop_top_k.min(types.len())..(drop_top_k + cap).min(types.len());
    let unk_count: u64 = types
        .iter()
        .enumerate()
        .filter(|(i, _)| !kept_range.contains(i))
        .map(|(_, (_, c))| c)
        .sum::<u64>()
        + counts.get(UNK).copied().unwrap_or(0);
    let mut entries = Vec::with_capacity(kept_range.len() + 1);
    entries.push((UNK.to_string(), unk_count));
    entries.extend(types[kept_range].iter().map(|(w, c)| ((*w).clone(), *c)));
    Vocabulary::from_entries(entries).expect("ranked types are unique")
}

/// The `k` most frequent types under the vocabulary ranking.
pub fn top_types(counts: &HashMap<String, u64>, k: usize) -> Vec<String> {
    ranked(counts).into_iter().take(k).map(|(w, _)| w.clone()).collect()
}

/// Removes types seen fewer than `min_count` times.
pub fn prune_rare(counts: &HashMap<String, u64>, min_count: u64) -> HashMap<String, u64> {
    counts
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(w, &c)| (w.clone(), c))
        .collect()
}

pub fn count_tokens<'a, I, S>(sentences: I) -> HashMap<String, u64>
where
    I: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let mut counts = HashMap::new();
    for sentence in sentences {
        for tok in sentence {
            *counts.entry(tok.as_ref().to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Maps tokens to ids, substituting the unknown id for out-of-vocabulary words.
pub fn sentence_to_ids<S: AsRef<str>>(sentence: &[S], vocab: &Vocabulary) -> Vec<u32> {
    sentence.iter().map(|t| vocab.id(t.as_ref())).collect()
}
