//! Lexical substitution: alignment-derived candidates, in-context ranking
//! by cosine similarity, and the best / best-mode scorers.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::rank_candidates;
use crate::corpus::{sentence_to_ids, AlignmentSet, ParallelSentencePair, Vocabulary};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::numkit::cosine;

/// Substitute candidate with its alignment score.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub word: String,
    pub count: u64,
}

/// Target word → ranked candidates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateTable {
    entries: BTreeMap<String, Vec<Candidate>>,
}

impl CandidateTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `candidates` for `word`, ranked, with `word` itself removed.
    /// Empty lists are not stored.
    pub fn insert(&mut self, word: impl Into<String>, candidates: Vec<Candidate>) {
        let word = word.into();
        let mut list: Vec<Candidate> =
            rank_candidates(&candidates).into_iter().filter(|c| c.word != word).cloned().collect();
        list.dedup_by(|a, b| a.word == b.word);
        if !list.is_empty() {
            self.entries.insert(word, list);
        }
    }

    pub fn get(&self, word: &str) -> Option<&[Candidate]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Candidate])> {
        self.entries.iter().map(|(w, c)| (w.as_str(), c.as_slice()))
    }

    /// `word<TAB>cand count;cand count;…`, one word per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (word, cands) in &self.entries {
            let list: Vec<String> = cands.iter().map(|c| format!("{} {}", c.word, c.count)).collect();
            out.push_str(&format!("{word}\t{}\n", list.join(";")));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut table = CandidateTable::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, rest) =
                line.split_once('\t').ok_or_else(|| Error::parse(n + 1, "expected `word<TAB>candidates`"))?;
            let cands = parse_weighted_list(rest, n + 1)?
                .into_iter()
                .map(|(word, count)| Candidate { word, count })
                .collect();
            table.insert(word, cands);
        }
        Ok(table)
    }
}

/// `w c;w c;…` where the count follows the last space.
fn parse_weighted_list(field: &str, line_no: usize) -> Result<Vec<(String, u64)>> {
    let mut out = Vec::new();
    for part in field.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (word, count) = part
            .rsplit_once(' ')
            .ok_or_else(|| Error::parse(line_no, format!("expected `word count`, got `{part}`")))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad count `{count}`")))?;
        let word = word.trim();
        if word.is_empty() {
            return Err(Error::parse(line_no, "empty word"));
        }
        out.push((word.to_string(), count));
    }
    Ok(out)
}

/// Co-occurrence counts of aligned word pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlignmentCounts {
    src_to_tgt: HashMap<String, BTreeMap<String, u64>>,
    tgt_to_src: HashMap<String, BTreeMap<String, u64>>,
}

impl AlignmentCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, source: &str, target: &str, count: u64) {
        *self.src_to_tgt.entry(source.to_string()).or_default().entry(target.to_string()).or_default() += count;
        *self.tgt_to_src.entry(target.to_string()).or_default().entry(source.to_string()).or_default() += count;
    }

    /// Counts every link `(i, j)` of each pair; out-of-range links are errors.
    pub fn from_corpus(pairs: &[ParallelSentencePair], alignments: &[AlignmentSet]) -> Result<Self> {
        if pairs.len() != alignments.len() {
            return Err(Error::Invalid(format!(
                "{} sentence pairs but {} alignment lines",
                pairs.len(),
                alignments.len()
            )));
        }
        let mut counts = AlignmentCounts::new();
        for (pair, links) in pairs.iter().zip(alignments) {
            for (i, j) in links.iter() {
                if i >= pair.source.len() || j >= pair.target.len() {
                    return Err(Error::Data {
                        pair: pair.index,
                        msg: format!("link {i}-{j} outside sentence pair"),
                    });
                }
                counts.add(&pair.source[i], &pair.target[j], 1);
            }
        }
        Ok(counts)
    }

    pub fn count(&self, source: &str, target: &str) -> u64 {
        self.src_to_tgt.get(source).and_then(|m| m.get(target)).copied().unwrap_or(0)
    }

    pub fn source_words(&self) -> impl Iterator<Item = &str> {
        self.src_to_tgt.keys().map(String::as_str)
    }

    /// Source words sharing a translation with `word`, scored by
    /// `Σ_{f ∈ T(word)} c(e', f)`; `word` itself is excluded.
    pub fn pivot_scores(&self, word: &str) -> Vec<Candidate> {
        let Some(translations) = self.src_to_tgt.get(word) else { return Vec::new() };
        let mut scores: BTreeMap<&str, u64> = BTreeMap::new();
        for f in translations.keys() {
            for (e, &c) in &self.tgt_to_src[f] {
                if e != word {
                    *scores.entry(e).or_default() += c;
                }
            }
        }
        scores.into_iter().map(|(w, count)| Candidate { word: w.to_string(), count }).collect()
    }

    /// Shortest ranked prefix of [`Self::pivot_scores`] whose share of the
    /// total count reaches `mass_threshold`.
    pub fn candidates(&self, word: &str, mass_threshold: f64) -> Vec<Candidate> {
        let scores = self.pivot_scores(word);
        let ranked = rank_candidates(&scores);
        let total: u64 = ranked.iter().map(|c| c.count).sum();
        let goal = mass_threshold * total as f64 * (1.0 - 1e-12);
        let mut out = Vec::new();
        let mut cum = 0u64;
        for c in ranked {
            out.push(c.clone());
            cum += c.count;
            if cum as f64 >= goal {
                break;
            }
        }
        out
    }
}

/// Candidates for every aligned source word; words without any candidate get
/// no entry.
pub fn build_candidate_table(counts: &AlignmentCounts, mass_threshold: f64) -> Result<CandidateTable> {
    if !(mass_threshold > 0.0 && mass_threshold <= 1.0) {
        return Err(Error::Invalid(format!("mass threshold {mass_threshold} outside (0, 1]")));
    }
    let mut table = CandidateTable::new();
    for word in counts.source_words() {
        table.insert(word, counts.candidates(word, mass_threshold));
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LexsubItem {
    pub id: String,
    pub lemma: String,
    pub pos: String,
    pub position: usize,
    pub tokens: Vec<String>,
}

impl LexsubItem {
    pub fn target(&self) -> &str {
        &self.tokens[self.position]
    }
}

/// `id<TAB>lemma.pos<TAB>position<TAB>tokenized sentence`
pub fn parse_items(text: &str) -> Result<Vec<LexsubItem>> {
    let mut items = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(line_no, format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let (lemma, pos) = fields[1].rsplit_once('.').unwrap_or((fields[1], ""));
        let position: usize =
            fields[2].trim().parse().map_err(|_| Error::parse(line_no, format!("bad position `{}`", fields[2])))?;
        let tokens = crate::corpus::tokenize(fields[3]);
        if position >= tokens.len() {
            return Err(Error::parse(
                line_no,
                format!("position {position} outside sentence of {} tokens", tokens.len()),
            ));
        }
        items.push(LexsubItem {
            id: fields[0].trim().to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            position,
            tokens,
        });
    }
    Ok(items)
}

/// Item id → annotator counts per substitute.
pub type GoldSubstitutes = BTreeMap<String, Vec<(String, u64)>>;

/// `id<TAB>sub count;sub count;…`
pub fn parse_gold(text: &str) -> Result<GoldSubstitutes> {
    let mut gold = GoldSubstitutes::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line.split_once('\t').ok_or_else(|| Error::parse(n + 1, "expected `id<TAB>substitutes`"))?;
        let subs = parse_weighted_list(rest, n + 1)?;
        if subs.is_empty() {
            return Err(Error::parse(n + 1, "item without gold substitutes"));
        }
        gold.insert(id.trim().to_string(), subs);
    }
    Ok(gold)
}

/// Candidate whose in-context vector is most similar to the original
/// target's. Ties go to the higher-ranked candidate.
pub fn lexsub_predict(
    model: &Model,
    vocab: &Vocabulary,
    item: &LexsubItem,
    candidates: &[Candidate],
) -> Result<String> {
    let ranked = rank_candidates(candidates);
    match ranked.as_slice() {
        [] => return Err(Error::Invalid(format!("item `{}` has no candidates", item.id))),
        [only] => return Ok(only.word.clone()),
        _ => {}
    }
    let mut ids = sentence_to_ids(&item.tokens, vocab);
    let h = model.context_at(&ids, item.position);
    let mut best: Option<(&Candidate, f64)> = None;
    for cand in ranked {
        ids[item.position] = vocab.id(&cand.word);
        let sim = cosine(&h, &model.context_at(&ids, item.position));
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((cand, sim));
        }
    }
    Ok(best.expect("at least two candidates").0.word.clone())
}

/// Predictions for every item that has candidates, in item order.
pub fn lexsub_predict_all(
    model: &Model,
    vocab: &Vocabulary,
    items: &[LexsubItem],
    table: &CandidateTable,
) -> Vec<(String, Option<String>)> {
    items
        .par_iter()
        .map(|item| {
            let cands = table.get(item.target()).or_else(|| table.get(&item.lemma));
            let guess = cands.and_then(|c| lexsub_predict(model, vocab, item, c).ok());
            (item.id.clone(), guess)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LexsubScores {
    pub best: f64,
    pub best_mode: f64,
    pub items: usize,
    pub mode_items: usize,
}

/// `best`: mean over gold items of `count(guess) / total count`, ×100.
/// `best_mode`: share of items with a unique most frequent substitute whose
/// guess equals it, ×100. Items without a prediction earn no credit.
pub fn lexsub_score(predictions: &[(String, String)], gold: &GoldSubstitutes) -> Result<LexsubScores> {
    let mut guesses: HashMap<&str, &str> = HashMap::new();
    for (id, guess) in predictions {
        if !gold.contains_key(id) {
            return Err(Error::Scoring(format!("prediction for unknown item `{id}`")));
        }
        if guesses.insert(id, guess).is_some() {
            return Err(Error::Scoring(format!("more than one prediction for item `{id}`")));
        }
    }
    let mut best = 0.0;
    let mut mode_hits = 0usize;
    let mut mode_items = 0usize;
    for (id, subs) in gold {
        let total: u64 = subs.iter().map(|(_, c)| c).sum();
        let guess = guesses.get(id.as_str()).copied();
        if let Some(g) = guess {
            if total > 0 {
                let hit: u64 = subs.iter().filter(|(s, _)| s == g).map(|(_, c)| c).sum();
                best += hit as f64 / total as f64;
            }
        }
        let max = subs.iter().map(|(_, c)| *c).max().unwrap_or(0);
        let modes: Vec<&str> = subs.iter().filter(|(_, c)| *c == max).map(|(s, _)| s.as_str()).collect();
        if modes.len() == 1 {
            mode_items += 1;
            if guess == Some(modes[0]) {
                mode_hits += 1;
            }
        }
    }
    let items = gold.len();
    Ok(LexsubScores {
        best: if items > 0 { 100.0 * best / items as f64 } else { 0.0 },
        best_mode: if mode_items > 0 { 100.0 * mode_hits as f64 / mode_items as f64 } else { 0.0 },
        items,
        mode_items,
    })
}
