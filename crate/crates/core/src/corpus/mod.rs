//! Parallel text, alignments, vocabularies and pretraining instances.

mod align;
mod vocab;

use std::fmt::Write as _;

pub use align::{intersect_alignments, parse_alignments, AlignmentSet};
pub use vocab::{
    build_vocabulary, count_tokens, prune_rare, sentence_to_ids, top_types, Vocabulary, UNK, UNK_ID,
};

use crate::error::{Error, Result};

/// Sentences shorter than or equal to this are skipped during extraction.
pub const DEFAULT_MIN_LEN: usize = 10;
pub const DEFAULT_VOCAB_CAP: usize = 30_000;
pub const DEFAULT_TARGET_DROP_TOP_K: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelSentencePair {
    pub source: Vec<String>,
    pub target: Vec<String>,
    /// 0-based line number in the corpus files.
    pub index: usize,
}

/// A token to classify in context: source ids, the position, and the label id.
///
/// For pretraining the label is an aligned target-language word; for
/// fine-tuning it is a task label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TranslationInstance {
    pub source_ids: Vec<u32>,
    pub position: usize,
    pub target_id: u32,
}

pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

/// Pairs line `i` of both texts. Lines where either side is empty are skipped
/// but keep their index so alignment files stay in step.
pub fn read_parallel(source: &str, target: &str) -> Result<Vec<ParallelSentencePair>> {
    let src: Vec<&str> = source.lines().collect();
    let tgt: Vec<&str> = target.lines().collect();
    if src.len() != tgt.len() {
        return Err(Error::Invalid(format!(
            "parallel corpus line counts differ: {} source vs {} target",
            src.len(),
            tgt.len()
        )));
    }
    Ok(src
        .iter()
        .zip(&tgt)
        .enumerate()
        .map(|(index, (s, t))| ParallelSentencePair { source: tokenize(s), target: tokenize(t), index })
        .filter(|p| !p.source.is_empty() && !p.target.is_empty())
        .collect())
}

/// One instance per link whose target word has a non-unknown target id.
/// Sentences with `|source| <= min_len` yield nothing.
pub fn extract_instances(
    pair: &ParallelSentencePair,
    alignment: &AlignmentSet,
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
    min_len: usize,
) -> Result<Vec<TranslationInstance>> {
    for (i, j) in alignment.iter() {
        if i >= pair.source.len() || j >= pair.target.len() {
            return Err(Error::Data {
                pair: pair.index,
                msg: format!(
                    "link {i}-{j} out of bounds for lengths {}/{}",
                    pair.source.len(),
                    pair.target.len()
                ),
            });
        }
    }
    if pair.source.len() <= min_len {
        return Ok(Vec::new());
    }
    let source_ids = sentence_to_ids(&pair.source, src_vocab);
    Ok(alignment
        .iter()
        .filter_map(|(i, j)| {
            let target_id = tgt_vocab.id(&pair.target[j]);
            (target_id != UNK_ID).then(|| TranslationInstance {
                source_ids: source_ids.clone(),
                position: i,
                target_id,
            })
        })
        .collect())
}

/// Extracts over a corpus; `alignments[k]` belongs to the pair with `index == k`.
pub fn extract_corpus(
    pairs: &[ParallelSentencePair],
    alignments: &[AlignmentSet],
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
    min_len: usize,
) -> Result<Vec<TranslationInstance>> {
    let mut out = Vec::new();
    for pair in pairs {
        let alignment = alignments.get(pair.index).ok_or_else(|| Error::Data {
            pair: pair.index,
            msg: "no alignment line for this pair".into(),
        })?;
        out.extend(extract_instances(pair, alignment, src_vocab, tgt_vocab, min_len)?);
    }
    Ok(out)
}

/// Symmetrizes two alignment files line by line.
pub fn symmetrize(forward: &[AlignmentSet], backward: &[AlignmentSet]) -> Result<Vec<AlignmentSet>> {
    if forward.len() != backward.len() {
        return Err(Error::Invalid(format!(
            "alignment files differ in length: {} vs {}",
            forward.len(),
            backward.len()
        )));
    }
    Ok(forward.iter().zip(backward).map(|(f, b)| intersect_alignments(f, b)).collect())
}

/// Instance file: `ids<TAB>position<TAB>target_id`, ids space-separated.
pub fn instances_to_tsv(instances: &[TranslationInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        let ids: Vec<String> = inst.source_ids.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{}\t{}\t{}", ids.join(" "), inst.position, inst.target_id);
    }
    out
}

pub fn instances_from_tsv(text: &str) -> Result<Vec<TranslationInstance>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(line_no, "expected `ids<TAB>position<TAB>target_id`"));
        }
        let source_ids = cols[0]
            .split_whitespace()
            .map(|s| s.parse::<u32>().map_err(|_| Error::parse(line_no, format!("bad id `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        let position: usize = cols[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad position `{}`", cols[1])))?;
        let target_id: u32 = cols[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad target id `{}`", cols[2])))?;
        if position >= source_ids.len() {
            return Err(Error::parse(line_no, "position outside the sentence"));
        }
        out.push(TranslationInstance { source_ids, position, target_id });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn words(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn vocab_of(tokens: &[String]) -> Vocabulary {
        let counts = count_tokens([tokens]);
        build_vocabulary(&counts, 100, 0)
    }

    #[test]
    fn single_link_instance() {
        let pair = ParallelSentencePair { source: words("s", 12), target: words("t", 12), index: 0 };
        let sv = vocab_of(&pair.source);
        let tv = vocab_of(&pair.target);
        let al: AlignmentSet = [(2, 5)].into_iter().collect();
        let got = extract_instances(&pair, &al, &sv, &tv, 10).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].position, 2);
        assert_eq!(got[0].target_id, tv.id("t5"));
        assert_eq!(got[0].source_ids, sentence_to_ids(&pair.source, &sv));
    }

    #[test]
    fn short_sentences_are_filtered() {
        for (n, expected) in [(9, 0), (10, 0), (11, 1)] {
            let pair = ParallelSentencePair { source: words("s", n), target: words("t", n), index: 3 };
            let al: AlignmentSet = [(0, 0)].into_iter().collect();
            let got = extract_instances(&pair, &al, &vocab_of(&pair.source), &vocab_of(&pair.target), 10).unwrap();
            assert_eq!(got.len(), expected, "length {n}");
        }
    }

    #[test]
    fn dropped_common_targets_yield_no_instance() {
        let mut target = words("t", 12);
        target[0] = "le".into();
        let pair = ParallelSentencePair { source: words("s", 12), target, index: 0 };
        let mut counts: HashMap<String, u64> = count_tokens([pair.target.as_slice()]);
        *counts.get_mut("le").unwrap() = 1000;
        let tv = build_vocabulary(&counts, 100, 1);
        assert!(!tv.contains("le"));
        let al: AlignmentSet = [(0, 0), (1, 1)].into_iter().collect();
        let got = extract_instances(&pair, &al, &vocab_of(&pair.source), &tv, 10).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].position, 1);
    }

    #[test]
    fn out_of_bounds_link_names_pair() {
        let pair = ParallelSentencePair { source: words("s", 12), target: words("t", 3), index: 7 };
        let al: AlignmentSet = [(1, 3)].into_iter().collect();
        let err = extract_instances(&pair, &al, &vocab_of(&pair.source), &vocab_of(&pair.target), 10)
            .unwrap_err();
        assert!(matches!(err, Error::Data { pair: 7, .. }));
    }

    #[test]
    fn parallel_reader_pairs_lines() {
        let pairs = read_parallel("a b\n\nc d e\n", "x y\nz\nw\n").unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[1].index, 2);
        assert!(read_parallel("a\nb\n", "x\n").is_err());
    }

    #[test]
    fn instance_file_round_trip() {
        let inst = vec![
            TranslationInstance { source_ids: vec![3, 0, 5], position: 1, target_id: 9 },
            TranslationInstance { source_ids: vec![1], position: 0, target_id: 2 },
        ];
        assert_eq!(instances_from_tsv(&instances_to_tsv(&inst)).unwrap(), inst);
        assert!(matches!(instances_from_tsv("1 2\t5\t1\n"), Err(Error::Parse { line: 1, .. })));
    }
}
