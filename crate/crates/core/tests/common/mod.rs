//! Synthetic bilingual data with two homographs whose translation and
//! supersense depend on a sentence topic signalled by cue words.
#![allow(dead_code)]

use std::collections::HashMap;

use wic::corpus::{
    build_vocabulary, count_tokens, extract_corpus, AlignmentSet, ParallelSentencePair, TranslationInstance,
    Vocabulary, DEFAULT_TARGET_DROP_TOP_K, DEFAULT_VOCAB_CAP,
};
use wic::numkit::SeededRng;
use wic::tasks::{SupersenseDataset, SupersenseSentence, TagInventory};

/// Frequent words; their translations are the ten most common target types.
pub const FUNCTION: [(&str, &str); 10] = [
    ("the", "le"),
    ("of", "de"),
    ("and", "et"),
    ("a", "un"),
    ("to", "à"),
    ("in", "dans"),
    ("is", "est"),
    ("it", "il"),
    ("that", "que"),
    ("with", "avec"),
];

pub const FILLER: [(&str, &str, &str); 12] = [
    ("man", "homme", "noun.person"),
    ("woman", "femme", "noun.person"),
    ("child", "enfant", "noun.person"),
    ("day", "jour", "noun.time"),
    ("morning", "matin", "noun.time"),
    ("city", "ville", "noun.location"),
    ("village", "village", "noun.location"),
    ("went", "alla", "verb.motion"),
    ("walked", "marcha", "verb.motion"),
    ("saw", "vit", "verb.perception"),
    ("old", "vieux", "O"),
    ("big", "grand", "O"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topic {
    Finance,
    Nature,
}

pub const FINANCE_CUES: [(&str, &str, &str); 5] = [
    ("money", "argent", "noun.possession"),
    ("loan", "prêt", "noun.possession"),
    ("cash", "liquide", "noun.possession"),
    ("account", "compte", "noun.possession"),
    ("factory", "fabrique", "noun.artifact"),
];

pub const NATURE_CUES: [(&str, &str, &str); 5] = [
    ("river", "fleuve", "noun.object"),
    ("water", "eau", "noun.substance"),
    ("fish", "poisson", "noun.animal"),
    ("mud", "boue", "noun.substance"),
    ("forest", "forêt", "noun.group"),
];

/// Homograph → (finance translation, finance sense, nature translation, nature sense).
pub const HOMOGRAPHS: [(&str, &str, &str, &str, &str); 2] = [
    ("bank", "banque", "noun.group", "rive", "noun.object"),
    ("plant", "usine", "noun.artifact", "plante", "noun.plant"),
];

/// A generated pair with token-level supersense labels; alignment is the
/// identity.
#[derive(Clone, Debug)]
pub struct Generated {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub senses: Vec<String>,
    /// Positions of the homographs.
    pub ambiguous: Vec<usize>,
    pub topic: Topic,
}

fn cue_for(topic: Topic, rng: &mut SeededRng) -> (&'static str, &'static str, &'static str) {
    let cues = match topic {
        Topic::Finance => &FINANCE_CUES,
        Topic::Nature => &NATURE_CUES,
    };
    cues[rng.below(cues.len())]
}

fn homograph_for(topic: Topic, rng: &mut SeededRng) -> (&'static str, &'static str, &'static str) {
    let (w, ft, fs, nt, ns) = HOMOGRAPHS[rng.below(HOMOGRAPHS.len())];
    match topic {
        Topic::Finance => (w, ft, fs),
        Topic::Nature => (w, nt, ns),
    }
}

/// `len` tokens: `homographs` ambiguous words and `cues` topic cues at
/// random positions, the rest function words or fillers.
pub fn sentence(rng: &mut SeededRng, len: usize, homographs: usize, cues: usize, function_share: f64) -> Generated {
    assert!(homographs + cues <= len);
    let topic = if rng.below(2) == 0 { Topic::Finance } else { Topic::Nature };
    let mut slots: Vec<usize> = (0..len).collect();
    rng.shuffle(&mut slots);
    let mut words: Vec<(&str, &str, &str)> = vec![("", "", ""); len];
    let mut ambiguous = Vec::new();
    for (k, &pos) in slots.iter().enumerate() {
        words[pos] = if k < homographs {
            ambiguous.push(pos);
            homograph_for(topic, rng)
        } else if k < homographs + cues {
            cue_for(topic, rng)
        } else if rng.uniform(0.0, 1.0) < function_share {
            let (s, t) = FUNCTION[rng.below(FUNCTION.len())];
            (s, t, "O")
        } else {
            FILLER[rng.below(FILLER.len())]
        };
    }
    ambiguous.sort_unstable();
    Generated {
        source: words.iter().map(|w| w.0.to_string()).collect(),
        target: words.iter().map(|w| w.1.to_string()).collect(),
        senses: words.iter().map(|w| w.2.to_string()).collect(),
        ambiguous,
        topic,
    }
}

/// Pretraining-style sentences of 11 to 14 tokens with one homograph.
pub fn corpus(seed: u64, n: usize) -> Vec<Generated> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| {
            let len = 11 + rng.below(4);
            let cues = 1 + rng.below(2);
            sentence(&mut rng, len, 1, cues, 0.6)
        })
        .collect()
}

pub fn pairs(data: &[Generated]) -> Vec<ParallelSentencePair> {
    data.iter()
        .enumerate()
        .map(|(index, g)| ParallelSentencePair { source: g.source.clone(), target: g.target.clone(), index })
        .collect()
}

pub fn identity_alignments(data: &[Generated]) -> Vec<AlignmentSet> {
    data.iter().map(|g| (0..g.source.len()).map(|i| (i, i)).collect()).collect()
}

/// Vocabularies with the default cap and target drop rule.
pub fn vocabularies(data: &[Generated]) -> (Vocabulary, Vocabulary) {
    let src_counts = count_tokens(data.iter().map(|g| g.source.as_slice()));
    let tgt_counts = count_tokens(data.iter().map(|g| g.target.as_slice()));
    (
        build_vocabulary(&src_counts, DEFAULT_VOCAB_CAP, 0),
        build_vocabulary(&tgt_counts, DEFAULT_VOCAB_CAP, DEFAULT_TARGET_DROP_TOP_K),
    )
}

pub fn instances(data: &[Generated], src: &Vocabulary, tgt: &Vocabulary) -> Vec<TranslationInstance> {
    extract_corpus(&pairs(data), &identity_alignments(data), src, tgt, wic::corpus::DEFAULT_MIN_LEN).unwrap()
}

/// Instances at homograph positions only.
pub fn ambiguous_instances(data: &[Generated], src: &Vocabulary, tgt: &Vocabulary) -> Vec<TranslationInstance> {
    let mut out = Vec::new();
    for g in data {
        let ids = wic::corpus::sentence_to_ids(&g.source, src);
        for &t in &g.ambiguous {
            out.push(TranslationInstance { source_ids: ids.clone(), position: t, target_id: tgt.id(&g.target[t]) });
        }
    }
    out
}

/// Short tagged sentences where homographs make up about half the tokens.
pub fn supersense_data(seed: u64, n: usize, inventory: &TagInventory) -> SupersenseDataset {
    let mut rng = SeededRng::new(seed);
    let sentences = (0..n)
        .map(|_| {
            let len = 6 + rng.below(3);
            let g = sentence(&mut rng, len, 3, 1, 0.5);
            SupersenseSentence {
                labels: g.senses.iter().map(|s| inventory.id(s).expect("known sense")).collect(),
                tokens: g.source,
            }
        })
        .collect();
    SupersenseDataset { sentences }
}

/// Deterministic word-for-word toy corpus: `n` sentences over `types`
/// source words, each translated to a fixed target word.
pub fn toy_mapping_corpus(seed: u64, n: usize, types: usize) -> Vec<Generated> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|_| {
            let len = 11 + rng.below(3);
            let ids: Vec<usize> = (0..len).map(|_| rng.below(types)).collect();
            Generated {
                source: ids.iter().map(|i| format!("s{i}")).collect(),
                target: ids.iter().map(|i| format!("t{i}")).collect(),
                senses: vec!["O".into(); len],
                ambiguous: Vec::new(),
                topic: Topic::Finance,
            }
        })
        .collect()
}

pub fn target_counts(data: &[Generated]) -> HashMap<String, u64> {
    count_tokens(data.iter().map(|g| g.target.as_slice()))
}

/// Single-sense synonyms of `bank`: (finance word, nature word).
pub const BANK_SYNONYMS: (&str, &str) = ("lender", "shore");

/// [`corpus`] where half of the `bank` tokens are replaced by the
/// synonym matching the topic, keeping the translation.
pub fn corpus_with_synonyms(seed: u64, n: usize) -> Vec<Generated> {
    let mut rng = SeededRng::new(seed ^ 0x5eed);
    let mut data = corpus(seed, n);
    for g in &mut data {
        let t = g.ambiguous[0];
        if g.source[t] == "bank" && rng.below(2) == 0 {
            g.source[t] = match g.topic {
                Topic::Finance => BANK_SYNONYMS.0,
                Topic::Nature => BANK_SYNONYMS.1,
            }
            .to_string();
        }
    }
    data
}
