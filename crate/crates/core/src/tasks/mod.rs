//! Downstream uses of the encoder.

pub mod features;
pub mod lexsub;
pub mod supersense;

pub use features::{export_translation_features, features_to_tsv, parse_queries, FeatureQuery, FeatureRecord};
pub use lexsub::{
    build_candidate_table, lexsub_predict, lexsub_predict_all, lexsub_score, parse_gold, parse_items, AlignmentCounts, Candidate,
    CandidateTable, GoldSubstitutes, LexsubItem, LexsubScores,
};
pub use supersense::{
    evaluate_supersense, labeled_instances, parse_supersense, score_supersense, window_bounds, ClassScores,
    SupersenseDataset, SupersenseReport, SupersenseSentence, TagInventory, DEFAULT_WINDOW,
};

/// Candidates by alignment count descending, then word ascending.
pub fn rank_candidates(candidates: &[Candidate]) -> Vec<&Candidate> {
    let mut ranked: Vec<&Candidate> = candidates.iter().collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    ranked
}
