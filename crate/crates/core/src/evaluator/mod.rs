//! Accuracy aggregation, model similarity and significance testing.

mod kfold;
mod profile;
mod ttest;

pub use kfold::{
    kfold_evaluate, mean_std, process_similarity, scores_table, train_and_score, FoldResult, KFoldReport, MeanStd, Scores,
    COLUMNS,
};
pub use profile::{action_keys, behavior_similarity, behavioral_profile, BehavioralProfile, Relation, SimilarityScore};
pub use ttest::{paired_t_test, TTest};
