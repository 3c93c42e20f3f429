//! Evaluation: confusion matrices, per-class scores, top-k accuracy and
//! inter-rater agreement.

mod agreement;
mod classification;

pub use agreement::{
    fleiss_kappa, fleiss_kappa_counts, match_rates, oracle_accuracy, validate_ranks, Column, Kappa, MatchRates, OracleAccuracy,
    RatingRecord, RatingTable, MAX_RANKS,
};
pub use classification::{class_report, confusion, normalize_columns, topk_accuracy, ClassReport, ClassScores, ConfusionMatrix, NormalizedConfusion};
