//! Quantitative measures over exported session logs and coded additions:
//! word-level edit distance, embedding distance, per-participant scaling,
//! Cohen's kappa and the frequency-weighted IRR, and the summary tables.

pub mod irr;
pub mod metrics;
pub mod report;
pub mod tables;

pub use irr::{cohen_kappa, irr, weighted_irr, ConfusionMatrix, IrrReport, WeightBase};
pub use metrics::{embedding_distance, levenshtein_words, minmax_scale, Scaled};
pub use report::{analyze, load_coded, load_sessions, Report};
pub use tables::{
    intent_distribution, mean_std, order_effect, pairwise_rank_share, survey_summary, value_distribution, CodedAddition,
    DistanceReport, MeanStd, Participant,
};
