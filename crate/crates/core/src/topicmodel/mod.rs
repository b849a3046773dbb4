//! LDA topic models fitted by collapsed Gibbs sampling, topic consolidation
//! and group differences in topic prevalence.

mod lda;
mod mapping;
mod matrix;
mod prevalence;

pub use lda::{fit_lda, KeywordSet, LdaParams, TopicModel, LL_INTERVAL, MODEL_FORMAT_VERSION};
pub use mapping::{consolidate, Consolidated, MappingEntry, TopicMapping, FILTERED};
pub use matrix::{build_matrix, DocTermMatrix, StopWords, Vocabulary};
pub use prevalence::{
    prevalence_diff, quantile_sorted, write_prevalence_csv, PrevalenceEstimate, DEFAULT_REPLICATES, MIN_REPLICATES,
};

/// Number of keywords per topic used for topic comparison.
pub const DEFAULT_KEYWORDS: usize = 30;
