//! Pair mining over moderated tags, comment sentiment and tag-overlap
//! recommendation.

mod apriori;
mod sentiment;
mod similarity;

pub use apriori::{frequent_pairs, pair_support, write_pairs_report, FrequentPair};
pub use sentiment::{sentiment_score, track_sentiment, SentimentLexicon, DEFAULT_NEGATIONS};
pub use similarity::{recommend, similarity, SimilarityWeights};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::catalog::TrackRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("no transactions to mine")]
    EmptyTransactionSet,
    #[error("minimum support must lie in (0, 1], got {0}")]
    InvalidSupport(f64),
    #[error("recommendation corpus is empty")]
    EmptyCorpus,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("similarity weights must be non-negative and sum to 1, got {0:?}")]
    InvalidWeights([f64; 3]),
    #[error("lexicon line {line}: {message}")]
    LexiconSyntax { line: usize, message: String },
    #[error("cannot read lexicon: {0}")]
    LexiconUnreadable(String),
    #[error("cannot write report: {0}")]
    WriteFailure(String),
}

impl AnalyticsError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticsError::EmptyTransactionSet => "EmptyTransactionSet",
            AnalyticsError::InvalidSupport(_) => "InvalidSupport",
            AnalyticsError::EmptyCorpus => "EmptyCorpus",
            AnalyticsError::InvalidK => "InvalidK",
            AnalyticsError::InvalidWeights(_) => "InvalidWeights",
            AnalyticsError::LexiconSyntax { .. } => "LexiconSyntax",
            AnalyticsError::LexiconUnreadable(_) => "LexiconUnreadable",
            AnalyticsError::WriteFailure(_) => "WriteFailure",
        }
    }
}

/// One item's moderated tags, all categories merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagTransaction {
    pub item_id: String,
    pub tags: BTreeSet<String>,
}

impl TagTransaction {
    pub fn new(item_id: impl Into<String>, tags: impl IntoIterator<Item = impl Into<String>>) -> Self {
        TagTransaction { item_id: item_id.into(), tags: tags.into_iter().map(Into::into).collect() }
    }
}

/// One transaction per record, untagged records included, so support is a
/// fraction of the whole collection.
pub fn transactions(records: &[TrackRecord]) -> Vec<TagTransaction> {
    records.iter().map(|r| TagTransaction { item_id: r.europeana_id.clone(), tags: r.all_tags() }).collect()
}
