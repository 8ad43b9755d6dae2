//! Crowd-enriched music knowledge base.
//!
//! The pipeline runs from a curated catalog through an annotation campaign
//! and vote-based moderation into a triple graph that can be queried,
//! extended with derived classes and mined for tag co-occurrence.

pub mod analytics;
pub mod campaign;
pub mod catalog;
pub mod graph;
pub mod moderation;
pub mod query;
pub mod simulate;
pub mod vocabulary;

pub use analytics::{
    frequent_pairs, pair_support, recommend, sentiment_score, similarity, track_sentiment, transactions,
    AnalyticsError, FrequentPair, SentimentLexicon, SimilarityWeights, TagTransaction,
};
pub use campaign::{
    partition_batches, Annotation, Campaign, CampaignError, CampaignExport, CampaignStore, Comment, CommentRow,
    Direction, LeaderboardEntry, TagRow, Tallies,
};
pub use catalog::{
    apply_curation, export_enriched, load_dataset, CatalogError, CurationPolicy, PartialDate, TrackRecord,
};
pub use graph::{
    build_graph, integrate_external, materialize_axioms, parse_graph, serialize_graph, ClassAxiom, Graph, GraphError,
    Iri, Literal, Object, Triple,
};
pub use moderation::{moderate_campaign, moderate_item, ModerationError, ModerationPolicy, ModerationReport};
pub use query::{evaluate_query, parse_query, BindingTable, QueryAst, QueryError};
pub use simulate::{simulate_annotators, synthetic_catalog, AnnotatorBehavior, GroundTruth, SimulationSummary};
pub use vocabulary::{builtin_vocabularies, Category, Term, Vocabularies, VocabularyError};
