//! Annotation campaigns: item batching, crowd contributions and tallies.

mod export;
mod store;

pub use export::{CampaignExport, CommentRow, TagRow};
pub use store::{CampaignStore, LeaderboardEntry};

use std::collections::HashSet;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocabulary::Category;

pub const DEFAULT_BATCH_COUNT: usize = 8;
pub const MAX_COMMENT_CHARS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CampaignError {
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("{items} items cannot fill {batches} batches")]
    TooFewItems { items: usize, batches: usize },
    #[error("campaign is not open at {0}")]
    CampaignClosed(DateTime<Utc>),
    #[error("unknown item '{0}'")]
    UnknownItem(String),
    #[error("unknown {category} term '{term}'")]
    UnknownTerm { category: Category, term: String },
    #[error("'{user}' already tagged '{item_id}' with '{term_id}'")]
    DuplicateAnnotation { item_id: String, term_id: String, user: String },
    #[error("unknown annotation '{0}'")]
    UnknownAnnotation(String),
    #[error("users cannot vote on their own annotations")]
    SelfVote,
    #[error("comment text is empty")]
    EmptyComment,
    #[error("comment has {0} characters, limit is {MAX_COMMENT_CHARS}")]
    CommentTooLong(usize),
    #[error("unknown batch {0}")]
    UnknownBatch(usize),
    #[error("corrupt store at log line {line}: {message}")]
    CorruptStore { line: usize, message: String },
    #[error("store persistence failed: {0}")]
    Persistence(String),
}

impl CampaignError {
    /// Stable machine-readable code, equal to the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            CampaignError::InvalidCampaign(_) => "InvalidCampaign",
            CampaignError::TooFewItems { .. } => "TooFewItems",
            CampaignError::CampaignClosed(_) => "CampaignClosed",
            CampaignError::UnknownItem(_) => "UnknownItem",
            CampaignError::UnknownTerm { .. } => "UnknownTerm",
            CampaignError::DuplicateAnnotation { .. } => "DuplicateAnnotation",
            CampaignError::UnknownAnnotation(_) => "UnknownAnnotation",
            CampaignError::SelfVote => "SelfVote",
            CampaignError::EmptyComment => "EmptyComment",
            CampaignError::CommentTooLong(_) => "CommentTooLong",
            CampaignError::UnknownBatch(_) => "UnknownBatch",
            CampaignError::CorruptStore { .. } => "CorruptStore",
            CampaignError::Persistence(_) => "Persistence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub id: String,
    pub title: String,
    pub instructions: String,
    pub item_ids: Vec<String>,
    pub batch_count: usize,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Campaign {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        item_ids: Vec<String>,
        start: DateTime<Utc>,
        end: DateTime<Utc>,
    ) -> Result<Self, CampaignError> {
        let campaign = Campaign {
            id: id.into(),
            title: title.into(),
            instructions: String::new(),
            item_ids,
            batch_count: DEFAULT_BATCH_COUNT,
            start,
            end,
        };
        campaign.validate()?;
        Ok(campaign)
    }

    pub fn with_batch_count(mut self, batch_count: usize) -> Result<Self, CampaignError> {
        self.batch_count = batch_count;
        self.validate()?;
        Ok(self)
    }

    pub fn with_instructions(mut self, instructions: impl Into<String>) -> Self {
        self.instructions = instructions.into();
        self
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.id.trim().is_empty() {
            return Err(CampaignError::InvalidCampaign("empty id".into()));
        }
        if self.end <= self.start {
            return Err(CampaignError::InvalidCampaign("end must be after start".into()));
        }
        if self.batch_count == 0 {
            return Err(CampaignError::InvalidCampaign("batch_count must be positive".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.item_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(CampaignError::InvalidCampaign(format!("duplicate item '{dup}'")));
        }
        if self.item_ids.len() < self.batch_count {
            return Err(CampaignError::TooFewItems { items: self.item_ids.len(), batches: self.batch_count });
        }
        Ok(())
    }

    pub fn is_open(&self, at: DateTime<Utc>) -> bool {
        self.start <= at && at <= self.end
    }
}

/// 64-bit FNV-1a; stable across platforms and compiler versions.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Splits the campaign items into `batch_count` batches whose sizes differ
/// by at most one. The shuffle is seeded from the campaign id.
pub fn partition_batches(campaign: &Campaign) -> Result<Vec<Vec<String>>, CampaignError> {
    let (n, b) = (campaign.item_ids.len(), campaign.batch_count);
    if b == 0 {
        return Err(CampaignError::InvalidCampaign("batch_count must be positive".into()));
    }
    if n < b {
        return Err(CampaignError::TooFewItems { items: n, batches: b });
    }
    let mut items = campaign.item_ids.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(campaign.id.as_bytes()));
    items.shuffle(&mut rng);

    let (base, extra) = (n / b, n % b);
    let mut batches = Vec::with_capacity(b);
    let mut rest = items.into_iter();
    for i in 0..b {
        let size = base + usize::from(i < extra);
        batches.push(rest.by_ref().take(size).collect());
    }
    Ok(batches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: String,
    pub item_id: String,
    pub category: Category,
    pub term_id: String,
    pub creator: String,
    pub created_at: DateTime<Utc>,
    pub upvotes: u32,
    pub downvotes: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub annotation_id: String,
    pub voter: String,
    pub direction: Direction,
    pub cast_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub item_id: String,
    pub author: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub upvotes: u32,
    pub downvotes: u32,
}
