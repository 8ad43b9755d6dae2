//! Vote-based filtering of raw campaign tags.
//!
//! Emotion and genre keep at most the two best-ranked tags per item, and
//! only those with an up/down difference of at least two. Instruments keep
//! every tag whose difference is strictly above five. Annotations of the
//! same term on the same item are merged (tallies summed) before ranking.
//! Comments are never filtered.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::campaign::{Annotation, CampaignExport, TagRow};
use crate::catalog::TrackRecord;
use crate::vocabulary::{Category, Vocabularies};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModerationError {
    #[error("export references unknown item '{0}'")]
    UnknownItemInExport(String),
    #[error("export references unknown {category} term '{term}'")]
    UnknownTerm { category: Category, term: String },
    #[error("cannot write report: {0}")]
    WriteFailure(String),
}

impl ModerationError {
    pub fn code(&self) -> &'static str {
        match self {
            ModerationError::UnknownItemInExport(_) => "UnknownItemInExport",
            ModerationError::UnknownTerm { .. } => "UnknownTerm",
            ModerationError::WriteFailure(_) => "WriteFailure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModerationPolicy {
    pub top_k_emotion_genre: usize,
    /// Inclusive lower bound on score for emotion and genre tags.
    pub min_diff_emotion_genre: i64,
    /// Exclusive lower bound on score for instrument tags.
    pub min_diff_instruments_exclusive: i64,
}

impl Default for ModerationPolicy {
    fn default() -> Self {
        ModerationPolicy { top_k_emotion_genre: 2, min_diff_emotion_genre: 2, min_diff_instruments_exclusive: 5 }
    }
}

/// Anything carrying an up/down vote tally.
pub trait VoteTally {
    fn upvotes(&self) -> u32;
    fn downvotes(&self) -> u32;
}

impl VoteTally for Annotation {
    fn upvotes(&self) -> u32 {
        self.upvotes
    }
    fn downvotes(&self) -> u32 {
        self.downvotes
    }
}

impl VoteTally for TagRow {
    fn upvotes(&self) -> u32 {
        self.upvotes
    }
    fn downvotes(&self) -> u32 {
        self.downvotes
    }
}

/// Upvotes minus downvotes.
pub fn annotation_score<T: VoteTally + ?Sized>(a: &T) -> i64 {
    i64::from(a.upvotes()) - i64::from(a.downvotes())
}

/// All annotations of one term on one item, tallies summed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedTag {
    pub category: Category,
    pub term_id: String,
    pub upvotes: u64,
    pub downvotes: u64,
    pub annotations: usize,
}

impl MergedTag {
    pub fn score(&self) -> i64 {
        self.upvotes as i64 - self.downvotes as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ItemModeration {
    pub kept: BTreeMap<Category, Vec<MergedTag>>,
    pub dropped: BTreeMap<Category, Vec<MergedTag>>,
}

impl ItemModeration {
    pub fn kept_ids(&self, category: Category) -> Vec<&str> {
        self.kept.get(&category).map(|v| v.iter().map(|t| t.term_id.as_str()).collect()).unwrap_or_default()
    }
}

fn merge(tags: &[TagRow]) -> BTreeMap<(Category, String), MergedTag> {
    let mut merged: BTreeMap<(Category, String), MergedTag> = BTreeMap::new();
    for t in tags {
        let entry = merged.entry((t.category, t.term_id.clone())).or_insert_with(|| MergedTag {
            category: t.category,
            term_id: t.term_id.clone(),
            upvotes: 0,
            downvotes: 0,
            annotations: 0,
        });
        entry.upvotes += u64::from(t.upvotes);
        entry.downvotes += u64::from(t.downvotes);
        entry.annotations += 1;
    }
    merged
}

/// Filters the tags of a single item. All rows must share one item id.
pub fn moderate_item(tags: &[TagRow], policy: &ModerationPolicy) -> ItemModeration {
    debug_assert!(tags.windows(2).all(|w| w[0].item_id == w[1].item_id));
    let mut by_category: BTreeMap<Category, Vec<MergedTag>> = BTreeMap::new();
    for tag in merge(tags).into_values() {
        by_category.entry(tag.category).or_default().push(tag);
    }
    let mut out = ItemModeration::default();
    for (category, mut tags) in by_category {
        let (kept, dropped): (Vec<_>, Vec<_>) = match category {
            Category::Emotion | Category::Genre => {
                tags.sort_by(|a, b| {
                    b.score().cmp(&a.score()).then(b.upvotes.cmp(&a.upvotes)).then_with(|| a.term_id.cmp(&b.term_id))
                });
                tags.into_iter().enumerate().partition(|(rank, t)| {
                    *rank < policy.top_k_emotion_genre && t.score() >= policy.min_diff_emotion_genre
                })
            }
            Category::Instrument => {
                tags.into_iter().enumerate().partition(|(_, t)| t.score() > policy.min_diff_instruments_exclusive)
            }
        };
        let strip = |v: Vec<(usize, MergedTag)>| v.into_iter().map(|(_, t)| t).collect::<Vec<_>>();
        out.kept.insert(category, strip(kept));
        out.dropped.insert(category, strip(dropped));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub kept: usize,
    pub dropped: usize,
}

impl CategoryCounts {
    pub fn kept_fraction(&self) -> f64 {
        let total = self.kept + self.dropped;
        if total == 0 {
            0.0
        } else {
            self.kept as f64 / total as f64
        }
    }
}

/// Kept/dropped counts of merged tags per category, plus comments.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModerationReport {
    pub categories: BTreeMap<Category, CategoryCounts>,
    pub comments: usize,
}

impl ModerationReport {
    pub fn counts(&self, category: Category) -> CategoryCounts {
        self.categories.get(&category).copied().unwrap_or_default()
    }

    pub fn total_kept(&self) -> usize {
        self.categories.values().map(|c| c.kept).sum::<usize>() + self.comments
    }

    /// CSV with columns `category,kept,dropped,kept_fraction`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ModerationError> {
        let fail = |e: csv::Error| ModerationError::WriteFailure(e.to_string());
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["category", "kept", "dropped", "kept_fraction"]).map_err(fail)?;
        for category in [Category::Genre, Category::Emotion, Category::Instrument] {
            let c = self.counts(category);
            csv.write_record([
                category.as_str().to_string(),
                c.kept.to_string(),
                c.dropped.to_string(),
                format!("{:.4}", c.kept_fraction()),
            ])
            .map_err(fail)?;
        }
        let comments = CategoryCounts { kept: self.comments, dropped: 0 };
        csv.write_record([
            "comment".to_string(),
            comments.kept.to_string(),
            "0".to_string(),
            format!("{:.4}", comments.kept_fraction()),
        ])
        .map_err(fail)?;
        csv.flush().map_err(|e| ModerationError::WriteFailure(e.to_string()))
    }
}

/// Applies [`moderate_item`] to every item in the export and writes the
/// surviving terms and all comments into the matching records. Record
/// order is preserved.
pub fn moderate_campaign(
    export: &CampaignExport,
    policy: &ModerationPolicy,
    records: Vec<TrackRecord>,
    vocab: &Vocabularies,
) -> Result<(Vec<TrackRecord>, ModerationReport), ModerationError> {
    let mut records = records;
    let index: HashMap<String, usize> = records.iter().enumerate().map(|(i, r)| (r.europeana_id.clone(), i)).collect();

    let mut by_item: BTreeMap<&str, Vec<TagRow>> = BTreeMap::new();
    for tag in &export.tags {
        if !index.contains_key(&tag.item_id) {
            return Err(ModerationError::UnknownItemInExport(tag.item_id.clone()));
        }
        if vocab.get(tag.category).get(&tag.term_id).is_none() {
            return Err(ModerationError::UnknownTerm { category: tag.category, term: tag.term_id.clone() });
        }
        by_item.entry(tag.item_id.as_str()).or_default().push(tag.clone());
    }
    if let Some(c) = export.comments.iter().find(|c| !index.contains_key(&c.item_id)) {
        return Err(ModerationError::UnknownItemInExport(c.item_id.clone()));
    }

    let mut report = ModerationReport::default();
    for category in Category::ALL {
        report.categories.insert(category, CategoryCounts::default());
    }
    for (item_id, tags) in by_item {
        let outcome = moderate_item(&tags, policy);
        let record = &mut records[index[item_id]];
        for (category, kept) in &outcome.kept {
            report.categories.entry(*category).or_default().kept += kept.len();
            record.tags_mut(*category).extend(kept.iter().map(|t| t.term_id.clone()));
        }
        for (category, dropped) in &outcome.dropped {
            report.categories.entry(*category).or_default().dropped += dropped.len();
        }
    }
    for comment in &export.comments {
        records[index[&comment.item_id]].comments.push(comment.text.clone());
        report.comments += 1;
    }
    Ok((records, report))
}
