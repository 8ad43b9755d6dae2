use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::catalog::TrackRecord;
use crate::vocabulary::Category;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    genre: f64,
    emotion: f64,
    instrument: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        SimilarityWeights { genre: 0.4, emotion: 0.3, instrument: 0.3 }
    }
}

impl SimilarityWeights {
    pub fn new(genre: f64, emotion: f64, instrument: f64) -> Result<Self, AnalyticsError> {
        let all = [genre, emotion, instrument];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(AnalyticsError::InvalidWeights(all));
        }
        Ok(SimilarityWeights { genre, emotion, instrument })
    }

    pub fn weight(&self, category: Category) -> f64 {
        match category {
            Category::Genre => self.genre,
            Category::Emotion => self.emotion,
            Category::Instrument => self.instrument,
        }
    }
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Weighted per-category Jaccard overlap of the tag sets. Two empty sets
/// contribute nothing.
pub fn similarity(a: &TrackRecord, b: &TrackRecord, weights: &SimilarityWeights) -> f64 {
    Category::ALL.iter().map(|&c| weights.weight(c) * jaccard(a.tags(c), b.tags(c))).sum()
}

/// The `k` records most similar to `seed`, best first, ties by id. Records
/// sharing the seed's id are skipped.
pub fn recommend<'a>(
    seed: &TrackRecord,
    corpus: &'a [TrackRecord],
    k: usize,
    weights: &SimilarityWeights,
) -> Result<Vec<(&'a TrackRecord, f64)>, AnalyticsError> {
    if k == 0 {
        return Err(AnalyticsError::InvalidK);
    }
    if corpus.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let mut scored: Vec<(&TrackRecord, f64)> = corpus
        .iter()
        .filter(|r| r.europeana_id != seed.europeana_id)
        .map(|r| (r, similarity(seed, r, weights)))
        .collect();
    scored.sort_by(|(ra, sa), (rb, sb)| sb.total_cmp(sa).then_with(|| ra.europeana_id.cmp(&rb.europeana_id)));
    scored.truncate(k);
    Ok(scored)
}
