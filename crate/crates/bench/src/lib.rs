//! Shared fixtures for the criterion benchmarks in `benches/`.

use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use crowdkb_core::{
    builtin_vocabularies, simulate_annotators, synthetic_catalog, AnnotatorBehavior, Campaign, CampaignExport,
    CampaignStore, GroundTruth, TrackRecord,
};

/// A catalog and the raw export of a simulated campaign over it.
pub fn simulated_campaign(items: usize, annotators: usize, seed: u64) -> (Vec<TrackRecord>, CampaignExport) {
    let records = synthetic_catalog(items, seed);
    let ids: Vec<String> = records.iter().map(|r| r.europeana_id.clone()).collect();
    let start = Utc.with_ymd_and_hms(2022, 11, 14, 0, 0, 0).unwrap();
    let campaign = Campaign::new("bench", "Bench", ids.clone(), start, start + Duration::days(18)).unwrap();
    let store = CampaignStore::new(campaign, Arc::new(builtin_vocabularies())).unwrap();
    let truth = GroundTruth::plant(&ids, seed);
    simulate_annotators(&store, &truth, annotators, seed, &AnnotatorBehavior::default()).unwrap();
    (records, store.export())
}
