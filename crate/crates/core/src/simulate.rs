//! Seeded synthetic data: a catalog generator and crowd annotators that
//! tag, vote and comment against a planted ground truth.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::campaign::{CampaignError, CampaignStore, Direction};
use crate::catalog::{PartialDate, TrackRecord};
use crate::vocabulary::{Category, Vocabularies};

const COMPOSERS: &[(&str, Option<&str>, Option<&str>)] = &[
    ("Johann Sebastian Bach", Some("1685-03-31"), Some("1750-07-28")),
    ("Antonio Vivaldi", Some("1678-03-04"), Some("1741-07-28")),
    ("Wolfgang Amadeus Mozart", Some("1756-01-27"), Some("1791-12-05")),
    ("Ludwig van Beethoven", Some("1770-12"), Some("1827-03-26")),
    ("Franz Schubert", Some("1797-01-31"), Some("1828-11-19")),
    ("Frédéric Chopin", Some("1810-03-01"), Some("1849-10-17")),
    ("Robert Schumann", Some("1810-06-08"), Some("1856-07-29")),
    ("Franz Liszt", Some("1811-10-22"), Some("1886-07-31")),
    ("Giuseppe Verdi", Some("1813-10-10"), Some("1901-01-27")),
    ("Richard Wagner", Some("1813-05-22"), Some("1883-02-13")),
    ("Johannes Brahms", Some("1833-05-07"), Some("1897-04-03")),
    ("Pyotr Ilyich Tchaikovsky", Some("1840-05-07"), Some("1893-11-06")),
    ("Antonín Dvořák", Some("1841-09-08"), Some("1904-05-01")),
    ("Edvard Grieg", Some("1843-06-15"), Some("1907-09-04")),
    ("Giacomo Puccini", Some("1858-12-22"), Some("1924-11-29")),
    ("Claude Debussy", Some("1862-08-22"), Some("1918-03-25")),
    ("Scott Joplin", Some("1868"), Some("1917-04-01")),
    ("Sergei Rachmaninoff", Some("1873-04-01"), Some("1943-03-28")),
    ("Maurice Ravel", Some("1875-03-07"), Some("1937-12-28")),
    ("Béla Bartók", Some("1881-03-25"), Some("1945-09-26")),
    ("Igor Stravinsky", Some("1882-06-17"), Some("1971-04-06")),
    ("Jelly Roll Morton", Some("1890-10-20"), Some("1941-07-10")),
    ("George Gershwin", Some("1898-09-26"), Some("1937-07-11")),
    ("Duke Ellington", Some("1899-04-29"), Some("1974-05-24")),
    ("Louis Armstrong", Some("1901-08-04"), Some("1971-07-06")),
    ("Django Reinhardt", Some("1910-01-23"), Some("1953-05-16")),
    ("Woody Guthrie", Some("1912-07-14"), Some("1967-10-03")),
    ("Mikis Theodorakis", Some("1925-07-29"), Some("2021-09-02")),
    ("Manos Hadjidakis", Some("1925-10-23"), Some("1994-06-15")),
    ("Miles Davis", Some("1926-05-26"), Some("1991-09-28")),
    ("Astor Piazzolla", Some("1921-03-11"), Some("1992-07-04")),
    ("Bob Marley", Some("1945-02-06"), Some("1981-05-11")),
    ("Traditional", None, None),
    ("Anonymous", None, None),
];

const TITLE_A: &[&str] = &[
    "Blue",
    "Evening",
    "Mountain",
    "River",
    "Silver",
    "Golden",
    "Midnight",
    "Spring",
    "Autumn",
    "Harbour",
    "Village",
    "Northern",
    "Quiet",
    "Dancing",
    "Wandering",
    "Lonely",
    "Bright",
    "Old",
    "Little",
    "Summer",
];
const TITLE_B: &[&str] = &[
    "Waltz", "Song", "Serenade", "Blues", "Prelude", "Rhapsody", "March", "Ballad", "Nocturne", "Reel", "Lament",
    "Stomp", "Dance", "Hymn", "Sonata", "Air", "Rag", "Lullaby", "Overture", "Fantasia",
];
const PUBLISHERS: &[&str] = &[
    "Österreichische Mediathek",
    "Sound and Vision",
    "National Library of Greece",
    "Irish Traditional Music Archive",
    "The British Library",
    "Statens musikverk",
];
const PLACES: &[&str] = &["Vienna", "Hilversum", "Athens", "Dublin", "London", "Stockholm", "Paris", "New York"];

/// Catalog of `n` curated-valid records, deterministic in `seed`. Tag
/// sets are empty; the campaign supplies them.
pub fn synthetic_catalog(n: usize, seed: u64) -> Vec<TrackRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (composer, born, died) = *COMPOSERS.choose(&mut rng).expect("composer pool is non-empty");
            let born: Option<PartialDate> = born.map(|d| d.parse().expect("valid composer date"));
            let died: Option<PartialDate> = died.map(|d| d.parse().expect("valid composer date"));
            let year = rng.random_range(1900..=1995);
            let id = format!("/2059208/synthetic_{i:04}");
            TrackRecord {
                title: Some(format!("{} {}", TITLE_A.choose(&mut rng).unwrap(), TITLE_B.choose(&mut rng).unwrap())),
                year: Some(year),
                duration_ms: Some(rng.random_range(45_000..=360_000)),
                composer: Some(composer.to_string()),
                composer_birth: born,
                composer_death: died,
                biography: born.map(|b| format!("{composer} (born {}) wrote and performed music.", b.year)),
                publisher: Some(PUBLISHERS.choose(&mut rng).unwrap().to_string()),
                place: Some(PLACES.choose(&mut rng).unwrap().to_string()),
                audio_url: Some(format!("https://example.org/audio/synthetic_{i:04}.mp3")),
                ..TrackRecord::new(id)
            }
        })
        .collect()
}

/// The tags each item "really" has.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    items: BTreeMap<String, BTreeMap<Category, BTreeSet<String>>>,
}

type Weighted = &'static [(&'static str, u32)];

/// Instrument and emotion tendencies of each genre, as (term, weight).
fn genre_profile(genre: &str) -> (Weighted, Weighted) {
    match genre {
        "rock" => (
            &[("drums", 10), ("electric-guitar", 9), ("bass", 6), ("synthesizer", 1)],
            &[("arousal", 8), ("joy", 6), ("anxiety", 1)],
        ),
        "pop" => (
            &[("drums", 8), ("synthesizer", 5), ("bass", 4), ("electric-guitar", 4), ("piano", 2)],
            &[("joy", 8), ("pleasure", 4), ("arousal", 3)],
        ),
        "funk" => (
            &[("bass", 8), ("drums", 8), ("electric-guitar", 5), ("brass", 4)],
            &[("joy", 6), ("arousal", 6), ("pleasure", 3)],
        ),
        "hip-hop" => (&[("drums", 9), ("synthesizer", 6), ("bass", 6)], &[("arousal", 6), ("joy", 3), ("anxiety", 2)]),
        "reggae" => (
            &[("bass", 8), ("drums", 7), ("electric-guitar", 4), ("brass", 2)],
            &[("calmness", 5), ("joy", 5), ("pleasure", 4)],
        ),
        "jazz" => (
            &[("piano", 7), ("brass", 7), ("bass", 6), ("drums", 6), ("woodwind", 4)],
            &[("calmness", 6), ("joy", 4), ("pleasure", 4)],
        ),
        "classical" => (
            &[("orchestra", 10), ("violin", 7), ("piano", 6), ("woodwind", 3)],
            &[("calmness", 7), ("sadness", 3), ("pleasure", 3)],
        ),
        "opera" => (&[("orchestra", 10), ("violin", 4)], &[("sadness", 5), ("arousal", 4), ("fear", 2)]),
        "country" => (
            &[("acoustic-guitar", 9), ("banjo", 6), ("harmonica", 4), ("violin", 3)],
            &[("joy", 5), ("sadness", 4), ("calmness", 3)],
        ),
        "traditional-folk" => (
            &[("acoustic-guitar", 7), ("violin", 6), ("woodwind", 4), ("harmonica", 3)],
            &[("joy", 5), ("sadness", 4), ("calmness", 3)],
        ),
        _ => (
            &[("piano", 6), ("orchestra", 6), ("violin", 4), ("acoustic-guitar", 3)],
            &[("calmness", 8), ("sadness", 3), ("boredom", 2)],
        ),
    }
}

const GENRE_WEIGHTS: &[(&str, u32)] = &[
    ("classical", 16),
    ("jazz", 12),
    ("rock", 14),
    ("pop", 10),
    ("traditional-folk", 9),
    ("country", 6),
    ("opera", 6),
    ("funk", 5),
    ("reggae", 4),
    ("hip-hop", 4),
    ("instrumental", 8),
];

fn weighted<'a>(rng: &mut ChaCha8Rng, choices: &[(&'a str, u32)], exclude: &BTreeSet<String>) -> Option<&'a str> {
    let open: Vec<&(&str, u32)> = choices.iter().filter(|(t, _)| !exclude.contains(*t)).collect();
    open.choose_weighted(rng, |(_, w)| *w).ok().map(|(t, _)| *t)
}

impl GroundTruth {
    /// Plants one or two genres per item with instruments and emotions
    /// drawn from genre profiles, so tags co-occur the way real ones do.
    pub fn plant(item_ids: &[String], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6772_6f75_6e64);
        let mut items = BTreeMap::new();
        for id in item_ids {
            let mut genres = BTreeSet::new();
            let first = weighted(&mut rng, GENRE_WEIGHTS, &genres).expect("genres available");
            genres.insert(first.to_string());
            if matches!(first, "classical" | "jazz") && rng.random_bool(0.35) {
                genres.insert("instrumental".to_string());
            } else if rng.random_bool(0.1) {
                let second = weighted(&mut rng, GENRE_WEIGHTS, &genres).expect("genres available");
                genres.insert(second.to_string());
            }
            let (instruments, emotions) = genre_profile(first);
            let mut inst = BTreeSet::new();
            for _ in 0..rng.random_range(1..=4) {
                if let Some(t) = weighted(&mut rng, instruments, &inst) {
                    inst.insert(t.to_string());
                }
            }
            let mut emo = BTreeSet::new();
            for _ in 0..rng.random_range(1..=2) {
                if let Some(t) = weighted(&mut rng, emotions, &emo) {
                    emo.insert(t.to_string());
                }
            }
            let tags = [(Category::Genre, genres), (Category::Instrument, inst), (Category::Emotion, emo)];
            items.insert(id.clone(), tags.into_iter().collect());
        }
        GroundTruth { items }
    }

    pub fn tags(&self, item_id: &str, category: Category) -> Option<&BTreeSet<String>> {
        self.items.get(item_id).and_then(|m| m.get(&category))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// How synthetic annotators behave on each visited item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotatorBehavior {
    /// Items each annotator visits within its batch.
    pub items_per_annotator: usize,
    /// Chance that a perceived tag is swapped for a random term.
    pub noise: f64,
    /// Chance of adding a perceived tag nobody has proposed yet.
    pub propose_probability: f64,
    /// Chance of upvoting an existing tag the annotator agrees with.
    pub upvote_probability: f64,
    /// Chance of downvoting an existing tag the annotator disagrees with.
    pub downvote_probability: f64,
    pub comment_probability: f64,
}

impl Default for AnnotatorBehavior {
    fn default() -> Self {
        AnnotatorBehavior {
            items_per_annotator: 80,
            noise: 0.16,
            propose_probability: 0.9,
            upvote_probability: 0.85,
            downvote_probability: 0.015,
            comment_probability: 0.106,
        }
    }
}

impl AnnotatorBehavior {
    pub fn validate(&self) -> Result<(), CampaignError> {
        let probs = [
            ("noise", self.noise),
            ("propose_probability", self.propose_probability),
            ("upvote_probability", self.upvote_probability),
            ("downvote_probability", self.downvote_probability),
            ("comment_probability", self.comment_probability),
        ];
        match probs.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            Some((name, p)) => Err(CampaignError::InvalidCampaign(format!("{name} must lie in [0, 1], got {p}"))),
            None if self.items_per_annotator == 0 => {
                Err(CampaignError::InvalidCampaign("items_per_annotator must be positive".into()))
            }
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub annotators: usize,
    pub visits: usize,
    pub annotations: usize,
    pub upvotes: usize,
    pub downvotes: usize,
    pub comments: usize,
}

const PRAISE: &[&str] = &["beautiful", "lovely", "relaxing", "wonderful", "catchy", "uplifting", "great", "soothing"];
const CRITICISM: &[&str] = &["boring", "repetitive", "noisy", "dull", "harsh", "annoying"];
const DARK: &[&str] = &["sad", "gloomy", "haunting", "tragic", "melancholic"];

fn comment_text(rng: &mut ChaCha8Rng, vocab: &Vocabularies, truth: &BTreeMap<Category, BTreeSet<String>>) -> String {
    let label = |c: Category| {
        truth
            .get(&c)
            .and_then(|s| s.iter().next())
            .and_then(|id| vocab.term(id))
            .map_or_else(|| "music".to_string(), |t| t.label.to_lowercase())
    };
    let dark = truth
        .get(&Category::Emotion)
        .is_some_and(|e| e.iter().any(|t| matches!(t.as_str(), "sadness" | "fear" | "anxiety")));
    let genre = label(Category::Genre);
    let instrument = label(Category::Instrument);
    match rng.random_range(0..5) {
        0 => format!(
            "A {} {genre} piece, the {instrument} is {}.",
            PRAISE.choose(rng).unwrap(),
            PRAISE.choose(rng).unwrap()
        ),
        1 if dark => format!("Quite {} {genre}, I could hear the {instrument} clearly.", DARK.choose(rng).unwrap()),
        1 => format!(
            "Not {} at all, a really {} recording.",
            CRITICISM.choose(rng).unwrap(),
            PRAISE.choose(rng).unwrap()
        ),
        2 => format!(
            "The recording quality is {} but the {instrument} sounds {}.",
            CRITICISM.choose(rng).unwrap(),
            PRAISE.choose(rng).unwrap()
        ),
        3 => format!("I did not expect {genre} here, not sure about the tags."),
        _ => format!("{} track, it reminds me of old {genre} records.", PRAISE.choose(rng).unwrap()),
    }
}

/// Runs `n` annotators against `store`. Annotator `k` works on batch
/// `k mod batch_count`, visiting a seeded sample of its items; all visits
/// are interleaved in one seeded order so later visitors see and vote on
/// earlier tags. Tags already on an item are upvoted rather than re-added.
/// Timestamps advance one second per event from the campaign start.
pub fn simulate_annotators(
    store: &CampaignStore,
    truth: &GroundTruth,
    n: usize,
    seed: u64,
    behavior: &AnnotatorBehavior,
) -> Result<SimulationSummary, CampaignError> {
    behavior.validate()?;
    if n == 0 {
        return Err(CampaignError::InvalidCampaign("at least one annotator is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batches = store.batches().to_vec();
    let mut visits: Vec<(usize, String)> = Vec::new();
    for k in 0..n {
        let mut items = batches[k % batches.len()].clone();
        items.shuffle(&mut rng);
        items.truncate(behavior.items_per_annotator);
        visits.extend(items.into_iter().map(|i| (k, i)));
    }
    visits.shuffle(&mut rng);

    let vocab = store.vocabularies().clone();
    let start: DateTime<Utc> = store.campaign().start;
    let mut clock = 0i64;
    let mut tick = || {
        clock += 1;
        start + Duration::seconds(clock)
    };
    let mut summary = SimulationSummary { annotators: n, visits: visits.len(), ..Default::default() };
    let empty = BTreeMap::new();
    for (k, item) in &visits {
        let user = format!("annotator-{:03}", k + 1);
        let item_truth = truth.items.get(item).unwrap_or(&empty);
        for category in Category::ALL {
            let terms: Vec<&str> = vocab.get(category).terms().iter().map(|t| t.id.as_str()).collect();
            let mut perceived = BTreeSet::new();
            for t in item_truth.get(&category).into_iter().flatten() {
                let seen = if rng.random_bool(behavior.noise) {
                    *terms.choose(&mut rng).expect("vocabulary is non-empty")
                } else {
                    t
                };
                perceived.insert(seen.to_string());
            }
            let existing: Vec<_> =
                store.item_annotations(item).into_iter().filter(|a| a.category == category).collect();
            for a in &existing {
                if a.creator == user {
                    continue;
                }
                if perceived.contains(&a.term_id) {
                    if rng.random_bool(behavior.upvote_probability) {
                        store.cast_vote(&a.id, &user, Direction::Up, tick())?;
                        summary.upvotes += 1;
                    }
                } else if rng.random_bool(behavior.downvote_probability) {
                    store.cast_vote(&a.id, &user, Direction::Down, tick())?;
                    summary.downvotes += 1;
                }
            }
            for term in &perceived {
                let present = existing.iter().any(|a| &a.term_id == term);
                if !present && rng.random_bool(behavior.propose_probability) {
                    store.submit_annotation(item, category, term, &user, tick())?;
                    summary.annotations += 1;
                }
            }
        }
        if rng.random_bool(behavior.comment_probability) {
            let text = comment_text(&mut rng, &vocab, item_truth);
            store.add_comment(item, &user, &text, tick())?;
            summary.comments += 1;
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use chrono::TimeZone;

    use super::*;
    use crate::campaign::Campaign;
    use crate::vocabulary::builtin_vocabularies;

    fn store(items: usize) -> CampaignStore {
        let ids: Vec<String> = synthetic_catalog(items, 1).into_iter().map(|r| r.europeana_id).collect();
        let start = Utc.with_ymd_and_hms(2022, 11, 1, 0, 0, 0).unwrap();
        let c = Campaign::new("sim", "Sim", ids, start, start + Duration::days(18)).unwrap();
        CampaignStore::new(c, Arc::new(builtin_vocabularies())).unwrap()
    }

    #[test]
    fn catalog_is_deterministic_and_valid() {
        let a = synthetic_catalog(50, 3);
        assert_eq!(a, synthetic_catalog(50, 3));
        assert_ne!(a, synthetic_catalog(50, 4));
        let v = builtin_vocabularies();
        for r in &a {
            r.validate(&v).unwrap();
            assert!(r.duration_ms.unwrap() <= 360_000);
        }
    }

    #[test]
    fn noiseless_annotators_only_add_truth() {
        let s = store(40);
        let truth = GroundTruth::plant(&s.campaign().item_ids, 9);
        let behavior = AnnotatorBehavior { noise: 0.0, items_per_annotator: 5, ..Default::default() };
        let summary = simulate_annotators(&s, &truth, 16, 9, &behavior).unwrap();
        assert!(summary.annotations > 0);
        for row in s.export().tags {
            let cat: Category = row.category;
            assert!(truth.tags(&row.item_id, cat).unwrap().contains(&row.term_id));
        }
    }

    #[test]
    fn same_seed_same_store() {
        let run = |seed| {
            let s = store(40);
            let truth = GroundTruth::plant(&s.campaign().item_ids, seed);
            let behavior = AnnotatorBehavior { items_per_annotator: 5, ..Default::default() };
            simulate_annotators(&s, &truth, 16, seed, &behavior).unwrap();
            s.export().to_csv_string()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn behavior_validation() {
        let s = store(16);
        let truth = GroundTruth::plant(&s.campaign().item_ids, 1);
        let bad = AnnotatorBehavior { noise: 1.5, ..Default::default() };
        assert!(simulate_annotators(&s, &truth, 1, 1, &bad).is_err());
        assert!(simulate_annotators(&s, &truth, 0, 1, &AnnotatorBehavior::default()).is_err());
    }
}
