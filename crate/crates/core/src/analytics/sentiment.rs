use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::AnalyticsError;
use crate::catalog::TrackRecord;

const BUILTIN_LEXICON: &str = include_str!("lexicon.csv");

/// Tokens that flip the valence of a scored word up to two tokens later.
/// Contractions split on the apostrophe, hence `don`, `isn` and so on.
pub const DEFAULT_NEGATIONS: &[&str] = &[
    "aren", "cannot", "couldn", "didn", "doesn", "don", "hardly", "isn", "neither", "never", "no", "nor", "not",
    "nothing", "shouldn", "wasn", "weren", "without", "wouldn",
];

const NEGATION_WINDOW: usize = 2;
const NORMALIZATION_ALPHA: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
    negations: BTreeSet<String>,
}

impl SentimentLexicon {
    /// Parses `token,valence` lines. Blank lines and `#` comments are
    /// skipped; tokens are lowercased and must be unique.
    pub fn parse(text: &str) -> Result<Self, AnalyticsError> {
        let mut valences = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| AnalyticsError::LexiconSyntax { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let (token, valence) = raw.split_once(',').ok_or_else(|| err("expected token,valence".into()))?;
            let token = token.trim().to_lowercase();
            if token.is_empty() || !token.chars().all(char::is_alphabetic) {
                return Err(err(format!("token '{token}' must be a single word")));
            }
            let valence: f64 = valence.trim().parse().map_err(|_| err(format!("bad valence '{}'", valence.trim())))?;
            if !(-4.0..=4.0).contains(&valence) {
                return Err(err(format!("valence {valence} outside [-4, 4]")));
            }
            if valences.insert(token.clone(), valence).is_some() {
                return Err(err(format!("duplicate token '{token}'")));
            }
        }
        Ok(SentimentLexicon { valences, negations: DEFAULT_NEGATIONS.iter().map(|s| s.to_string()).collect() })
    }

    pub fn load(path: &Path) -> Result<Self, AnalyticsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AnalyticsError::LexiconUnreadable(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The shipped lexicon of about two hundred words.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("shipped lexicon parses")
    }

    pub fn with_negations(mut self, negations: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.negations = negations.into_iter().map(|n| n.into().to_lowercase()).collect();
        self
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    pub fn is_negation(&self, token: &str) -> bool {
        self.negations.contains(token)
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Compound score in (-1, 1): summed valences normalized by
/// `s / sqrt(s^2 + 15)`. A negation among the two preceding tokens flips a
/// word's sign once, however many negations there are.
pub fn sentiment_score(text: &str, lexicon: &SentimentLexicon) -> f64 {
    let tokens = tokenize(text);
    let mut sum = 0.0;
    for (i, token) in tokens.iter().enumerate() {
        let Some(v) = lexicon.valence(token) else { continue };
        let negated = tokens[i.saturating_sub(NEGATION_WINDOW)..i].iter().any(|t| lexicon.is_negation(t));
        sum += if negated { -v } else { v };
    }
    if sum == 0.0 {
        return 0.0;
    }
    sum / (sum * sum + NORMALIZATION_ALPHA).sqrt()
}

/// Mean comment score; 0 for a record without comments.
pub fn track_sentiment(record: &TrackRecord, lexicon: &SentimentLexicon) -> f64 {
    if record.comments.is_empty() {
        return 0.0;
    }
    record.comments.iter().map(|c| sentiment_score(c, lexicon)).sum::<f64>() / record.comments.len() as f64
}
