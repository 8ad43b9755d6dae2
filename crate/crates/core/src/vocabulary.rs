//! Controlled term lists for the three enrichment categories.
//!
//! Every tag a contributor can attach to a track is drawn from one of these
//! lists. Emotion terms additionally carry a position on the valence/arousal
//! circle.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Namespace shared by the ontology and the default term URIs, so that
/// `hasGenre` and `Jazz` both expand from the same default prefix.
pub const DEFAULT_NAMESPACE: &str = "https://w3id.org/crowdkb/ns#";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Emotion,
    Genre,
    Instrument,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Emotion, Category::Genre, Category::Instrument];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Emotion => "emotion",
            Category::Genre => "genre",
            Category::Instrument => "instrument",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = VocabularyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "emotion" => Ok(Category::Emotion),
            "genre" => Ok(Category::Genre),
            "instrument" | "instruments" => Ok(Category::Instrument),
            other => Err(VocabularyError::UnknownCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub id: String,
    pub label: String,
    pub category: Category,
    pub uri: String,
}

/// A point on the valence (x) / arousal (y) unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionPosition {
    pub valence: f64,
    pub arousal: f64,
}

impl EmotionPosition {
    pub fn dot(&self, other: &EmotionPosition) -> f64 {
        self.valence * other.valence + self.arousal * other.arousal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VocabularyError {
    #[error("unknown {category} term '{query}'")]
    UnknownTerm { query: String, category: Category },
    #[error("'{query}' matches more than one {category} term")]
    AmbiguousTerm { query: String, category: Category },
    #[error("term '{0}' is not an emotion")]
    NotAnEmotion(String),
    #[error("unknown category '{0}'")]
    UnknownCategory(String),
    #[error("duplicate term id '{0}'")]
    DuplicateId(String),
    #[error("term '{0}' has an empty label")]
    EmptyLabel(String),
    #[error("term '{id}' has an invalid URI '{uri}'")]
    InvalidUri { id: String, uri: String },
    #[error("override file line {line}: {message}")]
    OverrideSyntax { line: usize, message: String },
    #[error("cannot read override file: {0}")]
    Io(String),
}

impl VocabularyError {
    /// Stable machine-readable code, equal to the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            VocabularyError::UnknownTerm { .. } => "UnknownTerm",
            VocabularyError::AmbiguousTerm { .. } => "AmbiguousTerm",
            VocabularyError::NotAnEmotion(_) => "NotAnEmotion",
            VocabularyError::UnknownCategory(_) => "UnknownCategory",
            VocabularyError::DuplicateId(_) => "DuplicateId",
            VocabularyError::EmptyLabel(_) => "EmptyLabel",
            VocabularyError::InvalidUri { .. } => "InvalidUri",
            VocabularyError::OverrideSyntax { .. } => "OverrideSyntax",
            VocabularyError::Io(_) => "Io",
        }
    }
}

/// The term list of one category.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    category: Category,
    terms: Vec<Term>,
}

impl Vocabulary {
    pub fn category(&self) -> Category {
        self.category
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.id == id)
    }

    /// Case-insensitive lookup on id or label.
    pub fn resolve(&self, label_or_id: &str) -> Result<&Term, VocabularyError> {
        let needle = label_or_id.trim().to_lowercase();
        let mut hits = self.terms.iter().filter(|t| t.id.to_lowercase() == needle || t.label.to_lowercase() == needle);
        let first = hits
            .next()
            .ok_or_else(|| VocabularyError::UnknownTerm { query: label_or_id.to_string(), category: self.category })?;
        // the same term matching on both id and label is still one hit
        if hits.any(|t| t.id != first.id) {
            return Err(VocabularyError::AmbiguousTerm { query: label_or_id.to_string(), category: self.category });
        }
        Ok(first)
    }
}

/// All three vocabularies plus the emotion circle positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabularies {
    emotion: Vocabulary,
    genre: Vocabulary,
    instrument: Vocabulary,
    positions: BTreeMap<String, EmotionPosition>,
}

const EMOTIONS: [&str; 8] = ["Arousal", "Joy", "Pleasure", "Calmness", "Boredom", "Sadness", "Anxiety", "Fear"];

const GENRES: [&str; 11] = [
    "Pop",
    "Rock",
    "Country",
    "Classical",
    "Opera",
    "Instrumental",
    "Funk",
    "Hip-hop",
    "Reggae",
    "Jazz",
    "Traditional Folk",
];

const INSTRUMENTS: [&str; 12] = [
    "Piano",
    "Electric Guitar",
    "Acoustic Guitar",
    "Drums",
    "Synthesizer",
    "Violin",
    "Harmonica",
    "Banjo",
    "Bass",
    "Woodwind",
    "Brass",
    "Orchestra",
];

/// Counter-clockwise from Pleasure at 0°, one tag every 45°.
fn circle_positions() -> BTreeMap<String, EmotionPosition> {
    let h = FRAC_1_SQRT_2;
    [
        ("pleasure", 1.0, 0.0),
        ("joy", h, h),
        ("arousal", 0.0, 1.0),
        ("fear", -h, h),
        ("anxiety", -1.0, 0.0),
        ("sadness", -h, -h),
        ("boredom", 0.0, -1.0),
        ("calmness", h, -h),
    ]
    .into_iter()
    .map(|(id, valence, arousal)| (id.to_string(), EmotionPosition { valence, arousal }))
    .collect()
}

/// Stable slug for a label: lowercase ASCII alphanumerics joined by `-`.
pub fn slugify(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    let mut pending_dash = false;
    for ch in label.chars() {
        if ch.is_alphanumeric() {
            if pending_dash && !out.is_empty() {
                out.push('-');
            }
            pending_dash = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_dash = true;
        }
    }
    out
}

/// `Traditional Folk` -> `TraditionalFolk`, `Hip-hop` -> `HipHop`.
fn camel_case(label: &str) -> String {
    label
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            match cs.next() {
                Some(first) => first.to_uppercase().chain(cs).collect::<String>(),
                None => String::new(),
            }
        })
        .collect()
}

fn builtin_list(category: Category, labels: &[&str]) -> Vocabulary {
    let terms = labels
        .iter()
        .map(|label| Term {
            id: slugify(label),
            label: (*label).to_string(),
            category,
            uri: format!("{DEFAULT_NAMESPACE}{}", camel_case(label)),
        })
        .collect();
    Vocabulary { category, terms }
}

/// The shipped emotion, genre and instrument lists.
pub fn builtin_vocabularies() -> Vocabularies {
    Vocabularies {
        emotion: builtin_list(Category::Emotion, &EMOTIONS),
        genre: builtin_list(Category::Genre, &GENRES),
        instrument: builtin_list(Category::Instrument, &INSTRUMENTS),
        positions: circle_positions(),
    }
}

/// Loose absolute-URI check: a scheme, a `:`, something after it, no whitespace.
pub fn is_absolute_uri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok && !rest.is_empty() && !s.chars().any(char::is_whitespace) && !s.contains(['<', '>', '"'])
}

impl Default for Vocabularies {
    fn default() -> Self {
        builtin_vocabularies()
    }
}

impl Vocabularies {
    pub fn get(&self, category: Category) -> &Vocabulary {
        match category {
            Category::Emotion => &self.emotion,
            Category::Genre => &self.genre,
            Category::Instrument => &self.instrument,
        }
    }

    fn get_mut(&mut self, category: Category) -> &mut Vocabulary {
        match category {
            Category::Emotion => &mut self.emotion,
            Category::Genre => &mut self.genre,
            Category::Instrument => &mut self.instrument,
        }
    }

    pub fn resolve_term(&self, label_or_id: &str, category: Category) -> Result<&Term, VocabularyError> {
        self.get(category).resolve(label_or_id)
    }

    /// Looks a term up by exact id in any category.
    pub fn term(&self, id: &str) -> Option<&Term> {
        self.iter().find(|t| t.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Term> {
        Category::ALL.into_iter().flat_map(move |c| self.get(c).terms.iter())
    }

    pub fn emotion_position(&self, term: &Term) -> Result<EmotionPosition, VocabularyError> {
        if term.category != Category::Emotion {
            return Err(VocabularyError::NotAnEmotion(term.id.clone()));
        }
        self.positions.get(&term.id).copied().ok_or_else(|| VocabularyError::NotAnEmotion(term.id.clone()))
    }

    /// Applies a `category,id,label,uri` override list. A known id has its
    /// label and URI replaced; an unknown id is appended (emotions must
    /// already exist since they need a circle position).
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), VocabularyError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        for (idx, row) in reader.records().enumerate() {
            let row = row.map_err(|e| VocabularyError::OverrideSyntax { line: idx + 1, message: e.to_string() })?;
            let line = row.position().map_or(idx + 1, |p| p.line() as usize);
            if row.len() != 4 {
                return Err(VocabularyError::OverrideSyntax {
                    line,
                    message: format!("expected 4 fields, found {}", row.len()),
                });
            }
            let category: Category = row[0].parse()?;
            let (id, label, uri) = (row[1].to_string(), row[2].to_string(), row[3].to_string());
            if label.is_empty() {
                return Err(VocabularyError::EmptyLabel(id));
            }
            if !is_absolute_uri(&uri) {
                return Err(VocabularyError::InvalidUri { id, uri });
            }
            if let Some(other) = self.term(&id) {
                if other.category != category {
                    return Err(VocabularyError::DuplicateId(id));
                }
            }
            let vocab = self.get_mut(category);
            match vocab.terms.iter_mut().find(|t| t.id == id) {
                Some(term) => {
                    term.label = label;
                    term.uri = uri;
                }
                None if category == Category::Emotion => {
                    return Err(VocabularyError::OverrideSyntax {
                        line,
                        message: format!("new emotion '{id}' has no circle position"),
                    });
                }
                None => vocab.terms.push(Term { id, label, category, uri }),
            }
        }
        Ok(())
    }

    pub fn load_overrides(&mut self, path: &Path) -> Result<(), VocabularyError> {
        let text = std::fs::read_to_string(path).map_err(|e| VocabularyError::Io(e.to_string()))?;
        self.apply_overrides(&text)
    }
}
