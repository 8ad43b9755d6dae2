//! Track metadata records: parsing, curation and the flat CSV dataset format.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocabulary::{Category, Vocabularies};

/// Column names of the dataset file, in output order.
pub const COLUMNS: [&str; 15] = [
    "EuropeanaID",
    "Title",
    "Year",
    "Duration",
    "Composer",
    "DateOfBirth",
    "DateOfDeath",
    "Biography",
    "Publisher",
    "Place",
    "AudioURL",
    "Genre",
    "Emotion",
    "Instrument",
    "Comments",
];

pub const MULTI_VALUE_SEPARATOR: char = ';';

/// One header-keyed input row.
pub type RawRow = BTreeMap<String, String>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("row has no EuropeanaID")]
    MissingIdentifier,
    #[error("malformed duration '{0}'")]
    MalformedDuration(String),
    #[error("malformed {field} '{value}'")]
    MalformedDate { field: &'static str, value: String },
    #[error("composer death {death} precedes birth {birth}")]
    InconsistentLifespan { birth: PartialDate, death: PartialDate },
    #[error("unknown {category} term '{label}'")]
    UnknownTerm { category: Category, label: String },
    #[error("duplicate EuropeanaID '{0}'")]
    DuplicateIdentifier(String),
    #[error("cannot read dataset: {0}")]
    FileUnreadable(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("cannot write dataset: {0}")]
    WriteFailure(String),
    #[error("invalid curation policy: {0}")]
    InvalidPolicy(String),
}

impl CatalogError {
    /// Stable machine-readable code, equal to the variant name.
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::MissingIdentifier => "MissingIdentifier",
            CatalogError::MalformedDuration(_) => "MalformedDuration",
            CatalogError::MalformedDate { .. } => "MalformedDate",
            CatalogError::InconsistentLifespan { .. } => "InconsistentLifespan",
            CatalogError::UnknownTerm { .. } => "UnknownTerm",
            CatalogError::DuplicateIdentifier(_) => "DuplicateIdentifier",
            CatalogError::FileUnreadable(_) => "FileUnreadable",
            CatalogError::EmptyDataset => "EmptyDataset",
            CatalogError::WriteFailure(_) => "WriteFailure",
            CatalogError::InvalidPolicy(_) => "InvalidPolicy",
        }
    }
}

/// A date with year, year-month or full precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartialDate {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

impl PartialDate {
    pub fn year(year: i32) -> Self {
        PartialDate { year, month: None, day: None }
    }

    fn earliest(&self) -> (i32, u32, u32) {
        (self.year, self.month.unwrap_or(1), self.day.unwrap_or(1))
    }

    fn latest(&self) -> (i32, u32, u32) {
        (self.year, self.month.unwrap_or(12), self.day.unwrap_or(31))
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
            if let Some(d) = self.day {
                write!(f, "-{d:02}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for PartialDate {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('-').collect();
        let num = |p: &str, len: usize| -> Result<u32, ()> {
            if p.len() == len && p.bytes().all(|b| b.is_ascii_digit()) {
                p.parse().map_err(|_| ())
            } else {
                Err(())
            }
        };
        match parts.as_slice() {
            [y] => Ok(PartialDate::year(num(y, 4)? as i32)),
            [y, m] => {
                let (year, month) = (num(y, 4)? as i32, num(m, 2)?);
                if !(1..=12).contains(&month) {
                    return Err(());
                }
                Ok(PartialDate { year, month: Some(month), day: None })
            }
            [y, m, d] => {
                let (year, month, day) = (num(y, 4)? as i32, num(m, 2)?, num(d, 2)?);
                NaiveDate::from_ymd_opt(year, month, day).ok_or(())?;
                Ok(PartialDate { year, month: Some(month), day: Some(day) })
            }
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrackRecord {
    pub europeana_id: String,
    pub title: Option<String>,
    pub year: Option<i32>,
    pub duration_ms: Option<u64>,
    pub composer: Option<String>,
    pub composer_birth: Option<PartialDate>,
    pub composer_death: Option<PartialDate>,
    pub biography: Option<String>,
    pub publisher: Option<String>,
    pub place: Option<String>,
    pub audio_url: Option<String>,
    pub genres: BTreeSet<String>,
    pub emotions: BTreeSet<String>,
    pub instruments: BTreeSet<String>,
    pub comments: Vec<String>,
}

impl TrackRecord {
    pub fn new(europeana_id: impl Into<String>) -> Self {
        TrackRecord { europeana_id: europeana_id.into(), ..Default::default() }
    }

    pub fn tags(&self, category: Category) -> &BTreeSet<String> {
        match category {
            Category::Emotion => &self.emotions,
            Category::Genre => &self.genres,
            Category::Instrument => &self.instruments,
        }
    }

    pub fn tags_mut(&mut self, category: Category) -> &mut BTreeSet<String> {
        match category {
            Category::Emotion => &mut self.emotions,
            Category::Genre => &mut self.genres,
            Category::Instrument => &mut self.instruments,
        }
    }

    /// Every tag of the record across all three categories.
    pub fn all_tags(&self) -> BTreeSet<String> {
        Category::ALL.iter().flat_map(|c| self.tags(*c).iter().cloned()).collect()
    }

    pub fn has_field(&self, field: Field) -> bool {
        match field {
            Field::EuropeanaId => !self.europeana_id.is_empty(),
            Field::Title => self.title.is_some(),
            Field::Year => self.year.is_some(),
            Field::Duration => self.duration_ms.is_some(),
            Field::Composer => self.composer.is_some(),
            Field::DateOfBirth => self.composer_birth.is_some(),
            Field::DateOfDeath => self.composer_death.is_some(),
            Field::Biography => self.biography.is_some(),
            Field::Publisher => self.publisher.is_some(),
            Field::Place => self.place.is_some(),
            Field::AudioUrl => self.audio_url.is_some(),
        }
    }

    /// Checks the record-level invariants against a vocabulary.
    pub fn validate(&self, vocab: &Vocabularies) -> Result<(), CatalogError> {
        if self.europeana_id.trim().is_empty() {
            return Err(CatalogError::MissingIdentifier);
        }
        if let (Some(birth), Some(death)) = (self.composer_birth, self.composer_death) {
            if death.latest() < birth.earliest() {
                return Err(CatalogError::InconsistentLifespan { birth, death });
            }
        }
        for category in Category::ALL {
            for id in self.tags(category) {
                if vocab.get(category).get(id).is_none() {
                    return Err(CatalogError::UnknownTerm { category, label: id.clone() });
                }
            }
        }
        Ok(())
    }
}

/// Metadata fields a curation policy can require.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    EuropeanaId,
    Title,
    Year,
    Duration,
    Composer,
    DateOfBirth,
    DateOfDeath,
    Biography,
    Publisher,
    Place,
    AudioUrl,
}

impl Field {
    pub const ALL: [Field; 11] = [
        Field::EuropeanaId,
        Field::Title,
        Field::Year,
        Field::Duration,
        Field::Composer,
        Field::DateOfBirth,
        Field::DateOfDeath,
        Field::Biography,
        Field::Publisher,
        Field::Place,
        Field::AudioUrl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::EuropeanaId => "europeana_id",
            Field::Title => "title",
            Field::Year => "year",
            Field::Duration => "duration_ms",
            Field::Composer => "composer",
            Field::DateOfBirth => "composer_birth",
            Field::DateOfDeath => "composer_death",
            Field::Biography => "biography",
            Field::Publisher => "publisher",
            Field::Place => "place",
            Field::AudioUrl => "audio_url",
        }
    }
}

impl FromStr for Field {
    type Err = CatalogError;

    /// Accepts the snake_case record field name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Field::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CatalogError::InvalidPolicy(format!("unknown field '{s}'")))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationPolicy {
    pub max_duration_ms: u64,
    pub required_fields: BTreeSet<Field>,
}

impl Default for CurationPolicy {
    fn default() -> Self {
        CurationPolicy {
            max_duration_ms: 360_000,
            required_fields: [Field::EuropeanaId, Field::Title, Field::Composer, Field::Duration].into_iter().collect(),
        }
    }
}

impl CurationPolicy {
    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.max_duration_ms == 0 {
            return Err(CatalogError::InvalidPolicy("max_duration_ms must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum RejectReason {
    DurationExceeded { duration_ms: u64, max_duration_ms: u64 },
    MissingRequiredField { field: Field },
}

impl RejectReason {
    pub fn code(&self) -> String {
        match self {
            RejectReason::DurationExceeded { .. } => "DurationExceeded".to_string(),
            RejectReason::MissingRequiredField { field } => format!("MissingRequiredField({field})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub record: TrackRecord,
    pub reasons: Vec<RejectReason>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurationOutcome {
    pub kept: Vec<TrackRecord>,
    pub rejected: Vec<Rejection>,
}

/// Splits records into those passing the policy and those rejected with
/// reasons. The duration limit is inclusive.
pub fn apply_curation(records: Vec<TrackRecord>, policy: &CurationPolicy) -> CurationOutcome {
    let mut outcome = CurationOutcome::default();
    for record in records {
        let mut reasons = Vec::new();
        if let Some(d) = record.duration_ms {
            if d > policy.max_duration_ms {
                reasons
                    .push(RejectReason::DurationExceeded { duration_ms: d, max_duration_ms: policy.max_duration_ms });
            }
        }
        for field in &policy.required_fields {
            if !record.has_field(*field) {
                reasons.push(RejectReason::MissingRequiredField { field: *field });
            }
        }
        if reasons.is_empty() {
            outcome.kept.push(record);
        } else {
            outcome.rejected.push(Rejection { record, reasons });
        }
    }
    outcome
}

fn cell<'a>(row: &'a RawRow, column: &str) -> Option<&'a str> {
    row.get(column).map(|s| s.trim()).filter(|s| !s.is_empty())
}

fn text(row: &RawRow, column: &str) -> Option<String> {
    cell(row, column).map(str::to_string)
}

fn date(row: &RawRow, column: &'static str) -> Result<Option<PartialDate>, CatalogError> {
    cell(row, column)
        .map(|v| v.parse().map_err(|_| CatalogError::MalformedDate { field: column, value: v.to_string() }))
        .transpose()
}

fn split_escaped(cell: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = cell.chars();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' => {
                if let Some(next) = chars.next() {
                    cur.push(next);
                }
            }
            c if c == MULTI_VALUE_SEPARATOR => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn join_escaped<'a>(values: impl IntoIterator<Item = &'a String>) -> String {
    values
        .into_iter()
        .map(|v| v.replace('\\', "\\\\").replace(MULTI_VALUE_SEPARATOR, "\\;"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Builds a record from one header-keyed row. Empty cells become absent
/// fields; tag cells hold `;`-separated term labels.
pub fn parse_record(row: &RawRow, vocab: &Vocabularies) -> Result<TrackRecord, CatalogError> {
    let europeana_id = text(row, "EuropeanaID").ok_or(CatalogError::MissingIdentifier)?;
    let year = cell(row, "Year")
        .map(|v| {
            v.parse::<PartialDate>()
                .map(|d| d.year)
                .map_err(|_| CatalogError::MalformedDate { field: "Year", value: v.to_string() })
        })
        .transpose()?;
    let duration_ms = cell(row, "Duration")
        .map(|v| v.parse::<u64>().map_err(|_| CatalogError::MalformedDuration(v.to_string())))
        .transpose()?;

    let mut record = TrackRecord {
        europeana_id,
        title: text(row, "Title"),
        year,
        duration_ms,
        composer: text(row, "Composer"),
        composer_birth: date(row, "DateOfBirth")?,
        composer_death: date(row, "DateOfDeath")?,
        biography: text(row, "Biography"),
        publisher: text(row, "Publisher"),
        place: text(row, "Place"),
        audio_url: text(row, "AudioURL"),
        comments: cell(row, "Comments").map(split_escaped).unwrap_or_default(),
        ..Default::default()
    };
    for (column, category) in
        [("Genre", Category::Genre), ("Emotion", Category::Emotion), ("Instrument", Category::Instrument)]
    {
        for label in cell(row, column).map(split_escaped).unwrap_or_default() {
            let term = vocab
                .resolve_term(&label, category)
                .map_err(|_| CatalogError::UnknownTerm { category, label: label.clone() })?;
            record.tags_mut(category).insert(term.id.clone());
        }
    }
    record.validate(vocab)?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the source file.
    pub line: u64,
    pub error: CatalogError,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadedDataset {
    pub records: Vec<TrackRecord>,
    pub errors: Vec<RowError>,
}

/// Reads every parseable record from CSV text. Bad rows are reported and
/// skipped; record order follows the input.
pub fn read_dataset<R: Read>(reader: R, vocab: &Vocabularies) -> Result<LoadedDataset, CatalogError> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = match csv.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(CatalogError::FileUnreadable(e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(CatalogError::EmptyDataset);
    }
    let mut out = LoadedDataset::default();
    let mut seen = HashSet::new();
    let mut rows = 0usize;
    for result in csv.records() {
        rows += 1;
        let row = match result {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.errors.push(RowError { line, error: CatalogError::FileUnreadable(e.to_string()) });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        let raw: RawRow = headers.iter().zip(row.iter()).map(|(h, v)| (h.trim().to_string(), v.to_string())).collect();
        match parse_record(&raw, vocab) {
            Ok(record) if !seen.insert(record.europeana_id.clone()) => {
                out.errors.push(RowError { line, error: CatalogError::DuplicateIdentifier(record.europeana_id) })
            }
            Ok(record) => out.records.push(record),
            Err(error) => out.errors.push(RowError { line, error }),
        }
    }
    if rows == 0 {
        return Err(CatalogError::EmptyDataset);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path, vocab: &Vocabularies) -> Result<LoadedDataset, CatalogError> {
    let file = File::open(path).map_err(|e| CatalogError::FileUnreadable(format!("{}: {e}", path.display())))?;
    read_dataset(file, vocab)
}

fn tag_cell(record: &TrackRecord, category: Category, vocab: &Vocabularies) -> Result<String, CatalogError> {
    let mut labels = record
        .tags(category)
        .iter()
        .map(|id| {
            vocab
                .get(category)
                .get(id)
                .map(|t| t.label.clone())
                .ok_or_else(|| CatalogError::UnknownTerm { category, label: id.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    labels.sort();
    Ok(join_escaped(&labels))
}

/// Serializes records as CSV with the [`COLUMNS`] header. Tag cells list
/// term labels sorted lexicographically, so output is byte-deterministic.
pub fn write_dataset<W: Write>(records: &[TrackRecord], vocab: &Vocabularies, writer: W) -> Result<(), CatalogError> {
    let fail = |e: csv::Error| CatalogError::WriteFailure(e.to_string());
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(COLUMNS).map_err(fail)?;
    for r in records {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let row = [
            r.europeana_id.clone(),
            opt(&r.title),
            r.year.map(|y| y.to_string()).unwrap_or_default(),
            r.duration_ms.map(|d| d.to_string()).unwrap_or_default(),
            opt(&r.composer),
            r.composer_birth.map(|d| d.to_string()).unwrap_or_default(),
            r.composer_death.map(|d| d.to_string()).unwrap_or_default(),
            opt(&r.biography),
            opt(&r.publisher),
            opt(&r.place),
            opt(&r.audio_url),
            tag_cell(r, Category::Genre, vocab)?,
            tag_cell(r, Category::Emotion, vocab)?,
            tag_cell(r, Category::Instrument, vocab)?,
            join_escaped(&r.comments),
        ];
        csv.write_record(&row).map_err(fail)?;
    }
    csv.flush().map_err(|e| CatalogError::WriteFailure(e.to_string()))
}

pub fn export_enriched(records: &[TrackRecord], vocab: &Vocabularies, path: &Path) -> Result<(), CatalogError> {
    let file = File::create(path).map_err(|e| CatalogError::WriteFailure(format!("{}: {e}", path.display())))?;
    write_dataset(records, vocab, std::io::BufWriter::new(file))
}
