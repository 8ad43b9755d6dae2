//! On-disk layout shared by the CLI and the service.
//!
//! ```text
//! DATA_DIR/
//!   catalog.csv                 curated records
//!   campaigns/<id>.json         campaign definition
//!   campaigns/<id>.events.jsonl append-only contribution log
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crowdkb_core::{load_dataset, Campaign, CampaignStore, TrackRecord, Vocabularies};

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

/// Campaign ids become file names, so they are limited to `[A-Za-z0-9_-]`.
pub fn check_campaign_id(id: &str) -> Result<(), CliError> {
    if !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        Ok(())
    } else {
        Err(CliError::domain("InvalidCampaign", format!("campaign id '{id}' must match [A-Za-z0-9_-]+")))
    }
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.root.join("catalog.csv")
    }

    pub fn campaigns_dir(&self) -> PathBuf {
        self.root.join("campaigns")
    }

    pub fn campaign_path(&self, id: &str) -> PathBuf {
        self.campaigns_dir().join(format!("{id}.json"))
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.campaigns_dir().join(format!("{id}.events.jsonl"))
    }

    pub fn load_catalog(&self, vocab: &Vocabularies) -> Result<Vec<TrackRecord>, CliError> {
        let loaded = load_dataset(&self.catalog_path(), vocab)?;
        if let Some(bad) = loaded.errors.first() {
            return Err(CliError::domain(
                bad.error.code(),
                format!("{} line {}: {}", self.catalog_path().display(), bad.line, bad.error),
            ));
        }
        Ok(loaded.records)
    }

    /// Writes a new campaign definition; an existing id is an error.
    pub fn save_campaign(&self, campaign: &Campaign) -> Result<(), CliError> {
        check_campaign_id(&campaign.id)?;
        let dir = self.campaigns_dir();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let path = self.campaign_path(&campaign.id);
        if path.exists() {
            return Err(CliError::domain("InvalidCampaign", format!("campaign '{}' already exists", campaign.id)));
        }
        let json = serde_json::to_string_pretty(campaign).map_err(|e| CliError::io(&path, e))?;
        fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))
    }

    pub fn load_campaign(&self, id: &str) -> Result<Campaign, CliError> {
        check_campaign_id(id)?;
        let path = self.campaign_path(id);
        if !path.exists() {
            return Err(CliError::domain("UnknownCampaign", format!("no campaign '{id}' in {}", self.root.display())));
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let campaign: Campaign = serde_json::from_str(&text)
            .map_err(|e| CliError::domain("InvalidCampaign", format!("{}: {e}", path.display())))?;
        campaign.validate()?;
        Ok(campaign)
    }

    /// All campaign definitions, sorted by id.
    pub fn load_campaigns(&self) -> Result<Vec<Campaign>, CliError> {
        let dir = self.campaigns_dir();
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let name = entry.map_err(|e| CliError::io(&dir, e))?.file_name();
            if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(".json")) {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        ids.iter().map(|id| self.load_campaign(id)).collect()
    }

    /// Opens the log-backed store of a campaign, replaying earlier events.
    pub fn open_store(&self, campaign: Campaign, vocab: Arc<Vocabularies>) -> Result<CampaignStore, CliError> {
        let log = self.log_path(&campaign.id);
        Ok(CampaignStore::open(campaign, vocab, &log)?)
    }
}
