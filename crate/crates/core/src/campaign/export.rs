use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::vocabulary::Category;

/// One annotation with its final tallies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagRow {
    pub item_id: String,
    pub category: Category,
    pub term_id: String,
    pub upvotes: u32,
    pub downvotes: u32,
    pub creator: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRow {
    pub item_id: String,
    pub author: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
}

/// Raw campaign output: every tag and every comment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CampaignExport {
    pub tags: Vec<TagRow>,
    pub comments: Vec<CommentRow>,
}

const HEADER: [&str; 9] =
    ["kind", "item_id", "category", "term_id", "upvotes", "downvotes", "user", "created_at", "text"];

impl CampaignExport {
    /// Writes one CSV: `tag` rows first, then `comment` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CampaignError> {
        let fail = |e: csv::Error| CampaignError::Persistence(e.to_string());
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(HEADER).map_err(fail)?;
        for t in &self.tags {
            csv.write_record([
                "tag",
                &t.item_id,
                t.category.as_str(),
                &t.term_id,
                &t.upvotes.to_string(),
                &t.downvotes.to_string(),
                &t.creator,
                "",
                "",
            ])
            .map_err(fail)?;
        }
        for c in &self.comments {
            csv.write_record([
                "comment",
                &c.item_id,
                "",
                "",
                "",
                "",
                &c.author,
                &c.created_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
                &c.text,
            ])
            .map_err(fail)?;
        }
        csv.flush().map_err(|e| CampaignError::Persistence(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CampaignError> {
        let mut csv = csv::Reader::from_reader(reader);
        let mut out = CampaignExport::default();
        for (idx, row) in csv.records().enumerate() {
            let line = idx + 2;
            let bad = |message: String| CampaignError::CorruptStore { line, message };
            let row = row.map_err(|e| bad(e.to_string()))?;
            if row.len() != HEADER.len() {
                return Err(bad(format!("expected {} fields, found {}", HEADER.len(), row.len())));
            }
            match &row[0] {
                "tag" => out.tags.push(TagRow {
                    item_id: row[1].to_string(),
                    category: row[2].parse().map_err(|e| bad(format!("{e}")))?,
                    term_id: row[3].to_string(),
                    upvotes: row[4].parse().map_err(|_| bad(format!("bad upvotes '{}'", &row[4])))?,
                    downvotes: row[5].parse().map_err(|_| bad(format!("bad downvotes '{}'", &row[5])))?,
                    creator: row[6].to_string(),
                }),
                "comment" => out.comments.push(CommentRow {
                    item_id: row[1].to_string(),
                    author: row[6].to_string(),
                    created_at: DateTime::parse_from_rfc3339(&row[7])
                        .map_err(|e| bad(format!("bad timestamp: {e}")))?
                        .with_timezone(&Utc),
                    text: row[8].to_string(),
                }),
                other => return Err(bad(format!("unknown row kind '{other}'"))),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn csv_layout() {
        let e = CampaignExport {
            tags: vec![TagRow {
                item_id: "item1".into(),
                category: Category::Genre,
                term_id: "rock".into(),
                upvotes: 5,
                downvotes: 1,
                creator: "alice".into(),
            }],
            comments: vec![CommentRow {
                item_id: "item1".into(),
                author: "bob".into(),
                created_at: Utc.with_ymd_and_hms(2023, 3, 2, 10, 0, 0).unwrap(),
                text: "a \"great\", tune".into(),
            }],
        };
        let text = e.to_csv_string();
        assert_eq!(
            text,
            "kind,item_id,category,term_id,upvotes,downvotes,user,created_at,text\n\
             tag,item1,genre,rock,5,1,alice,,\n\
             comment,item1,,,,,bob,2023-03-02T10:00:00Z,\"a \"\"great\"\", tune\"\n"
        );
        assert_eq!(CampaignExport::read_csv(text.as_bytes()).unwrap(), e);
    }

    #[test]
    fn rejects_garbage() {
        let text = "kind,item_id,category,term_id,upvotes,downvotes,user,created_at,text\nvote,a,,,,,,,\n";
        assert!(matches!(CampaignExport::read_csv(text.as_bytes()), Err(CampaignError::CorruptStore { line: 2, .. })));
        let text = "kind,item_id,category,term_id,upvotes,downvotes,user,created_at,text\ntag,a,genre,rock,x,0,u,,\n";
        assert!(CampaignExport::read_csv(text.as_bytes()).is_err());
    }
}
