use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    partition_batches, Annotation, Campaign, CampaignError, CampaignExport, Comment, CommentRow, Direction, TagRow,
    Tallies, MAX_COMMENT_CHARS,
};
use crate::vocabulary::{Category, Vocabularies};

/// Log entry; one JSON object per line. Replaying the log in order rebuilds
/// the store, including annotation ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Annotate { item_id: String, category: Category, term_id: String, user: String, at: DateTime<Utc> },
    Vote { annotation_id: String, voter: String, direction: Direction, at: DateTime<Utc> },
    Comment { item_id: String, user: String, text: String, at: DateTime<Utc> },
}

#[derive(Debug, Clone)]
struct LiveVote {
    direction: Direction,
    cast_at: DateTime<Utc>,
}

#[derive(Default)]
struct State {
    annotations: Vec<Annotation>,
    by_id: HashMap<String, usize>,
    by_key: HashSet<(String, String, String)>,
    by_item: HashMap<String, Vec<usize>>,
    votes: BTreeMap<(usize, String), LiveVote>,
    comments: Vec<Comment>,
    /// sequence number of each user's first contribution
    first_seen: HashMap<String, u64>,
    seq: u64,
    log: Option<BufWriter<File>>,
}

impl State {
    fn touch(&mut self, user: &str) {
        self.seq += 1;
        let seq = self.seq;
        self.first_seen.entry(user.to_string()).or_insert(seq);
    }

    fn append(&mut self, event: &Event) -> Result<(), CampaignError> {
        if let Some(log) = self.log.as_mut() {
            let line = serde_json::to_string(event).map_err(|e| CampaignError::Persistence(e.to_string()))?;
            writeln!(log, "{line}").and_then(|_| log.flush()).map_err(|e| CampaignError::Persistence(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub user: String,
    pub points: i64,
    pub annotations: u32,
    pub upvotes_received: u32,
    pub downvotes_received: u32,
}

/// Thread-safe store for one campaign's contributions.
///
/// All mutations take a single write lock, so each call is atomic and the
/// tallies of an annotation always equal its live votes. Reads, including
/// [`CampaignStore::export`], see a consistent snapshot.
pub struct CampaignStore {
    campaign: Campaign,
    batches: Vec<Vec<String>>,
    items: HashSet<String>,
    vocab: Arc<Vocabularies>,
    state: RwLock<State>,
}

impl CampaignStore {
    /// An in-memory store.
    pub fn new(campaign: Campaign, vocab: Arc<Vocabularies>) -> Result<Self, CampaignError> {
        campaign.validate()?;
        let batches = partition_batches(&campaign)?;
        let items = campaign.item_ids.iter().cloned().collect();
        Ok(CampaignStore { campaign, batches, items, vocab, state: RwLock::new(State::default()) })
    }

    /// A store backed by an append-only log at `log_path`. Existing entries
    /// are replayed first; new contributions are appended as they happen.
    pub fn open(campaign: Campaign, vocab: Arc<Vocabularies>, log_path: &Path) -> Result<Self, CampaignError> {
        let store = Self::new(campaign, vocab)?;
        if log_path.exists() {
            let file = File::open(log_path).map_err(|e| CampaignError::Persistence(e.to_string()))?;
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let corrupt = |message: String| CampaignError::CorruptStore { line: idx + 1, message };
                let line = line.map_err(|e| corrupt(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let event: Event = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                let mut state = store.write();
                store.apply(&mut state, event, false).map_err(|e| corrupt(e.to_string()))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(log_path)
            .map_err(|e| CampaignError::Persistence(e.to_string()))?;
        store.write().log = Some(BufWriter::new(file));
        Ok(store)
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn campaign(&self) -> &Campaign {
        &self.campaign
    }

    pub fn vocabularies(&self) -> &Vocabularies {
        &self.vocab
    }

    pub fn batches(&self) -> &[Vec<String>] {
        &self.batches
    }

    /// Items of batch `n`, counting from 1.
    pub fn batch(&self, n: usize) -> Result<&[String], CampaignError> {
        n.checked_sub(1).and_then(|i| self.batches.get(i)).map(Vec::as_slice).ok_or(CampaignError::UnknownBatch(n))
    }

    pub fn contains_item(&self, item_id: &str) -> bool {
        self.items.contains(item_id)
    }

    pub fn contains_annotation(&self, annotation_id: &str) -> bool {
        self.read().by_id.contains_key(annotation_id)
    }

    fn check_open(&self, at: DateTime<Utc>) -> Result<(), CampaignError> {
        if self.campaign.is_open(at) {
            Ok(())
        } else {
            Err(CampaignError::CampaignClosed(at))
        }
    }

    fn check_item(&self, item_id: &str) -> Result<(), CampaignError> {
        if self.items.contains(item_id) {
            Ok(())
        } else {
            Err(CampaignError::UnknownItem(item_id.to_string()))
        }
    }

    /// Validates and applies one event. `live` enforces the campaign window;
    /// log replay skips it.
    fn apply(&self, state: &mut State, event: Event, live: bool) -> Result<Applied, CampaignError> {
        match event {
            Event::Annotate { item_id, category, term_id, user, at } => {
                if live {
                    self.check_open(at)?;
                }
                self.check_item(&item_id)?;
                let term = self
                    .vocab
                    .resolve_term(&term_id, category)
                    .map_err(|_| CampaignError::UnknownTerm { category, term: term_id.clone() })?;
                let key = (item_id.clone(), term.id.clone(), user.clone());
                if state.by_key.contains(&key) {
                    return Err(CampaignError::DuplicateAnnotation { item_id, term_id: term.id.clone(), user });
                }
                let idx = state.annotations.len();
                let annotation = Annotation {
                    id: format!("{}-a{}", self.campaign.id, idx + 1),
                    item_id: item_id.clone(),
                    category,
                    term_id: term.id.clone(),
                    creator: user.clone(),
                    created_at: at,
                    upvotes: 0,
                    downvotes: 0,
                };
                let event = Event::Annotate { item_id: item_id.clone(), category, term_id: term.id.clone(), user, at };
                state.by_key.insert(key);
                state.by_id.insert(annotation.id.clone(), idx);
                state.by_item.entry(item_id).or_default().push(idx);
                state.touch(&annotation.creator);
                state.annotations.push(annotation.clone());
                Ok(Applied::Annotation(annotation, event))
            }
            Event::Vote { annotation_id, voter, direction, at } => {
                let idx = *state
                    .by_id
                    .get(&annotation_id)
                    .ok_or_else(|| CampaignError::UnknownAnnotation(annotation_id.clone()))?;
                if live {
                    self.check_open(at)?;
                }
                if state.annotations[idx].creator == voter {
                    return Err(CampaignError::SelfVote);
                }
                let previous =
                    state.votes.insert((idx, voter.clone()), LiveVote { direction, cast_at: at }).map(|v| v.direction);
                let annotation = &mut state.annotations[idx];
                match previous {
                    Some(Direction::Up) => annotation.upvotes -= 1,
                    Some(Direction::Down) => annotation.downvotes -= 1,
                    None => {}
                }
                match direction {
                    Direction::Up => annotation.upvotes += 1,
                    Direction::Down => annotation.downvotes += 1,
                }
                let tallies = Tallies { upvotes: annotation.upvotes, downvotes: annotation.downvotes };
                state.touch(&voter);
                Ok(Applied::Vote(tallies, Event::Vote { annotation_id, voter, direction, at }))
            }
            Event::Comment { item_id, user, text, at } => {
                if live {
                    self.check_open(at)?;
                }
                self.check_item(&item_id)?;
                let text = text.trim().to_string();
                if text.is_empty() {
                    return Err(CampaignError::EmptyComment);
                }
                let chars = text.chars().count();
                if chars > MAX_COMMENT_CHARS {
                    return Err(CampaignError::CommentTooLong(chars));
                }
                let comment = Comment {
                    id: format!("{}-c{}", self.campaign.id, state.comments.len() + 1),
                    item_id: item_id.clone(),
                    author: user.clone(),
                    text: text.clone(),
                    created_at: at,
                };
                state.touch(&user);
                state.comments.push(comment.clone());
                Ok(Applied::Comment(comment, Event::Comment { item_id, user, text, at }))
            }
        }
    }

    fn commit(&self, event: Event) -> Result<Applied, CampaignError> {
        let mut state = self.write();
        let applied = self.apply(&mut state, event, true)?;
        state.append(applied.event())?;
        Ok(applied)
    }

    /// Records a new tag. `term` may be a term id or label of `category`.
    pub fn submit_annotation(
        &self,
        item_id: &str,
        category: Category,
        term: &str,
        user: &str,
        at: DateTime<Utc>,
    ) -> Result<Annotation, CampaignError> {
        let event = Event::Annotate {
            item_id: item_id.to_string(),
            category,
            term_id: term.to_string(),
            user: user.to_string(),
            at,
        };
        match self.commit(event)? {
            Applied::Annotation(a, _) => Ok(a),
            _ => unreachable!("annotate event yields an annotation"),
        }
    }

    /// Casts or replaces `voter`'s vote on an annotation.
    pub fn cast_vote(
        &self,
        annotation_id: &str,
        voter: &str,
        direction: Direction,
        at: DateTime<Utc>,
    ) -> Result<Tallies, CampaignError> {
        let event = Event::Vote { annotation_id: annotation_id.to_string(), voter: voter.to_string(), direction, at };
        match self.commit(event)? {
            Applied::Vote(t, _) => Ok(t),
            _ => unreachable!("vote event yields tallies"),
        }
    }

    pub fn add_comment(
        &self,
        item_id: &str,
        user: &str,
        text: &str,
        at: DateTime<Utc>,
    ) -> Result<Comment, CampaignError> {
        let event = Event::Comment { item_id: item_id.to_string(), user: user.to_string(), text: text.to_string(), at };
        match self.commit(event)? {
            Applied::Comment(c, _) => Ok(c),
            _ => unreachable!("comment event yields a comment"),
        }
    }

    pub fn annotation(&self, annotation_id: &str) -> Option<Annotation> {
        let state = self.read();
        state.by_id.get(annotation_id).map(|i| state.annotations[*i].clone())
    }

    /// Annotations on one item, in creation order.
    pub fn item_annotations(&self, item_id: &str) -> Vec<Annotation> {
        let state = self.read();
        state
            .by_item
            .get(item_id)
            .map(|idxs| idxs.iter().map(|i| state.annotations[*i].clone()).collect())
            .unwrap_or_default()
    }

    pub fn item_comments(&self, item_id: &str) -> Vec<Comment> {
        self.read().comments.iter().filter(|c| c.item_id == item_id).cloned().collect()
    }

    /// The live vote of `voter` on an annotation, if any.
    pub fn vote_of(&self, annotation_id: &str, voter: &str) -> Option<Direction> {
        let state = self.read();
        let idx = *state.by_id.get(annotation_id)?;
        state.votes.get(&(idx, voter.to_string())).map(|v| v.direction)
    }

    pub fn votes(&self) -> Vec<super::Vote> {
        let state = self.read();
        state
            .votes
            .iter()
            .map(|((idx, voter), v)| super::Vote {
                annotation_id: state.annotations[*idx].id.clone(),
                voter: voter.clone(),
                direction: v.direction,
                cast_at: v.cast_at,
            })
            .collect()
    }

    pub fn annotation_count(&self) -> usize {
        self.read().annotations.len()
    }

    /// Users ranked by points = annotations created + upvotes received −
    /// downvotes received. Ties go to the earlier first contribution.
    pub fn leaderboard(&self) -> Vec<LeaderboardEntry> {
        let state = self.read();
        let mut entries: HashMap<&str, LeaderboardEntry> = HashMap::new();
        for user in state.first_seen.keys() {
            entries.insert(
                user,
                LeaderboardEntry {
                    user: user.clone(),
                    points: 0,
                    annotations: 0,
                    upvotes_received: 0,
                    downvotes_received: 0,
                },
            );
        }
        for a in &state.annotations {
            if let Some(e) = entries.get_mut(a.creator.as_str()) {
                e.annotations += 1;
                e.upvotes_received += a.upvotes;
                e.downvotes_received += a.downvotes;
            }
        }
        let mut out: Vec<LeaderboardEntry> = entries
            .into_values()
            .map(|mut e| {
                e.points = i64::from(e.annotations) + i64::from(e.upvotes_received) - i64::from(e.downvotes_received);
                e
            })
            .collect();
        out.sort_by(|a, b| {
            b.points.cmp(&a.points).then_with(|| state.first_seen[&a.user].cmp(&state.first_seen[&b.user]))
        });
        out
    }

    /// Consistent snapshot of all tags and comments. Tags are ordered by
    /// (item, category, term, creator); comments by item, then creation.
    pub fn export(&self) -> CampaignExport {
        let state = self.read();
        let mut tags: Vec<TagRow> = state
            .annotations
            .iter()
            .map(|a| TagRow {
                item_id: a.item_id.clone(),
                category: a.category,
                term_id: a.term_id.clone(),
                upvotes: a.upvotes,
                downvotes: a.downvotes,
                creator: a.creator.clone(),
            })
            .collect();
        tags.sort_by(|a, b| {
            (&a.item_id, a.category, &a.term_id, &a.creator).cmp(&(&b.item_id, b.category, &b.term_id, &b.creator))
        });
        let mut comments: Vec<(usize, CommentRow)> = state
            .comments
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    i,
                    CommentRow {
                        item_id: c.item_id.clone(),
                        author: c.author.clone(),
                        created_at: c.created_at,
                        text: c.text.clone(),
                    },
                )
            })
            .collect();
        comments.sort_by(|(i, a), (j, b)| a.item_id.cmp(&b.item_id).then(i.cmp(j)));
        CampaignExport { tags, comments: comments.into_iter().map(|(_, c)| c).collect() }
    }

    /// Recomputes every tally from the live votes and compares.
    pub fn tallies_consistent(&self) -> bool {
        let state = self.read();
        let mut counted = vec![(0u32, 0u32); state.annotations.len()];
        for ((idx, _), v) in &state.votes {
            match v.direction {
                Direction::Up => counted[*idx].0 += 1,
                Direction::Down => counted[*idx].1 += 1,
            }
        }
        state.annotations.iter().zip(counted).all(|(a, (up, down))| a.upvotes == up && a.downvotes == down)
    }

    /// Flushes the log, if any, to disk.
    pub fn flush(&self) -> Result<(), CampaignError> {
        let mut state = self.write();
        if let Some(log) = state.log.as_mut() {
            log.flush().map_err(|e| CampaignError::Persistence(e.to_string()))?;
            log.get_ref().sync_all().map_err(|e| CampaignError::Persistence(e.to_string()))?;
        }
        Ok(())
    }
}

enum Applied {
    Annotation(Annotation, Event),
    Vote(Tallies, Event),
    Comment(Comment, Event),
}

impl Applied {
    fn event(&self) -> &Event {
        match self {
            Applied::Annotation(_, e) | Applied::Vote(_, e) | Applied::Comment(_, e) => e,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::builtin_vocabularies;
    use chrono::{Duration, TimeZone};

    fn start() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2023, 3, 1, 0, 0, 0).unwrap()
    }

    fn store() -> CampaignStore {
        let items = (1..=8).map(|i| format!("item{i}")).collect();
        let c = Campaign::new("music", "Music", items, start(), start() + Duration::days(18)).unwrap();
        CampaignStore::new(c, Arc::new(builtin_vocabularies())).unwrap()
    }

    fn t(min: i64) -> DateTime<Utc> {
        start() + Duration::minutes(min)
    }

    #[test]
    fn submit_and_duplicates() {
        let s = store();
        let a = s.submit_annotation("item1", Category::Genre, "Rock", "alice", t(1)).unwrap();
        assert_eq!((a.upvotes, a.downvotes, a.term_id.as_str()), (0, 0, "rock"));
        assert!(matches!(
            s.submit_annotation("item1", Category::Genre, "rock", "alice", t(2)),
            Err(CampaignError::DuplicateAnnotation { .. })
        ));
        let b = s.submit_annotation("item1", Category::Genre, "Rock", "bob", t(3)).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(s.item_annotations("item1").len(), 2);
    }

    #[test]
    fn submit_errors() {
        let s = store();
        assert!(matches!(
            s.submit_annotation("nope", Category::Genre, "Rock", "a", t(1)),
            Err(CampaignError::UnknownItem(_))
        ));
        assert!(matches!(
            s.submit_annotation("item1", Category::Instrument, "Trumpet", "a", t(1)),
            Err(CampaignError::UnknownTerm { .. })
        ));
        assert!(matches!(
            s.submit_annotation("item1", Category::Genre, "Rock", "a", start() - Duration::seconds(1)),
            Err(CampaignError::CampaignClosed(_))
        ));
        assert!(matches!(
            s.submit_annotation("item1", Category::Genre, "Rock", "a", start() + Duration::days(19)),
            Err(CampaignError::CampaignClosed(_))
        ));
    }

    #[test]
    fn vote_replacement_and_self_vote() {
        let s = store();
        let a = s.submit_annotation("item1", Category::Genre, "Rock", "alice", t(1)).unwrap();
        assert_eq!(s.cast_vote(&a.id, "bob", Direction::Up, t(2)).unwrap(), Tallies { upvotes: 1, downvotes: 0 });
        assert_eq!(s.cast_vote(&a.id, "bob", Direction::Down, t(3)).unwrap(), Tallies { upvotes: 0, downvotes: 1 });
        assert_eq!(s.cast_vote(&a.id, "bob", Direction::Down, t(4)).unwrap(), Tallies { upvotes: 0, downvotes: 1 });
        assert_eq!(s.cast_vote(&a.id, "alice", Direction::Up, t(5)), Err(CampaignError::SelfVote));
        assert!(matches!(s.cast_vote("zzz", "bob", Direction::Up, t(5)), Err(CampaignError::UnknownAnnotation(_))));
        assert_eq!(s.vote_of(&a.id, "bob"), Some(Direction::Down));
        assert!(s.tallies_consistent());
    }

    #[test]
    fn comments() {
        let s = store();
        let c = s.add_comment("item1", "alice", "  sounds like a funeral march ", t(1)).unwrap();
        assert_eq!(c.text, "sounds like a funeral march");
        assert_eq!(s.item_comments("item1"), vec![c]);
        assert_eq!(s.add_comment("item1", "alice", " \n\t", t(2)), Err(CampaignError::EmptyComment));
        assert!(matches!(s.add_comment("nope", "alice", "hi", t(2)), Err(CampaignError::UnknownItem(_))));
        let long = "x".repeat(MAX_COMMENT_CHARS + 1);
        assert!(matches!(s.add_comment("item1", "alice", &long, t(2)), Err(CampaignError::CommentTooLong(_))));
        assert!(s.add_comment("item1", "alice", &"é".repeat(MAX_COMMENT_CHARS), t(2)).is_ok());
    }

    #[test]
    fn leaderboard_scoring_and_ties() {
        let s = store();
        assert!(s.leaderboard().is_empty());
        let ids: Vec<String> = ["rock", "pop", "jazz"]
            .iter()
            .map(|term| s.submit_annotation("item1", Category::Genre, term, "alice", t(1)).unwrap().id)
            .collect();
        for voter in ["v1", "v2", "v3"] {
            s.cast_vote(&ids[0], voter, Direction::Up, t(2)).unwrap();
        }
        s.cast_vote(&ids[1], "v1", Direction::Up, t(3)).unwrap();
        s.cast_vote(&ids[2], "v2", Direction::Down, t(3)).unwrap();
        let board = s.leaderboard();
        assert_eq!(board[0].user, "alice");
        assert_eq!(board[0].points, 6);
        // v1, v2, v3 tie at zero; first contribution order decides
        let rest: Vec<&str> = board[1..].iter().map(|e| e.user.as_str()).collect();
        assert_eq!(rest, ["v1", "v2", "v3"]);
    }

    #[test]
    fn leaderboard_tie_between_creators() {
        let s = store();
        s.submit_annotation("item2", Category::Genre, "pop", "zed", t(1)).unwrap();
        s.submit_annotation("item1", Category::Genre, "rock", "amy", t(2)).unwrap();
        let board = s.leaderboard();
        assert_eq!(board.iter().map(|e| e.user.as_str()).collect::<Vec<_>>(), ["zed", "amy"]);
    }

    #[test]
    fn export_ordering() {
        let s = store();
        assert_eq!(s.export(), CampaignExport::default());
        s.submit_annotation("item2", Category::Genre, "rock", "bob", t(1)).unwrap();
        s.submit_annotation("item1", Category::Genre, "rock", "bob", t(1)).unwrap();
        s.add_comment("item1", "alice", "nice", t(2)).unwrap();
        let e = s.export();
        assert_eq!(e.tags.len(), 2);
        assert_eq!(e.tags[0].item_id, "item1");
        assert_eq!(e.comments.len(), 1);
    }

    #[test]
    fn batches_are_one_based() {
        let s = store();
        assert_eq!(s.batch(1).unwrap().len(), 1);
        assert!(s.batch(0).is_err());
        assert_eq!(s.batch(9), Err(CampaignError::UnknownBatch(9)));
    }

    #[test]
    fn log_replay_rebuilds_state() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("campaign.log");
        let vocab = Arc::new(builtin_vocabularies());
        let items: Vec<String> = (1..=8).map(|i| format!("item{i}")).collect();
        let c = Campaign::new("music", "Music", items, start(), start() + Duration::days(18)).unwrap();
        {
            let s = CampaignStore::open(c.clone(), vocab.clone(), &log).unwrap();
            let a = s.submit_annotation("item1", Category::Emotion, "Joy", "alice", t(1)).unwrap();
            s.cast_vote(&a.id, "bob", Direction::Up, t(2)).unwrap();
            s.cast_vote(&a.id, "bob", Direction::Down, t(3)).unwrap();
            s.add_comment("item1", "bob", "upbeat", t(4)).unwrap();
            s.flush().unwrap();
        }
        let reopened = CampaignStore::open(c.clone(), vocab.clone(), &log).unwrap();
        let e = reopened.export();
        assert_eq!((e.tags[0].upvotes, e.tags[0].downvotes), (0, 1));
        assert_eq!(e.comments[0].text, "upbeat");
        // ids keep counting from where the log left off
        let b = reopened.submit_annotation("item2", Category::Emotion, "Joy", "alice", t(5)).unwrap();
        assert_eq!(b.id, "music-a2");

        std::fs::write(&log, "{\"event\":\"vote\"}\n").unwrap();
        assert!(matches!(CampaignStore::open(c, vocab, &log), Err(CampaignError::CorruptStore { line: 1, .. })));
    }

    #[test]
    fn concurrent_votes_keep_tallies_consistent() {
        let s = Arc::new(store());
        let ids: Vec<String> = (1..=4)
            .map(|i| s.submit_annotation(&format!("item{i}"), Category::Genre, "rock", "creator", t(1)).unwrap().id)
            .collect();
        let handles: Vec<_> = (0..8)
            .map(|w| {
                let s = Arc::clone(&s);
                let ids = ids.clone();
                std::thread::spawn(move || {
                    for round in 0..200 {
                        let id = &ids[(w + round) % ids.len()];
                        let dir = if (w * 7 + round) % 3 == 0 { Direction::Down } else { Direction::Up };
                        s.cast_vote(id, &format!("voter{}", round % 5 + w), dir, t(2)).unwrap();
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(s.tallies_consistent());
    }
}
