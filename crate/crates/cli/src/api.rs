//! HTTP/JSON service over the campaign stores.
//!
//! Successful responses wrap their payload as `{"data": ...}`; failures are
//! `{"error": {"code": ..., "message": ...}}` where `code` is the name of the
//! underlying error variant. The caller identifies itself with a `user`
//! field in the body or an `X-User-Id` header.

use std::collections::{BTreeMap, HashMap};
use std::future::Future;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use crowdkb_core::{
    Annotation, CampaignError, CampaignStore, Category, Comment, Direction, LeaderboardEntry, Term, TrackRecord,
    Vocabularies,
};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::datadir::DataDir;
use crate::error::CliError;

pub const USER_HEADER: &str = "x-user-id";

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum ApiError {
    Campaign(CampaignError),
    UnknownCampaign(String),
    BadRequest(String),
    NoSuchRoute(String),
}

/// HTTP status for every store error. Kept exhaustive so a new variant
/// cannot ship without a status.
pub fn campaign_status(e: &CampaignError) -> StatusCode {
    match e {
        CampaignError::UnknownItem(_) | CampaignError::UnknownAnnotation(_) | CampaignError::UnknownBatch(_) => {
            StatusCode::NOT_FOUND
        }
        CampaignError::SelfVote | CampaignError::DuplicateAnnotation { .. } => StatusCode::CONFLICT,
        CampaignError::UnknownTerm { .. }
        | CampaignError::EmptyComment
        | CampaignError::CommentTooLong(_)
        | CampaignError::InvalidCampaign(_)
        | CampaignError::TooFewItems { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        CampaignError::CampaignClosed(_) => StatusCode::FORBIDDEN,
        CampaignError::CorruptStore { .. } | CampaignError::Persistence(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Campaign(e) => campaign_status(e),
            ApiError::UnknownCampaign(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NoSuchRoute(_) => StatusCode::NOT_FOUND,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Campaign(e) => e.code(),
            ApiError::UnknownCampaign(_) => "UnknownCampaign",
            ApiError::BadRequest(_) => "BadRequest",
            ApiError::NoSuchRoute(_) => "NoSuchRoute",
        }
    }

    pub fn message(&self) -> String {
        match self {
            ApiError::Campaign(e) => e.to_string(),
            ApiError::UnknownCampaign(id) => format!("unknown campaign '{id}'"),
            ApiError::BadRequest(m) => m.clone(),
            ApiError::NoSuchRoute(path) => format!("no endpoint at {path}"),
        }
    }
}

impl From<CampaignError> for ApiError {
    fn from(e: CampaignError) -> Self {
        ApiError::Campaign(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": ErrorBody { code: self.code(), message: self.message() } });
        (self.status(), Json(body)).into_response()
    }
}

fn data<T: Serialize>(status: StatusCode, value: T) -> Response {
    (status, Json(serde_json::json!({ "data": value }))).into_response()
}

type ApiResult = Result<Response, ApiError>;

/// Everything the handlers share: the catalog, one store per campaign and
/// the clock that stamps contributions.
pub struct AppState {
    vocab: Arc<Vocabularies>,
    catalog: HashMap<String, TrackRecord>,
    stores: BTreeMap<String, Arc<CampaignStore>>,
    item_campaigns: HashMap<String, Vec<String>>,
    clock: Clock,
}

impl AppState {
    pub fn new(vocab: Arc<Vocabularies>, catalog: Vec<TrackRecord>, stores: Vec<CampaignStore>) -> Self {
        let mut item_campaigns: HashMap<String, Vec<String>> = HashMap::new();
        let mut by_id = BTreeMap::new();
        for store in stores {
            let id = store.campaign().id.clone();
            for item in &store.campaign().item_ids {
                item_campaigns.entry(item.clone()).or_default().push(id.clone());
            }
            by_id.insert(id, Arc::new(store));
        }
        for ids in item_campaigns.values_mut() {
            ids.sort();
        }
        AppState {
            vocab,
            catalog: catalog.into_iter().map(|r| (r.europeana_id.clone(), r)).collect(),
            stores: by_id,
            item_campaigns,
            clock: Arc::new(Utc::now),
        }
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    /// Loads the catalog and every campaign of a data directory.
    pub fn load(dir: &DataDir, vocab: Arc<Vocabularies>) -> Result<Self, CliError> {
        let catalog = if dir.catalog_path().exists() { dir.load_catalog(&vocab)? } else { Vec::new() };
        let stores = dir
            .load_campaigns()?
            .into_iter()
            .map(|c| dir.open_store(c, vocab.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AppState::new(vocab, catalog, stores))
    }

    pub fn stores(&self) -> impl Iterator<Item = &Arc<CampaignStore>> {
        self.stores.values()
    }

    pub fn flush(&self) -> Result<(), CampaignError> {
        self.stores.values().try_for_each(|s| s.flush())
    }

    fn store(&self, id: &str) -> Result<&Arc<CampaignStore>, ApiError> {
        self.stores.get(id).ok_or_else(|| ApiError::UnknownCampaign(id.to_string()))
    }

    fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    /// The campaign an item-level write goes to: the named one, else the
    /// only campaign holding the item, else the only open one among them.
    fn store_for_item(&self, item_id: &str, campaign_id: Option<&str>) -> Result<&Arc<CampaignStore>, ApiError> {
        if let Some(id) = campaign_id {
            return self.store(id);
        }
        let ids = self
            .item_campaigns
            .get(item_id)
            .ok_or_else(|| ApiError::Campaign(CampaignError::UnknownItem(item_id.to_string())))?;
        if let [only] = ids.as_slice() {
            return self.store(only);
        }
        let now = self.now();
        let open: Vec<&String> = ids.iter().filter(|id| self.stores[*id].campaign().is_open(now)).collect();
        match open.as_slice() {
            [only] => self.store(only),
            _ => Err(ApiError::BadRequest(format!("item '{item_id}' belongs to several campaigns; pass campaign_id"))),
        }
    }

    fn store_for_annotation(&self, annotation_id: &str) -> Result<&Arc<CampaignStore>, ApiError> {
        self.stores
            .values()
            .find(|s| s.contains_annotation(annotation_id))
            .ok_or_else(|| ApiError::Campaign(CampaignError::UnknownAnnotation(annotation_id.to_string())))
    }
}

fn caller(body_user: Option<String>, headers: &HeaderMap) -> Result<String, ApiError> {
    body_user
        .filter(|u| !u.trim().is_empty())
        .or_else(|| headers.get(USER_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string))
        .map(|u| u.trim().to_string())
        .filter(|u| !u.is_empty())
        .ok_or_else(|| ApiError::BadRequest("missing user: set the 'user' field or the X-User-Id header".into()))
}

#[derive(Serialize)]
struct CampaignView<'a> {
    id: &'a str,
    title: &'a str,
    instructions: &'a str,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
    open: bool,
    item_count: usize,
    batch_count: usize,
    batch_sizes: Vec<usize>,
}

#[derive(Serialize)]
struct AnnotationView {
    #[serde(flatten)]
    annotation: Annotation,
    label: Option<String>,
    score: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    my_vote: Option<Direction>,
}

#[derive(Serialize)]
struct ItemView<'a> {
    europeana_id: &'a str,
    batch: usize,
    title: Option<&'a str>,
    composer: Option<&'a str>,
    year: Option<i32>,
    duration_ms: Option<u64>,
    audio_url: Option<&'a str>,
    annotations: Vec<AnnotationView>,
    comments: Vec<Comment>,
}

async fn list_campaigns(State(state): State<Arc<AppState>>) -> ApiResult {
    let now = state.now();
    let views: Vec<CampaignView> = state
        .stores
        .values()
        .map(|s| {
            let c = s.campaign();
            CampaignView {
                id: &c.id,
                title: &c.title,
                instructions: &c.instructions,
                start: c.start,
                end: c.end,
                open: c.is_open(now),
                item_count: c.item_ids.len(),
                batch_count: c.batch_count,
                batch_sizes: s.batches().iter().map(Vec::len).collect(),
            }
        })
        .collect();
    Ok(data(StatusCode::OK, views))
}

#[derive(Deserialize, Default)]
struct ViewerQuery {
    user: Option<String>,
}

fn annotation_view(store: &CampaignStore, vocab: &Vocabularies, a: Annotation, viewer: Option<&str>) -> AnnotationView {
    let label = vocab.get(a.category).get(&a.term_id).map(|t| t.label.clone());
    let my_vote = viewer.and_then(|u| store.vote_of(&a.id, u));
    let score = i64::from(a.upvotes) - i64::from(a.downvotes);
    AnnotationView { annotation: a, label, score, my_vote }
}

async fn batch_items(
    State(state): State<Arc<AppState>>,
    path: Result<Path<(String, usize)>, PathRejection>,
    query: Result<Query<ViewerQuery>, QueryRejection>,
    headers: HeaderMap,
) -> ApiResult {
    let Path((id, n)) = path?;
    let Query(viewer) = query?;
    let viewer = viewer.user.or_else(|| headers.get(USER_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string));
    let store = state.store(&id)?;
    let items = store.batch(n)?;
    let views: Vec<ItemView> = items
        .iter()
        .map(|item| {
            let record = state.catalog.get(item);
            let text = |f: fn(&TrackRecord) -> &Option<String>| record.and_then(|r| f(r).as_deref());
            ItemView {
                europeana_id: item,
                batch: n,
                title: text(|r| &r.title),
                composer: text(|r| &r.composer),
                year: record.and_then(|r| r.year),
                duration_ms: record.and_then(|r| r.duration_ms),
                audio_url: text(|r| &r.audio_url),
                annotations: store
                    .item_annotations(item)
                    .into_iter()
                    .map(|a| annotation_view(store, &state.vocab, a, viewer.as_deref()))
                    .collect(),
                comments: store.item_comments(item),
            }
        })
        .collect();
    Ok(data(StatusCode::OK, views))
}

#[derive(Deserialize)]
struct AnnotationBody {
    term_id: String,
    category: String,
    user: Option<String>,
    campaign_id: Option<String>,
}

async fn post_annotation(
    State(state): State<Arc<AppState>>,
    Path(item_id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<AnnotationBody>, JsonRejection>,
) -> ApiResult {
    let Json(body) = body?;
    let user = caller(body.user, &headers)?;
    let category: Category =
        body.category.parse().map_err(|e: crowdkb_core::VocabularyError| ApiError::BadRequest(e.to_string()))?;
    let store = state.store_for_item(&item_id, body.campaign_id.as_deref())?;
    let annotation = store.submit_annotation(&item_id, category, &body.term_id, &user, state.now())?;
    Ok(data(StatusCode::CREATED, annotation_view(store, &state.vocab, annotation, Some(&user))))
}

#[derive(Deserialize)]
struct VoteBody {
    user: Option<String>,
    direction: Direction,
}

#[derive(Serialize)]
struct VoteView {
    annotation_id: String,
    voter: String,
    direction: Direction,
    upvotes: u32,
    downvotes: u32,
    score: i64,
}

async fn post_vote(
    State(state): State<Arc<AppState>>,
    Path(annotation_id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<VoteBody>, JsonRejection>,
) -> ApiResult {
    let Json(body) = body?;
    let user = caller(body.user, &headers)?;
    let store = state.store_for_annotation(&annotation_id)?;
    let tallies = store.cast_vote(&annotation_id, &user, body.direction, state.now())?;
    Ok(data(
        StatusCode::OK,
        VoteView {
            annotation_id,
            voter: user,
            direction: body.direction,
            upvotes: tallies.upvotes,
            downvotes: tallies.downvotes,
            score: i64::from(tallies.upvotes) - i64::from(tallies.downvotes),
        },
    ))
}

#[derive(Deserialize)]
struct CommentBody {
    text: String,
    user: Option<String>,
    campaign_id: Option<String>,
}

async fn post_comment(
    State(state): State<Arc<AppState>>,
    Path(item_id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<CommentBody>, JsonRejection>,
) -> ApiResult {
    let Json(body) = body?;
    let user = caller(body.user, &headers)?;
    let store = state.store_for_item(&item_id, body.campaign_id.as_deref())?;
    let comment = store.add_comment(&item_id, &user, &body.text, state.now())?;
    Ok(data(StatusCode::CREATED, comment))
}

#[derive(Serialize)]
struct RankedEntry {
    rank: usize,
    #[serde(flatten)]
    entry: LeaderboardEntry,
}

async fn leaderboard(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let entries: Vec<RankedEntry> = state
        .store(&id)?
        .leaderboard()
        .into_iter()
        .enumerate()
        .map(|(i, entry)| RankedEntry { rank: i + 1, entry })
        .collect();
    Ok(data(StatusCode::OK, entries))
}

#[derive(Deserialize, Default)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<ExportQuery>, QueryRejection>,
) -> ApiResult {
    let Query(q) = query?;
    let snapshot = state.store(&id)?.export();
    match q.format.as_deref() {
        None | Some("json") => Ok(data(StatusCode::OK, snapshot)),
        Some("csv") => {
            Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], snapshot.to_csv_string()).into_response())
        }
        Some(other) => Err(ApiError::BadRequest(format!("unsupported format '{other}'; use json or csv"))),
    }
}

async fn vocabularies(State(state): State<Arc<AppState>>) -> ApiResult {
    let lists: BTreeMap<Category, &[Term]> = Category::ALL.iter().map(|c| (*c, state.vocab.get(*c).terms())).collect();
    Ok(data(StatusCode::OK, lists))
}

async fn not_found(uri: axum::http::Uri) -> ApiError {
    ApiError::NoSuchRoute(uri.path().to_string())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/campaigns", get(list_campaigns))
        .route("/campaigns/{id}/batches/{n}/items", get(batch_items))
        .route("/campaigns/{id}/leaderboard", get(leaderboard))
        .route("/campaigns/{id}/export", get(export))
        .route("/items/{id}/annotations", post(post_annotation))
        .route("/items/{id}/comments", post(post_comment))
        .route("/annotations/{id}/votes", post(post_vote))
        .route("/vocabularies", get(vocabularies))
        .fallback(not_found)
        .with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub host: IpAddr,
    pub port: u16,
    pub data_dir: PathBuf,
}

/// Loads the stores and binds the listener. Port 0 picks a free port.
pub async fn bind(config: &ServeConfig, vocab: Arc<Vocabularies>) -> Result<(TcpListener, Arc<AppState>), CliError> {
    let state = Arc::new(AppState::load(&DataDir::new(&config.data_dir), vocab)?);
    let addr = SocketAddr::new(config.host, config.port);
    let listener = TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => CliError::domain("PortInUse", format!("{addr} is already in use")),
        _ => CliError::domain("Io", format!("cannot bind {addr}: {e}")),
    })?;
    Ok((listener, state))
}

/// Serves until `shutdown` resolves, then flushes every store.
pub async fn run(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), CliError> {
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| CliError::domain("Io", e.to_string()))?;
    state.flush()?;
    Ok(())
}
