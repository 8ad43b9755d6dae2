//! Subcommand definitions and their implementations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Duration, TimeZone, Utc};
use clap::{Args, Parser, Subcommand};
use crowdkb_core::analytics::write_pairs_report;
use crowdkb_core::catalog::Field;
use crowdkb_core::graph::{default_axioms, ns, read_graph, write_graph, FixtureResolver, ResolveReport};
use crowdkb_core::query::parse_query_with_prefixes;
use crowdkb_core::{
    apply_curation, build_graph, builtin_vocabularies, evaluate_query, export_enriched, frequent_pairs,
    integrate_external, load_dataset, materialize_axioms, moderate_campaign, recommend, simulate_annotators,
    synthetic_catalog, track_sentiment, transactions, AnnotatorBehavior, Campaign, CampaignExport, CampaignStore,
    CurationPolicy, GroundTruth, Iri, ModerationPolicy, SentimentLexicon, SimilarityWeights, TrackRecord, Vocabularies,
};

use crate::api::{self, ServeConfig};
use crate::datadir::{check_campaign_id, DataDir};
use crate::error::CliError;

/// Crowd-enriched music knowledge base pipeline and annotation service.
#[derive(Debug, Parser)]
#[command(name = "crowdkb", version)]
pub struct Cli {
    /// Term overrides, one `category,id,label,uri` line per term.
    #[arg(long, global = true, value_name = "FILE")]
    pub vocabulary: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curate a raw metadata file into a catalog.
    Ingest(IngestArgs),
    /// Write a seeded synthetic catalog.
    SynthCatalog(SynthCatalogArgs),
    /// Create or simulate an annotation campaign.
    #[command(subcommand)]
    Campaign(CampaignCommand),
    /// Filter raw campaign tags by votes and merge them into the catalog.
    Moderate(ModerateArgs),
    /// Compile an enriched catalog into a triple graph.
    BuildKg(BuildKgArgs),
    /// Run a graph-pattern query against a triple file.
    Query(QueryArgs),
    /// Report frequently co-occurring tag pairs.
    Mine(MineArgs),
    /// List the tracks most similar to a seed track.
    Recommend(RecommendArgs),
    /// Score track comments with a sentiment lexicon.
    Sentiment(SentimentArgs),
    /// Write the raw contributions of a stored campaign.
    Export(ExportArgs),
    /// Serve the annotation API.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum CampaignCommand {
    /// Register a campaign over the data directory's catalog.
    Init(InitArgs),
    /// Run seeded synthetic annotators and write the export.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to list rejected records with their reasons.
    #[arg(long)]
    pub rejected: Option<PathBuf>,
    #[arg(long, default_value_t = 360_000)]
    pub max_duration_ms: u64,
    /// Required fields, comma separated (default europeana_id,title,composer,duration_ms).
    #[arg(long, value_delimiter = ',')]
    pub require: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SynthCatalogArgs {
    #[arg(long, default_value_t = 854)]
    pub items: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InitArgs {
    #[arg(long, env = "DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub title: String,
    /// Catalog to copy into the data directory first.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Opening time, RFC 3339 (default: today 00:00 UTC).
    #[arg(long)]
    pub start: Option<DateTime<Utc>>,
    #[arg(long, default_value_t = 18)]
    pub days: i64,
    #[arg(long, default_value_t = 8)]
    pub batches: usize,
    #[arg(long, default_value = "")]
    pub instructions: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub annotators: usize,
    #[arg(long)]
    pub seed: u64,
    /// Export CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Catalog for an in-memory campaign.
    #[arg(long, required_unless_present = "data_dir", conflicts_with = "data_dir")]
    pub catalog: Option<PathBuf>,
    /// Simulate into a campaign registered with `campaign init`.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value = "music-enrichment")]
    pub campaign_id: String,
    /// Opening time of an in-memory campaign, RFC 3339.
    #[arg(long, default_value = "2022-11-14T00:00:00Z")]
    pub start: DateTime<Utc>,
    /// JSON file overriding annotator behavior fields.
    #[arg(long)]
    pub behavior: Option<PathBuf>,
    /// Chance that an annotator perceives a wrong term.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModerateArgs {
    #[arg(long)]
    pub catalog: PathBuf,
    /// Campaign export CSV.
    #[arg(long)]
    pub export: PathBuf,
    /// Enriched catalog to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-category kept/dropped counts.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildKgArgs {
    /// Enriched catalog.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Skip materializing the derived classes.
    #[arg(long)]
    pub no_axioms: bool,
    /// Fixture of external facts, `entity,predicate,object` per line.
    #[arg(long)]
    pub resolver: Option<PathBuf>,
    /// Provenance IRI recorded for resolved facts.
    #[arg(long, default_value = "https://www.wikidata.org/", requires = "resolver")]
    pub source: String,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Read the query from a file.
    #[arg(short = 'f', long = "file", conflicts_with = "text")]
    pub file: Option<PathBuf>,
    /// Query text.
    #[arg(required_unless_present = "file")]
    pub text: Option<String>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Enriched catalog.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub min_support: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Enriched catalog.
    #[arg(long)]
    pub input: PathBuf,
    /// EuropeanaID of the seed track.
    #[arg(long)]
    pub seed: String,
    #[arg(short = 'k', long, default_value_t = 10)]
    pub k: usize,
    /// Genre, emotion and instrument weights summing to 1.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SentimentArgs {
    /// Enriched catalog.
    #[arg(long)]
    pub input: PathBuf,
    /// Lexicon with `word,valence` lines.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, env = "DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub campaign_id: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Write JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, env = "DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
}

/// Where command output goes; tests pass in-memory buffers.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(CliError::output)
    };
}

fn load_vocab(path: Option<&Path>) -> Result<Vocabularies, CliError> {
    let mut vocab = builtin_vocabularies();
    if let Some(path) = path {
        vocab.load_overrides(path)?;
    }
    Ok(vocab)
}

/// Loads a catalog, failing on the first bad row.
fn load_records(path: &Path, vocab: &Vocabularies) -> Result<Vec<TrackRecord>, CliError> {
    let loaded = load_dataset(path, vocab)?;
    match loaded.errors.first() {
        Some(bad) => {
            Err(CliError::domain(bad.error.code(), format!("{} line {}: {}", path.display(), bad.line, bad.error)))
        }
        None => Ok(loaded.records),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn execute(cli: Cli, io: &mut Io<'_>) -> Result<(), CliError> {
    let vocab = load_vocab(cli.vocabulary.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(a, &vocab, io),
        Command::SynthCatalog(a) => synth_catalog(a, &vocab, io),
        Command::Campaign(CampaignCommand::Init(a)) => campaign_init(a, &vocab, io),
        Command::Campaign(CampaignCommand::Simulate(a)) => campaign_simulate(a, vocab, io),
        Command::Moderate(a) => moderate(a, &vocab, io),
        Command::BuildKg(a) => build_kg(a, &vocab, io),
        Command::Query(a) => query(a, io),
        Command::Mine(a) => mine(a, &vocab, io),
        Command::Recommend(a) => recommend_cmd(a, &vocab, io),
        Command::Sentiment(a) => sentiment(a, &vocab, io),
        Command::Export(a) => export(a, vocab, io),
        Command::Serve(a) => serve(a, vocab, io),
    }
}

fn ingest(a: IngestArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let mut policy = CurationPolicy { max_duration_ms: a.max_duration_ms, ..CurationPolicy::default() };
    if let Some(fields) = &a.require {
        policy.required_fields = fields.iter().map(|f| f.parse::<Field>()).collect::<Result<_, _>>()?;
    }
    policy.validate()?;
    let loaded = load_dataset(&a.input, vocab)?;
    for bad in &loaded.errors {
        say!(io.err, "warning[{}]: line {}: {}", bad.error.code(), bad.line, bad.error)?;
    }
    let read = loaded.records.len();
    let outcome = apply_curation(loaded.records, &policy);
    export_enriched(&outcome.kept, vocab, &a.out)?;
    if let Some(path) = &a.rejected {
        let mut w = create(path)?;
        say!(w, "EuropeanaID,reasons")?;
        for r in &outcome.rejected {
            let reasons: Vec<String> = r.reasons.iter().map(|x| x.code()).collect();
            say!(w, "{},{}", csv_field(&r.record.europeana_id), csv_field(&reasons.join(";")))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    say!(
        io.out,
        "read {read} records ({} bad rows), kept {}, rejected {}",
        loaded.errors.len(),
        outcome.kept.len(),
        outcome.rejected.len()
    )
}

/// Quotes a CSV field when it contains a delimiter, quote or line break.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn synth_catalog(a: SynthCatalogArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let records = synthetic_catalog(a.items, a.seed);
    export_enriched(&records, vocab, &a.out)?;
    say!(io.out, "wrote {} synthetic records to {}", records.len(), a.out.display())
}

fn campaign_init(a: InitArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    check_campaign_id(&a.id)?;
    let dir = DataDir::new(&a.data_dir);
    fs::create_dir_all(dir.root()).map_err(|e| CliError::io(dir.root(), e))?;
    if let Some(src) = &a.catalog {
        let records = load_records(src, vocab)?;
        export_enriched(&records, vocab, &dir.catalog_path())?;
    }
    let records = dir.load_catalog(vocab)?;
    let start = a.start.unwrap_or_else(|| {
        let today = Utc::now().date_naive();
        Utc.from_utc_datetime(&today.and_hms_opt(0, 0, 0).expect("midnight exists"))
    });
    let items = records.iter().map(|r| r.europeana_id.clone()).collect();
    let campaign = Campaign::new(&a.id, &a.title, items, start, start + Duration::days(a.days))?
        .with_batch_count(a.batches)?
        .with_instructions(a.instructions);
    dir.save_campaign(&campaign)?;
    say!(
        io.out,
        "campaign {} with {} items in {} batches, open {} to {}",
        campaign.id,
        campaign.item_ids.len(),
        campaign.batch_count,
        campaign.start.to_rfc3339(),
        campaign.end.to_rfc3339()
    )
}

fn load_behavior(a: &SimulateArgs) -> Result<AnnotatorBehavior, CliError> {
    let mut behavior = match &a.behavior {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::domain("InvalidBehavior", format!("{}: {e}", path.display())))?
        }
        None => AnnotatorBehavior::default(),
    };
    if let Some(noise) = a.noise {
        behavior.noise = noise;
    }
    behavior.validate()?;
    Ok(behavior)
}

fn campaign_simulate(a: SimulateArgs, vocab: Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let behavior = load_behavior(&a)?;
    let vocab = Arc::new(vocab);
    let store = match &a.data_dir {
        Some(root) => {
            let dir = DataDir::new(root);
            let store = dir.open_store(dir.load_campaign(&a.campaign_id)?, vocab.clone())?;
            if store.annotation_count() > 0 {
                return Err(CliError::domain(
                    "InvalidCampaign",
                    format!("campaign '{}' already has contributions", a.campaign_id),
                ));
            }
            store
        }
        None => {
            let path = a.catalog.as_deref().ok_or_else(|| CliError::usage("--catalog or --data-dir is required"))?;
            let items = load_records(path, &vocab)?.into_iter().map(|r| r.europeana_id).collect();
            let campaign =
                Campaign::new(&a.campaign_id, "Simulated campaign", items, a.start, a.start + Duration::days(18))?;
            CampaignStore::new(campaign, vocab.clone())?
        }
    };
    let truth = GroundTruth::plant(&store.campaign().item_ids, a.seed);
    let s = simulate_annotators(&store, &truth, a.annotators, a.seed, &behavior)?;
    store.flush()?;
    let mut w = create(&a.out)?;
    store.export().write_csv(&mut w)?;
    w.flush().map_err(|e| CliError::io(&a.out, e))?;
    say!(
        io.out,
        "{} annotators, {} visits: {} annotations, {} upvotes, {} downvotes, {} comments",
        s.annotators,
        s.visits,
        s.annotations,
        s.upvotes,
        s.downvotes,
        s.comments
    )
}

fn moderate(a: ModerateArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let records = load_records(&a.catalog, vocab)?;
    let file = File::open(&a.export).map_err(|e| CliError::io(&a.export, e))?;
    let export = CampaignExport::read_csv(file)?;
    let (enriched, report) = moderate_campaign(&export, &ModerationPolicy::default(), records, vocab)?;
    export_enriched(&enriched, vocab, &a.out)?;
    if let Some(path) = &a.report {
        let mut w = create(path)?;
        report.write_csv(&mut w)?;
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    let mut line = String::new();
    for category in [crowdkb_core::Category::Genre, crowdkb_core::Category::Emotion, crowdkb_core::Category::Instrument]
    {
        let c = report.counts(category);
        line.push_str(&format!("{category} {}/{}, ", c.kept, c.kept + c.dropped));
    }
    say!(io.out, "kept {line}comments {}", report.comments)
}

fn build_kg(a: BuildKgArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let records = load_records(&a.input, vocab)?;
    let mut graph = build_graph(&records, vocab)?;
    if let Some(path) = &a.resolver {
        let resolver = FixtureResolver::load(path, Iri::new(&a.source)?)?;
        let composers = graph.instances_of(&ns("Composer"));
        let (extended, reports) = integrate_external(&graph, &resolver, &composers);
        let added: usize = reports
            .iter()
            .map(|r| match r {
                ResolveReport::Added { facts, .. } => *facts,
                _ => 0,
            })
            .sum();
        let resolved = reports.iter().filter(|r| matches!(r, ResolveReport::Added { .. })).count();
        say!(io.err, "resolved {resolved} of {} composers, {added} facts", composers.len())?;
        graph = extended;
    }
    if !a.no_axioms {
        graph = materialize_axioms(&graph, &default_axioms(vocab)?)?;
    }
    write_graph(&graph, &a.out)?;
    say!(io.out, "wrote {} triples to {}", graph.len(), a.out.display())
}

fn query(a: QueryArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let text = match (&a.file, &a.text) {
        (Some(path), _) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        (None, Some(text)) => text.clone(),
        (None, None) => return Err(CliError::usage("pass query text or -f FILE")),
    };
    let graph = read_graph(&a.graph)?;
    let ast = parse_query_with_prefixes(&text, graph.prefixes())?;
    let table = evaluate_query(&ast, &graph);
    io.out.write_all(table.to_tsv(graph.prefixes()).as_bytes()).map_err(CliError::output)
}

fn mine(a: MineArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let records = load_records(&a.input, vocab)?;
    let pairs = frequent_pairs(&transactions(&records), a.min_support)?;
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            write_pairs_report(&pairs, vocab, &mut w)?;
            w.flush().map_err(|e| CliError::io(path, e))?;
            say!(io.out, "{} pairs at support >= {}", pairs.len(), a.min_support)
        }
        None => Ok(write_pairs_report(&pairs, vocab, &mut *io.out)?),
    }
}

fn recommend_cmd(a: RecommendArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let weights = match a.weights.as_deref() {
        Some([g, e, i]) => SimilarityWeights::new(*g, *e, *i)?,
        Some(_) => return Err(CliError::usage("--weights takes three numbers")),
        None => SimilarityWeights::default(),
    };
    let records = load_records(&a.input, vocab)?;
    let seed = records
        .iter()
        .find(|r| r.europeana_id == a.seed)
        .ok_or_else(|| CliError::domain("UnknownItem", format!("no record '{}' in {}", a.seed, a.input.display())))?;
    let ranked = recommend(seed, &records, a.k, &weights)?;
    say!(io.out, "rank\teuropeana_id\ttitle\tscore")?;
    for (i, (r, score)) in ranked.iter().enumerate() {
        say!(io.out, "{}\t{}\t{}\t{score:.4}", i + 1, r.europeana_id, r.title.as_deref().unwrap_or(""))?;
    }
    Ok(())
}

fn sentiment(a: SentimentArgs, vocab: &Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let records = load_records(&a.input, vocab)?;
    let lexicon = match &a.lexicon {
        Some(path) => SentimentLexicon::load(path)?,
        None => SentimentLexicon::builtin(),
    };
    say!(io.out, "europeana_id\tcomments\tsentiment")?;
    for r in records.iter().filter(|r| !r.comments.is_empty()) {
        say!(io.out, "{}\t{}\t{:.4}", r.europeana_id, r.comments.len(), track_sentiment(r, &lexicon))?;
    }
    Ok(())
}

fn export(a: ExportArgs, vocab: Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let dir = DataDir::new(&a.data_dir);
    let store = dir.open_store(dir.load_campaign(&a.campaign_id)?, Arc::new(vocab))?;
    let snapshot = store.export();
    if a.json {
        let json = serde_json::to_string_pretty(&snapshot).map_err(|e| CliError::domain("Io", e.to_string()))?;
        write_file(&a.out, (json + "\n").as_bytes())?;
    } else {
        write_file(&a.out, snapshot.to_csv_string().as_bytes())?;
    }
    say!(io.out, "{} tag rows, {} comment rows", snapshot.tags.len(), snapshot.comments.len())
}

fn serve(a: ServeArgs, vocab: Vocabularies, io: &mut Io<'_>) -> Result<(), CliError> {
    let config = ServeConfig { host: a.host, port: a.port, data_dir: a.data_dir };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::domain("Io", e.to_string()))?;
    runtime.block_on(async {
        let (listener, state) = api::bind(&config, Arc::new(vocab)).await?;
        let addr = listener.local_addr().map_err(|e| CliError::domain("Io", e.to_string()))?;
        say!(io.out, "listening on http://{addr} with {} campaigns", state.stores().count())?;
        io.out.flush().ok();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        api::run(listener, state, shutdown).await
    })
}
