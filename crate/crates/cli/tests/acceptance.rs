//! Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero if anything failed.
//!
//! The released-dataset check runs when `CROWDKB_PUBLIC_DATASET` names an
//! enriched catalog CSV (as written by `ingest` or `moderate`).

#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use crowdkb_core::analytics::{frequent_pairs, pair_support, transactions, TagTransaction};
use crowdkb_core::catalog::{export_enriched, load_dataset};
use crowdkb_core::graph::{build_graph, calm_jazz_song, materialize_axioms, ns, parse_graph, serialize_graph};
use crowdkb_core::moderation::{moderate_item, ModerationPolicy};
use crowdkb_core::query::{evaluate_query, parse_query};
use crowdkb_core::{
    builtin_vocabularies, partition_batches, Campaign, CampaignExport, Category, Object, TrackRecord, Vocabularies,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn ensure(ok: bool, detail: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn within(limit: Duration, started: Instant, detail: String) -> Outcome {
    let took = started.elapsed();
    if took < limit {
        Outcome::Pass(format!("{detail} in {:.2}s", took.as_secs_f64()))
    } else {
        Outcome::Fail(format!("{detail} but took {:.2}s (limit {}s)", took.as_secs_f64(), limit.as_secs()))
    }
}

fn from_result(r: Result<String, String>) -> Outcome {
    match r {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("crowdkb").chain(args.iter().copied());
    match crowdkb_cli::run_with(argv, &mut out, &mut err) {
        0 => Ok(String::from_utf8_lossy(&out).into_owned()),
        code => Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err).trim())),
    }
}

fn repo_data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn moderation_oracle() -> Outcome {
    let started = Instant::now();
    let vocab = builtin_vocabularies();
    let policy = ModerationPolicy::default();
    let mut disagreements = Vec::new();
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tags = oracles::random_item_tags(&mut rng, &vocab);
        let out = moderate_item(&tags, &policy);
        let got: BTreeMap<Category, BTreeSet<String>> = out
            .kept
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(c, v)| (*c, v.iter().map(|t| t.term_id.clone()).collect()))
            .collect();
        if got != oracles::brute_moderate(&tags) {
            disagreements.push(seed);
        }
    }
    if !disagreements.is_empty() {
        return Outcome::Fail(format!(
            "{} of 1000 configurations disagree, first seed {}",
            disagreements.len(),
            disagreements[0]
        ));
    }
    within(Duration::from_secs(5), started, "1000/1000 configurations agree".into())
}

/// Per item, category and term: summed upvotes minus summed downvotes.
fn merged_scores(export: &CampaignExport) -> BTreeMap<(String, Category, String), i64> {
    let mut scores = BTreeMap::new();
    for t in &export.tags {
        *scores.entry((t.item_id.clone(), t.category, t.term_id.clone())).or_insert(0) +=
            i64::from(t.upvotes) - i64::from(t.downvotes);
    }
    scores
}

fn threshold_violations(records: &[TrackRecord], export: &CampaignExport) -> Vec<String> {
    let scores = merged_scores(export);
    let mut violations = Vec::new();
    for r in records {
        for category in Category::ALL {
            let kept = r.tags(category);
            let floor = if category == Category::Instrument { 6 } else { 2 };
            if category != Category::Instrument && kept.len() > 2 {
                violations.push(format!("{} keeps {} {} tags", r.europeana_id, kept.len(), category.as_str()));
            }
            for term in kept {
                let score = scores.get(&(r.europeana_id.clone(), category, term.clone())).copied();
                if score.is_none_or(|v| v < floor) {
                    violations.push(format!("{} keeps {term} at score {score:?}", r.europeana_id));
                }
            }
        }
    }
    violations
}

fn threshold_invariants() -> Outcome {
    from_result((|| {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let vocab = builtin_vocabularies();
        let mut runs = 0;
        let mut kept = 0;
        for (items, annotators, seed) in [(854, 98, 7), (240, 40, 1), (240, 40, 2), (120, 16, 3), (60, 98, 4)] {
            let catalog = tmp.path().join(format!("catalog{seed}.csv"));
            let export = tmp.path().join(format!("export{seed}.csv"));
            let enriched = tmp.path().join(format!("enriched{seed}.csv"));
            let (items, annotators, seed) = (items.to_string(), annotators.to_string(), seed.to_string());
            run_cli(&["synth-catalog", "--items", &items, "--seed", &seed, "--out", s(&catalog)])?;
            run_cli(&[
                "campaign",
                "simulate",
                "--catalog",
                s(&catalog),
                "--annotators",
                &annotators,
                "--seed",
                &seed,
                "--out",
                s(&export),
            ])?;
            run_cli(&["moderate", "--catalog", s(&catalog), "--export", s(&export), "--out", s(&enriched)])?;
            let records = load_dataset(&enriched, &vocab).map_err(|e| e.to_string())?.records;
            let raw = CampaignExport::read_csv(fs::File::open(&export).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let violations = threshold_violations(&records, &raw);
            ensure(
                violations.is_empty(),
                format!("seed {seed}: {} violations, e.g. {}", violations.len(), violations.join("; ")),
            )?;
            runs += 1;
            kept += records.iter().map(|r| r.all_tags().len()).sum::<usize>();
        }
        Ok(format!("{runs} simulated runs, {kept} kept tags, zero violations"))
    })())
}

fn apriori_oracle() -> Outcome {
    let started = Instant::now();
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tx, min_support) = oracles::random_transactions(&mut rng);
        let transactions: Vec<TagTransaction> =
            tx.iter().enumerate().map(|(i, t)| TagTransaction::new(format!("i{i}"), t.iter().cloned())).collect();
        let got: Vec<(String, String, usize)> = match frequent_pairs(&transactions, min_support) {
            Ok(pairs) => pairs.into_iter().map(|p| (p.a, p.b, p.count)).collect(),
            Err(e) => return Outcome::Fail(format!("seed {seed}: {e}")),
        };
        if got != oracles::brute_pairs(&tx, min_support) {
            return Outcome::Fail(format!("seed {seed}: pair lists differ"));
        }
    }
    within(Duration::from_secs(10), started, "200/200 transaction sets agree".into())
}

fn query_oracle() -> Outcome {
    let started = Instant::now();
    let mut rows = 0;
    for seed in 0..300u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = oracles::random_graph(&mut rng);
        let ast = oracles::random_query(&mut rng);
        let got = evaluate_query(&ast, &graph);
        if got.rows != oracles::brute_query(&ast, &graph) {
            return Outcome::Fail(format!("seed {seed}: {ast}"));
        }
        rows += got.rows.len();
    }
    within(Duration::from_secs(30), started, format!("300/300 queries agree ({rows} rows)"))
}

fn axiom_query_cross_check() -> Outcome {
    let vocab = builtin_vocabularies();
    let query = parse_query("select ?t where { ?t hasGenre Jazz . ?t hasEmotion Calmness . }").unwrap();
    let axiom = calm_jazz_song(&vocab).unwrap();
    let mut members_total = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(0..40);
        let records: Vec<TrackRecord> = (0..n)
            .map(|i| {
                let mut r = oracles::random_tagged_record(&mut rng, &vocab, format!("t{i:03}"));
                if rng.random_bool(0.3) {
                    r.genres.insert("jazz".into());
                }
                if rng.random_bool(0.4) {
                    r.emotions.insert("calmness".into());
                }
                r
            })
            .collect();
        let graph = build_graph(&records, &vocab).unwrap();
        let materialized = materialize_axioms(&graph, std::slice::from_ref(&axiom)).unwrap();
        let members: Vec<Object> =
            materialized.instances_of(&ns("CalmJazzSong")).into_iter().map(Object::Iri).collect();
        let rows: Vec<Object> = evaluate_query(&query, &graph).rows.into_iter().map(|mut r| r.remove(0)).collect();
        if members != rows {
            return Outcome::Fail(format!("seed {seed}: {} members vs {} query rows", members.len(), rows.len()));
        }
        members_total += members.len();
    }
    Outcome::Pass(format!("50/50 graphs agree ({members_total} members)"))
}

fn graph_round_trip() -> Outcome {
    let vocab = builtin_vocabularies();
    for case in 0..150u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let graph = if case % 2 == 0 {
            oracles::random_graph(&mut rng)
        } else {
            let records: Vec<_> =
                (0..1 + case as usize % 9).map(|i| oracles::random_record(&mut rng, &vocab, i)).collect();
            build_graph(&records, &vocab).unwrap()
        };
        match parse_graph(&serialize_graph(&graph)) {
            Ok(back) if back.iter().eq(graph.iter()) => {}
            Ok(_) => return Outcome::Fail(format!("case {case}: triple sets differ")),
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        }
    }
    Outcome::Pass("150/150 graphs set-equal after serialize and parse".into())
}

fn catalog_round_trip() -> Outcome {
    let vocab = builtin_vocabularies();
    let tmp = tempfile::tempdir().unwrap();
    for case in 0..150u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let records: Vec<_> =
            (0..1 + case as usize % 11).map(|i| oracles::random_record(&mut rng, &vocab, i)).collect();
        let path = tmp.path().join(format!("case{case}.csv"));
        if let Err(e) = export_enriched(&records, &vocab, &path) {
            return Outcome::Fail(format!("case {case}: {e}"));
        }
        match load_dataset(&path, &vocab) {
            Ok(loaded) if loaded.errors.is_empty() && loaded.records == records => {}
            Ok(loaded) => {
                return Outcome::Fail(format!("case {case}: records differ ({} row errors)", loaded.errors.len()))
            }
            Err(e) => return Outcome::Fail(format!("case {case}: {e}")),
        }
    }
    Outcome::Pass("150/150 catalogs record-equal after export and import".into())
}

/// simulate, moderate and build-kg for one seed; returns the export and graph bytes.
fn pipeline_bytes(dir: &Path, seed: &str, catalog: &Path) -> Result<(Vec<u8>, Vec<u8>), String> {
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let export = dir.join("export.csv");
    let enriched = dir.join("enriched.csv");
    let kg = dir.join("kg.nt");
    run_cli(&[
        "campaign",
        "simulate",
        "--catalog",
        s(catalog),
        "--annotators",
        "98",
        "--seed",
        seed,
        "--out",
        s(&export),
    ])?;
    run_cli(&["moderate", "--catalog", s(catalog), "--export", s(&export), "--out", s(&enriched)])?;
    run_cli(&[
        "build-kg",
        "--input",
        s(&enriched),
        "--out",
        s(&kg),
        "--resolver",
        s(&repo_data("composer_facts.csv")),
    ])?;
    let read = |p: &Path| fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    Ok((read(&export)?, read(&kg)?))
}

fn determinism() -> Outcome {
    from_result((|| {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let catalog = repo_data("catalog.csv");
        let mut previous: Option<Vec<u8>> = None;
        for seed in ["7", "2024"] {
            let first = pipeline_bytes(&tmp.path().join(format!("{seed}a")), seed, &catalog)?;
            let second = pipeline_bytes(&tmp.path().join(format!("{seed}b")), seed, &catalog)?;
            ensure(first.0 == second.0, format!("seed {seed}: exports differ"))?;
            ensure(first.1 == second.1, format!("seed {seed}: graphs differ"))?;
            ensure(previous.as_ref() != Some(&first.0), "different seeds gave the same export")?;
            previous = Some(first.0);
        }
        Ok("98 annotators on 854 items, seeds 7 and 2024: exports and graphs byte-identical".into())
    })())
}

fn batch_partition() -> Outcome {
    let ids: Vec<String> = (0..854).map(|i| format!("item{i}")).collect();
    let start = chrono::DateTime::parse_from_rfc3339("2022-11-14T00:00:00Z").unwrap().to_utc();
    let campaign = Campaign::new("c", "C", ids.clone(), start, start + chrono::Duration::days(18)).unwrap();
    let batches = partition_batches(&campaign).unwrap();
    let mut sizes: Vec<usize> = batches.iter().map(Vec::len).collect();
    let covered: BTreeSet<&String> = batches.iter().flatten().collect();
    sizes.sort_unstable();
    if sizes == [106, 106, 107, 107, 107, 107, 107, 107] && covered.len() == 854 {
        Outcome::Pass("six batches of 107 and two of 106, covering all 854 items".into())
    } else {
        Outcome::Fail(format!("sizes {sizes:?}, {} distinct items", covered.len()))
    }
}

const TABLE_PAIRS: [(f64, &str, &str); 11] = [
    (0.201, "Joy", "Drums"),
    (0.192, "Rock", "Drums"),
    (0.185, "Drums", "Arousal"),
    (0.181, "Electric Guitar", "Drums"),
    (0.162, "Electric Guitar", "Rock"),
    (0.147, "Classical", "Instrumental"),
    (0.147, "Classical", "Orchestra"),
    (0.145, "Calmness", "Instrumental"),
    (0.144, "Joy", "Arousal"),
    (0.138, "Bass", "Drums"),
    (0.134, "Instrumental", "Orchestra"),
];

fn term_id(vocab: &Vocabularies, label: &str) -> Result<String, String> {
    vocab.iter().find(|t| t.label == label).map(|t| t.id.clone()).ok_or_else(|| format!("no term labelled {label}"))
}

fn public_dataset() -> Outcome {
    let Some(path) = std::env::var_os("CROWDKB_PUBLIC_DATASET") else {
        return Outcome::Skip("CROWDKB_PUBLIC_DATASET not set".into());
    };
    let path = PathBuf::from(path);
    if !path.exists() {
        return Outcome::Skip(format!("{} not found", path.display()));
    }
    from_result((|| {
        let vocab = builtin_vocabularies();
        let loaded = load_dataset(&path, &vocab).map_err(|e| e.to_string())?;
        let records = loaded.records;
        let count = |c: Category| records.iter().map(|r| r.tags(c).len()).sum::<usize>();
        let counts = [
            count(Category::Genre),
            count(Category::Emotion),
            count(Category::Instrument),
            records.iter().map(|r| r.comments.len()).sum(),
        ];
        ensure(counts == [1248, 1643, 1422, 834], format!("genre/emotion/instrument/comments = {counts:?}"))?;
        let tx = transactions(&records);
        let mut worst: f64 = 0.0;
        for (support, a, b) in TABLE_PAIRS {
            let got = pair_support(&tx, &term_id(&vocab, a)?, &term_id(&vocab, b)?).map_err(|e| e.to_string())?;
            ensure((got - support).abs() <= 0.01, format!("{a}-{b}: support {got:.3}, expected {support}"))?;
            worst = worst.max((got - support).abs());
        }
        Ok(format!("category counts exact, 11 pair supports within {worst:.3}"))
    })())
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("moderation oracle", moderation_oracle),
        ("threshold invariants", threshold_invariants),
        ("apriori oracle", apriori_oracle),
        ("query oracle", query_oracle),
        ("axiom/query cross-check", axiom_query_cross_check),
        ("graph round trip", graph_round_trip),
        ("catalog round trip", catalog_round_trip),
        ("determinism", determinism),
        ("batch partition", batch_partition),
        ("public dataset", public_dataset),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        match outcome {
            Outcome::Pass(d) => println!("PASS {name}: {d}"),
            Outcome::Skip(d) => println!("SKIP {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
