//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails. Criterion 10 reruns 1-9 and byte-compares
//! their transcripts.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::panic::catch_unwind;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spider_core::code_graph::{bfs_function_neighbors, build_graph, serialize_graph};
use spider_core::evaluation::{
    acc_at_k, bootstrap_ci, evaluate_dataset, extract_ground_truth, mrr_at_k, recall_at_k,
    BootstrapSettings, GroundTruth,
};
use spider_core::llm_filter::{
    FilterRequest, FilterResponse, FilterSettings, LlmFilter, NeighborFilter, ScriptedChat,
};
use spider_core::ranking::RankedList;
use spider_core::spider::{run_spider, Provenance, SpiderConfig, SpiderResult};
use spider_core::{CodeEdge, CodeGraph, CodeNode, EdgeKind, Language, NodeId, NodeKind};

const FIXTURE_BUDGET: Duration = Duration::from_secs(5);
const SYNTHETIC_BUDGET: Duration = Duration::from_secs(30);
const ORACLE_CASES: usize = 300;
const ORACLE_MAX_NODES: usize = 30;
const METRIC_TRIPLES: usize = 1000;
const HALF_WIDTH_TOLERANCE: f64 = 0.01;
const SYNTHETIC_INSTANCES: usize = 60;

struct Outcome {
    pass: bool,
    detail: String,
    /// Everything the check computed, for the determinism rerun.
    transcript: String,
}

type Check = fn() -> Outcome;

const CHECKS: [(&str, Check); 9] = [
    ("graph fixtures exact", graph_fixtures),
    ("hop-distance reproduction", hop_distances),
    ("algorithm oracle equivalence", oracle_equivalence),
    ("dense reduction byte-identical", der_reduction),
    ("budget exactness and top-N soundness", budget_exactness),
    ("metric identities", metric_identities),
    ("ground-truth extraction", ground_truth_suites),
    ("bootstrap interval sanity", bootstrap_sanity),
    ("directional end-to-end gain", directional_gain),
];

fn run_check(check: Check) -> Outcome {
    catch_unwind(check).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Outcome {
            pass: false,
            detail: format!("panicked: {msg}"),
            transcript: String::new(),
        }
    })
}

fn report(n: usize, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {n:>2} {verdict}  {name}: {detail} [{:.2}s]",
        elapsed.as_secs_f64()
    );
}

fn main() -> ExitCode {
    for var in [
        "SPIDER_EMBED_ENDPOINT",
        "SPIDER_EMBED_MODEL",
        "SPIDER_EMBED_API_KEY",
        "SPIDER_LLM_ENDPOINT",
        "SPIDER_LLM_MODEL",
        "SPIDER_LLM_MOCK",
        "SPIDER_LLM_API_KEY",
    ] {
        std::env::remove_var(var);
    }

    let mut failures = 0;
    let mut first = Vec::new();
    for (i, (name, check)) in CHECKS.iter().enumerate() {
        let start = Instant::now();
        let out = run_check(*check);
        report(i + 1, name, out.pass, &out.detail, start.elapsed());
        failures += usize::from(!out.pass);
        first.push(out.transcript);
    }

    let start = Instant::now();
    let mut differing = Vec::new();
    let mut bytes = 0;
    for (i, (_, check)) in CHECKS.iter().enumerate() {
        let again = run_check(*check).transcript;
        bytes += again.len();
        if again != first[i] || again.is_empty() {
            differing.push((i + 1).to_string());
        }
    }
    let pass = differing.is_empty();
    let detail = if pass {
        format!("9 transcripts byte-identical across two runs ({bytes} bytes)")
    } else {
        format!(
            "transcripts differ or are empty for criteria {}",
            differing.join(", ")
        )
    };
    report(10, "determinism", pass, &detail, start.elapsed());
    failures += usize::from(!pass);

    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn graph_text(g: &CodeGraph) -> String {
    let mut buf = Vec::new();
    serialize_graph(g, &mut buf).expect("serialize");
    String::from_utf8(buf).expect("utf8")
}

// ---- 1 -------------------------------------------------------------------

fn graph_fixtures() -> Outcome {
    let mut transcript = String::new();
    let mut problems = Vec::new();
    let mut elapsed = Duration::ZERO;
    let expected = common::expected_fixtures();
    for want in &expected {
        let start = Instant::now();
        let out = build_graph(&common::fixture(want.name), want.language).expect("fixture builds");
        elapsed += start.elapsed();
        let g = out.graph;
        if !out.diagnostics.is_empty() {
            problems.push(format!(
                "{}: {} diagnostic(s)",
                want.name,
                out.diagnostics.len()
            ));
        }
        // rows are sets; equal lengths rule out duplicates on either side
        if common::node_rows(&g) != want.nodes || g.nodes().len() != want.nodes.len() {
            problems.push(format!("{}: node set differs", want.name));
        }
        if common::edge_rows(&g) != want.edges || g.edges().len() != want.edges.len() {
            problems.push(format!("{}: edge set differs", want.name));
        }
        transcript += &graph_text(&g);
    }
    if elapsed >= FIXTURE_BUDGET {
        problems.push(format!(
            "build time {:.2}s over budget",
            elapsed.as_secs_f64()
        ));
    }
    let detail = if problems.is_empty() {
        format!(
            "{} fixtures match, build time {:.3}s < 5s",
            expected.len(),
            elapsed.as_secs_f64()
        )
    } else {
        problems.join("; ")
    };
    Outcome {
        pass: problems.is_empty(),
        detail,
        transcript,
    }
}

// ---- 2 -------------------------------------------------------------------

fn hops_between(g: &CodeGraph, a: &str, b: &str) -> Option<usize> {
    bfs_function_neighbors(g, &NodeId::from(a), 16)
        .expect("bfs")
        .into_iter()
        .find(|(id, _)| id.as_str() == b)
        .map(|(_, h)| h)
}

fn hop_distances() -> Outcome {
    let g = build_graph(&common::fixture("hops"), Language::Python)
        .expect("fixture builds")
        .graph;
    let sibling = hops_between(
        &g,
        "pkg/shapes.py::Square.area@5",
        "pkg/shapes.py::Square.__init__@2",
    );
    let cross_class = hops_between(
        &g,
        "pkg/shapes.py::Square.area@5",
        "pkg/reader.py::Reader.read@2",
    );
    let cross_free = hops_between(&g, "pkg/helpers.py::parse@1", "pkg/text.py::tokenize@1");
    let pass = sibling == Some(2) && cross_class == Some(4);
    let show = |h: Option<usize>| h.map_or("unreachable".to_string(), |h| h.to_string());
    let mut detail = format!(
        "sibling methods {} (want 2); methods of classes in separate files {} (want 4); free functions in separate files {}",
        show(sibling),
        show(cross_class),
        show(cross_free)
    );
    if !pass && sibling == Some(2) {
        detail += " -- under Contains-only edges the class-to-class path is \
                   function-class-file-dir-file-class-function, six edges";
    }
    Outcome {
        pass,
        detail,
        transcript: format!("{sibling:?} {cross_class:?} {cross_free:?}\n"),
    }
}

// ---- 3 and 5 -------------------------------------------------------------

/// Selects the candidates found in a fixed per-center set.
struct ScriptedSets(BTreeMap<NodeId, BTreeSet<NodeId>>);

impl NeighborFilter for ScriptedSets {
    fn filter(&self, request: &FilterRequest) -> spider_core::Result<FilterResponse> {
        let chosen = self.0.get(&request.center_id);
        Ok(FilterResponse {
            selected: request
                .neighbors
                .iter()
                .filter(|n| chosen.is_some_and(|s| s.contains(&n.id)))
                .map(|n| n.id.clone())
                .collect(),
            ..FilterResponse::default()
        })
    }
}

struct Case {
    graph: CodeGraph,
    scores: Vec<(NodeId, f64)>,
    config: SpiderConfig,
    selections: BTreeMap<NodeId, BTreeSet<NodeId>>,
    through_llm: bool,
}

fn random_cases() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    (0..ORACLE_CASES)
        .map(|i| {
            let size = rng.gen_range(2..=ORACLE_MAX_NODES);
            let graph = common::random_graph(&mut rng, size);
            let functions: Vec<NodeId> = graph
                .nodes_of_kind(NodeKind::Function)
                .map(|n| n.id.clone())
                .collect();
            // coarse scores so ties are common
            let scores = functions
                .iter()
                .map(|id| (id.clone(), f64::from(rng.gen_range(0..10u8)) / 10.0))
                .collect();
            let k = rng.gen_range(1..=8);
            let n = rng.gen_range(k + 1..=k + 12);
            let c = rng.gen_range(1..=k);
            let d = rng.gen_range(0..=6);
            let p: f64 = rng.gen_range(0.0..=1.0);
            let selections = functions
                .iter()
                .map(|center| {
                    let set = functions
                        .iter()
                        .filter(|_| rng.gen_bool(p))
                        .cloned()
                        .collect();
                    (center.clone(), set)
                })
                .collect();
            Case {
                graph,
                scores,
                config: SpiderConfig::new(k, n, c, d).expect("valid config"),
                selections,
                through_llm: i % 2 == 1,
            }
        })
        .collect()
}

fn run_case(case: &Case) -> SpiderResult {
    let ranked = RankedList::from_scores(case.scores.clone(), "q").expect("ranking");
    if case.through_llm {
        let replies = case
            .selections
            .iter()
            .map(|(center, set)| {
                let ids: Vec<&str> = set.iter().map(NodeId::as_str).collect();
                (
                    center.to_string(),
                    format!("Relevant ids:\n{}", serde_json::to_string(&ids).unwrap()),
                )
            })
            .collect();
        let filter = LlmFilter::new(
            ScriptedChat::new(Some("[]".into()), replies),
            FilterSettings::default(),
        );
        run_spider(&case.graph, &ranked, "issue", &case.config, &filter).expect("run")
    } else {
        run_spider(
            &case.graph,
            &ranked,
            "issue",
            &case.config,
            &ScriptedSets(case.selections.clone()),
        )
        .expect("run")
    }
}

type Row = (String, f64, String);

fn rows(result: &SpiderResult) -> Vec<Row> {
    result
        .final_list
        .iter()
        .map(|e| {
            let prov = match &e.provenance {
                Provenance::Center => "center".to_string(),
                Provenance::Retained => "retained".to_string(),
                Provenance::LlmNeighbor(c) => format!("neighbor of {c}"),
            };
            (e.id.to_string(), e.score, prov)
        })
        .collect()
}

/// Straight transcription: rank, split top-K/top-N, take centers, collect
/// reachable top-N functions per center, filter, then budget the union and
/// lay it out center by center.
fn oracle(case: &Case) -> Vec<Row> {
    let cfg = &case.config;
    let mut all = case.scores.clone();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let score: BTreeMap<NodeId, f64> = all.iter().cloned().collect();
    let top_k: Vec<NodeId> = all.iter().take(cfg.k).map(|(id, _)| id.clone()).collect();
    let top_n: BTreeSet<NodeId> = all.iter().take(cfg.n).map(|(id, _)| id.clone()).collect();
    let centers: Vec<NodeId> = top_k.iter().take(cfg.c).cloned().collect();

    let (ids, dist) = common::contains_distances(&case.graph);
    let index = |id: &NodeId| ids.iter().position(|x| x == id).unwrap();

    // owner: first (best-ranked) center whose filter picked the neighbor
    let mut owner: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for center in &centers {
        let ci = index(center);
        for (vi, v) in ids.iter().enumerate() {
            let reachable = dist[ci][vi].is_some_and(|h| h <= cfg.d);
            let is_fn = case.graph.node(v).unwrap().kind == NodeKind::Function;
            if reachable && is_fn && v != center && !centers.contains(v) && top_n.contains(v) {
                let picked = case.selections.get(center).is_some_and(|s| s.contains(v));
                if picked && !owner.contains_key(v) {
                    owner.insert(v.clone(), center.clone());
                }
            }
        }
    }
    let mut neighbors: Vec<NodeId> = owner.keys().cloned().collect();
    if centers.len() + neighbors.len() > cfg.k {
        neighbors.sort_by(|a, b| score[b].partial_cmp(&score[a]).unwrap().then(a.cmp(b)));
        neighbors.truncate(cfg.k - centers.len());
    }
    let budget = cfg.k.saturating_sub(centers.len() + neighbors.len());
    let retained: Vec<NodeId> = top_k
        .iter()
        .filter(|v| !centers.contains(v) && !neighbors.contains(v))
        .take(budget)
        .cloned()
        .collect();

    // (rank of anchor, 0 for the anchor itself / 1 for its neighbors, global rank)
    let pos = |v: &NodeId| top_k.iter().position(|x| x == v).unwrap();
    let global = |v: &NodeId| all.iter().position(|(x, _)| x == v).unwrap();
    let mut keyed: Vec<((usize, u8, usize), Row)> = Vec::new();
    for c in &centers {
        let anchors = neighbors.iter().any(|v| &owner[v] == c);
        let prov = if anchors { "center" } else { "retained" };
        keyed.push(((pos(c), 0, 0), (c.to_string(), score[c], prov.to_string())));
    }
    for v in &neighbors {
        let o = &owner[v];
        let s = score[v];
        keyed.push((
            (pos(o), 1, global(v)),
            (v.to_string(), s, format!("neighbor of {o}")),
        ));
    }
    for v in &retained {
        keyed.push((
            (pos(v), 0, 0),
            (v.to_string(), score[v], "retained".to_string()),
        ));
    }
    keyed.sort_by_key(|(key, _)| *key);
    keyed.into_iter().map(|(_, row)| row).collect()
}

fn oracle_equivalence() -> Outcome {
    let cases = random_cases();
    let mut transcript = String::new();
    let mut mismatches = Vec::new();
    let mut with_neighbors = 0;
    for (i, case) in cases.iter().enumerate() {
        let got = run_case(case);
        let got_rows = rows(&got);
        if got_rows.iter().any(|r| r.2.starts_with("neighbor")) {
            with_neighbors += 1;
        }
        if got_rows != oracle(case) {
            mismatches.push(i);
        }
        transcript += &serde_json::to_string(&got).unwrap();
        transcript.push('\n');
    }
    let detail = if mismatches.is_empty() {
        format!(
            "{}/{} cases equal the brute-force oracle ({} with placed neighbors, half via the scripted chat path)",
            cases.len(),
            cases.len(),
            with_neighbors
        )
    } else {
        format!(
            "{} of {} cases differ, first at case {}",
            mismatches.len(),
            cases.len(),
            mismatches[0]
        )
    };
    Outcome {
        pass: mismatches.is_empty() && cases.len() >= 200,
        detail,
        transcript,
    }
}

fn budget_exactness() -> Outcome {
    let cases = random_cases();
    let mut size_violations = 0;
    let mut soundness_violations = 0;
    let mut other_violations = 0;
    let mut transcript = String::new();
    for case in &cases {
        let result = run_case(case);
        let ranked = RankedList::from_scores(case.scores.clone(), "q").unwrap();
        let available = ranked.len();
        if result.final_list.len() != case.config.k.min(available) {
            size_violations += 1;
        }
        let top_n: BTreeSet<&NodeId> = ranked.ids().take(case.config.n).collect();
        for e in &result.final_list {
            if matches!(e.provenance, Provenance::LlmNeighbor(_)) && !top_n.contains(&e.id) {
                soundness_violations += 1;
            }
        }
        let distinct: BTreeSet<&NodeId> = result.final_list.iter().map(|e| &e.id).collect();
        let centers_kept = ranked
            .ids()
            .take(case.config.k.min(case.config.c))
            .all(|c| distinct.contains(c));
        if distinct.len() != result.final_list.len() || !centers_kept {
            other_violations += 1;
        }
        let _ = writeln!(transcript, "{} {}", result.final_list.len(), available);
    }
    let pass = size_violations == 0 && soundness_violations == 0 && other_violations == 0;
    Outcome {
        pass,
        detail: format!(
            "{} cases: {size_violations} size violations, {soundness_violations} neighbors outside top-N, \
             {other_violations} duplicate/lost-center violations",
            cases.len()
        ),
        transcript,
    }
}

// ---- 4 -------------------------------------------------------------------

fn cli(args: &[&str]) {
    let cli =
        spider_cli::Cli::try_parse_from(std::iter::once("spider").chain(args.iter().copied()))
            .unwrap_or_else(|e| panic!("bad arguments {args:?}: {e}"));
    spider_cli::run(&cli).unwrap_or_else(|e| panic!("{args:?} failed: {e:#}"));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn der_reduction() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mock = root.join("empty.json");
    std::fs::write(&mock, r#"{"default": "[]"}"#).unwrap();
    let mut transcript = String::new();
    let mut differing = Vec::new();
    let mut compared = 0;
    let fixtures = [
        (
            "py_mini",
            Language::Python,
            "A.f returns the wrong value after g changes",
        ),
        (
            "java_mini",
            Language::Java,
            "Circle area is wrong for negative radius",
        ),
        (
            "js_proto",
            Language::JavaScript,
            "Shape area should not be zero",
        ),
        (
            "ts_mini",
            Language::TypeScript,
            "greeter formats the user name incorrectly",
        ),
    ];
    for (name, language, issue) in fixtures {
        let graph = build_graph(&common::fixture(name), language).unwrap().graph;
        let graph_path = root.join(format!("{name}.ndjson"));
        std::fs::write(&graph_path, graph_text(&graph)).unwrap();
        let issue_path = root.join(format!("{name}.issue"));
        std::fs::write(&issue_path, issue).unwrap();
        let settings: [&[&str]; 3] = [
            &[],
            &["--k", "2", "--n", "3", "--c", "1", "--d", "2"],
            &["--k", "3", "--n", "4", "--c", "3", "--d", "6"],
        ];
        for (si, extra) in settings.iter().enumerate() {
            for (plain, explore) in [("der", "spider"), ("sr", "spisr")] {
                let base = |mode: &str, out: &Path| {
                    let mut a = vec![
                        "retrieve",
                        "--graph",
                        s(&graph_path),
                        "--issue",
                        s(&issue_path),
                        "--embed-endpoint",
                        "hash:64",
                    ];
                    a.extend_from_slice(extra);
                    a.extend_from_slice(&["--mode", mode, "--out", s(out)]);
                    a.into_iter().map(String::from).collect::<Vec<_>>()
                };
                let a_path = root.join(format!("{name}-{si}-{plain}.json"));
                let b_path = root.join(format!("{name}-{si}-{explore}.json"));
                let a_args = base(plain, &a_path);
                let mut b_args = base(explore, &b_path);
                b_args.extend(["--llm-mock".to_string(), s(&mock).to_string()]);
                cli(&a_args.iter().map(String::as_str).collect::<Vec<_>>());
                cli(&b_args.iter().map(String::as_str).collect::<Vec<_>>());
                let a = std::fs::read(&a_path).unwrap();
                let b = std::fs::read(&b_path).unwrap();
                compared += 1;
                if a != b {
                    differing.push(format!("{name}/{plain}/{si}"));
                }
                transcript += &String::from_utf8_lossy(&a);
                transcript += &String::from_utf8_lossy(&b);
            }
        }
    }
    let detail = if differing.is_empty() {
        format!(
            "{compared}/{compared} runs byte-identical (4 fixtures x 3 settings x dense/sparse)"
        )
    } else {
        format!("differs: {}", differing.join(", "))
    };
    Outcome {
        pass: differing.is_empty(),
        detail,
        transcript,
    }
}

// ---- 6 -------------------------------------------------------------------

struct Brute {
    recall: f64,
    acc: f64,
    mrr: f64,
}

fn brute(gt: &BTreeSet<NodeId>, retrieved: &[NodeId], k: usize) -> Brute {
    let window = &retrieved[..k.min(retrieved.len())];
    let hits = gt.iter().filter(|g| window.contains(g)).count();
    let first = window.iter().position(|r| gt.contains(r));
    Brute {
        recall: hits as f64 / gt.len() as f64,
        acc: if hits == gt.len() { 1.0 } else { 0.0 },
        mrr: first.map_or(0.0, |p| 1.0 / (p + 1) as f64),
    }
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000);
    let universe: Vec<NodeId> = (0..24)
        .map(|i| NodeId::new(format!("m.py::f{i}@{}", i + 1)))
        .collect();
    let mut mismatches = 0;
    let mut iff_violations = 0;
    let mut monotone_violations = 0;
    let mut transcript = String::new();
    let mut triples = Vec::new();
    for _ in 0..METRIC_TRIPLES {
        let gt_len = rng.gen_range(1..=5);
        let gt: BTreeSet<NodeId> = universe
            .choose_multiple(&mut rng, gt_len)
            .cloned()
            .collect();
        let mut retrieved = universe.clone();
        retrieved.shuffle(&mut rng);
        retrieved.truncate(rng.gen_range(0..=universe.len()));
        let k = rng.gen_range(1..=30);

        let r = recall_at_k(&gt, &retrieved, k).unwrap();
        let a = acc_at_k(&gt, &retrieved, k).unwrap();
        let m = mrr_at_k(&gt, &retrieved, k).unwrap();
        let b = brute(&gt, &retrieved, k);
        if r != b.recall || a != b.acc || m != b.mrr {
            mismatches += 1;
        }
        if (a == 1.0) != (r == 1.0) {
            iff_violations += 1;
        }
        let r2 = recall_at_k(&gt, &retrieved, k + 1).unwrap();
        let a2 = acc_at_k(&gt, &retrieved, k + 1).unwrap();
        let m2 = mrr_at_k(&gt, &retrieved, k + 1).unwrap();
        if r2 < r || a2 < a || m2 < m {
            monotone_violations += 1;
        }
        let _ = writeln!(transcript, "{r} {a} {m}");
        triples.push((gt, retrieved, k, r));
    }

    // ten datasets of 100: mean acc against the share of perfect-recall rows
    let mut identity_violations = 0;
    let settings = BootstrapSettings {
        resamples: 200,
        ..BootstrapSettings::default()
    };
    for (d, chunk) in triples.chunks(100).enumerate() {
        let k = chunk[0].2;
        let mut truths = BTreeMap::new();
        let mut results = BTreeMap::new();
        let mut perfect = 0usize;
        for (i, (gt, retrieved, _, _)) in chunk.iter().enumerate() {
            let id = format!("d{d}-{i:03}");
            truths.insert(
                id.clone(),
                GroundTruth {
                    node_ids: gt.clone(),
                    granularity: NodeKind::Function,
                    excluded: false,
                    diagnostics: vec![],
                },
            );
            results.insert(id, retrieved.clone());
            perfect += usize::from(brute(gt, retrieved, k).recall == 1.0);
        }
        let report = evaluate_dataset(&truths, &results, k, &settings).unwrap();
        let mean_acc = report.means.unwrap().acc;
        if mean_acc != perfect as f64 / chunk.len() as f64 {
            identity_violations += 1;
        }
        let _ = writeln!(transcript, "{}", serde_json::to_string(&report).unwrap());
    }
    let pass = mismatches == 0
        && iff_violations == 0
        && monotone_violations == 0
        && identity_violations == 0;
    Outcome {
        pass,
        detail: format!(
            "{METRIC_TRIPLES} triples: {mismatches} brute-force mismatches, {iff_violations} acc/recall disagreements, \
             {monotone_violations} monotonicity breaks, {identity_violations}/10 dataset identity breaks"
        ),
        transcript,
    }
}

// ---- 7 -------------------------------------------------------------------

struct PatchCase {
    label: &'static str,
    fixture: &'static str,
    language: Language,
    patch: &'static str,
    functions: &'static [&'static str],
    classes: &'static [&'static str],
}

const PATCH_CASES: &[PatchCase] = &[
    PatchCase {
        label: "single-hunk",
        fixture: "py_mini",
        language: Language::Python,
        patch: "diff --git a/a.py b/a.py\n--- a/a.py\n+++ b/a.py\n@@ -2,2 +2,2 @@ class A:\n     def f(self):\n-        return self.g()\n+        return self.g() + 1\n",
        functions: &["a.py::A.f@2"],
        classes: &["a.py::A@1"],
    },
    PatchCase {
        label: "multi-hunk",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- a/a.py\n+++ b/a.py\n@@ -3 +3 @@\n-        return self.g()\n+        return self.g() + 1\n@@ -6 +6 @@\n-        return 1\n+        return 2\n",
        functions: &["a.py::A.f@2", "a.py::A.g@5"],
        classes: &["a.py::A@1"],
    },
    PatchCase {
        label: "multi-hunk, reversed hunk order",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- a/a.py\n+++ b/a.py\n@@ -6 +6 @@\n-        return 1\n+        return 2\n@@ -3 +3 @@\n-        return self.g()\n+        return self.g() + 1\n",
        functions: &["a.py::A.f@2", "a.py::A.g@5"],
        classes: &["a.py::A@1"],
    },
    PatchCase {
        label: "multi-file",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- a/a.py\n+++ b/a.py\n@@ -5,2 +5,2 @@\n     def g(self):\n-        return 1\n+        return 2\n--- a/b.py\n+++ b/b.py\n@@ -4,2 +4,3 @@\n def h():\n+    a = A()\n     return A().f()\n",
        functions: &["a.py::A.g@5", "b.py::h@4"],
        classes: &["a.py::A@1"],
    },
    PatchCase {
        label: "insertion-only inside a method",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- a/a.py\n+++ b/a.py\n@@ -2 +2,2 @@\n     def f(self):\n+        print(\"f\")\n",
        functions: &["a.py::A.f@2"],
        classes: &["a.py::A@1"],
    },
    PatchCase {
        label: "insertion-only between methods",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- a/a.py\n+++ b/a.py\n@@ -4 +4,3 @@\n \n+    def helper(self):\n+        return 0\n",
        functions: &[],
        classes: &["a.py::A@1"],
    },
    PatchCase {
        label: "new-file",
        fixture: "py_mini",
        language: Language::Python,
        patch: "diff --git a/c.py b/c.py\nnew file mode 100644\n--- /dev/null\n+++ b/c.py\n@@ -0,0 +1,2 @@\n+def k():\n+    return 3\n",
        functions: &[],
        classes: &[],
    },
    PatchCase {
        label: "non-code-file",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- a/README.md\n+++ b/README.md\n@@ -1 +1 @@\n-old\n+new\n",
        functions: &[],
        classes: &[],
    },
    PatchCase {
        label: "new file plus code edit",
        fixture: "py_mini",
        language: Language::Python,
        patch: "--- /dev/null\n+++ b/c.py\n@@ -0,0 +1 @@\n+X = 1\n--- a/b.py\n+++ b/b.py\n@@ -5 +5 @@\n-    return A().f()\n+    return A().g()\n",
        functions: &["b.py::h@4"],
        classes: &[],
    },
    PatchCase {
        label: "prototype method",
        fixture: "js_proto",
        language: Language::JavaScript,
        patch: "--- a/shapes.js\n+++ b/shapes.js\n@@ -6 +6 @@\n-  return 0;\n+  return NaN;\n",
        functions: &["shapes.js::Shape.area@5"],
        classes: &["shapes.js::Shape@1"],
    },
];

fn ground_truth_suites() -> Outcome {
    let mut graphs: BTreeMap<&str, CodeGraph> = BTreeMap::new();
    let mut problems = Vec::new();
    let mut transcript = String::new();
    let mut checked = 0;
    for case in PATCH_CASES {
        let g = graphs.entry(case.fixture).or_insert_with(|| {
            build_graph(&common::fixture(case.fixture), case.language)
                .unwrap()
                .graph
        });
        for (kind, want) in [
            (NodeKind::Function, case.functions),
            (NodeKind::Class, case.classes),
        ] {
            let gt = extract_ground_truth(case.patch, g, kind).expect("patch parses");
            let want: BTreeSet<NodeId> = want.iter().map(|s| NodeId::from(*s)).collect();
            checked += 1;
            if gt.node_ids != want {
                problems.push(format!("{} ({kind:?}): got {:?}", case.label, gt.node_ids));
            }
            if gt.excluded != want.is_empty() {
                problems.push(format!(
                    "{} ({kind:?}): excluded flag {}",
                    case.label, gt.excluded
                ));
            }
            let _ = writeln!(transcript, "{}", serde_json::to_string(&gt).unwrap());
        }
    }
    let detail = if problems.is_empty() {
        format!(
            "{} patches x 2 granularities = {checked} extractions exact, exclusion flags correct",
            PATCH_CASES.len()
        )
    } else {
        problems.join("; ")
    };
    Outcome {
        pass: problems.is_empty(),
        detail,
        transcript,
    }
}

// ---- 8 -------------------------------------------------------------------

fn bootstrap_sanity() -> Outcome {
    let settings = BootstrapSettings::default();
    let ci = |v: &[f64], seed: u64| {
        bootstrap_ci(v, settings.resamples, settings.confidence, seed).unwrap()
    };

    let constant = vec![0.37; 50];
    let (lo, hi) = ci(&constant, settings.seed);
    let zero_width = hi - lo == 0.0;

    let balanced: Vec<f64> = (0..200).map(|i| f64::from(i % 2)).collect();
    let (blo, bhi) = ci(&balanced, settings.seed);
    let half = (bhi - blo) / 2.0;
    let expected = 1.96 * (0.25f64 / 200.0).sqrt();
    let close = (half - expected).abs() <= HALF_WIDTH_TOLERANCE;

    let again = ci(&balanced, settings.seed);
    let reproducible = again.0.to_bits() == blo.to_bits() && again.1.to_bits() == bhi.to_bits();

    Outcome {
        pass: zero_width && close && reproducible,
        detail: format!(
            "constant width {:e}; balanced n=200 half-width {half:.5} vs {expected:.5} (tol {HALF_WIDTH_TOLERANCE}); \
             seed {} reproduces bit-exactly: {reproducible}",
            hi - lo,
            settings.seed
        ),
        transcript: format!("{lo:?} {hi:?} {blo:?} {bhi:?}\n"),
    }
}

// ---- 9 -------------------------------------------------------------------

fn entity(path: &str, qualified: &str, line: u32, kind: NodeKind) -> CodeNode {
    let name = qualified.rsplit('.').next().unwrap().to_string();
    CodeNode {
        id: NodeId::entity(path, qualified, line),
        kind,
        content: format!("def {name}(self): pass"),
        name,
        path: path.to_string(),
        span: (line, line + 2),
    }
}

/// One synthetic repository: `files` files with two classes of four methods
/// and two free functions each.
fn synthetic_graph(files: usize) -> (CodeGraph, Vec<NodeId>, BTreeMap<NodeId, Vec<NodeId>>) {
    let mut nodes = vec![CodeNode {
        id: NodeId::from(""),
        kind: NodeKind::Directory,
        name: String::new(),
        path: String::new(),
        span: (0, 0),
        content: String::new(),
    }];
    let mut edges = Vec::new();
    let mut functions = Vec::new();
    let mut siblings: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for f in 0..files {
        let path = format!("mod{f}.py");
        nodes.push(CodeNode {
            id: NodeId::new(path.clone()),
            kind: NodeKind::File,
            name: path.clone(),
            path: path.clone(),
            span: (1, 100),
            content: String::new(),
        });
        edges.push(CodeEdge::new(
            NodeId::from(""),
            NodeId::new(path.clone()),
            EdgeKind::Contains,
        ));
        let mut line = 1;
        for c in 0..2 {
            let class = entity(&path, &format!("C{c}"), line, NodeKind::Class);
            edges.push(CodeEdge::new(
                NodeId::new(path.clone()),
                class.id.clone(),
                EdgeKind::Contains,
            ));
            let class_id = class.id.clone();
            nodes.push(class);
            line += 1;
            let mut methods = Vec::new();
            for m in 0..4 {
                let method = entity(&path, &format!("C{c}.m{m}"), line, NodeKind::Function);
                line += 3;
                edges.push(CodeEdge::new(
                    class_id.clone(),
                    method.id.clone(),
                    EdgeKind::Contains,
                ));
                methods.push(method.id.clone());
                nodes.push(method);
            }
            for m in &methods {
                siblings.insert(
                    m.clone(),
                    methods.iter().filter(|x| *x != m).cloned().collect(),
                );
            }
            functions.extend(methods);
        }
        for i in 0..2 {
            let free = entity(&path, &format!("f{i}"), line, NodeKind::Function);
            line += 3;
            edges.push(CodeEdge::new(
                NodeId::new(path.clone()),
                free.id.clone(),
                EdgeKind::Contains,
            ));
            functions.push(free.id.clone());
            nodes.push(free);
        }
    }
    let graph = CodeGraph::new(Language::Python, nodes, edges).expect("synthetic graph");
    (graph, functions, siblings)
}

fn directional_gain() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let config = SpiderConfig::default();
    let mut truths = BTreeMap::new();
    let mut der = BTreeMap::new();
    let mut spider = BTreeMap::new();
    let mut transcript = String::new();
    for i in 0..SYNTHETIC_INSTANCES {
        let (graph, functions, siblings) = synthetic_graph(6);
        // gold methods sit well below the cut-off; a sibling of each is a top decoy
        let methods: Vec<&NodeId> = functions
            .iter()
            .filter(|f| siblings.contains_key(*f))
            .collect();
        let gold_count = rng.gen_range(1..=3);
        let gold: Vec<NodeId> = methods
            .choose_multiple(&mut rng, gold_count)
            .map(|m| (*m).clone())
            .collect();
        let mut scores: BTreeMap<NodeId, f64> = functions
            .iter()
            .map(|f| (f.clone(), rng.gen_range(0.0..0.5)))
            .collect();
        let mut replies = BTreeMap::new();
        for g in &gold {
            let decoy = siblings[g]
                .iter()
                .find(|s| !gold.contains(s))
                .expect("a non-gold sibling")
                .clone();
            scores.insert(decoy.clone(), rng.gen_range(0.9..1.0));
            scores.insert(g.clone(), rng.gen_range(0.2..0.35));
            let picks: Vec<&str> = gold
                .iter()
                .filter(|x| siblings[&decoy].contains(x))
                .map(NodeId::as_str)
                .collect();
            replies.insert(decoy.to_string(), serde_json::to_string(&picks).unwrap());
        }
        let ranked =
            RankedList::from_scores(scores.into_iter().collect(), format!("q{i}")).unwrap();
        let filter = LlmFilter::new(
            ScriptedChat::new(Some("[]".into()), replies),
            FilterSettings::default(),
        );
        let result = run_spider(&graph, &ranked, "issue", &config, &filter).unwrap();
        let baseline = SpiderResult::from_ranking(&ranked, &config);

        let id = format!("syn-{i:03}");
        truths.insert(
            id.clone(),
            GroundTruth {
                node_ids: gold.into_iter().collect(),
                granularity: NodeKind::Function,
                excluded: false,
                diagnostics: vec![],
            },
        );
        der.insert(id.clone(), baseline.ids());
        spider.insert(id, result.ids());
        transcript += &serde_json::to_string(&result).unwrap();
        transcript.push('\n');
    }
    let settings = BootstrapSettings::default();
    let der_report = evaluate_dataset(&truths, &der, 20, &settings).unwrap();
    let spider_report = evaluate_dataset(&truths, &spider, 20, &settings).unwrap();
    let d = der_report.means.unwrap();
    let s = spider_report.means.unwrap();
    let elapsed = start.elapsed();
    let gain = if d.recall > 0.0 {
        (s.recall - d.recall) / d.recall * 100.0
    } else {
        f64::INFINITY
    };
    let _ = writeln!(
        transcript,
        "{}",
        serde_json::to_string(&der_report).unwrap()
    );
    let _ = writeln!(
        transcript,
        "{}",
        serde_json::to_string(&spider_report).unwrap()
    );
    Outcome {
        pass: s.recall > d.recall && elapsed < SYNTHETIC_BUDGET,
        detail: format!(
            "{SYNTHETIC_INSTANCES} instances: Recall@20 {:.3} -> {:.3} ({gain:+.1}%), Acc@20 {:.3} -> {:.3}, {:.2}s < 30s",
            d.recall,
            s.recall,
            d.acc,
            s.acc,
            elapsed.as_secs_f64()
        ),
        transcript,
    }
}
