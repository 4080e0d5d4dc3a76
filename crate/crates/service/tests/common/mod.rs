#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use serde_json::{json, Value};
use tower::ServiceExt;
use vicpred_core::classify::{train, ClassifierKind, Dataset, Hyperparameters};
use vicpred_core::features::{full_schema, resolve_subset, Featurizer, HistoryConfig, HistoryState};
use vicpred_core::model::{ChangeRecord, LabeledChange};
use vicpred_core::synth::{generate, SynthConfig};
use vicpred_service::{router, Service, ServiceConfig, Snapshot};

pub struct Fixture {
    pub dir: tempfile::TempDir,
    /// (model, state checkpoint) pairs; the service starts on the first.
    pub artifacts: Vec<(PathBuf, PathBuf)>,
    pub changes: Vec<ChangeRecord>,
}

fn state_of(corpus: &[LabeledChange], upto: usize) -> HistoryState {
    let mut feed: Vec<&LabeledChange> = corpus[..upto].iter().collect();
    feed.sort_by(|a, b| (a.label.known_at, &a.change.change_id).cmp(&(b.label.known_at, &b.change.change_id)));
    let mut s = HistoryState::new(HistoryConfig::default());
    for c in feed {
        s.record_labeled_change(&c.change, &c.label).unwrap();
    }
    s
}

pub fn fixture() -> Fixture {
    let corpus = generate(&SynthConfig { months: 14, changes: 700, vics: 70, ..Default::default() }).labeled();
    let dir = tempfile::tempdir().unwrap();
    let featurizer = Featurizer::new(Default::default());
    let specs = [
        (ClassifierKind::RandomForest, "all", 700),
        (ClassifierKind::DecisionTree, "VH+CC+RP", 500),
        (ClassifierKind::LogisticRegression, "HH+VH+PC", 350),
    ];
    let mut artifacts = Vec::new();
    for (k, (kind, subset, upto)) in specs.into_iter().enumerate() {
        let state = state_of(&corpus, upto);
        let cols = resolve_subset(subset).unwrap();
        let mut data = Dataset::new(full_schema().select(&cols));
        for c in &corpus[..upto] {
            let x = featurizer.featurize(&c.change, &state, c.change.submitted_at);
            data.push(c.change.change_id.clone(), cols.iter().map(|&i| x[i]).collect(), c.label.kind.target()).unwrap();
        }
        let params = Hyperparameters { n_trees: 40, ..Default::default() };
        let model = train(kind, &params, &data, 5).unwrap();
        let mp = dir.path().join(format!("model{k}.json"));
        let sp = dir.path().join(format!("state{k}.json"));
        std::fs::write(&mp, model.to_json()).unwrap();
        std::fs::write(&sp, state.to_checkpoint()).unwrap();
        artifacts.push((mp, sp));
    }
    Fixture { dir, artifacts, changes: corpus.into_iter().map(|c| c.change).collect() }
}

pub fn service(fx: &Fixture, reviewers: &[&str]) -> Arc<Service> {
    let mut cfg = ServiceConfig::new(fx.dir.path().join("feedback.jsonl"));
    cfg.reviewers = reviewers.iter().map(|s| s.to_string()).collect();
    cfg.pool_state = Some(fx.dir.path().join("pool.json"));
    let (m, s) = &fx.artifacts[0];
    Arc::new(Service::new(cfg, Snapshot::load(1, &[m.clone()], s).unwrap()).unwrap())
}

pub async fn call(app: &axum::Router, method: &str, path: &str, body: String) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json").body(Body::from(body)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[derive(Debug)]
pub struct StressReport {
    pub scores: usize,
    pub swaps: usize,
    pub feedbacks: usize,
    pub malformed: usize,
    pub inconsistencies: usize,
    pub unexpected_status: usize,
    pub assignments: BTreeMap<String, usize>,
    pub fair: bool,
    pub duplicate_accounting_ok: bool,
    pub p99: Duration,
}

enum Op {
    Score(usize),
    Swap(usize),
    Feedback(String),
    Malformed,
}

/// Fires `n` interleaved requests concurrently through the HTTP router and
/// checks every verdict against a separately loaded copy of the artifacts
/// its reported model version was built from.
pub fn stress(fx: &Fixture, n: usize) -> StressReport {
    let reviewers = ["r1", "r2", "r3"];
    let svc = service(fx, &reviewers);
    let app = router(svc.clone());
    let featurizer = Featurizer::new(Default::default());
    let ops: Vec<Op> = (0..n)
        .map(|i| match i % 10 {
            0 => Op::Swap((i / 10 + 1) % fx.artifacts.len()),
            3 | 7 => Op::Feedback(if i % 20 == 3 { format!("unseen-{}", i % 60) } else { fx.changes[i % 97].change_id.clone() }),
            5 if i % 50 == 5 => Op::Malformed,
            _ => Op::Score((i * 37) % fx.changes.len()),
        })
        .collect();

    let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(4).enable_all().build().unwrap();
    let results: Vec<(usize, StatusCode, Value, Duration)> = rt.block_on(async {
        let tasks: Vec<_> = ops
            .iter()
            .enumerate()
            .map(|(i, op)| {
                let app = app.clone();
                let (method, path, body) = match op {
                    Op::Score(c) => ("POST", "/v1/score", json!({"trigger": "sent_for_review", "change": fx.changes[*c]}).to_string()),
                    Op::Swap(a) => {
                        let (m, s) = &fx.artifacts[*a];
                        ("POST", "/v1/model", json!({"model_path": m, "state_path": s}).to_string())
                    }
                    Op::Feedback(id) => ("POST", "/v1/feedback", json!({"change_id": id, "label": "ViC"}).to_string()),
                    Op::Malformed => ("POST", "/v1/score", "{\"trigger\": \"sent_for_review\", \"change\": ".to_string()),
                };
                tokio::spawn(async move {
                    let t = Instant::now();
                    let (status, v) = call(&app, method, path, body).await;
                    (i, status, v, t.elapsed())
                })
            })
            .collect();
        let mut out = Vec::new();
        for t in tasks {
            out.push(t.await.unwrap());
        }
        out
    });

    let mut version_artifact: HashMap<u64, usize> = HashMap::from([(1, 0)]);
    for (i, status, v, _) in &results {
        if let (Op::Swap(a), true) = (&ops[*i], status.is_success()) {
            version_artifact.insert(v["version"].as_u64().unwrap(), *a);
        }
    }
    let snapshots: Vec<Snapshot> =
        fx.artifacts.iter().map(|(m, s)| Snapshot::load(0, &[m.clone()], s).unwrap()).collect();
    let mut report = StressReport {
        scores: 0,
        swaps: 0,
        feedbacks: 0,
        malformed: 0,
        inconsistencies: 0,
        unexpected_status: 0,
        assignments: BTreeMap::new(),
        fair: false,
        duplicate_accounting_ok: false,
        p99: Duration::ZERO,
    };
    let mut latencies = Vec::new();
    let mut flagged = 0usize;
    let mut first_acks: HashMap<String, usize> = HashMap::new();
    for (i, status, v, took) in &results {
        match &ops[*i] {
            Op::Score(c) => {
                report.scores += 1;
                latencies.push(*took);
                if *status != StatusCode::OK {
                    report.unexpected_status += 1;
                    continue;
                }
                let version = v["model_version"].as_u64().unwrap();
                let Some(&a) = version_artifact.get(&version) else {
                    report.inconsistencies += 1;
                    continue;
                };
                let want = snapshots[a].evaluate(&featurizer, &fx.changes[*c], 5).unwrap();
                let names: Vec<&str> = v["top_features"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
                let want_names: Vec<&str> = want.top_features.iter().map(|f| f.name.as_str()).collect();
                if v["score"].as_f64() != Some(want.score) || v["threshold"].as_f64() != Some(want.threshold) || names != want_names {
                    report.inconsistencies += 1;
                }
                if let Some(r) = v["assigned_reviewer"].as_str() {
                    flagged += 1;
                    *report.assignments.entry(r.to_string()).or_default() += 1;
                }
            }
            Op::Swap(_) => {
                report.swaps += 1;
                report.unexpected_status += usize::from(*status != StatusCode::OK);
            }
            Op::Feedback(id) => {
                report.feedbacks += 1;
                report.unexpected_status += usize::from(*status != StatusCode::OK);
                if v["duplicate"] == json!(false) {
                    *first_acks.entry(id.clone()).or_default() += 1;
                }
            }
            Op::Malformed => {
                report.malformed += 1;
                report.unexpected_status += usize::from(*status != StatusCode::BAD_REQUEST);
            }
        }
    }
    let k = reviewers.len();
    report.fair = reviewers.iter().enumerate().all(|(j, r)| {
        let want = (flagged + k - 1 - j) / k;
        report.assignments.get(*r).copied().unwrap_or(0) == want
    }) && svc.pool().cursor == flagged % k;
    let distinct: std::collections::HashSet<&String> = ops
        .iter()
        .filter_map(|o| if let Op::Feedback(id) = o { Some(id) } else { None })
        .collect();
    let logged = std::fs::read_to_string(fx.dir.path().join("feedback.jsonl")).unwrap().lines().count();
    report.duplicate_accounting_ok =
        first_acks.len() == distinct.len() && first_acks.values().all(|&c| c == 1) && logged == distinct.len();
    latencies.sort();
    report.p99 = latencies[(latencies.len() * 99).div_ceil(100) - 1];
    report
}
