//! Runs the `vicpred` binary over small fixtures and compares reruns.
#![allow(dead_code)]

#[path = "../../../core/tests/common/lineage.rs"]
mod lineage;

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::thread::sleep;
use std::time::Duration;

use vicpred_core::lineage::GitHistory;
use vicpred_core::model::{emit_changes, IssueRecord, Severity};

pub const BIN: &str = env!("CARGO_BIN_EXE_vicpred");

pub fn vicpred(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = vicpred(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}

/// Lineage fixture with two fixes (V1, V2) on disk as history, changes and
/// issues. Changes are submitted one day apart.
pub fn write_label_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    fs::create_dir_all(dir).unwrap();
    let case = lineage::hand_cases().into_iter().find(|c| c.name == "two fixes in one history").unwrap();
    let h = GitHistory::from_fixture(&case.fixture);
    let changes: Vec<_> = (0..h.len())
        .filter(|&i| !h.commit(i).baseline)
        .enumerate()
        .map(|(k, i)| {
            let mut c = lineage::change_at(&h, i);
            c.created_at = 1_600_000_000 + 86_400 * k as i64;
            c.submitted_at = c.created_at + 3_600;
            c.patch_sets[0].uploaded_at = c.created_at;
            c
        })
        .collect();
    let issue = |bug: &str, cve: &str, fix: &str| IssueRecord {
        bug_id: bug.into(),
        cve_ids: vec![cve.into()],
        severity: Severity::High,
        linked_change_ids: vec![fix.into()],
        published_at: 1_700_000_000,
    };
    let issues = [issue("b1", "CVE-1", "V1"), issue("b2", "CVE-2", "V2")];
    let paths = (dir.join("history.json"), dir.join("changes.jsonl"), dir.join("issues.jsonl"));
    fs::write(&paths.0, serde_json::to_string(&case.fixture).unwrap()).unwrap();
    fs::write(&paths.1, emit_changes(&changes)).unwrap();
    let lines: Vec<String> = issues.iter().map(|i| serde_json::to_string(i).unwrap()).collect();
    fs::write(&paths.2, lines.join("\n") + "\n").unwrap();
    paths
}

/// Output files with manifests stripped of their wall time.
fn snapshot(paths: &[PathBuf]) -> BTreeMap<PathBuf, Vec<u8>> {
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            let bytes = if p.to_string_lossy().ends_with("manifest.json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v.as_object_mut().unwrap().remove("wall_time_ms");
                serde_json::to_vec(&v).unwrap()
            } else {
                bytes
            };
            (p.clone(), bytes)
        })
        .collect()
}

#[derive(Debug)]
pub struct RerunCheck {
    pub command: String,
    pub artifacts: usize,
    pub identical: bool,
}

fn twice(command: &str, args: &[&str], outputs: Vec<PathBuf>) -> RerunCheck {
    ok(args);
    let first = snapshot(&outputs);
    ok(args);
    let second = snapshot(&outputs);
    RerunCheck { command: command.into(), artifacts: outputs.len(), identical: first == second }
}

fn post(port: u16, path: &str, body: &str) -> String {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    write!(
        stream,
        "POST {path} HTTP/1.1\r\nhost: localhost\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    reply
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

/// Starts `serve`, scores and labels a few changes, then stops it.
fn serve_session(model: &Path, state: &Path, changes: &[String], pool: &Path, feedback: &Path) {
    let _ = fs::remove_file(pool);
    let _ = fs::remove_file(feedback);
    let port = free_port();
    let port_s = port.to_string();
    let child = Command::new(BIN)
        .args(["serve", "--model", s(model), "--state", s(state), "--port", &port_s])
        .args(["--reviewers", "r1,r2,r3", "--pool-state", s(pool), "--feedback-log", s(feedback)])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let _server = Server(child);
    let mut ready = false;
    for _ in 0..200 {
        if TcpStream::connect(("127.0.0.1", port)).is_ok() {
            ready = true;
            break;
        }
        sleep(Duration::from_millis(25));
    }
    assert!(ready, "server did not start");
    for c in changes {
        let reply = post(port, "/v1/score", &format!(r#"{{"trigger":"sent_for_review","change":{c}}}"#));
        assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    }
    for c in changes.iter().take(3) {
        let id = serde_json::from_str::<serde_json::Value>(c).unwrap()["change_id"].as_str().unwrap().to_string();
        let reply = post(port, "/v1/feedback", &format!(r#"{{"change_id":"{id}","label":"ViC"}}"#));
        assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    }
}

/// Runs every subcommand twice with the same inputs and seed.
pub fn rerun_all(work: &Path) -> Vec<RerunCheck> {
    let p = |rel: &str| work.join(rel);
    let mut checks = Vec::new();

    let (history, fx_changes, fx_issues) = write_label_fixture(&p("fixture"));
    checks.push(twice(
        "synth",
        &["synth", "--out", s(&p("syn")), "--seed", "4", "--months", "14", "--changes", "600", "--vics", "60"],
        vec![p("syn/changes.jsonl"), p("syn/labels.jsonl"), p("syn/manifest.json")],
    ));
    checks.push(twice(
        "ingest",
        &["ingest", "--changes", s(&fx_changes), "--issues", s(&fx_issues), "--out", s(&p("ing"))],
        vec![p("ing/changes.jsonl"), p("ing/issues.jsonl"), p("ing/manifest.json")],
    ));
    checks.push(twice(
        "label",
        &[
            "label", "--changes", s(&fx_changes), "--issues", s(&fx_issues), "--history", s(&history),
            "--label-delay", "14d", "--out", s(&p("lab")),
        ],
        vec![p("lab/labels.jsonl"), p("lab/unresolved.jsonl"), p("lab/manifest.json")],
    ));

    let (changes, labels) = (p("syn/changes.jsonl"), p("syn/labels.jsonl"));
    let corpus = ["--changes", s(&changes), "--labels", s(&labels)];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        head.iter().chain(corpus.iter()).chain(tail.iter()).map(|x| x.to_string()).collect()
    };
    let run = |name: &str, args: Vec<String>, outs: Vec<PathBuf>| {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        twice(name, &refs, outs)
    };

    checks.push(run(
        "featurize",
        with(&["featurize"], &["--out", s(&p("features.csv"))]),
        vec![p("features.csv"), p("features.csv.manifest.json")],
    ));
    checks.push(run(
        "train",
        with(
            &["train", "--matrix", s(&p("features.csv"))],
            &[
                "--classifier", "random-forest", "--trees", "25", "--seed", "9", "--out", s(&p("model.json")),
                "--state-out", s(&p("state.json")),
            ],
        ),
        vec![p("model.json"), p("state.json"), p("model.json.manifest.json")],
    ));
    let report = |d: &str| vec![p(&format!("{d}/report.json")), p(&format!("{d}/report.csv")), p(&format!("{d}/manifest.json"))];
    checks.push(run(
        "eval nfold",
        with(&["eval", "nfold"], &["--n", "5", "--classifier", "rf", "--trees", "20", "--seed", "7", "--out", s(&p("nf"))]),
        report("nf"),
    ));
    checks.push(run(
        "eval online",
        with(&["eval", "online"], &["--classifier", "rf", "--trees", "20", "--seed", "7", "--label-delay", "30d", "--out", s(&p("on"))]),
        report("on"),
    ));
    checks.push(run(
        "eval ablation",
        with(&["eval", "ablation"], &["--n", "4", "--classifier", "dt", "--seed", "3", "--out", s(&p("ab"))]),
        vec![p("ab/ablation.csv"), p("ab/ablation.json"), p("ab/manifest.json")],
    ));

    let lines: Vec<String> = fs::read_to_string(&changes).unwrap().lines().map(String::from).collect();
    fs::write(p("one.json"), &lines[lines.len() / 2]).unwrap();
    checks.push(twice(
        "score",
        &[
            "score", "--model", s(&p("model.json")), "--state", s(&p("state.json")), "--change", s(&p("one.json")),
            "--testing-threshold", "0.2", "--out", s(&p("verdict.json")),
        ],
        vec![p("verdict.json"), p("verdict.json.manifest.json")],
    ));

    let sample: Vec<String> = lines.iter().step_by(40).cloned().collect();
    let (pool, feedback) = (p("pool.json"), p("feedback.jsonl"));
    serve_session(&p("model.json"), &p("state.json"), &sample, &pool, &feedback);
    let read = || (fs::read(&pool).unwrap_or_default(), fs::read(&feedback).unwrap_or_default());
    let first = read();
    serve_session(&p("model.json"), &p("state.json"), &sample, &pool, &feedback);
    let second = read();
    let identical = first == second && !first.1.is_empty();
    checks.push(RerunCheck { command: "serve".into(), artifacts: 2, identical });
    checks
}
