//! Linear commit history with per-commit file snapshots.
//!
//! Two loaders feed the same representation: a self-contained JSON fixture
//! (ordered commits, each listing the full new content of the files it
//! touches) and a real git work tree read through `git` subprocess plumbing
//! along the first-parent chain.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{diff_lines, file_edit_from_texts, FileEdit, Hunk};

pub type Lines = Arc<Vec<String>>;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("history fixture: {0}")]
    Fixture(#[from] serde_json::Error),
    #[error("git: {0}")]
    Git(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryFixture {
    /// Files that exist before the first commit; their lines predate the corpus.
    #[serde(default)]
    pub base: BTreeMap<String, String>,
    pub commits: Vec<FixtureCommit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCommit {
    pub hash: String,
    #[serde(default)]
    pub change_id: Option<String>,
    /// New full content per touched path; `null` deletes the file.
    pub files: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone)]
pub struct CommitInfo {
    pub hash: String,
    pub change_id: String,
    /// Snapshot of pre-corpus content rather than a real change.
    pub baseline: bool,
    files: BTreeMap<String, Option<Lines>>,
}

impl CommitInfo {
    pub fn touched(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GitHistory {
    commits: Vec<CommitInfo>,
    touched: BTreeMap<String, Vec<usize>>,
    by_change: HashMap<String, usize>,
}

fn to_lines(text: &str) -> Lines {
    Arc::new(text.lines().map(str::to_string).collect())
}

impl GitHistory {
    fn push(&mut self, commit: CommitInfo) {
        let idx = self.commits.len();
        for path in commit.files.keys() {
            self.touched.entry(path.clone()).or_default().push(idx);
        }
        if !commit.baseline {
            self.by_change.entry(commit.change_id.clone()).or_insert(idx);
        }
        self.commits.push(commit);
    }

    pub fn from_fixture(fixture: &HistoryFixture) -> Self {
        let mut h = GitHistory::default();
        if !fixture.base.is_empty() {
            h.push(CommitInfo {
                hash: "<base>".into(),
                change_id: "<base>".into(),
                baseline: true,
                files: fixture.base.iter().map(|(p, t)| (p.clone(), Some(to_lines(t)))).collect(),
            });
        }
        for c in &fixture.commits {
            h.push(CommitInfo {
                hash: c.hash.clone(),
                change_id: c.change_id.clone().unwrap_or_else(|| c.hash.clone()),
                baseline: false,
                files: c
                    .files
                    .iter()
                    .map(|(p, t)| (p.clone(), t.as_deref().map(to_lines)))
                    .collect(),
            });
        }
        h
    }

    pub fn from_fixture_json(json: &str) -> Result<Self, HistoryError> {
        Ok(Self::from_fixture(&serde_json::from_str(json)?))
    }

    /// Reads the first-parent history of `HEAD`. The change id of a commit is
    /// its `Change-Id:` trailer when present, else the commit hash.
    pub fn from_git_repo(repo: &Path) -> Result<Self, HistoryError> {
        let git = |args: &[&str]| -> Result<String, HistoryError> {
            let out = Command::new("git").arg("-C").arg(repo).args(args).output()?;
            if !out.status.success() {
                return Err(HistoryError::Git(String::from_utf8_lossy(&out.stderr).trim().to_string()));
            }
            Ok(String::from_utf8_lossy(&out.stdout).into_owned())
        };
        let revs = git(&["rev-list", "--first-parent", "--reverse", "HEAD"])?;
        let mut h = GitHistory::default();
        let mut parent: Option<String> = None;
        for hash in revs.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let message = git(&["log", "-1", "--format=%B", hash])?;
            let change_id = message
                .lines()
                .rev()
                .find_map(|l| l.trim().strip_prefix("Change-Id:").map(|s| s.trim().to_string()))
                .unwrap_or_else(|| hash.to_string());
            let status = match &parent {
                Some(p) => git(&["diff-tree", "-r", "--no-renames", "--name-status", p, hash])?,
                None => git(&["diff-tree", "-r", "--root", "--no-renames", "--name-status", "--no-commit-id", hash])?,
            };
            let mut files = BTreeMap::new();
            for line in status.lines() {
                let mut parts = line.split('\t');
                let (Some(code), Some(path)) = (parts.next(), parts.next()) else { continue };
                let content = if code.starts_with('D') {
                    None
                } else {
                    Some(to_lines(&git(&["show", &format!("{hash}:{path}")])?))
                };
                files.insert(path.to_string(), content);
            }
            h.push(CommitInfo { hash: hash.to_string(), change_id, baseline: false, files });
            parent = Some(hash.to_string());
        }
        Ok(h)
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    pub fn commit(&self, idx: usize) -> &CommitInfo {
        &self.commits[idx]
    }

    pub fn commits(&self) -> &[CommitInfo] {
        &self.commits
    }

    /// First commit carrying `change_id`; cherry-picks resolve to the original.
    pub fn commit_of_change(&self, change_id: &str) -> Option<usize> {
        self.by_change.get(change_id).copied()
    }

    /// Content of `path` as of commit `idx` (inclusive).
    pub fn file_at(&self, idx: usize, path: &str) -> Option<Lines> {
        let list = self.touched.get(path)?;
        let pos = list.partition_point(|&c| c <= idx);
        if pos == 0 {
            return None;
        }
        self.commits[list[pos - 1]].files.get(path).cloned().flatten()
    }

    /// Content of `path` just before commit `idx`.
    pub fn file_before(&self, idx: usize, path: &str) -> Option<Lines> {
        idx.checked_sub(1).and_then(|p| self.file_at(p, path))
    }

    /// Latest commit at or before `idx` that touched `path`.
    pub fn last_touch(&self, idx: usize, path: &str) -> Option<usize> {
        let list = self.touched.get(path)?;
        let pos = list.partition_point(|&c| c <= idx);
        (pos > 0).then(|| list[pos - 1])
    }

    /// Hunks commit `idx` applied to `path`.
    pub fn hunks(&self, idx: usize, path: &str) -> Vec<Hunk> {
        let empty = Vec::new();
        let before = self.file_before(idx, path);
        let after = self.file_at(idx, path);
        diff_lines(
            before.as_deref().unwrap_or(&empty),
            after.as_deref().unwrap_or(&empty),
        )
    }

    /// File edits of commit `idx` against its parent, sorted by path.
    pub fn edits_of(&self, idx: usize) -> Vec<FileEdit> {
        self.commits[idx]
            .touched()
            .map(|path| {
                let join = |l: Option<Lines>| l.map(|v| v.join("\n"));
                let before = join(self.file_before(idx, path));
                let after = join(self.file_at(idx, path));
                file_edit_from_texts(path, before.as_deref(), after.as_deref())
            })
            .filter(|e| e.churn() > 0)
            .collect()
    }
}
