//! Change, review and issue metadata.
//!
//! Records arrive as JSONL exports of a code review service and an issue
//! tracker. Everything downstream (lineage, features, evaluation) reads the
//! validated, immutable records produced by [`ingest_changes`].

mod diff;
mod ingest;
mod link;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use diff::{diff_lines, file_edit_from_texts};
pub use ingest::{emit_changes, emit_issues, ingest_changes, ingest_issues, IngestError};
pub use link::{link_bugs_to_changes, BugLinks, UnresolvedLink};

/// Unix seconds, UTC.
pub type Timestamp = i64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Identity {
    pub account_id: String,
    pub email_domain: String,
}

impl Identity {
    pub fn new(account_id: impl Into<String>, email_domain: impl Into<String>) -> Self {
        Self {
            account_id: account_id.into(),
            email_domain: email_domain.into().to_ascii_lowercase(),
        }
    }
}

/// A vote on a change. Score 0 comments are dropped at ingest and never
/// become review events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewEvent {
    #[serde(flatten)]
    pub reviewer: Identity,
    pub score: i8,
    pub timestamp: Timestamp,
}

impl ReviewEvent {
    pub fn is_positive(&self) -> bool {
        self.score > 0
    }
}

/// One contiguous replacement block: old lines `[old_start, old_start + old_count)`
/// of the pre-image are replaced by new lines `[new_start, new_start + new_count)`
/// of the post-image. Line numbers are 1-based. For a pure insertion
/// `old_start` is the pre-image line the insertion lands before.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u32,
    pub old_count: u32,
    pub new_start: u32,
    pub new_count: u32,
    #[serde(default)]
    pub old_lines: Vec<String>,
    #[serde(default)]
    pub new_lines: Vec<String>,
}

impl Hunk {
    /// A symmetric hunk pairs each deleted line with the added line at the
    /// same offset; those lines count as modified.
    pub fn is_modification(&self) -> bool {
        self.old_count == self.new_count && self.old_count > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEdit {
    pub path: String,
    pub lines_added: u32,
    pub lines_deleted: u32,
    pub added_line_numbers: Vec<u32>,
    pub deleted_line_numbers: Vec<u32>,
    #[serde(default)]
    pub hunks: Vec<Hunk>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub binary: bool,
}

impl FileEdit {
    /// Builds an edit from its hunks, deriving the line-number lists.
    pub fn from_hunks(path: impl Into<String>, hunks: Vec<Hunk>) -> Self {
        let mut added = Vec::new();
        let mut deleted = Vec::new();
        for h in &hunks {
            deleted.extend(h.old_start..h.old_start + h.old_count);
            added.extend(h.new_start..h.new_start + h.new_count);
        }
        Self {
            path: path.into(),
            lines_added: added.len() as u32,
            lines_deleted: deleted.len() as u32,
            added_line_numbers: added,
            deleted_line_numbers: deleted,
            hunks,
            binary: false,
        }
    }

    pub fn churn(&self) -> u64 {
        u64::from(self.lines_added) + u64::from(self.lines_deleted)
    }

    /// Lines counted as modified (present in both lists) by positional pairing.
    pub fn modified_lines(&self) -> u32 {
        self.hunks
            .iter()
            .filter(|h| h.is_modification())
            .map(|h| h.old_count)
            .sum()
    }

    /// Added lines with their post-image numbers, in order.
    pub fn added_lines(&self) -> impl Iterator<Item = (u32, &str)> {
        self.hunks.iter().flat_map(|h| {
            h.new_lines
                .iter()
                .enumerate()
                .map(move |(i, l)| (h.new_start + i as u32, l.as_str()))
        })
    }

    /// Deleted lines with their pre-image numbers, in order.
    pub fn deleted_lines(&self) -> impl Iterator<Item = (u32, &str)> {
        self.hunks.iter().flat_map(|h| {
            h.old_lines
                .iter()
                .enumerate()
                .map(move |(i, l)| (h.old_start + i as u32, l.as_str()))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchSet {
    pub index: u32,
    pub uploaded_at: Timestamp,
    pub file_edits: Vec<FileEdit>,
}

impl PatchSet {
    pub fn churn(&self) -> u64 {
        self.file_edits.iter().map(FileEdit::churn).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub change_id: String,
    #[serde(default)]
    pub commit_hashes: Vec<String>,
    pub project: String,
    pub author: Identity,
    #[serde(default)]
    pub reviews: Vec<ReviewEvent>,
    pub patch_sets: Vec<PatchSet>,
    pub created_at: Timestamp,
    pub submitted_at: Timestamp,
    pub final_edits: Vec<FileEdit>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub referenced_bug_ids: Vec<String>,
}

impl ChangeRecord {
    pub fn is_author(&self, who: &Identity) -> bool {
        who.account_id == self.author.account_id
    }

    pub fn touched_paths(&self) -> impl Iterator<Item = &str> {
        self.final_edits.iter().map(|e| e.path.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Critical,
    High,
    Moderate,
    Low,
    None,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub bug_id: String,
    #[serde(default)]
    pub cve_ids: Vec<String>,
    pub severity: Severity,
    #[serde(default)]
    pub linked_change_ids: Vec<String>,
    pub published_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelKind {
    ViC,
    VfC,
    LNC,
}

impl LabelKind {
    /// Binary training target: only vulnerability-inducing changes are positive.
    pub fn target(self) -> u8 {
        u8::from(self == LabelKind::ViC)
    }
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LabelKind::ViC => "ViC",
            LabelKind::VfC => "VfC",
            LabelKind::LNC => "LNC",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Lineage,
    Manual,
    Assumed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub cve_id: String,
    pub vfc_change_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub kind: LabelKind,
    pub source: LabelSource,
    pub provenance: Option<Provenance>,
    /// When the label becomes visible to training.
    pub known_at: Timestamp,
}

/// A change together with its label, as one row of the labels file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub change_id: String,
    #[serde(flatten)]
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledChange {
    pub change: ChangeRecord,
    pub label: Label,
}
