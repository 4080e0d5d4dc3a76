use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::de::DeserializeOwned;
use thiserror::Error;

use super::{ChangeRecord, FileEdit, IssueRecord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("line {0}: not a JSON object")]
    MalformedLine(usize),
    #[error("line {line}: schema violation at `{field}`")]
    SchemaViolation { line: usize, field: String },
    #[error("change {change_id}: {rule}")]
    InvariantViolation { change_id: String, rule: String },
}

fn invariant(change_id: &str, rule: impl Into<String>) -> IngestError {
    IngestError::InvariantViolation {
        change_id: change_id.to_string(),
        rule: rule.into(),
    }
}

fn parse_lines<T: DeserializeOwned>(stream: &str) -> Result<Vec<(usize, T)>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in stream.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|_| IngestError::MalformedLine(line_no))?;
        if !value.is_object() {
            return Err(IngestError::MalformedLine(line_no));
        }
        let rec = serde_json::from_value(value).map_err(|e| IngestError::SchemaViolation {
            line: line_no,
            field: field_of(&e.to_string()),
        })?;
        out.push((line_no, rec));
    }
    Ok(out)
}

/// Pulls the offending field name out of a serde message, falling back to the
/// whole message.
fn field_of(msg: &str) -> String {
    let mut parts = msg.split('`');
    match (parts.next(), parts.next()) {
        (Some(_), Some(name)) => name.to_string(),
        _ => msg.to_string(),
    }
}

/// Parses and validates a changes export. Fails on the first bad record.
pub fn ingest_changes(stream: &str) -> Result<Vec<ChangeRecord>, IngestError> {
    let parsed: Vec<(usize, ChangeRecord)> = parse_lines(stream)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(parsed.len());
    for (line, mut rec) in parsed {
        normalize(&mut rec, line)?;
        validate(&rec)?;
        if !seen.insert(rec.change_id.clone()) {
            return Err(invariant(&rec.change_id, "duplicate change_id"));
        }
        out.push(rec);
    }
    out.sort_by(|a, b| {
        a.submitted_at
            .cmp(&b.submitted_at)
            .then_with(|| a.change_id.cmp(&b.change_id))
    });
    Ok(out)
}

fn normalize(rec: &mut ChangeRecord, line: usize) -> Result<(), IngestError> {
    rec.author.email_domain = rec.author.email_domain.to_ascii_lowercase();
    for r in &mut rec.reviews {
        r.reviewer.email_domain = r.reviewer.email_domain.to_ascii_lowercase();
        if !(-2..=2).contains(&r.score) {
            return Err(IngestError::SchemaViolation {
                line,
                field: "reviews.score".into(),
            });
        }
    }
    // Zero-score entries are plain comments, not votes.
    rec.reviews.retain(|r| r.score != 0);
    Ok(())
}

fn check_domain(change_id: &str, domain: &str) -> Result<(), IngestError> {
    if domain.is_empty() || domain.contains('@') {
        return Err(invariant(change_id, format!("invalid email_domain {domain:?}")));
    }
    Ok(())
}

fn check_edit(change_id: &str, e: &FileEdit) -> Result<(), IngestError> {
    let ascending = |v: &[u32]| v.windows(2).all(|w| w[0] < w[1]);
    if e.lines_added as usize != e.added_line_numbers.len() {
        return Err(invariant(change_id, format!("{}: lines_added != |added_line_numbers|", e.path)));
    }
    if e.lines_deleted as usize != e.deleted_line_numbers.len() {
        return Err(invariant(change_id, format!("{}: lines_deleted != |deleted_line_numbers|", e.path)));
    }
    if !ascending(&e.added_line_numbers) || !ascending(&e.deleted_line_numbers) {
        return Err(invariant(change_id, format!("{}: line numbers not sorted", e.path)));
    }
    if e.hunks.is_empty() {
        return Ok(());
    }
    for h in &e.hunks {
        let bad_old = !h.old_lines.is_empty() && h.old_lines.len() != h.old_count as usize;
        let bad_new = !h.new_lines.is_empty() && h.new_lines.len() != h.new_count as usize;
        if bad_old || bad_new {
            return Err(invariant(change_id, format!("{}: hunk text length != count", e.path)));
        }
    }
    let derived = FileEdit::from_hunks(e.path.clone(), e.hunks.clone());
    if derived.added_line_numbers != e.added_line_numbers
        || derived.deleted_line_numbers != e.deleted_line_numbers
    {
        return Err(invariant(change_id, format!("{}: line lists disagree with hunks", e.path)));
    }
    Ok(())
}

fn validate(rec: &ChangeRecord) -> Result<(), IngestError> {
    let id = rec.change_id.as_str();
    check_domain(id, &rec.author.email_domain)?;
    for r in &rec.reviews {
        check_domain(id, &r.reviewer.email_domain)?;
    }
    if rec.submitted_at < rec.created_at {
        return Err(invariant(id, "submitted_at < created_at"));
    }
    if rec.patch_sets.is_empty() {
        return Err(invariant(id, "no patch sets"));
    }
    let mut prev_upload = i64::MIN;
    for (i, ps) in rec.patch_sets.iter().enumerate() {
        if ps.index as usize != i + 1 {
            return Err(invariant(id, "patch set indices not contiguous from 1"));
        }
        if ps.uploaded_at < prev_upload {
            return Err(invariant(id, "patch set uploaded_at decreasing"));
        }
        prev_upload = ps.uploaded_at;
        for e in &ps.file_edits {
            check_edit(id, e)?;
        }
    }
    for e in &rec.final_edits {
        check_edit(id, e)?;
    }
    check_composition(rec)
}

/// The merged edits must be the composition of the patch-set deltas. With a
/// single patch set they must be identical; otherwise the per-path net line
/// delta must agree (exact composition needs the baseline text).
fn check_composition(rec: &ChangeRecord) -> Result<(), IngestError> {
    let id = rec.change_id.as_str();
    let by_path = |edits: &[FileEdit]| -> BTreeMap<String, FileEdit> {
        edits.iter().map(|e| (e.path.clone(), e.clone())).collect()
    };
    if rec.patch_sets.len() == 1 {
        if by_path(&rec.patch_sets[0].file_edits) != by_path(&rec.final_edits) {
            return Err(invariant(id, "final_edits differ from the only patch set"));
        }
        return Ok(());
    }
    let mut net: BTreeMap<&str, i64> = BTreeMap::new();
    let mut touched: BTreeSet<&str> = BTreeSet::new();
    for ps in &rec.patch_sets {
        for e in &ps.file_edits {
            *net.entry(&e.path).or_default() += i64::from(e.lines_added) - i64::from(e.lines_deleted);
            touched.insert(&e.path);
        }
    }
    for e in &rec.final_edits {
        if !touched.contains(e.path.as_str()) {
            return Err(invariant(id, format!("{}: in final_edits but no patch set", e.path)));
        }
        let expected = net.remove(e.path.as_str()).unwrap_or(0);
        if expected != i64::from(e.lines_added) - i64::from(e.lines_deleted) {
            return Err(invariant(id, format!("{}: net line delta disagrees with patch sets", e.path)));
        }
    }
    if let Some((path, _)) = net.into_iter().find(|(_, d)| *d != 0) {
        return Err(invariant(id, format!("{path}: patch sets change it but final_edits do not")));
    }
    Ok(())
}

/// Parses an issues export; `bug_id` must be unique.
pub fn ingest_issues(stream: &str) -> Result<Vec<IssueRecord>, IngestError> {
    let parsed: Vec<(usize, IssueRecord)> = parse_lines(stream)?;
    let mut seen = HashSet::new();
    let mut out: Vec<IssueRecord> = Vec::with_capacity(parsed.len());
    for (_, rec) in parsed {
        if !seen.insert(rec.bug_id.clone()) {
            return Err(invariant(&rec.bug_id, "duplicate bug_id"));
        }
        out.push(rec);
    }
    out.sort_by(|a, b| a.bug_id.cmp(&b.bug_id));
    Ok(out)
}

/// Canonical JSONL re-emission.
pub fn emit_changes(changes: &[ChangeRecord]) -> String {
    emit(changes)
}

pub fn emit_issues(issues: &[IssueRecord]) -> String {
    emit(issues)
}

fn emit<T: serde::Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("records serialize"));
        out.push('\n');
    }
    out
}
