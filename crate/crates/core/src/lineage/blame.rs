use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::filter::LineFilter;
use super::history::{GitHistory, Lines};
use crate::model::{ChangeRecord, Hunk};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineOrigin {
    pub path: String,
    /// Line number in the origin commit's post-image.
    pub line_number: u32,
    pub commit_hash: String,
    pub change_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VflKind {
    Deleted,
    Added,
}

/// A vulnerability-fixing line: an edited line of a fix that survived the
/// line filter. Deleted lines carry pre-image numbers, added lines post-image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vfl {
    pub path: String,
    pub line_number: u32,
    pub kind: VflKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineageError {
    #[error("change {0} cannot be resolved against the history")]
    UnresolvableBaseline(String),
    #[error("{path}:{line_number} predates the ingested history")]
    OriginBeforeCorpus { path: String, line_number: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AddedOrigin {
    Origin(LineOrigin),
    /// No earlier line to anchor on (the file is new in the fix).
    SelfOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideReason {
    SelfOrigin,
    BeforeCorpus,
}

/// A VfL whose origin could not be attributed to a change; kept for manual review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideEntry {
    pub vfc_change_id: String,
    pub path: String,
    pub line_number: u32,
    pub kind: VflKind,
    pub reason: SideReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VicFindings {
    pub vics: BTreeMap<String, BTreeSet<String>>,
    pub side: Vec<SideEntry>,
}

/// Blame-based lineage over an immutable history.
pub struct Lineage<'h> {
    history: &'h GitHistory,
    filter: LineFilter,
}

struct Resolved {
    commit: usize,
}

impl<'h> Lineage<'h> {
    pub fn new(history: &'h GitHistory, filter: LineFilter) -> Self {
        Self { history, filter }
    }

    pub fn filter(&self) -> &LineFilter {
        &self.filter
    }

    /// Locates the fix commit and checks that its recorded edits match the
    /// history's pre- and post-images.
    fn resolve(&self, vfc: &ChangeRecord) -> Result<Resolved, LineageError> {
        let unresolvable = || LineageError::UnresolvableBaseline(vfc.change_id.clone());
        let commit = self.history.commit_of_change(&vfc.change_id).ok_or_else(unresolvable)?;
        for e in vfc.final_edits.iter().filter(|e| !e.binary) {
            let pre = self.history.file_before(commit, &e.path);
            let post = self.history.file_at(commit, &e.path);
            let matches = |img: &Option<Lines>, n: u32, text: Option<&str>| {
                let line = img.as_ref().and_then(|v| v.get(n as usize - 1));
                match (line, text) {
                    (Some(l), Some(t)) => l == t,
                    (Some(_), None) => true,
                    (None, _) => false,
                }
            };
            for h in &e.hunks {
                for i in 0..h.old_count {
                    let text = h.old_lines.get(i as usize).map(String::as_str);
                    if !matches(&pre, h.old_start + i, text) {
                        return Err(unresolvable());
                    }
                }
                for i in 0..h.new_count {
                    let text = h.new_lines.get(i as usize).map(String::as_str);
                    if !matches(&post, h.new_start + i, text) {
                        return Err(unresolvable());
                    }
                }
            }
            let in_range = |img: &Option<Lines>, nums: &[u32]| {
                let len = img.as_ref().map_or(0, |v| v.len()) as u32;
                nums.iter().all(|&n| n >= 1 && n <= len)
            };
            if !in_range(&pre, &e.deleted_line_numbers) || !in_range(&post, &e.added_line_numbers) {
                return Err(unresolvable());
            }
        }
        Ok(Resolved { commit })
    }

    pub fn extract_vfls(&self, vfc: &ChangeRecord) -> Result<Vec<Vfl>, LineageError> {
        let r = self.resolve(vfc)?;
        let mut out = Vec::new();
        for e in vfc.final_edits.iter().filter(|e| !e.binary) {
            let pre = self.history.file_before(r.commit, &e.path);
            let post = self.history.file_at(r.commit, &e.path);
            let mut push = |img: &Option<Lines>, n: u32, kind| {
                let text = &img.as_ref().expect("checked by resolve")[n as usize - 1];
                if self.filter.is_valid(text) {
                    out.push(Vfl { path: e.path.clone(), line_number: n, kind, text: text.clone() });
                }
            };
            for &n in &e.deleted_line_numbers {
                push(&pre, n, VflKind::Deleted);
            }
            for &n in &e.added_line_numbers {
                push(&post, n, VflKind::Added);
            }
        }
        out.sort_by(|a, b| {
            (a.path.as_str(), a.line_number, a.kind).cmp(&(b.path.as_str(), b.line_number, b.kind))
        });
        Ok(out)
    }

    /// Follows one line backwards through the history, mapping its number
    /// across every diff that touched the file until the commit that added or
    /// last modified it.
    fn trace(&self, mut at: usize, path: &str, mut line: u32) -> Result<LineOrigin, LineageError> {
        let before_corpus = |line| LineageError::OriginBeforeCorpus { path: path.to_string(), line_number: line };
        loop {
            let Some(c) = self.history.last_touch(at, path) else {
                return Err(before_corpus(line));
            };
            let commit = self.history.commit(c);
            if commit.baseline {
                return Err(before_corpus(line));
            }
            let mut shift: i64 = 0;
            for h in self.history.hunks(c, path) {
                if line < h.new_start {
                    break;
                }
                if line < h.new_start + h.new_count {
                    return Ok(LineOrigin {
                        path: path.to_string(),
                        line_number: line,
                        commit_hash: commit.hash.clone(),
                        change_id: commit.change_id.clone(),
                    });
                }
                shift += i64::from(h.new_count) - i64::from(h.old_count);
            }
            line = (i64::from(line) - shift) as u32;
            match c.checked_sub(1) {
                Some(prev) => at = prev,
                None => return Err(before_corpus(line)),
            }
        }
    }

    pub fn blame_deleted(&self, vfc: &ChangeRecord, vfl: &Vfl) -> Result<LineOrigin, LineageError> {
        debug_assert_eq!(vfl.kind, VflKind::Deleted);
        let r = self.resolve(vfc)?;
        let parent = r
            .commit
            .checked_sub(1)
            .ok_or_else(|| LineageError::UnresolvableBaseline(vfc.change_id.clone()))?;
        self.trace(parent, &vfl.path, vfl.line_number)
    }

    /// Blames a run of consecutive added lines through the next valid
    /// unchanged line after it (or, failing that, the nearest one before it).
    pub fn blame_added(&self, vfc: &ChangeRecord, group: &[Vfl]) -> Result<AddedOrigin, LineageError> {
        let (Some(first), Some(last)) = (group.first(), group.last()) else {
            return Ok(AddedOrigin::SelfOrigin);
        };
        let r = self.resolve(vfc)?;
        let path = first.path.as_str();
        let edit = vfc
            .final_edits
            .iter()
            .find(|e| e.path == path)
            .ok_or_else(|| LineageError::UnresolvableBaseline(vfc.change_id.clone()))?;
        if r.commit == 0 || self.history.file_before(r.commit, path).is_none() {
            return Ok(AddedOrigin::SelfOrigin);
        }
        let post = self.history.file_at(r.commit, path).expect("checked by resolve");
        let hunks = if edit.hunks.is_empty() {
            self.history.hunks(r.commit, path)
        } else {
            edit.hunks.clone()
        };
        let added: HashSet<u32> = edit.added_line_numbers.iter().copied().collect();
        let anchor_ok = |n: u32| !added.contains(&n) && self.filter.is_valid(&post[n as usize - 1]);

        let len = post.len() as u32;
        let anchor = (last.line_number + 1..=len)
            .find(|&n| anchor_ok(n))
            .or_else(|| (1..first.line_number).rev().find(|&n| anchor_ok(n)));
        match anchor {
            Some(n) => {
                let pre_line = post_to_pre(&hunks, n);
                self.trace(r.commit - 1, path, pre_line).map(AddedOrigin::Origin)
            }
            None => Ok(AddedOrigin::SelfOrigin),
        }
    }

    /// Candidate inducing changes for each fix. Self-origin and pre-corpus
    /// results are left out of the sets and listed in the side report.
    pub fn find_vics_from_vfcs(&self, vfcs: &[&ChangeRecord]) -> Result<VicFindings, LineageError> {
        let per_vfc: Vec<(String, BTreeSet<String>, Vec<SideEntry>)> = vfcs
            .par_iter()
            .map(|vfc| self.vics_of(vfc))
            .collect::<Result<_, _>>()?;
        let mut out = VicFindings::default();
        for (id, set, side) in per_vfc {
            out.vics.entry(id).or_default().extend(set);
            out.side.extend(side);
        }
        Ok(out)
    }

    fn vics_of(&self, vfc: &ChangeRecord) -> Result<(String, BTreeSet<String>, Vec<SideEntry>), LineageError> {
        let vfls = self.extract_vfls(vfc)?;
        let mut vics = BTreeSet::new();
        let mut side = Vec::new();
        let note = |v: &Vfl, reason| SideEntry {
            vfc_change_id: vfc.change_id.clone(),
            path: v.path.clone(),
            line_number: v.line_number,
            kind: v.kind,
            reason,
        };
        for v in vfls.iter().filter(|v| v.kind == VflKind::Deleted) {
            match self.blame_deleted(vfc, v) {
                Ok(o) => {
                    vics.insert(o.change_id);
                }
                Err(LineageError::OriginBeforeCorpus { .. }) => side.push(note(v, SideReason::BeforeCorpus)),
                Err(e) => return Err(e),
            }
        }
        for group in added_groups(&vfls) {
            match self.blame_added(vfc, &group) {
                Ok(AddedOrigin::Origin(o)) => {
                    vics.insert(o.change_id);
                }
                Ok(AddedOrigin::SelfOrigin) => side.push(note(&group[0], SideReason::SelfOrigin)),
                Err(LineageError::OriginBeforeCorpus { .. }) => side.push(note(&group[0], SideReason::BeforeCorpus)),
                Err(e) => return Err(e),
            }
        }
        vics.remove(&vfc.change_id);
        Ok((vfc.change_id.clone(), vics, side))
    }
}

/// Maximal runs of added VfLs on consecutive lines of one file.
pub fn added_groups(vfls: &[Vfl]) -> Vec<Vec<Vfl>> {
    let mut groups: Vec<Vec<Vfl>> = Vec::new();
    for v in vfls.iter().filter(|v| v.kind == VflKind::Added) {
        match groups.last_mut() {
            Some(g) if g.last().is_some_and(|p| p.path == v.path && p.line_number + 1 == v.line_number) => {
                g.push(v.clone())
            }
            _ => groups.push(vec![v.clone()]),
        }
    }
    groups
}

/// Pre-image number of an unchanged post-image line.
fn post_to_pre(hunks: &[Hunk], post_line: u32) -> u32 {
    let mut shift: i64 = 0;
    for h in hunks {
        if post_line < h.new_start + h.new_count {
            break;
        }
        shift += i64::from(h.new_count) - i64::from(h.old_count);
    }
    (i64::from(post_line) - shift) as u32
}
