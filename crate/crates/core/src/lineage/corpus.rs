use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::blame::{Lineage, LineageError, SideReason, VflKind};
use crate::model::{
    link_bugs_to_changes, ChangeRecord, IssueRecord, Label, LabelKind, LabelRecord, LabelSource,
    Provenance, Severity, Timestamp,
};

/// How long after merge a ViC label becomes visible to training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LabelDelay {
    /// Known as soon as it is merged.
    #[default]
    Immediate,
    Seconds(i64),
    Never,
}

impl LabelDelay {
    pub fn apply(self, submitted_at: Timestamp) -> Timestamp {
        match self {
            LabelDelay::Immediate => submitted_at,
            LabelDelay::Seconds(s) => submitted_at.saturating_add(s),
            LabelDelay::Never => Timestamp::MAX,
        }
    }

    /// Parses `14d`, `12h`, `90m`, `3600s`, a bare number of seconds, `0`,
    /// `inf` or `never`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "never" | "∞") {
            return Some(LabelDelay::Never);
        }
        let (num, unit) = match s.char_indices().last()? {
            (i, c) if c.is_ascii_alphabetic() => (&s[..i], c),
            _ => (s, 's'),
        };
        let n: i64 = num.parse().ok()?;
        let mult = match unit {
            'd' => 86_400,
            'h' => 3_600,
            'm' => 60,
            's' => 1,
            _ => return None,
        };
        match n.checked_mul(mult)? {
            0 => Some(LabelDelay::Immediate),
            v if v > 0 => Some(LabelDelay::Seconds(v)),
            _ => None,
        }
    }
}

/// Which issues count as vulnerabilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CveFilter {
    /// Skip issues without any CVE id.
    pub require_cve: bool,
    /// Keep only issues at least this severe.
    pub min_severity: Option<Severity>,
    /// Restrict to these CVE ids.
    pub cve_ids: Option<BTreeSet<String>>,
}

impl Default for CveFilter {
    fn default() -> Self {
        Self { require_cve: true, min_severity: None, cve_ids: None }
    }
}

impl CveFilter {
    /// Vulnerability ids of an issue that pass the filter.
    fn cves_of(&self, issue: &IssueRecord) -> Vec<String> {
        if let Some(min) = self.min_severity {
            if issue.severity > min {
                return Vec::new();
            }
        }
        let mut ids: Vec<String> = issue
            .cve_ids
            .iter()
            .filter(|c| self.cve_ids.as_ref().is_none_or(|set| set.contains(*c)))
            .cloned()
            .collect();
        if ids.is_empty() && !self.require_cve && self.cve_ids.is_none() {
            ids.push(format!("bug:{}", issue.bug_id));
        }
        ids
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedKind {
    UnknownChangeReference,
    UnresolvableBaseline,
    SelfOrigin,
    BeforeCorpus,
    OriginOutsideCorpus,
    VicIsVfcOfSameCve,
}

/// One row of `unresolved.jsonl`: something the automated pass could not
/// attribute and leaves to manual review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedEntry {
    pub kind: UnresolvedKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bug_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vfc_change_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_number: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_kind: Option<VflKind>,
    pub detail: String,
}

impl UnresolvedEntry {
    fn new(kind: UnresolvedKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            bug_id: None,
            vfc_change_id: None,
            path: None,
            line_number: None,
            line_kind: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct CorpusCounts {
    pub vic: usize,
    pub vfc: usize,
    pub lnc: usize,
}

#[derive(Debug, Clone, Default)]
pub struct LabeledCorpus {
    /// One label per change, in corpus order.
    pub labels: Vec<LabelRecord>,
    pub unresolved: Vec<UnresolvedEntry>,
    pub counts: CorpusCounts,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusOptions {
    pub cve_filter: CveFilter,
    pub label_delay: LabelDelay,
}

/// Labels every change as ViC, VfC or LNC.
///
/// Fixes are the changes linked to qualifying issues; inducing changes are
/// the blame origins of the fixes' lines. A change found as the inducer of a
/// vulnerability it also fixes is dropped for that vulnerability.
pub fn build_labeled_corpus(
    changes: &[ChangeRecord],
    issues: &[IssueRecord],
    lineage: &Lineage<'_>,
    options: &CorpusOptions,
) -> LabeledCorpus {
    let mut unresolved = Vec::new();
    let links = link_bugs_to_changes(issues, changes);
    for u in &links.unresolved {
        let mut e = UnresolvedEntry::new(UnresolvedKind::UnknownChangeReference, u.reference.clone());
        e.bug_id = Some(u.bug_id.clone());
        unresolved.push(e);
    }

    // cve -> fixing changes
    let mut fixes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for issue in issues {
        let linked = &links.links[&issue.bug_id];
        for cve in options.cve_filter.cves_of(issue) {
            fixes.entry(cve).or_default().extend(linked.iter().cloned());
        }
    }

    let by_id: HashMap<&str, &ChangeRecord> = changes.iter().map(|c| (c.change_id.as_str(), c)).collect();
    let all_vfcs: BTreeSet<&str> = fixes.values().flatten().map(String::as_str).collect();

    let mut inducers: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for vfc_id in &all_vfcs {
        let vfc = by_id[vfc_id];
        match lineage.find_vics_from_vfcs(&[vfc]) {
            Ok(found) => {
                for s in found.side {
                    let kind = match s.reason {
                        SideReason::SelfOrigin => UnresolvedKind::SelfOrigin,
                        SideReason::BeforeCorpus => UnresolvedKind::BeforeCorpus,
                    };
                    let mut e = UnresolvedEntry::new(kind, "origin not attributable");
                    e.vfc_change_id = Some(s.vfc_change_id);
                    e.path = Some(s.path);
                    e.line_number = Some(s.line_number);
                    e.line_kind = Some(s.kind);
                    unresolved.push(e);
                }
                inducers.extend(found.vics);
            }
            Err(err @ LineageError::UnresolvableBaseline(_)) => {
                let mut e = UnresolvedEntry::new(UnresolvedKind::UnresolvableBaseline, err.to_string());
                e.vfc_change_id = Some(vfc_id.to_string());
                unresolved.push(e);
            }
            Err(err) => {
                let mut e = UnresolvedEntry::new(UnresolvedKind::BeforeCorpus, err.to_string());
                e.vfc_change_id = Some(vfc_id.to_string());
                unresolved.push(e);
            }
        }
    }

    // change id -> first (cve, vfc) that makes it a ViC / VfC
    let mut vic_of: BTreeMap<String, Provenance> = BTreeMap::new();
    let mut vfc_of: BTreeMap<String, Provenance> = BTreeMap::new();
    for (cve, vfcs) in &fixes {
        for vfc in vfcs {
            vfc_of.entry(vfc.clone()).or_insert_with(|| Provenance {
                cve_id: cve.clone(),
                vfc_change_id: vfc.clone(),
            });
            let Some(found) = inducers.get(vfc) else { continue };
            for vic in found {
                if vfcs.contains(vic) {
                    let mut e = UnresolvedEntry::new(UnresolvedKind::VicIsVfcOfSameCve, vic.clone());
                    e.bug_id = Some(cve.clone());
                    e.vfc_change_id = Some(vfc.clone());
                    unresolved.push(e);
                    continue;
                }
                if !by_id.contains_key(vic.as_str()) {
                    let mut e = UnresolvedEntry::new(UnresolvedKind::OriginOutsideCorpus, vic.clone());
                    e.vfc_change_id = Some(vfc.clone());
                    unresolved.push(e);
                    continue;
                }
                vic_of.entry(vic.clone()).or_insert_with(|| Provenance {
                    cve_id: cve.clone(),
                    vfc_change_id: vfc.clone(),
                });
            }
        }
    }

    let mut counts = CorpusCounts::default();
    let labels = changes
        .iter()
        .map(|c| {
            let label = if let Some(p) = vic_of.get(&c.change_id) {
                counts.vic += 1;
                Label {
                    kind: LabelKind::ViC,
                    source: LabelSource::Lineage,
                    provenance: Some(p.clone()),
                    known_at: options.label_delay.apply(c.submitted_at),
                }
            } else if let Some(p) = vfc_of.get(&c.change_id) {
                counts.vfc += 1;
                Label {
                    kind: LabelKind::VfC,
                    source: LabelSource::Lineage,
                    provenance: Some(p.clone()),
                    known_at: c.submitted_at,
                }
            } else {
                counts.lnc += 1;
                Label {
                    kind: LabelKind::LNC,
                    source: LabelSource::Assumed,
                    provenance: None,
                    known_at: c.submitted_at,
                }
            };
            LabelRecord { change_id: c.change_id.clone(), label }
        })
        .collect();

    LabeledCorpus { labels, unresolved, counts }
}
