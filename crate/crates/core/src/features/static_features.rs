use chrono::{DateTime, Datelike, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ChangeRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainRank {
    /// Exact domain; subdomains match too.
    pub pattern: String,
    pub rank: u32,
}

/// Trust rank per email domain, 1 = most trusted. First matching pattern wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainRankTable {
    #[serde(default)]
    pub ranks: Vec<DomainRank>,
    pub default_rank: u32,
}

#[derive(Debug, Error)]
pub enum RankTableError {
    #[error("rank table: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("rank table: rank must be >= 1 (pattern {0:?})")]
    BadRank(String),
}

impl Default for DomainRankTable {
    fn default() -> Self {
        let r = |pattern: &str, rank| DomainRank { pattern: pattern.into(), rank };
        Self {
            ranks: vec![
                r("google.com", 1),
                r("android.com", 2),
                r("samsung.com", 3),
                r("qualcomm.com", 3),
                r("kernel.org", 4),
            ],
            default_rank: 5,
        }
    }
}

impl DomainRankTable {
    pub fn from_toml(text: &str) -> Result<Self, RankTableError> {
        let t: DomainRankTable = toml::from_str(text)?;
        if t.default_rank < 1 {
            return Err(RankTableError::BadRank("<default>".into()));
        }
        if let Some(bad) = t.ranks.iter().find(|r| r.rank < 1) {
            return Err(RankTableError::BadRank(bad.pattern.clone()));
        }
        Ok(t)
    }

    pub fn rank(&self, domain: &str) -> u32 {
        let domain = domain.to_ascii_lowercase();
        self.ranks
            .iter()
            .find(|r| {
                let p = r.pattern.trim_start_matches("*.").to_ascii_lowercase();
                domain == p || domain.strip_suffix(&p).is_some_and(|head| head.ends_with('.'))
            })
            .map_or(self.default_rank, |r| r.rank)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticFeatures {
    pub hp_author: u32,
    pub hp_reviewer: u32,
    pub cc_add: u64,
    pub cc_del: u64,
    pub pc_count: u64,
    pub pc_revision: u64,
    pub pc_relative_revision: f64,
    pub pc_avg_patchset: f64,
    pub pc_max_patchset: u64,
    pub pc_min_patchset: u64,
    pub rp_time: i64,
    pub rp_weekday: u32,
    pub rp_hour: u32,
    pub rp_plus2_self: bool,
}

/// Author rank, and the least trusted rank among non-author reviewers who
/// voted +2, +1 or -1. A change nobody else reviewed takes the author's rank.
pub fn extract_hp(change: &ChangeRecord, table: &DomainRankTable) -> (u32, u32) {
    let author = table.rank(&change.author.email_domain);
    let reviewer = change
        .reviews
        .iter()
        .filter(|r| r.score != -2 && !change.is_author(&r.reviewer))
        .map(|r| table.rank(&r.reviewer.email_domain))
        .max()
        .unwrap_or(author);
    (author, reviewer)
}

/// Lines added and deleted by the merged change across text files.
pub fn extract_cc(change: &ChangeRecord) -> (u64, u64) {
    change
        .final_edits
        .iter()
        .filter(|e| !e.binary)
        .fold((0, 0), |(a, d), e| (a + u64::from(e.lines_added), d + u64::from(e.lines_deleted)))
}

pub struct PatchSetComplexity {
    pub count: u64,
    pub revision: u64,
    pub relative_revision: f64,
    pub avg: f64,
    pub max: u64,
    pub min: u64,
}

pub fn extract_pc(change: &ChangeRecord) -> PatchSetComplexity {
    let sizes: Vec<u64> = change.patch_sets.iter().map(|p| p.churn()).collect();
    let count = sizes.len() as u64;
    let revision: u64 = sizes.iter().skip(1).sum();
    let (add, del) = extract_cc(change);
    PatchSetComplexity {
        count,
        revision,
        relative_revision: revision as f64 / (add + del).max(1) as f64,
        avg: if count > 1 { revision as f64 / (count - 1) as f64 } else { 0.0 },
        max: sizes.iter().copied().max().unwrap_or(0),
        min: sizes.iter().copied().min().unwrap_or(0),
    }
}

/// Review time, submission weekday (1 = Sunday) and hour in UTC, and whether
/// the author approved their own change with no other positive vote.
pub fn extract_rp(change: &ChangeRecord) -> (i64, u32, u32, bool) {
    let elapsed = (change.submitted_at - change.created_at).max(0);
    let at = DateTime::from_timestamp(change.submitted_at, 0).unwrap_or_default();
    let weekday = at.weekday().number_from_sunday();
    let hour = at.hour();
    let author_plus2 = change
        .reviews
        .iter()
        .any(|r| r.score == 2 && change.is_author(&r.reviewer));
    let other_positive = change
        .reviews
        .iter()
        .any(|r| r.is_positive() && !change.is_author(&r.reviewer));
    (elapsed, weekday, hour, author_plus2 && !other_positive)
}

pub fn extract_static(change: &ChangeRecord, table: &DomainRankTable) -> StaticFeatures {
    let (hp_author, hp_reviewer) = extract_hp(change, table);
    let (cc_add, cc_del) = extract_cc(change);
    let pc = extract_pc(change);
    let (rp_time, rp_weekday, rp_hour, rp_plus2_self) = extract_rp(change);
    StaticFeatures {
        hp_author,
        hp_reviewer,
        cc_add,
        cc_del,
        pc_count: pc.count,
        pc_revision: pc.revision,
        pc_relative_revision: pc.relative_revision,
        pc_avg_patchset: pc.avg,
        pc_max_patchset: pc.max,
        pc_min_patchset: pc.min,
        rp_time,
        rp_weekday,
        rp_hour,
        rp_plus2_self,
    }
}
