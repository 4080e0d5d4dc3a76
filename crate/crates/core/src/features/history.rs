use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ChangeRecord, Label, LabelKind, Timestamp};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Length of the trend period used by the PT family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    /// Calendar month in UTC.
    #[default]
    Month,
    /// Fixed windows of this many days counted from the epoch.
    Days(u32),
}

impl Period {
    pub fn id(self, t: Timestamp) -> i64 {
        match self {
            Period::Month => {
                let d = DateTime::from_timestamp(t, 0).unwrap_or_default();
                i64::from(d.year()) * 12 + i64::from(d.month0())
            }
            Period::Days(n) => t.div_euclid(i64::from(n.max(1)) * 86_400),
        }
    }

    /// First second of the period.
    pub fn start(self, id: i64) -> Timestamp {
        match self {
            Period::Month => {
                let (y, m) = (id.div_euclid(12), id.rem_euclid(12));
                NaiveDate::from_ymd_opt(y as i32, m as u32 + 1, 1)
                    .and_then(|d| d.and_hms_opt(0, 0, 0))
                    .map_or(0, |d| d.and_utc().timestamp())
            }
            Period::Days(n) => id * i64::from(n.max(1)) * 86_400,
        }
    }

    /// Human-readable period name, `2016-03` for months.
    pub fn label(self, id: i64) -> String {
        match self {
            Period::Month => format!("{:04}-{:02}", id.div_euclid(12), id.rem_euclid(12) + 1),
            Period::Days(_) => {
                let d = DateTime::from_timestamp(self.start(id), 0).unwrap_or_default();
                d.format("%Y-%m-%d").to_string()
            }
        }
    }

    pub fn parse(s: &str) -> Option<Period> {
        match s.trim() {
            "month" | "monthly" => Some(Period::Month),
            s => s.strip_suffix('d').and_then(|n| n.parse().ok()).filter(|&n| n > 0).map(Period::Days),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HistoryConfig {
    #[serde(default)]
    pub period: Period,
    /// Half-life of account scores; `None` keeps every point forever.
    #[serde(default)]
    pub decay_half_life_days: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccountScore {
    pub lnc_score: f64,
    pub vic_score: f64,
    pub updated_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FileHistory {
    pub lnc_count: u64,
    pub vic_count: u64,
}

impl FileHistory {
    pub fn vh_score(&self) -> i64 {
        self.lnc_count as i64 - 3 * self.vic_count as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PeriodCounts {
    pub line_volume: u64,
    pub vfc_count: u64,
    pub vic_count: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum HistoryStateError {
    #[error("out-of-order feed: change {change_id} known at {known_at}, state already at {cursor}")]
    OutOfOrderFeed { change_id: String, known_at: Timestamp, cursor: Timestamp },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Rolling record of which accounts and files took part in normal and
/// vulnerability-inducing changes. Fed in `known_at` order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HistoryState {
    pub config: HistoryConfig,
    pub accounts: BTreeMap<String, AccountScore>,
    pub files: BTreeMap<String, FileHistory>,
    pub periods: BTreeMap<i64, BTreeMap<String, PeriodCounts>>,
    pub dirs: BTreeMap<String, BTreeSet<String>>,
    pub stems: BTreeMap<String, BTreeSet<String>>,
    /// `known_at` of the latest recorded label.
    pub cursor: Option<Timestamp>,
    pub current_period: Option<i64>,
    pub recorded: u64,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    state: HistoryState,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HistoryFeatures {
    pub hh_author: f64,
    pub hh_reviewer: f64,
    pub hh_min_reviewer: f64,
    pub hh_avg_reviewer: f64,
    pub vh_temporal_max: f64,
    pub vh_temporal_min: f64,
    pub vh_temporal_avg: f64,
    pub vh_spatial_max: f64,
    pub vh_spatial_min: f64,
    pub vh_spatial_avg: f64,
    pub pt_change_volume: f64,
    pub pt_vfc_volume: f64,
    pub pt_vic_volume: f64,
}

pub fn dir_of(path: &str) -> &str {
    path.rfind('/').map_or("", |i| &path[..i])
}

/// File name without directory and last extension.
pub fn stem_of(path: &str) -> &str {
    let name = path.rfind('/').map_or(path, |i| &path[i + 1..]);
    match name.rfind('.') {
        Some(i) if i > 0 => &name[..i],
        _ => name,
    }
}

/// Distinct paths of the change's final edits, in order of first appearance.
fn files_of(change: &ChangeRecord) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    change.touched_paths().filter(|p| seen.insert(*p)).collect()
}

/// Distinct non-author accounts whose votes match `keep`.
fn reviewers_of(change: &ChangeRecord, keep: impl Fn(i8) -> bool) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    change
        .reviews
        .iter()
        .filter(|r| keep(r.score) && !change.is_author(&r.reviewer))
        .map(|r| r.reviewer.account_id.as_str())
        .filter(|a| seen.insert(*a))
        .collect()
}

fn min_max_avg(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (min, max, values.iter().sum::<f64>() / values.len() as f64)
}

impl HistoryState {
    pub fn new(config: HistoryConfig) -> Self {
        Self { config, ..Default::default() }
    }

    fn decay(&self, from: Timestamp, to: Timestamp) -> f64 {
        match self.config.decay_half_life_days {
            Some(h) if h > 0.0 && to > from => 0.5f64.powf((to - from) as f64 / (h * 86_400.0)),
            _ => 1.0,
        }
    }

    fn bump(&mut self, account: &str, lnc: f64, vic: f64, at: Timestamp) {
        let factor = self.accounts.get(account).map_or(1.0, |s| self.decay(s.updated_at, at));
        let s = self.accounts.entry(account.to_string()).or_default();
        s.lnc_score = s.lnc_score * factor + lnc;
        s.vic_score = s.vic_score * factor + vic;
        s.updated_at = s.updated_at.max(at);
    }

    /// Folds one labeled change into the state. Normal and fixing changes
    /// earn the author 2 points and each positive reviewer 1; an inducing
    /// change costs the author 3 and each positive reviewer 2.
    pub fn record_labeled_change(
        &mut self,
        change: &ChangeRecord,
        label: &Label,
    ) -> Result<(), HistoryStateError> {
        if let Some(cursor) = self.cursor {
            if label.known_at < cursor {
                return Err(HistoryStateError::OutOfOrderFeed {
                    change_id: change.change_id.clone(),
                    known_at: label.known_at,
                    cursor,
                });
            }
        }
        let at = label.known_at;
        let vic = label.kind == LabelKind::ViC;
        let (author_pts, reviewer_pts) = if vic { ((0.0, -3.0), (0.0, -2.0)) } else { ((2.0, 0.0), (1.0, 0.0)) };
        self.bump(&change.author.account_id, author_pts.0, author_pts.1, at);
        for r in reviewers_of(change, |s| s > 0) {
            self.bump(r, reviewer_pts.0, reviewer_pts.1, at);
        }

        let period = self.config.period.id(change.submitted_at);
        for path in files_of(change) {
            let f = self.files.entry(path.to_string()).or_default();
            if vic {
                f.vic_count += 1;
            } else {
                f.lnc_count += 1;
            }
            self.dirs.entry(dir_of(path).to_string()).or_default().insert(path.to_string());
            self.stems.entry(stem_of(path).to_string()).or_default().insert(path.to_string());
            let churn: u64 = change.final_edits.iter().filter(|e| e.path == path).map(|e| e.churn()).sum();
            let p = self.periods.entry(period).or_default().entry(path.to_string()).or_default();
            p.line_volume += churn;
            match label.kind {
                LabelKind::ViC => p.vic_count += 1,
                LabelKind::VfC => p.vfc_count += 1,
                LabelKind::LNC => {}
            }
        }
        self.cursor = Some(at);
        self.current_period = Some(self.config.period.id(at));
        self.recorded += 1;
        Ok(())
    }

    /// Account's vic/lnc ratio as of `at`; 0 for unknown accounts.
    pub fn hh_of(&self, account: &str, at: Timestamp) -> f64 {
        self.accounts.get(account).map_or(0.0, |s| {
            let k = self.decay(s.updated_at, at);
            (s.vic_score * k) / (s.lnc_score * k).max(1.0)
        })
    }

    pub fn vh_score(&self, path: &str) -> i64 {
        self.files.get(path).map_or(0, FileHistory::vh_score)
    }

    /// Files seen in history that share `path`'s directory or file stem.
    pub fn neighbors(&self, path: &str) -> BTreeSet<&str> {
        let by_dir = self.dirs.get(dir_of(path)).into_iter().flatten();
        let by_stem = self.stems.get(stem_of(path)).into_iter().flatten();
        by_dir.chain(by_stem).map(String::as_str).filter(|n| *n != path).collect()
    }

    pub fn spatial_score(&self, path: &str) -> f64 {
        let (mut vic, mut lnc) = (0i64, 0i64);
        for n in self.neighbors(path) {
            let f = &self.files[n];
            vic += i64::from(f.vic_count > 0);
            lnc += i64::from(f.lnc_count > 0);
        }
        (lnc - 2 * vic) as f64 / lnc.max(1) as f64
    }

    pub fn extract_hh(&self, change: &ChangeRecord, at: Timestamp) -> (f64, f64, f64, f64) {
        let author = self.hh_of(&change.author.account_id, at);
        let scores: Vec<f64> = reviewers_of(change, |s| s != -2).into_iter().map(|r| self.hh_of(r, at)).collect();
        let (min, max, avg) = min_max_avg(&scores);
        (author, max, min, avg)
    }

    /// Temporal (max, min, avg) then spatial (max, min, avg).
    pub fn extract_vh(&self, change: &ChangeRecord) -> [f64; 6] {
        let files = files_of(change);
        let temporal: Vec<f64> = files.iter().map(|p| self.vh_score(p) as f64).collect();
        let spatial: Vec<f64> = files.iter().map(|p| self.spatial_score(p)).collect();
        let (tmin, tmax, tavg) = min_max_avg(&temporal);
        let (smin, smax, savg) = min_max_avg(&spatial);
        [tmax, tmin, tavg, smax, smin, savg]
    }

    /// Mean per-file change in line volume, fixes and inducing changes
    /// between the period containing `at` and the one before it.
    pub fn extract_pt(&self, change: &ChangeRecord, at: Timestamp) -> (f64, f64, f64) {
        let files = files_of(change);
        if files.is_empty() {
            return (0.0, 0.0, 0.0);
        }
        let cur = self.config.period.id(at);
        let counts = |period: i64, path: &str| {
            self.periods.get(&period).and_then(|m| m.get(path)).copied().unwrap_or_default()
        };
        let (mut dv, mut df, mut dc) = (0.0, 0.0, 0.0);
        for p in &files {
            let (now, before) = (counts(cur, p), counts(cur - 1, p));
            dv += now.line_volume as f64 - before.line_volume as f64;
            df += now.vfc_count as f64 - before.vfc_count as f64;
            dc += now.vic_count as f64 - before.vic_count as f64;
        }
        let n = files.len() as f64;
        (dv / n, df / n, dc / n)
    }

    pub fn extract(&self, change: &ChangeRecord, at: Timestamp) -> HistoryFeatures {
        let (hh_author, hh_reviewer, hh_min_reviewer, hh_avg_reviewer) = self.extract_hh(change, at);
        let vh = self.extract_vh(change);
        let (pt_change_volume, pt_vfc_volume, pt_vic_volume) = self.extract_pt(change, at);
        HistoryFeatures {
            hh_author,
            hh_reviewer,
            hh_min_reviewer,
            hh_avg_reviewer,
            vh_temporal_max: vh[0],
            vh_temporal_min: vh[1],
            vh_temporal_avg: vh[2],
            vh_spatial_max: vh[3],
            vh_spatial_min: vh[4],
            vh_spatial_avg: vh[5],
            pt_change_volume,
            pt_vfc_volume,
            pt_vic_volume,
        }
    }

    pub fn to_checkpoint(&self) -> String {
        let cp = Checkpoint { version: CHECKPOINT_VERSION, state: self.clone() };
        serde_json::to_string(&cp).expect("state serializes")
    }

    pub fn from_checkpoint(text: &str) -> Result<Self, HistoryStateError> {
        let cp: Checkpoint =
            serde_json::from_str(text).map_err(|e| HistoryStateError::Checkpoint(e.to_string()))?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(HistoryStateError::Checkpoint(format!("unsupported version {}", cp.version)));
        }
        Ok(cp.state)
    }
}
