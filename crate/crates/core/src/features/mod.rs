//! Per-change feature extraction: static families (HP, CC, PC, RP), history
//! families (HH, VH, PT) and token mining (TM).

mod history;
mod static_features;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use history::{
    dir_of, stem_of, AccountScore, FileHistory, HistoryConfig, HistoryFeatures, HistoryState,
    HistoryStateError, Period, PeriodCounts, CHECKPOINT_VERSION,
};
pub use static_features::{
    extract_cc, extract_hp, extract_pc, extract_rp, extract_static, DomainRank, DomainRankTable,
    PatchSetComplexity, RankTableError, StaticFeatures,
};

use crate::classify::{FeatureDef, FeatureKind, FeatureSchema};
use crate::model::{ChangeRecord, Timestamp};
use crate::textmine::{extract_tm, TmFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    HP,
    CC,
    PC,
    RP,
    HH,
    VH,
    PT,
    TM,
}

impl Family {
    pub const ALL: [Family; 8] =
        [Family::HP, Family::CC, Family::PC, Family::RP, Family::HH, Family::VH, Family::PT, Family::TM];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Family {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Family::ALL.into_iter().find(|f| f.to_string().eq_ignore_ascii_case(s)).ok_or(())
    }
}

use FeatureKind::{Boolean as B, Numeric as N};

/// Full feature schema in column order.
pub const FEATURES: [(&str, Family, FeatureKind); 34] = [
    ("HP_author", Family::HP, N),
    ("HP_reviewer", Family::HP, N),
    ("CC_add", Family::CC, N),
    ("CC_del", Family::CC, N),
    ("PC_count", Family::PC, N),
    ("PC_revision", Family::PC, N),
    ("PC_relative_revision", Family::PC, N),
    ("PC_avg_patchset", Family::PC, N),
    ("PC_max_patchset", Family::PC, N),
    ("PC_min_patchset", Family::PC, N),
    ("RP_time", Family::RP, N),
    ("RP_weekday", Family::RP, N),
    ("RP_hour", Family::RP, N),
    ("RP_plus2_self", Family::RP, B),
    ("HH_author", Family::HH, N),
    ("HH_reviewer", Family::HH, N),
    ("HH_min_reviewer", Family::HH, N),
    ("HH_avg_reviewer", Family::HH, N),
    ("VH_temporal_max", Family::VH, N),
    ("VH_temporal_min", Family::VH, N),
    ("VH_temporal_avg", Family::VH, N),
    ("VH_spatial_max", Family::VH, N),
    ("VH_spatial_min", Family::VH, N),
    ("VH_spatial_avg", Family::VH, N),
    ("PT_change_volume", Family::PT, N),
    ("PT_VFC_volume", Family::PT, N),
    ("PT_ViC_volume", Family::PT, N),
    ("TM_arithmetic", Family::TM, N),
    ("TM_comparison", Family::TM, N),
    ("TM_conditional", Family::TM, N),
    ("TM_loop", Family::TM, N),
    ("TM_assignment", Family::TM, N),
    ("TM_logical", Family::TM, N),
    ("TM_memory_access", Family::TM, N),
];

pub fn full_schema() -> FeatureSchema {
    FeatureSchema::new(FEATURES.iter().map(|&(n, _, k)| FeatureDef { name: n.to_string(), kind: k }).collect())
}

pub fn family_of(index: usize) -> Family {
    FEATURES[index].1
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubsetError {
    #[error("unknown feature or family {0:?}")]
    Unknown(String),
    #[error("empty feature subset")]
    Empty,
}

/// Resolves an expression such as `VH+CC+RP`, `all` or
/// `CC_add,RP_time` into sorted column indices of the full schema.
/// Family and feature names are matched case-insensitively.
pub fn resolve_subset(expr: &str) -> Result<Vec<usize>, SubsetError> {
    let mut out = BTreeSet::new();
    for token in expr.split(['+', ',']).map(str::trim).filter(|t| !t.is_empty()) {
        if token.eq_ignore_ascii_case("all") {
            out.extend(0..FEATURES.len());
        } else if let Ok(fam) = token.parse::<Family>() {
            out.extend((0..FEATURES.len()).filter(|&i| FEATURES[i].1 == fam));
        } else if let Some(i) = FEATURES.iter().position(|(n, _, _)| n.eq_ignore_ascii_case(token)) {
            out.insert(i);
        } else {
            return Err(SubsetError::Unknown(token.to_string()));
        }
    }
    if out.is_empty() {
        return Err(SubsetError::Empty);
    }
    Ok(out.into_iter().collect())
}

/// Lays the three feature groups out in schema order.
pub fn assemble(s: &StaticFeatures, h: &HistoryFeatures, t: &TmFeatures) -> Vec<f64> {
    vec![
        f64::from(s.hp_author),
        f64::from(s.hp_reviewer),
        s.cc_add as f64,
        s.cc_del as f64,
        s.pc_count as f64,
        s.pc_revision as f64,
        s.pc_relative_revision,
        s.pc_avg_patchset,
        s.pc_max_patchset as f64,
        s.pc_min_patchset as f64,
        s.rp_time as f64,
        f64::from(s.rp_weekday),
        f64::from(s.rp_hour),
        f64::from(u8::from(s.rp_plus2_self)),
        h.hh_author,
        h.hh_reviewer,
        h.hh_min_reviewer,
        h.hh_avg_reviewer,
        h.vh_temporal_max,
        h.vh_temporal_min,
        h.vh_temporal_avg,
        h.vh_spatial_max,
        h.vh_spatial_min,
        h.vh_spatial_avg,
        h.pt_change_volume,
        h.pt_vfc_volume,
        h.pt_vic_volume,
        t.arithmetic,
        t.comparison,
        t.conditional,
        t.loop_,
        t.assignment,
        t.logical,
        t.memory_access,
    ]
}

/// Static and token features of a change; they never depend on history.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicFeatures {
    pub static_features: StaticFeatures,
    pub tm: TmFeatures,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Featurizer {
    pub ranks: DomainRankTable,
}

impl Featurizer {
    pub fn new(ranks: DomainRankTable) -> Self {
        Self { ranks }
    }

    pub fn intrinsic(&self, change: &ChangeRecord) -> IntrinsicFeatures {
        IntrinsicFeatures { static_features: extract_static(change, &self.ranks), tm: extract_tm(change) }
    }

    /// Full feature vector of `change` against `state` as of time `at`.
    pub fn featurize(&self, change: &ChangeRecord, state: &HistoryState, at: Timestamp) -> Vec<f64> {
        let i = self.intrinsic(change);
        self.with_history(&i, change, state, at)
    }

    pub fn with_history(
        &self,
        intrinsic: &IntrinsicFeatures,
        change: &ChangeRecord,
        state: &HistoryState,
        at: Timestamp,
    ) -> Vec<f64> {
        assemble(&intrinsic.static_features, &state.extract(change, at), &intrinsic.tm)
    }
}
