use serde::{Deserialize, Serialize};

use crate::classify::{ClassifierKind, MetricsReport};

/// One fold or one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartReport {
    pub name: String,
    pub metrics: MetricsReport,
    /// Normal changes classified as inducing.
    pub flagged_count: u64,
    /// Share of the part's changes classified as inducing.
    pub vic_classified_fraction: Option<f64>,
    pub training_rows: usize,
    pub training_positives: usize,
    /// Why the part was not scored, if it was not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    pub samples: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: None, std: None, samples: 0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean: Some(mean), std: Some(var.sqrt()), samples: values.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub vic_recall: Summary,
    pub vic_precision: Summary,
    pub vic_classified_fraction: Summary,
}

impl Aggregates {
    /// Over scored parts, skipping ratios a part leaves undefined.
    pub fn of(parts: &[PartReport]) -> Self {
        let scored = || parts.iter().filter(|p| p.skipped.is_none());
        let collect = |f: &dyn Fn(&PartReport) -> Option<f64>| -> Vec<f64> { scored().filter_map(f).collect() };
        Self {
            vic_recall: Summary::of(&collect(&|p| p.metrics.vic_recall)),
            vic_precision: Summary::of(&collect(&|p| p.metrics.vic_precision)),
            vic_classified_fraction: Summary::of(&collect(&|p| p.vic_classified_fraction)),
        }
    }
}

/// Counters kept by the online runner while it reads labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalityAudit {
    /// Labels read as training rows.
    pub training_reads: u64,
    /// Labels folded into the history state.
    pub state_reads: u64,
    /// Reads of a label not yet known at the period start.
    pub future_reads: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub protocol: String,
    pub classifier: ClassifierKind,
    pub features: Vec<String>,
    pub seed: u64,
    pub parts: Vec<PartReport>,
    pub pooled: MetricsReport,
    pub aggregates: Aggregates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<CausalityAudit>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per fold or period.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "period",
            "tn",
            "fp",
            "fn",
            "tp",
            "lnc_recall",
            "lnc_precision",
            "vic_recall",
            "vic_precision",
            "roc_area",
            "flagged_count",
            "skipped",
        ])
        .expect("in-memory write");
        for p in &self.parts {
            let m = &p.metrics;
            let c = m.confusion;
            w.write_record([
                p.name.clone(),
                c.tn.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                c.tp.to_string(),
                opt(m.lnc_recall),
                opt(m.lnc_precision),
                opt(m.vic_recall),
                opt(m.vic_precision),
                opt(m.roc_area),
                p.flagged_count.to_string(),
                p.skipped.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// One row of an ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub subset: String,
    pub report: EvaluationReport,
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "features",
        "tn",
        "fp",
        "fn",
        "tp",
        "lnc_recall",
        "lnc_precision",
        "vic_recall",
        "vic_precision",
        "roc_area",
    ])
    .expect("in-memory write");
    for r in rows {
        let m = &r.report.pooled;
        let c = m.confusion;
        w.write_record([
            r.subset.clone(),
            c.tn.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            c.tp.to_string(),
            opt(m.lnc_recall),
            opt(m.lnc_precision),
            opt(m.vic_recall),
            opt(m.vic_precision),
            opt(m.roc_area),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
