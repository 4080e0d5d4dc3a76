use std::ops::Add;

use serde::{Deserialize, Serialize};

/// Confusion counts with the normal class (LNC) as 0 and ViC as 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl Add for Confusion {
    type Output = Confusion;
    fn add(self, o: Confusion) -> Confusion {
        Confusion { tn: self.tn + o.tn, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_, tp: self.tp + o.tp }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Confusion {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        Self { tn, fp, fn_, tp }
    }

    pub fn record(&mut self, target: u8, predicted: u8) {
        match (target, predicted) {
            (0, 0) => self.tn += 1,
            (0, _) => self.fp += 1,
            (_, 0) => self.fn_ += 1,
            _ => self.tp += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn vic_recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn vic_precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn lnc_recall(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    pub fn lnc_precision(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fn_)
    }
}

/// Ratios are `None` when their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub confusion: Confusion,
    pub lnc_recall: Option<f64>,
    pub lnc_precision: Option<f64>,
    pub vic_recall: Option<f64>,
    pub vic_precision: Option<f64>,
    pub roc_area: Option<f64>,
    pub lnc_support: u64,
    pub vic_support: u64,
}

impl MetricsReport {
    pub fn from_confusion(c: Confusion, roc_area: Option<f64>) -> Self {
        Self {
            confusion: c,
            lnc_recall: c.lnc_recall(),
            lnc_precision: c.lnc_precision(),
            vic_recall: c.vic_recall(),
            vic_precision: c.vic_precision(),
            roc_area,
            lnc_support: c.tn + c.fp,
            vic_support: c.fn_ + c.tp,
        }
    }
}

/// Twice the Mann-Whitney U statistic: each (positive, negative) pair adds
/// 2 when the positive scores higher and 1 on a tie. Returns (2U, P, N).
pub fn mann_whitney_u2(scored: &[(u8, f64)]) -> (u128, u64, u64) {
    let mut s: Vec<(f64, u8)> = scored.iter().map(|&(t, x)| (x, t)).collect();
    s.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let (mut u2, mut neg_below, mut pos, mut neg) = (0u128, 0u64, 0u64, 0u64);
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        let (mut p, mut n) = (0u64, 0u64);
        while j < s.len() && s[j].0 == s[i].0 {
            if s[j].1 == 1 {
                p += 1;
            } else {
                n += 1;
            }
            j += 1;
        }
        u2 += u128::from(p) * u128::from(2 * neg_below + n);
        neg_below += n;
        pos += p;
        neg += n;
        i = j;
    }
    (u2, pos, neg)
}

/// Area under the ROC curve; `None` unless both classes are present.
pub fn roc_area(scored: &[(u8, f64)]) -> Option<f64> {
    let (u2, p, n) = mann_whitney_u2(scored);
    (p > 0 && n > 0).then(|| u2 as f64 / (2 * u128::from(p) * u128::from(n)) as f64)
}

/// Metrics over (target, predicted, score) triples.
pub fn compute_metrics(predictions: &[(u8, u8, f64)]) -> MetricsReport {
    let mut c = Confusion::default();
    for &(t, p, _) in predictions {
        c.record(t, p);
    }
    let scored: Vec<(u8, f64)> = predictions.iter().map(|&(t, _, s)| (t, s)).collect();
    MetricsReport::from_confusion(c, roc_area(&scored))
}
