//! Published confusion matrices with their printed rates.

use vicpred_core::classify::{compute_metrics, MetricsReport};

pub struct PublishedRow {
    pub name: &'static str,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tp: u64,
    /// LNC recall, LNC precision, ViC recall, ViC precision as printed.
    pub printed: [f64; 4],
    /// The printed row lists precision before recall within each class.
    pub pairs_swapped: bool,
}

const fn row(name: &'static str, c: [u64; 4], printed: [f64; 4]) -> PublishedRow {
    PublishedRow { name, tn: c[0], fp: c[1], fn_: c[2], tp: c[3], printed, pairs_swapped: false }
}

pub const FEATURE_SET_ROWS: [PublishedRow; 8] = [
    row("features HP", [7453, 0, 585, 0], [1.0, 0.927, 0.0, 0.0]),
    row("features CC", [7082, 371, 371, 214], [0.950, 0.950, 0.366, 0.366]),
    row("features RP", [7012, 441, 361, 224], [0.941, 0.951, 0.383, 0.337]),
    row("features HH", [7337, 116, 459, 126], [0.984, 0.941, 0.215, 0.521]),
    row("features VH", [7275, 178, 270, 315], [0.976, 0.964, 0.538, 0.639]),
    row("features PT", [7453, 0, 585, 0], [1.0, 0.927, 0.0, 0.0]),
    row("features TM", [7223, 230, 442, 143], [0.969, 0.942, 0.244, 0.383]),
    PublishedRow {
        name: "features all",
        tn: 7188,
        fp: 265,
        fn_: 230,
        tp: 355,
        printed: [0.969, 0.964, 0.573, 0.607],
        pairs_swapped: true,
    },
];

pub const CLASSIFIER_ROWS: [PublishedRow; 6] = [
    row("classifier RF", [7391, 62, 233, 352], [0.992, 0.969, 0.602, 0.850]),
    row("classifier DT", [7188, 265, 230, 355], [0.964, 0.969, 0.607, 0.573]),
    row("classifier C4.5", [7270, 183, 255, 330], [0.975, 0.966, 0.564, 0.643]),
    row("classifier LR", [7380, 73, 343, 242], [0.990, 0.956, 0.414, 0.768]),
    row("classifier NB", [7278, 175, 353, 232], [0.977, 0.954, 0.397, 0.570]),
    row("classifier SVM", [7444, 9, 476, 109], [0.999, 0.940, 0.186, 0.924]),
];

impl PublishedRow {
    /// Prediction triples reproducing the confusion matrix.
    pub fn predictions(&self) -> Vec<(u8, u8, f64)> {
        let mut out = Vec::with_capacity((self.tn + self.fp + self.fn_ + self.tp) as usize);
        for (target, predicted, n) in [(0, 0, self.tn), (0, 1, self.fp), (1, 0, self.fn_), (1, 1, self.tp)] {
            out.extend((0..n).map(|_| (target, predicted, if predicted == 1 { 0.9 } else { 0.1 })));
        }
        out
    }

    /// Printed rates in (LNC recall, LNC precision, ViC recall, ViC precision) order.
    pub fn expected(&self) -> [f64; 4] {
        let p = self.printed;
        if self.pairs_swapped {
            [p[1], p[0], p[3], p[2]]
        } else {
            p
        }
    }
}

/// Rates rounded to three decimals; an undefined rate prints as 0.
pub fn rounded(m: &MetricsReport) -> [f64; 4] {
    let r = |v: Option<f64>| (v.unwrap_or(0.0) * 1000.0).round() / 1000.0;
    [r(m.lnc_recall), r(m.lnc_precision), r(m.vic_recall), r(m.vic_precision)]
}

/// Checks every published row; returns the names of mismatching rows.
pub fn mismatches() -> Vec<String> {
    FEATURE_SET_ROWS
        .iter()
        .chain(CLASSIFIER_ROWS.iter())
        .filter_map(|row| {
            let m = compute_metrics(&row.predictions());
            let got = rounded(&m);
            let want = row.expected();
            let counts_ok = (m.confusion.tn, m.confusion.fp, m.confusion.fn_, m.confusion.tp)
                == (row.tn, row.fp, row.fn_, row.tp);
            let rates_ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() < 5e-4);
            (!(counts_ok && rates_ok)).then(|| format!("{}: got {got:?}, want {want:?}", row.name))
        })
        .collect()
}
