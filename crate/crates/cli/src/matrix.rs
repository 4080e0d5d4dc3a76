use vicpred_core::features::{full_schema, Featurizer, HistoryConfig, HistoryState};
use vicpred_core::model::LabeledChange;

use crate::run::{invalid, Outcome};

/// Feature matrix as written to `features.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub names: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub change_id: String,
    pub values: Vec<f64>,
    pub target: u8,
}

/// Features of each change from the labels known strictly before its
/// submission. `corpus` must be in submission order.
pub fn causal_matrix(corpus: &[LabeledChange], featurizer: &Featurizer, history: HistoryConfig) -> Outcome<Matrix> {
    let mut feed: Vec<&LabeledChange> = corpus.iter().collect();
    feed.sort_by(|a, b| (a.label.known_at, &a.change.change_id).cmp(&(b.label.known_at, &b.change.change_id)));
    let mut state = HistoryState::new(history);
    let mut next = 0;
    let mut rows = Vec::with_capacity(corpus.len());
    for c in corpus {
        let at = c.change.submitted_at;
        while next < feed.len() && feed[next].label.known_at < at {
            state.record_labeled_change(&feed[next].change, &feed[next].label).map_err(invalid)?;
            next += 1;
        }
        rows.push(MatrixRow {
            change_id: c.change.change_id.clone(),
            values: featurizer.featurize(&c.change, &state, at),
            target: c.label.kind.target(),
        });
    }
    Ok(Matrix { names: full_schema().names().map(String::from).collect(), rows })
}

impl Matrix {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["change_id".to_string()];
        header.extend(self.names.iter().cloned());
        header.push("target".into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.change_id.clone()];
            rec.extend(r.values.iter().map(|v| format!("{v}")));
            rec.push(r.target.to_string());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn from_csv(text: &str) -> Outcome<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers().map_err(invalid)?.iter().map(String::from).collect();
        if header.len() < 3 || header[0] != "change_id" || header[header.len() - 1] != "target" {
            return Err(invalid("feature matrix header must be change_id, features..., target"));
        }
        let names = header[1..header.len() - 1].to_vec();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(invalid)?;
            let line = i + 2;
            let values = (1..rec.len() - 1)
                .map(|j| rec[j].parse::<f64>().map_err(|e| invalid(format!("line {line}: {}: {e}", header[j]))))
                .collect::<Outcome<Vec<f64>>>()?;
            let target = match &rec[rec.len() - 1] {
                "0" => 0,
                "1" => 1,
                t => return Err(invalid(format!("line {line}: target must be 0 or 1, got {t:?}"))),
            };
            rows.push(MatrixRow { change_id: rec[0].to_string(), values, target });
        }
        Ok(Self { names, rows })
    }
}
