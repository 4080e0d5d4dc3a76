use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    feature_names, fit, part, predict, skipped, Aggregates, CausalityAudit, EvalError, EvaluationReport,
    ExperimentConfig,
};
use crate::classify::{compute_metrics, ClassifyError};
use crate::features::{Featurizer, HistoryState, Period};
use crate::lineage::LabelDelay;
use crate::model::{LabelKind, LabeledChange, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Everything known before the period starts.
    #[default]
    Cumulative,
    /// Only labels that became known during the previous period.
    PreviousPeriod,
}

impl Window {
    pub fn parse(s: &str) -> Option<Window> {
        match s {
            "cumulative" => Some(Window::Cumulative),
            "previous" | "previous-period" | "previous_period" => Some(Window::PreviousPeriod),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OnlineConfig {
    #[serde(default)]
    pub period: Period,
    #[serde(default)]
    pub window: Window,
    /// Overrides when inducing labels become known, relative to submission.
    #[serde(default)]
    pub label_delay: Option<LabelDelay>,
}

struct PeriodPlan {
    id: i64,
    test: Vec<usize>,
    train: Vec<usize>,
}

/// Replays the corpus period by period. Each period's changes are
/// featurized once against the history known at the period start, and
/// scored by a model trained only on labels known before that start.
pub fn run_online(
    corpus: &[LabeledChange],
    online: &OnlineConfig,
    cfg: &ExperimentConfig,
) -> Result<EvaluationReport, EvalError> {
    let subset = cfg.subset()?;
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let known_at: Vec<Timestamp> = corpus
        .iter()
        .map(|c| match (online.label_delay, c.label.kind) {
            (Some(d), LabelKind::ViC) => d.apply(c.change.submitted_at),
            _ => c.label.known_at,
        })
        .collect();
    let targets: Vec<u8> = corpus.iter().map(|c| c.label.kind.target()).collect();
    let period = online.period;
    let mut by_period: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, c) in corpus.iter().enumerate() {
        by_period.entry(period.id(c.change.submitted_at)).or_default().push(i);
    }
    let mut feed: Vec<usize> = (0..corpus.len()).collect();
    feed.sort_by(|&a, &b| (known_at[a], &corpus[a].change.change_id).cmp(&(known_at[b], &corpus[b].change.change_id)));

    let featurizer = Featurizer::new(cfg.ranks.clone());
    let intrinsic: Vec<_> = corpus.par_iter().map(|c| featurizer.intrinsic(&c.change)).collect();
    let mut features: Vec<Option<Vec<f64>>> = vec![None; corpus.len()];
    let mut state = HistoryState::new(cfg.history);
    let mut audit = CausalityAudit::default();
    let mut cursor = 0;
    let mut plans = Vec::new();
    let (first, last) = (*by_period.keys().next().unwrap(), *by_period.keys().next_back().unwrap());
    for id in first..=last {
        let start = period.start(id);
        while cursor < feed.len() && known_at[feed[cursor]] < start {
            let i = feed[cursor];
            let mut label = corpus[i].label.clone();
            label.known_at = known_at[i];
            state.record_labeled_change(&corpus[i].change, &label)?;
            audit.state_reads += 1;
            audit.future_reads += u64::from(known_at[i] >= start);
            cursor += 1;
        }
        let Some(test) = by_period.get(&id) else { continue };
        for &i in test {
            features[i] = Some(featurizer.with_history(&intrinsic[i], &corpus[i].change, &state, start));
        }
        let window_start = match online.window {
            Window::Cumulative => Timestamp::MIN,
            Window::PreviousPeriod => period.start(id - 1),
        };
        let train: Vec<usize> = feed[..cursor]
            .iter()
            .copied()
            .filter(|&i| known_at[i] >= window_start && features[i].is_some() && period.id(corpus[i].change.submitted_at) < id)
            .collect();
        audit.training_reads += train.len() as u64;
        audit.future_reads += train.iter().filter(|&&i| known_at[i] >= start).count() as u64;
        plans.push(PeriodPlan { id, test: test.clone(), train });
    }
    assert_eq!(audit.future_reads, 0, "online replay read a label before it was known");

    let parts = plans
        .par_iter()
        .map(|p| {
            let name = period.label(p.id);
            let positives = p.train.iter().filter(|&&i| targets[i] == 1).count();
            if p.train.is_empty() {
                return Ok((skipped(name, "empty training window".into(), 0, 0), vec![]));
            }
            let train_rows: Vec<(&str, &[f64], u8)> = p
                .train
                .iter()
                .map(|&i| (corpus[i].change.change_id.as_str(), features[i].as_deref().unwrap(), targets[i]))
                .collect();
            let model = match fit(cfg, &subset, &train_rows) {
                Ok(m) => m,
                Err(ClassifyError::SingleClass(_)) => {
                    return Ok((skipped(name, "single-class training window".into(), train_rows.len(), positives), vec![]));
                }
                Err(e) => return Err(e.into()),
            };
            let test_rows: Vec<(&[f64], u8)> =
                p.test.iter().map(|&i| (features[i].as_deref().unwrap(), targets[i])).collect();
            let preds = predict(&model, &subset, &test_rows)?;
            Ok((part(name, &preds, train_rows.len(), positives), preds))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let pooled_preds: Vec<(u8, u8, f64)> = parts.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let parts: Vec<_> = parts.into_iter().map(|(p, _)| p).collect();
    let window = match online.window {
        Window::Cumulative => "cumulative",
        Window::PreviousPeriod => "previous-period",
    };
    Ok(EvaluationReport {
        protocol: format!("online({window})"),
        classifier: cfg.classifier,
        features: feature_names(&subset),
        seed: cfg.seed,
        pooled: compute_metrics(&pooled_preds),
        aggregates: Aggregates::of(&parts),
        parts,
        audit: Some(audit),
    })
}
