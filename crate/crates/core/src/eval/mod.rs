//! Experiment protocols: stratified N-fold validation, online monthly
//! retraining and feature-subset ablation.

mod ablation;
mod nfold;
mod online;
mod report;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ablation::{run_ablation, ABLATION_PRESETS, UNIVERSAL_PRESETS};
pub use nfold::{nfold_features, run_nfold, run_nfold_on, stratified_folds, FoldMatrix};
pub use online::{run_online, OnlineConfig, Window};
pub use report::{
    ablation_csv, AblationRow, Aggregates, CausalityAudit, EvaluationReport, PartReport, Summary,
};

use crate::classify::{
    compute_metrics, train, ClassifierKind, ClassifyError, Confusion, Dataset, Hyperparameters,
    MetricsReport, TrainedModel,
};
use crate::features::{full_schema, resolve_subset, DomainRankTable, HistoryConfig, HistoryStateError, SubsetError};
use crate::model::{ChangeRecord, LabelRecord, LabeledChange};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{n} folds need at least {n} positives, corpus has {positives}")]
    InsufficientPositives { n: usize, positives: usize },
    #[error("fold count must be at least 2")]
    TooFewFolds,
    #[error(transparent)]
    Subset(#[from] SubsetError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    History(#[from] HistoryStateError),
    #[error("no label for change {0}")]
    MissingLabel(String),
    #[error("label for unknown change {0}")]
    UnknownChange(String),
    #[error("empty corpus")]
    EmptyCorpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub classifier: ClassifierKind,
    #[serde(default)]
    pub params: Hyperparameters,
    pub threshold: f64,
    /// Subset expression, e.g. `all` or `VH+CC+RP`.
    pub features: String,
    pub seed: u64,
    #[serde(default)]
    pub history: HistoryConfig,
    #[serde(default)]
    pub ranks: DomainRankTable,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            classifier: ClassifierKind::RandomForest,
            params: Hyperparameters::default(),
            threshold: crate::classify::DEFAULT_THRESHOLD,
            features: "all".into(),
            seed: 0,
            history: HistoryConfig::default(),
            ranks: DomainRankTable::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn subset(&self) -> Result<Vec<usize>, SubsetError> {
        resolve_subset(&self.features)
    }
}

/// Pairs every change with its label; both sides must match one to one.
/// The result is ordered by submission time.
pub fn join_labels(changes: &[ChangeRecord], labels: &[LabelRecord]) -> Result<Vec<LabeledChange>, EvalError> {
    let by_id: HashMap<&str, &LabelRecord> = labels.iter().map(|l| (l.change_id.as_str(), l)).collect();
    let known: HashMap<&str, ()> = changes.iter().map(|c| (c.change_id.as_str(), ())).collect();
    if let Some(l) = labels.iter().find(|l| !known.contains_key(l.change_id.as_str())) {
        return Err(EvalError::UnknownChange(l.change_id.clone()));
    }
    let mut out = changes
        .iter()
        .map(|c| {
            by_id
                .get(c.change_id.as_str())
                .map(|l| LabeledChange { change: c.clone(), label: l.label.clone() })
                .ok_or_else(|| EvalError::MissingLabel(c.change_id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| {
        (a.change.submitted_at, &a.change.change_id).cmp(&(b.change.submitted_at, &b.change.change_id))
    });
    Ok(out)
}

/// Trains on `train` rows (full-schema vectors) restricted to `subset`.
/// A single-class set gives a constant model for tree learners.
pub(crate) fn fit(
    cfg: &ExperimentConfig,
    subset: &[usize],
    train_rows: &[(&str, &[f64], u8)],
) -> Result<TrainedModel, ClassifyError> {
    let schema = full_schema().select(subset);
    let mut data = Dataset::new(schema);
    for &(id, values, target) in train_rows {
        data.push(id, subset.iter().map(|&i| values[i]).collect(), target)?;
    }
    let mut model = train(cfg.classifier, &cfg.params, &data, cfg.seed)?;
    model.threshold = cfg.threshold;
    Ok(model)
}

pub(crate) fn predict(
    model: &TrainedModel,
    subset: &[usize],
    rows: &[(&[f64], u8)],
) -> Result<Vec<(u8, u8, f64)>, ClassifyError> {
    rows.iter()
        .map(|&(values, target)| {
            let projected: Vec<f64> = subset.iter().map(|&i| values[i]).collect();
            let s = model.score(&projected)?;
            Ok((target, u8::from(s >= model.threshold), s))
        })
        .collect()
}

pub(crate) fn part(name: String, predictions: &[(u8, u8, f64)], training_rows: usize, training_positives: usize) -> PartReport {
    let metrics = compute_metrics(predictions);
    let flagged = predictions.iter().filter(|p| p.1 == 1).count();
    PartReport {
        name,
        flagged_count: metrics.confusion.fp,
        vic_classified_fraction: (!predictions.is_empty()).then(|| flagged as f64 / predictions.len() as f64),
        metrics,
        training_rows,
        training_positives,
        skipped: None,
    }
}

pub(crate) fn skipped(name: String, reason: String, training_rows: usize, training_positives: usize) -> PartReport {
    PartReport {
        name,
        metrics: MetricsReport::from_confusion(Confusion::default(), None),
        flagged_count: 0,
        vic_classified_fraction: None,
        training_rows,
        training_positives,
        skipped: Some(reason),
    }
}

pub(crate) fn feature_names(subset: &[usize]) -> Vec<String> {
    let schema = full_schema();
    subset.iter().map(|&i| schema.features[i].name.clone()).collect()
}
