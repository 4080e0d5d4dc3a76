//! Lightweight binary classifiers and evaluation metrics.

mod bayes;
mod dataset;
mod logistic;
mod metrics;
mod schema;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bayes::GaussianNb;
pub use dataset::{Dataset, Row};
pub use logistic::{objective as logistic_objective, sigmoid, standardizer, Logistic, LogisticParams};
pub use metrics::{compute_metrics, mann_whitney_u2, roc_area, Confusion, MetricsReport};
pub use schema::{FeatureDef, FeatureKind, FeatureSchema};
pub use tree::{grow, grow_forest, Forest, ForestParams, GrowParams, Node, TrainingData, Tree};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("{0} needs both classes in the training data")]
    SingleClass(ClassifierKind),
    #[error("target must be 0 or 1, got {0}")]
    BadTarget(u8),
    #[error("row weight must be positive and finite, got {0}")]
    BadWeight(f64),
    #[error("unknown classifier {0:?}")]
    UnknownClassifier(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    NaiveBayes,
    LogisticRegression,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::NaiveBayes,
        ClassifierKind::LogisticRegression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "decision-tree",
            ClassifierKind::RandomForest => "random-forest",
            ClassifierKind::NaiveBayes => "naive-bayes",
            ClassifierKind::LogisticRegression => "logistic-regression",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "decision-tree" | "dt" | "tree" => Ok(ClassifierKind::DecisionTree),
            "random-forest" | "rf" | "forest" => Ok(ClassifierKind::RandomForest),
            "naive-bayes" | "nb" | "bayes" => Ok(ClassifierKind::NaiveBayes),
            "logistic-regression" | "lr" | "logistic" => Ok(ClassifierKind::LogisticRegression),
            _ => Err(ClassifyError::UnknownClassifier(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Features tried per split; forests default to floor(log2 F) + 1 and
    /// single trees to all features.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    /// Multiplier on the weight of positive rows.
    pub positive_weight: f64,
    pub l2: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub var_floor: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            n_trees: 100,
            bootstrap: true,
            mtry: None,
            max_depth: None,
            positive_weight: 1.0,
            l2: 1e-4,
            max_epochs: 10_000,
            tolerance: 1e-6,
            var_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Structure {
    Constant { score: f64 },
    Tree(Tree),
    Forest(Forest),
    NaiveBayes(GaussianNb),
    Logistic(Logistic),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub rows: usize,
    pub positives: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trained_at: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ClassifierKind,
    pub params: Hyperparameters,
    pub schema: FeatureSchema,
    pub schema_hash: String,
    pub threshold: f64,
    pub structure: Structure,
    /// Normalized to sum 1 unless all zero.
    pub importances: Vec<f64>,
    pub meta: TrainingMeta,
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().filter(|x| x.is_finite()).sum();
    for x in &mut v {
        *x = if s > 0.0 && x.is_finite() { *x / s } else { 0.0 };
    }
    v
}

pub fn train(
    kind: ClassifierKind,
    params: &Hyperparameters,
    data: &Dataset,
    seed: u64,
) -> Result<TrainedModel, ClassifyError> {
    if data.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    let f = data.schema.len();
    let targets: Vec<u8> = data.rows.iter().map(|r| r.target).collect();
    let weights: Vec<f64> = data
        .rows
        .iter()
        .map(|r| if r.target == 1 { r.weight * params.positive_weight } else { r.weight })
        .collect();
    let positives = data.positives();
    let single_class = positives == 0 || positives == data.len();

    let (structure, importances) = match kind {
        _ if single_class && matches!(kind, ClassifierKind::NaiveBayes | ClassifierKind::LogisticRegression) => {
            return Err(ClassifyError::SingleClass(kind));
        }
        ClassifierKind::DecisionTree => {
            let columns = data.columns();
            let td = TrainingData { columns: &columns, targets: &targets };
            let gp = GrowParams { mtry: params.mtry.unwrap_or(f), max_depth: params.max_depth };
            let sample = (0..data.len() as u32).collect();
            let (t, imp) = grow(&td, &weights, sample, gp, &mut ChaCha8Rng::seed_from_u64(seed));
            (Structure::Tree(t), imp)
        }
        ClassifierKind::RandomForest => {
            let columns = data.columns();
            let td = TrainingData { columns: &columns, targets: &targets };
            let default_mtry = (f.max(1) as f64).log2().floor() as usize + 1;
            let fp = ForestParams {
                n_trees: params.n_trees.max(1),
                bootstrap: params.bootstrap,
                grow: GrowParams { mtry: params.mtry.unwrap_or(default_mtry), max_depth: params.max_depth },
                seed,
            };
            let (forest, imp) = grow_forest(&td, &weights, fp);
            (Structure::Forest(forest), imp)
        }
        ClassifierKind::NaiveBayes => {
            let rows: Vec<&[f64]> = data.rows.iter().map(|r| r.values.as_slice()).collect();
            let nb = GaussianNb::fit(&rows, &targets, &weights, params.var_floor);
            let imp = nb.separations();
            (Structure::NaiveBayes(nb), imp)
        }
        ClassifierKind::LogisticRegression => {
            let rows: Vec<&[f64]> = data.rows.iter().map(|r| r.values.as_slice()).collect();
            let lp = LogisticParams { l2: params.l2, max_epochs: params.max_epochs, tolerance: params.tolerance };
            let lr = Logistic::fit(&rows, &targets, &weights, lp);
            let imp = lr.weights.iter().map(|w| w.abs()).collect();
            (Structure::Logistic(lr), imp)
        }
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        params: *params,
        schema_hash: data.schema.hash(),
        schema: data.schema.clone(),
        threshold: DEFAULT_THRESHOLD,
        structure,
        importances: normalized(importances),
        meta: TrainingMeta { rows: data.len(), positives, seed, trained_at: None },
    })
}

impl TrainedModel {
    /// Probability-like score in [0, 1] for a vector in this model's schema.
    pub fn score(&self, values: &[f64]) -> Result<f64, ClassifyError> {
        if values.len() != self.schema.len() {
            return Err(ClassifyError::SchemaMismatch(format!(
                "vector has {} values, model expects {}",
                values.len(),
                self.schema.len()
            )));
        }
        let s = match &self.structure {
            Structure::Constant { score } => *score,
            Structure::Tree(t) => t.leaf_value(values),
            Structure::Forest(f) => f.vote_fraction(values),
            Structure::NaiveBayes(nb) => nb.posterior(values),
            Structure::Logistic(lr) => lr.probability(values),
        };
        Ok(if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) })
    }

    /// 1 when the score reaches the threshold.
    pub fn classify(&self, values: &[f64]) -> Result<u8, ClassifyError> {
        Ok(u8::from(self.score(values)? >= self.threshold))
    }

    /// Scores a vector laid out in `schema`, picking this model's columns.
    pub fn score_in(&self, schema: &FeatureSchema, values: &[f64]) -> Result<f64, ClassifyError> {
        let idx = schema.projection_to(&self.schema).ok_or_else(|| {
            ClassifyError::SchemaMismatch(format!("model schema {} not covered by featurizer", self.schema_hash))
        })?;
        let projected: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        self.score(&projected)
    }

    /// The `k` features with the highest importance, ties by schema order.
    pub fn top_features(&self, k: usize) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self.importances.iter().copied().enumerate().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let m: TrainedModel =
            serde_json::from_str(text).map_err(|e| ClassifyError::CorruptModel(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifyError::CorruptModel(format!("unsupported format {}", m.format_version)));
        }
        if m.schema.hash() != m.schema_hash {
            return Err(ClassifyError::CorruptModel("schema hash does not match schema".into()));
        }
        if !(0.0..=1.0).contains(&m.threshold) {
            return Err(ClassifyError::CorruptModel(format!("threshold {} outside [0, 1]", m.threshold)));
        }
        if m.importances.len() != m.schema.len() {
            return Err(ClassifyError::CorruptModel("importance count differs from schema".into()));
        }
        let ok = match &m.structure {
            Structure::Constant { score } => (0.0..=1.0).contains(score),
            Structure::Tree(t) => t.is_well_formed() && features_in(t, m.schema.len()),
            Structure::Forest(f) => f.trees.iter().all(|t| t.is_well_formed() && features_in(t, m.schema.len())),
            Structure::NaiveBayes(nb) => nb.mean.iter().chain(&nb.var).all(|v| v.len() == m.schema.len()),
            Structure::Logistic(lr) => {
                lr.weights.len() == m.schema.len() && lr.mean.len() == m.schema.len() && lr.scale.len() == m.schema.len()
            }
        };
        if !ok {
            return Err(ClassifyError::CorruptModel("structure inconsistent with schema".into()));
        }
        Ok(m)
    }
}

fn features_in(t: &Tree, len: usize) -> bool {
    t.nodes.iter().all(|n| match n {
        Node::Split { feature, .. } => *feature < len,
        Node::Leaf { .. } => true,
    })
}
