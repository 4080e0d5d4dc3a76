use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vicpred_core::classify::TrainedModel;
use vicpred_core::features::{full_schema, DomainRankTable, Featurizer, HistoryState};
use vicpred_core::model::{ChangeRecord, LabelKind};

use crate::feedback::{FeedbackAck, FeedbackEntry, FeedbackLog};
use crate::pool::ReviewerPool;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("incompatible schema: {0}")]
    IncompatibleSchema(String),
    #[error("corrupt artifact: {0}")]
    CorruptArtifact(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::MalformedPayload(_) => "malformed_payload",
            ServiceError::SchemaMismatch(_) => "schema_mismatch",
            ServiceError::IncompatibleSchema(_) => "incompatible_schema",
            ServiceError::CorruptArtifact(_) => "corrupt_artifact",
            ServiceError::Io(_) => "io",
        }
    }

    pub fn is_client_error(&self) -> bool {
        !matches!(self, ServiceError::Io(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    SentForReview,
    NewPatchSet,
    Submitted,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    LikelyVulnerable,
    LikelyNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestedAction {
    SecureReview,
    SecurityTesting,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub change_id: String,
    pub label: VerdictLabel,
    pub score: f64,
    pub threshold: f64,
    pub model_version: u64,
    pub top_features: Vec<FeatureValue>,
    pub suggested_action: SuggestedAction,
    pub assigned_reviewer: Option<String>,
    pub trigger: Trigger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub version: u64,
    pub kind: String,
    pub schema_hash: String,
    pub threshold: f64,
    pub models: usize,
}

struct Member {
    model: TrainedModel,
    projection: Vec<usize>,
}

/// A model (or majority-vote ensemble) with the history it was trained
/// against. Never mutated once published.
pub struct Snapshot {
    pub version: u64,
    members: Vec<Member>,
    pub state: HistoryState,
}

/// Score, threshold and top features of one change under a snapshot.
pub struct Evaluation {
    pub score: f64,
    pub threshold: f64,
    pub top_features: Vec<FeatureValue>,
}

impl Snapshot {
    pub fn new(version: u64, models: Vec<TrainedModel>, state: HistoryState) -> Result<Self, ServiceError> {
        if models.is_empty() {
            return Err(ServiceError::CorruptArtifact("no model given".into()));
        }
        let full = full_schema();
        let members = models
            .into_iter()
            .map(|model| {
                let projection = full.projection_to(&model.schema).ok_or_else(|| {
                    ServiceError::IncompatibleSchema(format!(
                        "model schema {} has features the featurizer does not produce",
                        model.schema_hash
                    ))
                })?;
                Ok(Member { model, projection })
            })
            .collect::<Result<_, ServiceError>>()?;
        Ok(Self { version, members, state })
    }

    /// Reads model files and a history checkpoint.
    pub fn load(version: u64, model_paths: &[PathBuf], state_path: &Path) -> Result<Self, ServiceError> {
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| ServiceError::CorruptArtifact(format!("{}: {e}", p.display())));
        let models = model_paths
            .iter()
            .map(|p| {
                TrainedModel::from_json(&read(p)?).map_err(|e| ServiceError::CorruptArtifact(format!("{}: {e}", p.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let state = HistoryState::from_checkpoint(&read(state_path)?)
            .map_err(|e| ServiceError::CorruptArtifact(format!("{}: {e}", state_path.display())))?;
        Self::new(version, models, state)
    }

    pub fn info(&self) -> ModelInfo {
        let first = &self.members[0].model;
        let ensemble = self.members.len() > 1;
        ModelInfo {
            version: self.version,
            kind: if ensemble { "majority-vote".into() } else { first.kind.name().into() },
            schema_hash: first.schema_hash.clone(),
            threshold: if ensemble { 0.5 } else { first.threshold },
            models: self.members.len(),
        }
    }

    /// A single model reports its own score; an ensemble reports the share
    /// of members voting vulnerable against a 0.5 threshold.
    pub fn evaluate(&self, featurizer: &Featurizer, change: &ChangeRecord, top_k: usize) -> Result<Evaluation, ServiceError> {
        let full = featurizer.featurize(change, &self.state, change.submitted_at);
        let mut votes = 0usize;
        let mut single = None;
        for m in &self.members {
            let x: Vec<f64> = m.projection.iter().map(|&i| full[i]).collect();
            let s = m.model.score(&x).map_err(|e| ServiceError::SchemaMismatch(e.to_string()))?;
            votes += usize::from(s >= m.model.threshold);
            single.get_or_insert((s, x));
        }
        let (first_score, first_x) = single.expect("snapshot has members");
        let lead = &self.members[0].model;
        let top_features = lead
            .top_features(top_k)
            .into_iter()
            .map(|(j, _)| FeatureValue { name: lead.schema.features[j].name.clone(), value: first_x[j] })
            .collect();
        let (score, threshold) = if self.members.len() == 1 {
            (first_score, lead.threshold)
        } else {
            (votes as f64 / self.members.len() as f64, 0.5)
        };
        Ok(Evaluation { score, threshold, top_features })
    }

    /// Verdict without reviewer assignment.
    pub fn verdict(
        &self,
        featurizer: &Featurizer,
        change: &ChangeRecord,
        trigger: Trigger,
        top_k: usize,
        testing_threshold: Option<f64>,
    ) -> Result<Verdict, ServiceError> {
        let ev = self.evaluate(featurizer, change, top_k)?;
        let vulnerable = ev.score >= ev.threshold;
        let suggested_action = if vulnerable {
            SuggestedAction::SecureReview
        } else if testing_threshold.is_some_and(|t| ev.score >= t) {
            SuggestedAction::SecurityTesting
        } else {
            SuggestedAction::None
        };
        Ok(Verdict {
            change_id: change.change_id.clone(),
            label: if vulnerable { VerdictLabel::LikelyVulnerable } else { VerdictLabel::LikelyNormal },
            score: ev.score,
            threshold: ev.threshold,
            model_version: self.version,
            top_features: ev.top_features,
            suggested_action,
            assigned_reviewer: None,
            trigger,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub reviewers: Vec<String>,
    /// Where the rotation cursor is kept across restarts.
    pub pool_state: Option<PathBuf>,
    pub feedback_log: PathBuf,
    /// Scores in [testing_threshold, threshold) suggest security testing.
    pub testing_threshold: Option<f64>,
    pub top_k: usize,
    pub ranks: DomainRankTable,
}

impl ServiceConfig {
    pub fn new(feedback_log: PathBuf) -> Self {
        Self {
            reviewers: vec![],
            pool_state: None,
            feedback_log,
            testing_threshold: None,
            top_k: 5,
            ranks: DomainRankTable::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct ScoreRequest {
    pub trigger: Trigger,
    pub change: ChangeRecord,
}

#[derive(Debug, Deserialize)]
pub struct FeedbackRequest {
    pub change_id: String,
    pub label: LabelKind,
}

#[derive(Debug, Deserialize)]
pub struct SwapRequest {
    pub model_path: PathBuf,
    /// Further models voting with the first.
    #[serde(default)]
    pub ensemble: Vec<PathBuf>,
    pub state_path: PathBuf,
}

pub struct Service {
    config: ServiceConfig,
    featurizer: Featurizer,
    snapshot: RwLock<Arc<Snapshot>>,
    swap_lock: Mutex<()>,
    pool: Mutex<ReviewerPool>,
    feedback: Mutex<FeedbackLog>,
    scored: Mutex<HashSet<String>>,
}

impl Service {
    pub fn new(config: ServiceConfig, snapshot: Snapshot) -> Result<Self, ServiceError> {
        let pool = match &config.pool_state {
            Some(p) => ReviewerPool::load_or_new(p, config.reviewers.clone())?,
            None => ReviewerPool::new(config.reviewers.clone()),
        };
        let feedback = FeedbackLog::open(&config.feedback_log)?;
        Ok(Self {
            featurizer: Featurizer::new(config.ranks.clone()),
            config,
            snapshot: RwLock::new(Arc::new(snapshot)),
            swap_lock: Mutex::new(()),
            pool: Mutex::new(pool),
            feedback: Mutex::new(feedback),
            scored: Mutex::new(HashSet::new()),
        })
    }

    pub fn featurizer(&self) -> &Featurizer {
        &self.featurizer
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    pub fn model_info(&self) -> ModelInfo {
        self.snapshot().info()
    }

    pub fn pool(&self) -> ReviewerPool {
        self.pool.lock().expect("pool lock").clone()
    }

    pub fn score(&self, change: &ChangeRecord, trigger: Trigger) -> Result<Verdict, ServiceError> {
        let snap = self.snapshot();
        let mut verdict =
            snap.verdict(&self.featurizer, change, trigger, self.config.top_k, self.config.testing_threshold)?;
        if verdict.label == VerdictLabel::LikelyVulnerable {
            let mut pool = self.pool.lock().expect("pool lock");
            verdict.assigned_reviewer = pool.next_reviewer();
            if let (Some(_), Some(path)) = (&verdict.assigned_reviewer, &self.config.pool_state) {
                pool.save(path)?;
            }
        }
        self.scored.lock().expect("scored lock").insert(change.change_id.clone());
        Ok(verdict)
    }

    pub fn score_json(&self, body: &[u8]) -> Result<Verdict, ServiceError> {
        let req: ScoreRequest =
            serde_json::from_slice(body).map_err(|e| ServiceError::MalformedPayload(e.to_string()))?;
        self.score(&req.change, req.trigger)
    }

    /// Logs a confirmed label for the next retraining; the live model is untouched.
    pub fn feedback(&self, change_id: &str, label: LabelKind) -> Result<FeedbackAck, ServiceError> {
        let unknown_change = !self.scored.lock().expect("scored lock").contains(change_id);
        let entry = FeedbackEntry {
            change_id: change_id.to_string(),
            label,
            model_version: self.snapshot().version,
            unknown_change,
        };
        Ok(self.feedback.lock().expect("feedback lock").record(entry)?)
    }

    pub fn feedback_json(&self, body: &[u8]) -> Result<FeedbackAck, ServiceError> {
        let req: FeedbackRequest =
            serde_json::from_slice(body).map_err(|e| ServiceError::MalformedPayload(e.to_string()))?;
        if req.change_id.is_empty() {
            return Err(ServiceError::MalformedPayload("empty change_id".into()));
        }
        self.feedback(&req.change_id, req.label)
    }

    /// Loads and validates the new artifacts, then publishes them in one
    /// step. Requests already holding the old snapshot finish on it.
    pub fn swap(&self, model_paths: &[PathBuf], state_path: &Path) -> Result<ModelInfo, ServiceError> {
        let _serial = self.swap_lock.lock().expect("swap lock");
        let next = self.snapshot().version + 1;
        let snap = Arc::new(Snapshot::load(next, model_paths, state_path)?);
        let info = snap.info();
        *self.snapshot.write().expect("snapshot lock") = snap;
        Ok(info)
    }

    pub fn swap_json(&self, body: &[u8]) -> Result<ModelInfo, ServiceError> {
        let req: SwapRequest =
            serde_json::from_slice(body).map_err(|e| ServiceError::MalformedPayload(e.to_string()))?;
        let mut paths = vec![req.model_path];
        paths.extend(req.ensemble);
        self.swap(&paths, &req.state_path)
    }
}
