//! Review-bot service: scores incoming changes against an immutable
//! (model, history) snapshot, rotates flagged changes across a reviewer
//! pool, logs confirmed labels for retraining and hot-swaps models.

mod feedback;
mod http;
mod notify;
mod pool;
mod service;

pub use feedback::{FeedbackAck, FeedbackEntry, FeedbackLog};
pub use http::{router, serve};
pub use notify::{render_notification, Notification};
pub use pool::ReviewerPool;
pub use service::{
    Evaluation, FeatureValue, FeedbackRequest, ModelInfo, ScoreRequest, Service, ServiceConfig, ServiceError, Snapshot,
    SuggestedAction, SwapRequest, Trigger, Verdict, VerdictLabel,
};
