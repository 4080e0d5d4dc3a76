use serde::{Deserialize, Serialize};

use crate::service::{SuggestedAction, Trigger, Verdict, VerdictLabel};

/// Review comment for a flagged change, ready for a review-service adapter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub change_id: String,
    pub model_version: u64,
    pub score: f64,
    pub suggested_action: SuggestedAction,
    pub reviewer: Option<String>,
    pub manual: bool,
    pub message: String,
}

/// `None` for likely-normal verdicts: nothing is posted.
pub fn render_notification(v: &Verdict) -> Option<Notification> {
    if v.label != VerdictLabel::LikelyVulnerable {
        return None;
    }
    let manual = v.trigger == Trigger::Manual;
    let mut message = String::new();
    if manual {
        message.push_str("[manual request] ");
    }
    message.push_str(&format!(
        "This change looks likely to introduce a vulnerability (score {:.3}, threshold {:.3}, model v{}).",
        v.score, v.threshold, v.model_version
    ));
    let action = match v.suggested_action {
        SuggestedAction::SecureReview => "secure code review",
        SuggestedAction::SecurityTesting => "security testing",
        SuggestedAction::None => "none",
    };
    message.push_str(&format!(" Suggested action: {action}."));
    if !v.top_features.is_empty() {
        let list: Vec<String> = v.top_features.iter().map(|f| format!("{}={}", f.name, f.value)).collect();
        message.push_str(&format!(" Top features: {}.", list.join(", ")));
    }
    if let Some(r) = &v.assigned_reviewer {
        message.push_str(&format!(" @{r} please give it extra scrutiny."));
    }
    Some(Notification {
        change_id: v.change_id.clone(),
        model_version: v.model_version,
        score: v.score,
        suggested_action: v.suggested_action,
        reviewer: v.assigned_reviewer.clone(),
        manual,
        message,
    })
}
