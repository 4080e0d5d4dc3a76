use super::{run_nfold_on, AblationRow, EvalError, ExperimentConfig, FoldMatrix};
use crate::features::resolve_subset;
use crate::model::LabeledChange;

/// Family subsets compared under N-fold validation. The complexity family
/// is listed as CC+PC since patch-set counts belong to it here.
pub const ABLATION_PRESETS: &[&str] = &[
    "VH+CC+PC+RP+TM+HH+PT",
    "VH+CC+PC+RP+HH+PT",
    "VH+CC+PC+RP+TM+HH",
    "VH+CC+PC+RP+TM+PT",
    "VH+CC+PC+RP+TM",
    "VH+CC+PC+RP",
    "VH+CC+PC",
    "CC+PC+RP",
    "RP",
    "VH",
];

/// Subsets without project-specific families, down to five single features.
pub const UNIVERSAL_PRESETS: &[&str] = &[
    "VH+CC+PC+RP+TM+HH+PT",
    "CC+PC+RP+TM+PT",
    "CC+PC+RP+PT",
    "CC+PC+RP",
    "CC_add+PC_revision+PC_relative_revision+PC_avg_patchset+PC_count+RP_time+RP_weekday",
    "CC_add+PC_revision+PC_relative_revision+RP_time+RP_weekday",
];

/// One N-fold run per subset, sharing folds, features and seed. Every
/// subset is resolved before any training starts.
pub fn run_ablation(
    matrix: &FoldMatrix,
    corpus: &[LabeledChange],
    cfg: &ExperimentConfig,
    subsets: &[String],
) -> Result<Vec<AblationRow>, EvalError> {
    for s in subsets {
        resolve_subset(s)?;
    }
    subsets
        .iter()
        .map(|s| {
            let c = ExperimentConfig { features: s.clone(), ..cfg.clone() };
            Ok(AblationRow { subset: s.clone(), report: run_nfold_on(matrix, corpus, &c)? })
        })
        .collect()
}
