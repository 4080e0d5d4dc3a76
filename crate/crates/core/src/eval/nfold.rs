use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{feature_names, fit, part, predict, Aggregates, EvalError, EvaluationReport, ExperimentConfig};
use crate::classify::compute_metrics;
use crate::features::{Featurizer, HistoryState};
use crate::model::LabeledChange;

/// Fold index per row. Positives and negatives are shuffled separately and
/// dealt round-robin, positives first, so each fold gets either
/// floor(P/n) or ceil(P/n) positives.
pub fn stratified_folds(targets: &[u8], n: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if n < 2 {
        return Err(EvalError::TooFewFolds);
    }
    let positives = targets.iter().filter(|&&t| t == 1).count();
    if positives < n {
        return Err(EvalError::InsufficientPositives { n, positives });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..targets.len()).filter(|&i| targets[i] == 1).collect();
    let mut neg: Vec<usize> = (0..targets.len()).filter(|&i| targets[i] != 1).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; targets.len()];
    for (k, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = k % n;
    }
    Ok(fold)
}

/// Per-fold feature vectors: fold `k` featurizes every change against the
/// history of all changes outside fold `k`, past and future alike.
pub struct FoldMatrix {
    pub fold_of: Vec<usize>,
    pub features: Vec<Vec<Vec<f64>>>,
}

pub fn nfold_features(corpus: &[LabeledChange], n: usize, cfg: &ExperimentConfig) -> Result<FoldMatrix, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let targets: Vec<u8> = corpus.iter().map(|c| c.label.kind.target()).collect();
    let fold_of = stratified_folds(&targets, n, cfg.seed)?;
    let featurizer = Featurizer::new(cfg.ranks.clone());
    let intrinsic: Vec<_> = corpus.par_iter().map(|c| featurizer.intrinsic(&c.change)).collect();
    let mut feed: Vec<usize> = (0..corpus.len()).collect();
    feed.sort_by(|&a, &b| {
        let key = |i: usize| (corpus[i].label.known_at, &corpus[i].change.change_id);
        key(a).cmp(&key(b))
    });
    let features = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut state = HistoryState::new(cfg.history);
            for &i in feed.iter().filter(|&&i| fold_of[i] != k) {
                state.record_labeled_change(&corpus[i].change, &corpus[i].label)?;
            }
            Ok(corpus
                .iter()
                .zip(&intrinsic)
                .map(|(c, x)| featurizer.with_history(x, &c.change, &state, c.change.submitted_at))
                .collect())
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(FoldMatrix { fold_of, features })
}

/// Evaluates precomputed fold features with the configured classifier and
/// feature subset.
pub fn run_nfold_on(
    matrix: &FoldMatrix,
    corpus: &[LabeledChange],
    cfg: &ExperimentConfig,
) -> Result<EvaluationReport, EvalError> {
    let subset = cfg.subset()?;
    let n = matrix.features.len();
    let targets: Vec<u8> = corpus.iter().map(|c| c.label.kind.target()).collect();
    let folds = (0..n)
        .into_par_iter()
        .map(|k| {
            let x = &matrix.features[k];
            let train_rows: Vec<(&str, &[f64], u8)> = (0..corpus.len())
                .filter(|&i| matrix.fold_of[i] != k)
                .map(|i| (corpus[i].change.change_id.as_str(), x[i].as_slice(), targets[i]))
                .collect();
            let test_rows: Vec<(&[f64], u8)> = (0..corpus.len())
                .filter(|&i| matrix.fold_of[i] == k)
                .map(|i| (x[i].as_slice(), targets[i]))
                .collect();
            let model = fit(cfg, &subset, &train_rows)?;
            let preds = predict(&model, &subset, &test_rows)?;
            let positives = train_rows.iter().filter(|r| r.2 == 1).count();
            Ok((part(format!("fold-{}", k + 1), &preds, train_rows.len(), positives), preds))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let pooled_preds: Vec<(u8, u8, f64)> = folds.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let parts: Vec<_> = folds.into_iter().map(|(p, _)| p).collect();
    Ok(EvaluationReport {
        protocol: format!("nfold({n})"),
        classifier: cfg.classifier,
        features: feature_names(&subset),
        seed: cfg.seed,
        pooled: compute_metrics(&pooled_preds),
        aggregates: Aggregates::of(&parts),
        parts,
        audit: None,
    })
}

pub fn run_nfold(corpus: &[LabeledChange], n: usize, cfg: &ExperimentConfig) -> Result<EvaluationReport, EvalError> {
    cfg.subset()?;
    let matrix = nfold_features(corpus, n, cfg)?;
    run_nfold_on(&matrix, corpus, cfg)
}
