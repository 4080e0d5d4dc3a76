//! Independent reference computations for the classifiers and metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vicpred_core::classify::{
    logistic_objective, mann_whitney_u2, roc_area, train, ClassifierKind, Dataset, FeatureSchema, GaussianNb,
    Hyperparameters, Structure,
};

pub fn random_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let f = rng.gen_range(1..=5);
    let n = rng.gen_range(8..=60);
    let names: Vec<String> = (0..f).map(|j| format!("f{j}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut d = Dataset::new(FeatureSchema::numeric(&refs));
    let grid = rng.gen_bool(0.5);
    for i in 0..n {
        let values = (0..f)
            .map(|_| if grid { f64::from(rng.gen_range(0..4)) } else { rng.gen_range(-5.0..5.0) })
            .collect();
        d.push(format!("r{i}"), values, u8::from(rng.gen_bool(0.4))).unwrap();
    }
    d
}

/// A single unbootstrapped tree over all features must be the decision tree.
/// Returns the seeds whose datasets disagree.
pub fn forest_of_one_vs_tree(datasets: u64) -> Vec<u64> {
    let mut bad = Vec::new();
    for seed in 0..datasets {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dataset(&mut rng);
        let f = d.schema.len();
        let dt = train(ClassifierKind::DecisionTree, &Hyperparameters::default(), &d, seed).unwrap();
        let rf_params = Hyperparameters { n_trees: 1, bootstrap: false, mtry: Some(f), ..Default::default() };
        let rf = train(ClassifierKind::RandomForest, &rf_params, &d, seed).unwrap();
        let same_tree = match (&dt.structure, &rf.structure) {
            (Structure::Tree(t), Structure::Forest(forest)) => forest.trees.len() == 1 && forest.trees[0] == *t,
            _ => false,
        };
        let probes: Vec<Vec<f64>> = d
            .rows
            .iter()
            .map(|r| r.values.clone())
            .chain((0..50).map(|_| (0..f).map(|_| rng.gen_range(-6.0..6.0)).collect()))
            .collect();
        let same_votes = probes.iter().all(|x| dt.classify(x).unwrap() == rf.classify(x).unwrap());
        if !(same_tree && same_votes && dt.importances == rf.importances) {
            bad.push(seed);
        }
    }
    bad
}

/// Largest relative error between the analytic logistic gradient and
/// central differences over random problems.
pub fn logistic_gradient_error(problems: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..problems {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let f = rng.gen_range(1..=6);
        let n = rng.gen_range(5..=40);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..f).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let theta: Vec<f64> = (0..=f).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let l2 = rng.gen_range(0.0..0.1);
        let (_, grad) = logistic_objective(&theta, &x, &y, &w, l2);
        let h = 1e-5;
        let numeric: Vec<f64> = (0..theta.len())
            .map(|k| {
                let mut up = theta.clone();
                let mut down = theta.clone();
                up[k] += h;
                down[k] -= h;
                (logistic_objective(&up, &x, &y, &w, l2).0 - logistic_objective(&down, &x, &y, &w, l2).0) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let diff: Vec<f64> = grad.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let scale = norm(&grad).max(norm(&numeric)).max(1e-12);
        worst = worst.max(norm(&diff) / scale);
    }
    worst
}

/// Twice the Mann-Whitney U by comparing every positive with every negative.
pub fn brute_force_u2(scored: &[(u8, f64)]) -> u128 {
    let mut u2 = 0u128;
    for (t, s) in scored.iter().filter(|p| p.0 == 1) {
        debug_assert_eq!(*t, 1);
        for (_, n) in scored.iter().filter(|p| p.0 == 0) {
            u2 += if s > n { 2 } else if s == n { 1 } else { 0 };
        }
    }
    u2
}

/// Random score sets of at most 200 entries; returns the count where the
/// rank statistic or area differs from pair counting.
pub fn auc_mismatches(trials: u64) -> usize {
    let mut bad = 0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = rng.gen_range(2..=200);
        let levels = rng.gen_range(1..=30);
        let mut scored: Vec<(u8, f64)> =
            (0..n).map(|_| (u8::from(rng.gen_bool(0.3)), f64::from(rng.gen_range(0..levels)) / levels as f64)).collect();
        scored[0].0 = 0;
        scored[1].0 = 1;
        let want = brute_force_u2(&scored);
        let (u2, p, q) = mann_whitney_u2(&scored);
        let area = roc_area(&scored);
        let want_area = want as f64 / (2.0 * p as f64 * q as f64);
        if u2 != want || area != Some(want_area) {
            bad += 1;
        }
    }
    bad
}

/// Posterior from the textbook densities, no logarithms.
pub fn naive_bayes_closed_form(rows: &[Vec<f64>], targets: &[u8], weights: &[f64], x: &[f64]) -> f64 {
    let f = x.len();
    let mut joint = [0.0; 2];
    let total: f64 = weights.iter().sum();
    for c in 0..2u8 {
        let members: Vec<usize> = (0..rows.len()).filter(|&i| targets[i] == c).collect();
        let wc: f64 = members.iter().map(|&i| weights[i]).sum();
        let mut density = wc / total;
        for j in 0..f {
            let mean = members.iter().map(|&i| weights[i] * rows[i][j]).sum::<f64>() / wc;
            let var = (members.iter().map(|&i| weights[i] * (rows[i][j] - mean).powi(2)).sum::<f64>() / wc).max(1e-9);
            density *= (-(x[j] - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        }
        joint[usize::from(c)] = density;
    }
    joint[1] / (joint[0] + joint[1])
}

/// Largest absolute gap between the fitted posterior and the closed form.
pub fn naive_bayes_error(problems: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..problems {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let f = rng.gen_range(1..=4);
        let n = rng.gen_range(6..=40);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..f).map(|_| rng.gen_range(0.0..3.0)).collect()).collect();
        let mut targets: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
        targets[0] = 0;
        targets[1] = 1;
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let nb = GaussianNb::fit(&refs, &targets, &weights, 1e-9);
        for _ in 0..20 {
            let x: Vec<f64> = (0..f).map(|_| rng.gen_range(0.0..3.0)).collect();
            let want = naive_bayes_closed_form(&rows, &targets, &weights, &x);
            if want.is_finite() {
                worst = worst.max((nb.posterior(&x) - want).abs());
            }
        }
    }
    worst
}
