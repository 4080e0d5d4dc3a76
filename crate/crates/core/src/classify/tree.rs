use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        positive_fraction: f64,
        weight: f64,
    },
    /// Values `<= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary classification tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { positive_fraction, .. } => return positive_fraction,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Checks child indices point forward and stay in range.
    pub fn is_well_formed(&self) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Leaf { positive_fraction, .. } => (0.0..=1.0).contains(&positive_fraction),
                Node::Split { left, right, threshold, .. } => {
                    left > i && right > i && left < self.nodes.len() && right < self.nodes.len() && threshold.is_finite()
                }
            })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowParams {
    /// Features drawn per split; all features when >= the column count.
    pub mtry: usize,
    pub max_depth: Option<usize>,
}

/// Training matrix in column-major form.
pub struct TrainingData<'a> {
    pub columns: &'a [Vec<f64>],
    pub targets: &'a [u8],
}

struct Split {
    feature: usize,
    threshold: f64,
    cost: f64,
}

fn gini_cost(w: f64, p: f64) -> f64 {
    let n = w - p;
    w - (p * p + n * n) / w
}

struct Grower<'a> {
    data: &'a TrainingData<'a>,
    weights: &'a [f64],
    params: GrowParams,
    pairs: Vec<(f64, u32)>,
    importances: Vec<f64>,
}

impl Grower<'_> {
    /// Lowest weighted Gini cost over the features, ties to the earlier
    /// feature and then the lower threshold.
    fn best_split(&mut self, sample: &[u32], features: &[usize]) -> Option<Split> {
        let (total_w, total_p) = self.totals(sample);
        let mut best: Option<Split> = None;
        for &f in features {
            let col = &self.data.columns[f];
            self.pairs.clear();
            self.pairs.extend(sample.iter().map(|&i| (col[i as usize], i)));
            self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let (mut wl, mut pl) = (0.0, 0.0);
            for k in 0..self.pairs.len() - 1 {
                let (v, i) = self.pairs[k];
                let w = self.weights[i as usize];
                wl += w;
                if self.data.targets[i as usize] == 1 {
                    pl += w;
                }
                let next = self.pairs[k + 1].0;
                if v == next {
                    continue;
                }
                let cost = gini_cost(wl, pl) + gini_cost(total_w - wl, total_p - pl);
                if best.as_ref().is_none_or(|b| cost < b.cost) {
                    let mid = v + (next - v) / 2.0;
                    let threshold = if mid >= next { v } else { mid };
                    best = Some(Split { feature: f, threshold, cost });
                }
            }
        }
        best
    }

    fn totals(&self, sample: &[u32]) -> (f64, f64) {
        sample.iter().fold((0.0, 0.0), |(w, p), &i| {
            let wi = self.weights[i as usize];
            (w + wi, if self.data.targets[i as usize] == 1 { p + wi } else { p })
        })
    }
}

/// Grows an unpruned CART tree over `sample` (row indices, each with a
/// positive weight). Impurity decreases are added to `importances`.
pub fn grow(
    data: &TrainingData<'_>,
    weights: &[f64],
    sample: Vec<u32>,
    params: GrowParams,
    rng: &mut ChaCha8Rng,
) -> (Tree, Vec<f64>) {
    let n_features = data.columns.len();
    let mut g = Grower {
        data,
        weights,
        params,
        pairs: Vec::with_capacity(sample.len()),
        importances: vec![0.0; n_features],
    };
    let mut nodes = vec![Node::Leaf { positive_fraction: 0.0, weight: 0.0 }];
    let mut stack = vec![(0usize, sample, 0usize)];
    while let Some((id, sample, depth)) = stack.pop() {
        let (w, p) = g.totals(&sample);
        let leaf = Node::Leaf { positive_fraction: if w > 0.0 { p / w } else { 0.0 }, weight: w };
        let pure = p <= 0.0 || p >= w;
        if pure || sample.len() < 2 || g.params.max_depth.is_some_and(|d| depth >= d) || n_features == 0 {
            nodes[id] = leaf;
            continue;
        }
        let split = if g.params.mtry >= n_features {
            let all: Vec<usize> = (0..n_features).collect();
            g.best_split(&sample, &all)
        } else {
            let mut drawn: Vec<usize> = index::sample(rng, n_features, g.params.mtry).into_vec();
            drawn.sort_unstable();
            g.best_split(&sample, &drawn).or_else(|| {
                let rest: Vec<usize> = (0..n_features).filter(|f| !drawn.contains(f)).collect();
                g.best_split(&sample, &rest)
            })
        };
        let Some(split) = split else {
            nodes[id] = leaf;
            continue;
        };
        g.importances[split.feature] += (gini_cost(w, p) - split.cost).max(0.0);
        let col = &data.columns[split.feature];
        let (l, r): (Vec<u32>, Vec<u32>) = sample.iter().partition(|&&i| col[i as usize] <= split.threshold);
        let (left, right) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { positive_fraction: 0.0, weight: 0.0 });
        nodes.push(Node::Leaf { positive_fraction: 0.0, weight: 0.0 });
        nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        stack.push((right, r, depth + 1));
        stack.push((left, l, depth + 1));
    }
    (Tree { nodes }, g.importances)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Fraction of trees whose leaf leans positive.
    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        let votes = self.trees.iter().filter(|t| t.leaf_value(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub grow: GrowParams,
    pub seed: u64,
}

/// Each tree draws from its own ChaCha stream of the master seed, so the
/// result does not depend on thread scheduling.
pub fn grow_forest(data: &TrainingData<'_>, weights: &[f64], params: ForestParams) -> (Forest, Vec<f64>) {
    let n = data.targets.len();
    let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(t as u64 + 1);
            let (sample, w) = if params.bootstrap {
                let mut counts = vec![0u32; n];
                for _ in 0..n {
                    counts[rand::Rng::gen_range(&mut rng, 0..n)] += 1;
                }
                let sample: Vec<u32> = (0..n as u32).filter(|&i| counts[i as usize] > 0).collect();
                let w: Vec<f64> = weights.iter().zip(&counts).map(|(w, &c)| w * f64::from(c)).collect();
                (sample, w)
            } else {
                ((0..n as u32).collect(), weights.to_vec())
            };
            grow(data, &w, sample, params.grow, &mut rng)
        })
        .collect();
    let mut importances = vec![0.0; data.columns.len()];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, imp) in grown {
        for (a, b) in importances.iter_mut().zip(imp) {
            *a += b;
        }
        trees.push(tree);
    }
    (Forest { trees }, importances)
}
