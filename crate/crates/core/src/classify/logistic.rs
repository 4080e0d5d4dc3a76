use serde::{Deserialize, Serialize};

/// L2-regularized logistic regression on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weighted mean log loss plus `l2/2 * |w|^2` and its gradient. `theta`
/// holds the feature weights followed by the unpenalized bias.
pub fn objective(theta: &[f64], x: &[Vec<f64>], y: &[u8], w: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let f = theta.len() - 1;
    let total: f64 = w.iter().sum();
    let mut loss = 0.0;
    let mut grad = vec![0.0; f + 1];
    for ((row, &t), &wi) in x.iter().zip(y).zip(w) {
        let z = theta[f] + row.iter().zip(&theta[..f]).map(|(a, b)| a * b).sum::<f64>();
        let yt = f64::from(t);
        loss += wi * (softplus(z) - yt * z);
        let r = wi * (sigmoid(z) - yt);
        for (g, a) in grad.iter_mut().zip(row) {
            *g += r * a;
        }
        grad[f] += r;
    }
    loss /= total;
    grad.iter_mut().for_each(|g| *g /= total);
    for j in 0..f {
        loss += 0.5 * l2 * theta[j] * theta[j];
        grad[j] += l2 * theta[j];
    }
    (loss, grad)
}

/// Column means and deviations; constant columns keep scale 1.
pub fn standardizer(rows: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let f = rows.first().map_or(0, |r| r.len());
    let n = rows.len().max(1) as f64;
    let mut mean = vec![0.0; f];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; f];
    for r in rows {
        for j in 0..f {
            scale[j] += (r[j] - mean[j]).powi(2) / n;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    (mean, scale)
}

impl Logistic {
    /// Full-batch gradient descent with Armijo backtracking.
    pub fn fit(rows: &[&[f64]], y: &[u8], w: &[f64], params: LogisticParams) -> Self {
        let (mean, scale) = standardizer(rows);
        let x: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect())
            .collect();
        let f = mean.len();
        let mut theta = vec![0.0; f + 1];
        let mut step: f64 = 1.0;
        let mut epochs = 0;
        let (mut loss, mut grad) = objective(&theta, &x, y, w, params.l2);
        while epochs < params.max_epochs {
            let norm2: f64 = grad.iter().map(|g| g * g).sum();
            if norm2.sqrt() < params.tolerance {
                break;
            }
            epochs += 1;
            step = (step * 2.0).min(1e4);
            let accepted = loop {
                let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
                let (l, g) = objective(&trial, &x, y, w, params.l2);
                if l <= loss - 1e-4 * step * norm2 {
                    break Some((trial, l, g));
                }
                step /= 2.0;
                if step < 1e-16 {
                    break None;
                }
            };
            match accepted {
                Some((t, l, g)) => {
                    theta = t;
                    loss = l;
                    grad = g;
                }
                None => break,
            }
        }
        let bias = theta[f];
        theta.truncate(f);
        Self { mean, scale, weights: theta, bias, epochs }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        let z = self.bias
            + x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .zip(&self.weights)
                .map(|(((v, m), s), w)| (v - m) / s * w)
                .sum::<f64>();
        sigmoid(z)
    }
}
