use serde::{Deserialize, Serialize};

/// Per-class independent Gaussians over every feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Log prior of class 0 and class 1.
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    /// Weighted maximum-likelihood fit. Both classes must be present.
    pub fn fit(rows: &[&[f64]], targets: &[u8], weights: &[f64], var_floor: f64) -> Self {
        let f = rows.first().map_or(0, |r| r.len());
        let mut wsum = [0.0; 2];
        let mut mean = [vec![0.0; f], vec![0.0; f]];
        for ((x, &y), &w) in rows.iter().zip(targets).zip(weights) {
            let c = usize::from(y);
            wsum[c] += w;
            for (m, v) in mean[c].iter_mut().zip(x.iter()) {
                *m += w * v;
            }
        }
        for c in 0..2 {
            mean[c].iter_mut().for_each(|m| *m /= wsum[c]);
        }
        let mut var = [vec![0.0; f], vec![0.0; f]];
        for ((x, &y), &w) in rows.iter().zip(targets).zip(weights) {
            let c = usize::from(y);
            for j in 0..f {
                let d = x[j] - mean[c][j];
                var[c][j] += w * d * d;
            }
        }
        for c in 0..2 {
            var[c].iter_mut().for_each(|v| *v = (*v / wsum[c]).max(var_floor));
        }
        let total = wsum[0] + wsum[1];
        Self { log_prior: [(wsum[0] / total).ln(), (wsum[1] / total).ln()], mean, var }
    }

    pub fn log_joint(&self, x: &[f64], class: usize) -> f64 {
        let mut lp = self.log_prior[class];
        for ((v, m), s2) in x.iter().zip(&self.mean[class]).zip(&self.var[class]) {
            let d = v - m;
            lp -= 0.5 * (2.0 * std::f64::consts::PI * s2).ln() + d * d / (2.0 * s2);
        }
        lp
    }

    /// Posterior probability of class 1.
    pub fn posterior(&self, x: &[f64]) -> f64 {
        let (l0, l1) = (self.log_joint(x, 0), self.log_joint(x, 1));
        1.0 / (1.0 + (l0 - l1).exp())
    }

    /// Mean separation per feature in units of the pooled deviation.
    pub fn separations(&self) -> Vec<f64> {
        (0..self.mean[0].len())
            .map(|j| {
                let pooled = (0.5 * (self.var[0][j] + self.var[1][j])).sqrt();
                (self.mean[1][j] - self.mean[0][j]).abs() / pooled
            })
            .collect()
    }
}
