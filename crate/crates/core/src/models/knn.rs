//! k-nearest-neighbour vote.

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Scaler};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L1,
    #[default]
    L2,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbours {
    pub k: usize,
    pub metric: Metric,
    pub scaler: Scaler,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

pub fn fit_knn(ds: &Dataset, k: usize, metric: Metric, standardize: bool) -> Neighbours {
    let scaler = if standardize { Scaler::fit(ds) } else { Scaler::identity(ds.d) };
    Neighbours { k, metric, x: ds.rows().map(|r| scaler.apply(r)).collect(), scaler, y: ds.y.clone(), n_classes: ds.n_classes }
}

impl Neighbours {
    /// Indices of the `k` nearest training points, ordered by distance then
    /// index.
    pub fn nearest(&self, q: &[f64]) -> Vec<usize> {
        let q = self.scaler.apply(q);
        let mut d: Vec<(f64, usize)> = self.x.iter().enumerate().map(|(i, r)| (self.metric.distance(&q, r), i)).collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn votes(&self, q: &[f64]) -> Vec<f64> {
        let near = self.nearest(q);
        let mut v = vec![0.0; self.n_classes];
        for i in &near {
            v[self.y[*i]] += 1.0 / near.len() as f64;
        }
        v
    }

    /// Majority label; tied counts go to the lower class.
    pub fn predict(&self, q: &[f64]) -> usize {
        super::tree::argmax(&self.votes(q))
    }
}
