//! CART trees over presorted columns.
//!
//! Every feature is sorted once per training set; a node keeps, per
//! feature, the sorted indices of its samples and splits them stably. A split
//! `x[f] <= v` always puts its threshold on a training value, so predictions
//! are unchanged by any strictly increasing transform of a column.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

/// Per-feature sample order of a dataset, ties by index.
#[derive(Clone, Debug)]
pub struct Presorted {
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(ds: &Dataset) -> Presorted {
        let order = (0..ds.d)
            .map(|j| {
                let mut idx: Vec<u32> = (0..ds.n as u32).collect();
                idx.sort_by(|&a, &b| ds.value(a as usize, j).total_cmp(&ds.value(b as usize, j)).then(a.cmp(&b)));
                idx
            })
            .collect();
        Presorted { order }
    }

    fn restricted(&self, weights: &[f64]) -> Vec<Vec<u32>> {
        self.order.iter().map(|o| o.iter().copied().filter(|&i| weights[i as usize] > 0.0).collect()).collect()
    }
}

/// What a tree is fitted to.
pub enum Target<'a> {
    /// Gini impurity; leaves hold class proportions.
    Classes { y: &'a [usize], n_classes: usize },
    /// Squared error on `residual`; leaves hold the multinomial-deviance
    /// Newton step `(K-1)/K * sum r / sum |r|(1-|r|)`.
    Newton { residual: &'a [f64], n_classes: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features drawn per node; `None` searches all of them.
    pub max_features: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: Vec<f64> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    k = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf, ties to the lower class.
    pub fn predict_class(&self, x: &[f64]) -> usize {
        argmax(self.leaf_value(x))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], k: usize) -> usize {
            match &nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// First index of the largest value.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Weighted impurity decrease per feature, summed over the tree's nodes and
/// divided by the root weight.
pub struct Fitted {
    pub tree: Tree,
    pub importance: Vec<f64>,
}

struct Builder<'a, R> {
    ds: &'a Dataset,
    weights: &'a [f64],
    target: &'a Target<'a>,
    params: TreeParams,
    rng: Option<&'a mut R>,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

/// Sufficient statistics of a sample set.
#[derive(Clone)]
struct Stats {
    w: f64,
    /// Class weights (classification) or `[sum w r, sum w |r|(1-|r|)]`.
    acc: Vec<f64>,
}

impl<R: Rng> Builder<'_, R> {
    fn empty_stats(&self) -> Stats {
        match self.target {
            Target::Classes { n_classes, .. } => Stats { w: 0.0, acc: vec![0.0; *n_classes] },
            Target::Newton { .. } => Stats { w: 0.0, acc: vec![0.0; 2] },
        }
    }

    fn add(&self, s: &mut Stats, i: usize) {
        let w = self.weights[i];
        s.w += w;
        match self.target {
            Target::Classes { y, .. } => s.acc[y[i]] += w,
            Target::Newton { residual, .. } => {
                let r = residual[i];
                s.acc[0] += w * r;
                s.acc[1] += w * r.abs() * (1.0 - r.abs());
            }
        }
    }

    /// Quantity whose sum over children is maximized by the best split:
    /// `sum_k c_k^2 / w` (Gini) or `(sum w r)^2 / w` (squared error).
    fn purity(&self, s: &Stats) -> f64 {
        if s.w <= 0.0 {
            return 0.0;
        }
        match self.target {
            Target::Classes { .. } => s.acc.iter().map(|c| c * c).sum::<f64>() / s.w,
            Target::Newton { .. } => s.acc[0] * s.acc[0] / s.w,
        }
    }

    /// `w * impurity` for the importance bookkeeping.
    fn weighted_impurity(&self, s: &Stats, sq: f64) -> f64 {
        match self.target {
            Target::Classes { .. } => s.w - self.purity(s),
            Target::Newton { .. } => sq - self.purity(s),
        }
    }

    fn leaf(&self, s: &Stats) -> Vec<f64> {
        match self.target {
            Target::Classes { .. } => s.acc.iter().map(|c| c / s.w).collect(),
            Target::Newton { n_classes, .. } => {
                let k = *n_classes as f64;
                let den = s.acc[1];
                vec![if den.abs() < 1e-150 { 0.0 } else { (k - 1.0) / k * s.acc[0] / den }]
            }
        }
    }

    fn is_pure(&self, members: &[u32], s: &Stats) -> bool {
        match self.target {
            Target::Classes { .. } => s.acc.iter().filter(|c| **c > 0.0).count() <= 1,
            Target::Newton { residual, .. } => {
                let r0 = residual[members[0] as usize];
                members.iter().all(|&i| residual[i as usize] == r0)
            }
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.ds.d;
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < d => {
                let mut f = sample(rng, d, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn build(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let members = &sorted[0];
        let mut total = self.empty_stats();
        let mut sq = 0.0;
        for &i in members {
            self.add(&mut total, i as usize);
            if let Target::Newton { residual, .. } = self.target {
                sq += self.weights[i as usize] * residual[i as usize].powi(2);
            }
        }
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf { value: self.leaf(&total) });
        let min_leaf = self.params.min_leaf.max(1) as f64;
        if self.params.max_depth.is_some_and(|m| depth >= m)
            || total.w < 2.0 * min_leaf
            || self.ds.d == 0
            || self.is_pure(members, &total)
        {
            return idx;
        }

        let mut best: Option<(f64, usize, f64)> = None;
        for f in self.candidate_features() {
            let order = &sorted[f];
            let mut left = self.empty_stats();
            for p in 0..order.len() - 1 {
                let i = order[p] as usize;
                self.add(&mut left, i);
                let v = self.ds.value(i, f);
                let next = self.ds.value(order[p + 1] as usize, f);
                if next <= v || left.w < min_leaf || total.w - left.w < min_leaf {
                    continue;
                }
                let right = Stats { w: total.w - left.w, acc: total.acc.iter().zip(&left.acc).map(|(t, l)| t - l).collect() };
                let score = self.purity(&left) + self.purity(&right);
                if best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, f, v));
                }
            }
        }
        let Some((score, feature, threshold)) = best else {
            return idx;
        };

        let (mut ls, mut rs) = (Vec::with_capacity(sorted.len()), Vec::with_capacity(sorted.len()));
        for o in &sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = o.iter().partition(|&&i| self.ds.value(i as usize, feature) <= threshold);
            ls.push(l);
            rs.push(r);
        }
        let mut lst = self.empty_stats();
        let mut lsq = 0.0;
        for &i in &ls[0] {
            self.add(&mut lst, i as usize);
            if let Target::Newton { residual, .. } = self.target {
                lsq += self.weights[i as usize] * residual[i as usize].powi(2);
            }
        }
        let rst = Stats { w: total.w - lst.w, acc: total.acc.iter().zip(&lst.acc).map(|(t, l)| t - l).collect() };
        let decrease = self.weighted_impurity(&total, sq)
            - self.weighted_impurity(&lst, lsq)
            - self.weighted_impurity(&rst, sq - lsq);
        debug_assert!(score.is_finite());
        self.importance[feature] += decrease.max(0.0);
        drop(sorted);
        let left = self.build(ls, depth + 1);
        let right = self.build(rs, depth + 1);
        self.nodes[idx] = Node::Split { feature, threshold, left, right };
        idx
    }
}

/// Fit one tree; samples with zero weight are excluded, integer weights act
/// as bootstrap multiplicities.
pub fn fit_tree<R: Rng>(
    ds: &Dataset,
    presorted: &Presorted,
    weights: &[f64],
    target: &Target,
    params: TreeParams,
    rng: Option<&mut R>,
) -> Fitted {
    let sorted = presorted.restricted(weights);
    let root_w: f64 = weights.iter().sum();
    let mut b = Builder { ds, weights, target, params, rng, nodes: Vec::new(), importance: vec![0.0; ds.d] };
    if sorted.first().is_none_or(|s| s.is_empty()) {
        let value = match target {
            Target::Classes { n_classes, .. } => vec![1.0 / *n_classes as f64; *n_classes],
            Target::Newton { .. } => vec![0.0],
        };
        return Fitted { tree: Tree { nodes: vec![Node::Leaf { value }] }, importance: b.importance };
    }
    b.build(sorted, 0);
    let importance = b.importance.iter().map(|v| v / root_w).collect();
    Fitted { tree: Tree { nodes: b.nodes }, importance }
}
