//! Random forest and multinomial gradient boosting.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::tree::{argmax, fit_tree, Presorted, Target, Tree, TreeParams};
use crate::error::{Error, Result};
use crate::par::{map_range_with, Exec};
use crate::sim::sweep::mix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
    /// Mean impurity decrease per feature, normalized to sum 1 (all zero for
    /// single-class data).
    pub importance: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

pub fn fit_forest(ds: &Dataset, p: ForestParams, seed: u64, exec: Exec) -> Forest {
    let presorted = Presorted::new(ds);
    let target = Target::Classes { y: &ds.y, n_classes: ds.n_classes };
    let fitted = map_range_with(exec, p.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, t as u64));
        let mut weights = vec![0.0; ds.n];
        if p.bootstrap {
            for _ in 0..ds.n {
                weights[rng.random_range(0..ds.n)] += 1.0;
            }
        } else {
            weights.fill(1.0);
        }
        fit_tree(ds, &presorted, &weights, &target, p.tree, Some(&mut rng))
    });
    let mut importance = vec![0.0; ds.d];
    for f in &fitted {
        for (a, b) in importance.iter_mut().zip(&f.importance) {
            *a += b / p.n_trees as f64;
        }
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        importance.iter_mut().for_each(|v| *v /= total);
    }
    Forest { trees: fitted.into_iter().map(|f| f.tree).collect(), n_classes: ds.n_classes, importance }
}

impl Forest {
    pub fn votes(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n_classes];
        for t in &self.trees {
            v[t.predict_class(x)] += 1.0;
        }
        let n = self.trees.len() as f64;
        v.iter_mut().for_each(|c| *c /= n);
        v
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.votes(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoostParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub subsample: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    pub init: Vec<f64>,
    pub learning_rate: f64,
    /// `rounds[m][k]`: tree of class `k` in round `m`.
    pub rounds: Vec<Vec<Tree>>,
    /// Training deviance before the first round and after every round.
    pub deviance: Vec<f64>,
}

pub fn softmax_in_place(f: &mut [f64]) {
    let m = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in f.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    f.iter_mut().for_each(|v| *v /= s);
}

/// Mean negative log-likelihood of the labels under `softmax(F)`.
fn deviance(f: &[f64], y: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for (i, &c) in y.iter().enumerate() {
        let row = &f[i * k..(i + 1) * k];
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - row[c];
    }
    total / y.len() as f64
}

pub fn fit_boosted(ds: &Dataset, p: BoostParams, seed: u64, exec: Exec) -> Result<Boosted> {
    if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
        return Err(Error::invalid(format!("learning rate must be positive, got {}", p.learning_rate)));
    }
    if !(p.subsample > 0.0 && p.subsample <= 1.0) {
        return Err(Error::invalid(format!("subsample must lie in (0, 1], got {}", p.subsample)));
    }
    let k = ds.n_classes;
    let n = ds.n;
    let counts = ds.class_counts();
    let init: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64 / n as f64).ln()).collect();
    let mut f: Vec<f64> = (0..n).flat_map(|_| init.iter().copied()).collect();
    let presorted = Presorted::new(ds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::with_capacity(p.n_estimators);
    let mut curve = vec![deviance(&f, &ds.y, k)];
    for m in 0..p.n_estimators {
        let mut prob = f.clone();
        prob.chunks_exact_mut(k).for_each(softmax_in_place);
        let mut weights = vec![0.0; n];
        if p.subsample < 1.0 {
            let take = ((p.subsample * n as f64).round() as usize).clamp(1, n);
            for i in sample(&mut rng, n, take) {
                weights[i] = 1.0;
            }
        } else {
            weights.fill(1.0);
        }
        let trees = map_range_with(exec, k, |c| {
            let residual: Vec<f64> = (0..n).map(|i| f64::from(u8::from(ds.y[i] == c)) - prob[i * k + c]).collect();
            let target = Target::Newton { residual: &residual, n_classes: k };
            fit_tree::<ChaCha8Rng>(ds, &presorted, &weights, &target, p.tree, None).tree
        });
        for i in 0..n {
            for (c, t) in trees.iter().enumerate() {
                f[i * k + c] += p.learning_rate * t.leaf_value(ds.row(i))[0];
            }
        }
        let dev = deviance(&f, &ds.y, k);
        if !dev.is_finite() {
            return Err(Error::TrainingAbort(format!("boosting deviance became {dev} in round {m}")));
        }
        curve.push(dev);
        rounds.push(trees);
    }
    Ok(Boosted { init, learning_rate: p.learning_rate, rounds, deviance: curve })
}

impl Boosted {
    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.init.clone();
        for round in &self.rounds {
            for (c, t) in round.iter().enumerate() {
                f[c] += self.learning_rate * t.leaf_value(x)[0];
            }
        }
        f
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.decision(x);
        softmax_in_place(&mut f);
        f
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.decision(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(n: usize, sep: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let shift = if c == 1 { sep } else { 0.0 };
            rows.push(vec![g.sample(&mut rng) + shift, g.sample(&mut rng) - shift, g.sample(&mut rng)]);
            y.push(c);
        }
        Dataset::new(rows, y, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn tree(depth: Option<usize>, mf: Option<usize>) -> TreeParams {
        TreeParams { max_depth: depth, min_leaf: 1, max_features: mf }
    }

    #[test]
    fn forest_is_deterministic_and_accurate() {
        let train = blobs(200, 6.0, 1);
        let test = blobs(200, 6.0, 2);
        let p = ForestParams { n_trees: 25, tree: tree(None, None), bootstrap: true };
        let a = fit_forest(&train, ForestParams { tree: tree(None, Some(1)), ..p }, 9, Exec::Parallel);
        let b = fit_forest(&train, ForestParams { tree: tree(None, Some(1)), ..p }, 9, Exec::Sequential);
        assert_eq!(a, b);
        let correct = (0..test.n).filter(|&i| a.predict(test.row(i)) == test.y[i]).count();
        assert!(correct as f64 / test.n as f64 >= 0.95);
        assert!((a.importance.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.importance[2] < a.importance[0] && a.importance[2] < a.importance[1]);
    }

    #[test]
    fn boosting_deviance_is_monotone_and_fits_blobs() {
        let ds = blobs(100, 4.0, 3);
        let p = BoostParams { learning_rate: 0.1, n_estimators: 50, tree: tree(Some(2), None), subsample: 1.0 };
        let b = fit_boosted(&ds, p, 0, Exec::Sequential).unwrap();
        for w in b.deviance.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{w:?}");
        }
        assert!((0..ds.n).all(|i| b.predict(ds.row(i)) == ds.y[i]));
    }

    #[test]
    fn tiny_learning_rate_predicts_priors() {
        let mut ds = blobs(30, 4.0, 4);
        ds.y[0] = 1;
        ds.y[2] = 1;
        let p = BoostParams { learning_rate: 1e-12, n_estimators: 1, tree: tree(Some(3), None), subsample: 1.0 };
        let b = fit_boosted(&ds, p, 0, Exec::Sequential).unwrap();
        let prior = ds.class_counts()[1] as f64 / ds.n as f64;
        for i in 0..ds.n {
            assert_eq!(b.predict(ds.row(i)), 1);
            assert!((b.proba(ds.row(i))[1] - prior).abs() < 1e-9);
        }
        assert!(fit_boosted(&ds, BoostParams { learning_rate: 0.0, ..p }, 0, Exec::Sequential).is_err());
    }

    #[test]
    fn subsampled_boosting_is_seeded() {
        let ds = blobs(80, 2.0, 5);
        let p = BoostParams { learning_rate: 0.2, n_estimators: 10, tree: tree(Some(2), None), subsample: 0.5 };
        let a = fit_boosted(&ds, p, 7, Exec::Parallel).unwrap();
        assert_eq!(a, fit_boosted(&ds, p, 7, Exec::Sequential).unwrap());
        assert_ne!(a, fit_boosted(&ds, p, 8, Exec::Sequential).unwrap());
    }
}
