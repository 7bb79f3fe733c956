//! Stratified k-fold cross-validation and grid search.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::Confusion;
use crate::error::{Error, Result};
use crate::models::{train, Dataset, ModelSpec};
use crate::par::{map_range_with, map_with, Exec};
use crate::sim::sweep::mix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvPlan {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan { folds: 10, seed: 0 }
    }
}

/// Test-index sets of each fold. Every class is shuffled and dealt round
/// robin, continuing where the previous class stopped, so per-fold class
/// counts differ from the proportional share by less than one.
pub fn stratified_k_fold(y: &[usize], n_classes: usize, plan: CvPlan) -> Result<Vec<Vec<usize>>> {
    let k = plan.folds;
    if k < 2 {
        return Err(Error::invalid(format!("cross-validation needs at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for c in 0..n_classes {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if idx.len() < k {
            return Err(Error::invalid(format!("class {c} has {} samples, fewer than the {k} folds", idx.len())));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Stratified single split: `round(test_fraction * n_c)` of each class go to
/// the test side.
pub fn stratified_split(y: &[usize], n_classes: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..n_classes {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        idx.shuffle(&mut rng);
        let t = ((test_fraction * idx.len() as f64).round() as usize).clamp(usize::from(idx.len() > 1), idx.len().saturating_sub(1));
        test.extend_from_slice(&idx[..t]);
        train.extend_from_slice(&idx[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Out-of-fold predictions pooled over all folds.
    pub confusion: Confusion,
}

pub fn cross_validate(ds: &Dataset, spec: &ModelSpec, plan: CvPlan, exec: Exec) -> Result<CvResult> {
    let folds = stratified_k_fold(&ds.y, ds.n_classes, plan)?;
    let per_fold = map_range_with(exec, folds.len(), |f| -> Result<Confusion> {
        let test = &folds[f];
        let mut in_test = vec![false; ds.n];
        test.iter().for_each(|&i| in_test[i] = true);
        let train_idx: Vec<usize> = (0..ds.n).filter(|&i| !in_test[i]).collect();
        let model = train(spec, &ds.subset(&train_idx), mix(plan.seed, f as u64), Exec::Sequential)?;
        let test_ds = ds.subset(test);
        let pred = model.predict_dataset(&test_ds, Exec::Sequential)?;
        Ok(Confusion::from_predictions(ds.n_classes, &test_ds.y, &pred))
    });
    let mut confusion = Confusion::new(ds.n_classes);
    let mut fold_scores = Vec::with_capacity(folds.len());
    for c in per_fold {
        let c = c?;
        fold_scores.push(c.balanced_accuracy()?);
        confusion.add(&c);
    }
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    let std = (fold_scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / fold_scores.len() as f64).sqrt();
    Ok(CvResult { fold_scores, mean, std, confusion })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub spec: ModelSpec,
    /// `Err` holds the failure message; failed cells never win.
    pub result: std::result::Result<CvResult, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub best: usize,
}

impl GridResult {
    pub fn best_spec(&self) -> &ModelSpec {
        &self.cells[self.best].spec
    }

    pub fn best_result(&self) -> &CvResult {
        self.cells[self.best].result.as_ref().expect("best cell succeeded")
    }
}

/// Exhaustive CV over `grid`; the best mean balanced accuracy wins, ties to
/// the earlier cell.
pub fn grid_search(ds: &Dataset, grid: &[ModelSpec], plan: CvPlan, exec: Exec) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::invalid("model grid is empty"));
    }
    let cells: Vec<GridCell> = map_with(exec, grid, |spec| GridCell {
        spec: spec.clone(),
        result: cross_validate(ds, spec, plan, exec).map_err(|e| e.to_string()),
    });
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in cells.iter().enumerate() {
        match &c.result {
            Ok(r) if best.is_none_or(|(_, b)| r.mean > b) => best = Some((i, r.mean)),
            Ok(_) => {}
            Err(e) => log::warn!("grid cell {} failed: {e}", c.spec.label()),
        }
    }
    let (best, _) = best.ok_or_else(|| Error::TrainingAbort("every grid cell failed".into()))?;
    Ok(GridResult { cells, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GbParams, GnbParams};

    #[test]
    fn balanced_two_class_folds_are_exact() {
        let y: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let folds = stratified_k_fold(&y, 2, CvPlan::default()).unwrap();
        for f in &folds {
            assert_eq!(f.iter().filter(|&&i| y[i] == 0).count(), 5);
            assert_eq!(f.len(), 10);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn unbalanced_folds_stay_within_one() {
        let y: Vec<usize> = (0..103).map(|i| usize::from(i >= 60)).collect();
        let folds = stratified_k_fold(&y, 2, CvPlan { folds: 10, seed: 4 }).unwrap();
        for f in &folds {
            let a = f.iter().filter(|&&i| y[i] == 0).count();
            let b = f.len() - a;
            assert_eq!(a, 6);
            assert!(b == 4 || b == 5);
        }
        assert_eq!(folds, stratified_k_fold(&y, 2, CvPlan { folds: 10, seed: 4 }).unwrap());
        assert!(stratified_k_fold(&y[..65], 2, CvPlan { folds: 10, seed: 0 }).is_err());
    }

    #[test]
    fn split_is_stratified() {
        let y: Vec<usize> = (0..50).map(|i| usize::from(i >= 40)).collect();
        let (train, test) = stratified_split(&y, 2, 0.2, 1);
        assert_eq!(test.len(), 10);
        assert_eq!(test.iter().filter(|&&i| y[i] == 1).count(), 2);
        assert_eq!(train.len() + test.len(), 50);
    }

    fn separable() -> Dataset {
        let rows = (0..60).map(|i| vec![(i % 2) as f64 * 10.0 + (i as f64 * 0.1).sin()]).collect();
        Dataset::new(rows, (0..60).map(|i| i % 2).collect(), vec!["x".into()]).unwrap()
    }

    #[test]
    fn grid_prefers_sane_specs_and_is_idempotent() {
        let ds = separable();
        let degenerate = ModelSpec::Gb(GbParams { learning_rate: 1e-12, n_estimators: 1, ..Default::default() });
        let sane = ModelSpec::Gnb(GnbParams {});
        let plan = CvPlan { folds: 5, seed: 2 };
        let g = grid_search(&ds, &[degenerate, sane.clone()], plan, Exec::Parallel).unwrap();
        assert_eq!(g.best_spec(), &sane);
        let again = cross_validate(&ds, &sane, plan, Exec::Sequential).unwrap();
        assert_eq!(g.best_result(), &again);
        let one = grid_search(&ds, std::slice::from_ref(&sane), plan, Exec::Sequential).unwrap();
        assert_eq!(one.best, 0);
    }

    #[test]
    fn failed_cells_are_skipped() {
        let ds = separable();
        let bad = ModelSpec::Knn(crate::models::KnnParams { k: 1000, ..Default::default() });
        let g = grid_search(&ds, &[bad.clone(), ModelSpec::Gnb(GnbParams {})], CvPlan { folds: 3, seed: 0 }, Exec::Sequential).unwrap();
        assert!(g.cells[0].result.is_err());
        assert_eq!(g.best, 1);
        assert!(grid_search(&ds, &[bad], CvPlan { folds: 3, seed: 0 }, Exec::Sequential).is_err());
    }
}
