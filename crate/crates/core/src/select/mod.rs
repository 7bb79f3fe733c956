//! Feature ranking and selection.

pub mod mi;
pub mod wavelet_search;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ensemble::{fit_forest, ForestParams};
use crate::models::tree::TreeParams;
use crate::models::{Dataset, RfParams};
use crate::par::{map_range_with, Exec};
use mi::{equal_frequency_bins, mutual_information};

pub const DEFAULT_BINS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mrmr,
    RfImportance,
    DtWaveletSearch,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mrmr => "mrmr",
            Method::RfImportance => "rf-importance",
            Method::DtWaveletSearch => "dt-wavelet-search",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    /// Feature indices in selection order.
    pub chosen: Vec<usize>,
    /// Relevance `I(x;y)` (mRMR) or normalized importance per feature.
    pub scores: Vec<f64>,
    /// Criterion value at each greedy step (mRMR) or the chosen importances.
    pub step_scores: Vec<f64>,
    pub flags: Vec<String>,
}

impl SelectionResult {
    pub fn report(&self, schema: &[String], parameters: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "method: {}", self.method.name());
        let _ = writeln!(s, "parameters: {parameters}");
        let _ = writeln!(s, "candidates: {}", schema.len());
        for f in &self.flags {
            let _ = writeln!(s, "flag: {f}");
        }
        let _ = writeln!(s, "chosen:");
        for (rank, (&j, step)) in self.chosen.iter().zip(&self.step_scores).enumerate() {
            let _ = writeln!(s, "  {:>2}  {:<32} score {:.6}  criterion {:.6}", rank + 1, schema[j], self.scores[j], step);
        }
        s
    }

    pub fn chosen_names(&self, schema: &[String]) -> Vec<String> {
        self.chosen.iter().map(|&j| schema[j].clone()).collect()
    }
}

/// Scores closer than this are tied and go to the lower index.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Greedy MID mRMR: the first pick maximizes `I(x;y)`, each later pick
/// maximizes `I(x;y) - mean_{s chosen} I(x;x_s)`; ties to the lower index.
pub fn mrmr_select(ds: &Dataset, count: usize, bins: usize, exec: Exec) -> Result<SelectionResult> {
    if count > ds.d {
        return Err(Error::invalid(format!("cannot select {count} of {} features", ds.d)));
    }
    let binned = map_range_with(exec, ds.d, |j| equal_frequency_bins(&ds.column(j), bins));
    let relevance = map_range_with(exec, ds.d, |j| mutual_information(&binned[j], &ds.y));
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    let mut redundancy = vec![0.0; ds.d];
    let mut steps = Vec::with_capacity(count);
    let mut taken = vec![false; ds.d];
    for step in 0..count {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..ds.d).filter(|&j| !taken[j]) {
            let score = if step == 0 { relevance[j] } else { relevance[j] - redundancy[j] / step as f64 };
            // rounding in the running redundancy sums must not break ties
            if best.is_none_or(|(_, b)| score > b + TIE_TOLERANCE) {
                best = Some((j, score));
            }
        }
        let (j, score) = best.expect("count <= d leaves a candidate");
        taken[j] = true;
        chosen.push(j);
        steps.push(score);
        let add = map_range_with(exec, ds.d, |k| if taken[k] { 0.0 } else { mutual_information(&binned[k], &binned[j]) });
        for (r, a) in redundancy.iter_mut().zip(add) {
            *r += a;
        }
    }
    Ok(SelectionResult { method: Method::Mrmr, chosen, scores: relevance, step_scores: steps, flags: Vec::new() })
}

/// Mean impurity decrease of a random forest, normalized to sum 1; the top
/// `count` features are chosen, ties to the lower index.
pub fn rf_importance(ds: &Dataset, params: &RfParams, count: usize, seed: u64, exec: Exec) -> Result<SelectionResult> {
    if count > ds.d {
        return Err(Error::invalid(format!("cannot select {count} of {} features", ds.d)));
    }
    let mut flags = Vec::new();
    let scores = if ds.class_counts().iter().filter(|c| **c > 0).count() < 2 {
        flags.push("single class: all importances are zero".to_string());
        vec![0.0; ds.d]
    } else {
        let mf = params.max_features.unwrap_or(((ds.d as f64).sqrt().floor() as usize).max(1)).min(ds.d);
        let p = ForestParams {
            n_trees: params.n_trees,
            tree: TreeParams { max_depth: params.max_depth, min_leaf: params.min_leaf, max_features: Some(mf) },
            bootstrap: params.bootstrap,
        };
        fit_forest(ds, p, seed, exec).importance
    };
    let mut order: Vec<usize> = (0..ds.d).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(count);
    let step_scores = order.iter().map(|&j| scores[j]).collect();
    Ok(SelectionResult { method: Method::RfImportance, chosen: order, scores, step_scores, flags })
}
