//! Ranking of wavelet/level pairs by decision-tree accuracy on their
//! detail coefficients.

use serde::{Deserialize, Serialize};

use crate::detect::CaptureWindow;
use crate::error::{Error, Result};
use crate::eval::{balanced_accuracy, stratified_split};
use crate::features::wavelet::{catalog, max_useful_level};
use crate::features::{extract_feature_matrix, FeatureMode, WaveletSpec};
use crate::models::{train, Dataset, DtParams, ModelSpec};
use crate::par::{map_with, Exec};
use crate::sim::sweep::mix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedSpec {
    pub spec: WaveletSpec,
    pub mean_balanced_accuracy: f64,
    pub run_scores: Vec<f64>,
}

/// Every catalog wavelet at every useful level for `window_len` samples.
pub fn full_catalog(window_len: usize) -> Vec<WaveletSpec> {
    catalog()
        .iter()
        .flat_map(|w| (1..=max_useful_level(window_len, w.filter_len())).map(|l| WaveletSpec::new(&w.name, l)))
        .collect()
}

fn evaluate(
    windows: &[CaptureWindow],
    labels: &[usize],
    n_classes: usize,
    spec: &WaveletSpec,
    runs: usize,
    dt: &DtParams,
    seed: u64,
) -> Result<RankedSpec> {
    let m = extract_feature_matrix(windows, &FeatureMode::Coeffs(spec.clone()), Exec::Sequential)?;
    if !m.dropped.is_empty() {
        return Err(Error::invalid(format!("{} windows gave non-finite coefficients", m.dropped.len())));
    }
    let y: Vec<usize> = m.source.iter().map(|&i| labels[i]).collect();
    let ds = Dataset::new(m.rows, y, m.schema)?;
    let model = ModelSpec::Dt(dt.clone());
    let mut run_scores = Vec::with_capacity(runs);
    for r in 0..runs {
        let run_seed = mix(seed, r as u64);
        let (tr, te) = stratified_split(&ds.y, n_classes, 0.2, run_seed);
        let fitted = train(&model, &ds.subset(&tr), run_seed, Exec::Sequential)?;
        let test = ds.subset(&te);
        let pred = fitted.predict_dataset(&test, Exec::Sequential)?;
        run_scores.push(balanced_accuracy(n_classes, &test.y, &pred)?);
    }
    let mean = run_scores.iter().sum::<f64>() / runs as f64;
    Ok(RankedSpec { spec: spec.clone(), mean_balanced_accuracy: mean, run_scores })
}

/// Mean balanced accuracy of a decision tree over `runs` stratified 80/20
/// splits for each spec, best first (ties keep catalog order). Specs that
/// fail to extract or train are logged and skipped.
#[allow(clippy::too_many_arguments)]
pub fn dt_wavelet_search(
    windows: &[CaptureWindow],
    labels: &[usize],
    n_classes: usize,
    specs: &[WaveletSpec],
    runs: usize,
    dt: &DtParams,
    seed: u64,
    exec: Exec,
) -> Result<Vec<RankedSpec>> {
    if runs == 0 {
        return Err(Error::invalid("wavelet search needs at least one run"));
    }
    if windows.len() != labels.len() {
        return Err(Error::invalid("one label per window is required"));
    }
    let results = map_with(exec, specs, |s| evaluate(windows, labels, n_classes, s, runs, dt, seed));
    let mut ranked = Vec::new();
    for (s, r) in specs.iter().zip(results) {
        match r {
            Ok(r) => ranked.push(r),
            Err(e) => log::warn!("skipping {}: {e}", s.label()),
        }
    }
    ranked.sort_by(|a, b| b.mean_balanced_accuracy.total_cmp(&a.mean_balanced_accuracy));
    Ok(ranked)
}

pub fn top(ranked: &[RankedSpec], k: usize) -> &[RankedSpec] {
    &ranked[..k.min(ranked.len())]
}
