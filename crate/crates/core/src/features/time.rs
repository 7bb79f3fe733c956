//! Time-domain feature families F1..F7.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares AR fit `phi_0..phi_l`; `ridge` is set when the normal
/// equations were singular and a small ridge term was added.
#[derive(Clone, Debug, PartialEq)]
pub struct ArFit {
    pub coefficients: Vec<f64>,
    pub ridge: bool,
}

pub const RIDGE_LAMBDA: f64 = 1e-8;

pub fn ar_coefficients(x: &[f64], order: usize) -> Result<ArFit> {
    if order == 0 || x.len() <= 4 * order {
        return Err(Error::invalid(format!("AR order {order} needs more than {} samples, got {}", 4 * order, x.len())));
    }
    // lag columns are centred so the intercept drops out of the normal
    // equations and the ridge only shrinks the lag coefficients
    let rows = (x.len() - order) as f64;
    let target_mean = x[order..].iter().sum::<f64>() / rows;
    let col_mean: Vec<f64> = (1..=order).map(|i| x[order - i..x.len() - i].iter().sum::<f64>() / rows).collect();
    let mut ata = DMatrix::<f64>::zeros(order, order);
    let mut atb = DVector::<f64>::zeros(order);
    let mut row = vec![0.0; order];
    for t in order..x.len() {
        for i in 0..order {
            row[i] = x[t - i - 1] - col_mean[i];
        }
        let y = x[t] - target_mean;
        for a in 0..order {
            atb[a] += row[a] * y;
            for b in 0..order {
                ata[(a, b)] += row[a] * row[b];
            }
        }
    }
    let sv = ata.clone().singular_values();
    let well_posed = sv.max() > 0.0 && sv.min() > 1e-12 * sv.max();
    let (lags, ridge) = match ata.clone().cholesky().filter(|_| well_posed) {
        Some(chol) => (chol.solve(&atb), false),
        None => {
            let scale = ata.diagonal().max().max(1.0);
            for k in 0..order {
                ata[(k, k)] += RIDGE_LAMBDA * scale;
            }
            let solved = ata
                .lu()
                .solve(&atb)
                .ok_or_else(|| Error::invalid("AR normal equations are singular even with ridge"))?;
            (solved, true)
        }
    };
    let intercept = target_mean - lags.iter().zip(&col_mean).map(|(p, m)| p * m).sum::<f64>();
    let mut coefficients = Vec::with_capacity(order + 1);
    coefficients.push(intercept);
    coefficients.extend(lags.iter().copied());
    Ok(ArFit { coefficients, ridge })
}

/// Largest sample; NaN if any sample is NaN.
pub fn maximum(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, |m, v| if v.is_nan() || v > m { v } else { m })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn avg_change_quantile(x: &[f64], ql: f64, qh: f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, ql);
    let hi = quantile_sorted(&sorted, qh);
    let inside = |v: f64| v >= lo && v <= hi;
    let (mut sum, mut count) = (0.0, 0usize);
    for w in x.windows(2) {
        if inside(w[0]) && inside(w[1]) {
            sum += (w[1] - w[0]).abs();
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendAggregate {
    Slope,
    Intercept,
    Stderr,
}

impl TrendAggregate {
    pub fn name(self) -> &'static str {
        match self {
            TrendAggregate::Slope => "slope",
            TrendAggregate::Intercept => "intercept",
            TrendAggregate::Stderr => "stderr",
        }
    }
}

/// OLS of `y` on `0..n`: `(slope, intercept, stderr of slope)`.
pub fn linear_fit(y: &[f64]) -> (f64, f64, f64) {
    let n = y.len() as f64;
    let tm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, v) in y.iter().enumerate() {
        let dt = t as f64 - tm;
        sxy += dt * (v - ym);
        sxx += dt * dt;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = ym - slope * tm;
    let stderr = if y.len() > 2 && sxx > 0.0 {
        let sse: f64 = y.iter().enumerate().map(|(t, v)| (v - intercept - slope * t as f64).powi(2)).sum();
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

/// Mean of the per-window statistic over consecutive full windows; a
/// trailing partial window is dropped.
pub fn agg_linear_trend(x: &[f64], window: usize, aggregate: TrendAggregate) -> Result<f64> {
    if window < 2 || window > x.len() {
        return Err(Error::invalid(format!("trend window {window} must lie in 2..={}", x.len())));
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for chunk in x.chunks_exact(window) {
        let (slope, intercept, stderr) = linear_fit(chunk);
        acc += match aggregate {
            TrendAggregate::Slope => slope,
            TrendAggregate::Intercept => intercept,
            TrendAggregate::Stderr => stderr,
        };
        count += 1;
    }
    Ok(acc / count as f64)
}

/// Autocorrelation with population variance; `None` when the variance is 0.
pub fn autocorrelation(x: &[f64], lag: usize) -> Option<f64> {
    let n = x.len();
    assert!(lag < n, "lag {lag} must be below the signal length {n}");
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return None;
    }
    let s: f64 = (0..n - lag).map(|t| (x[t] - mean) * (x[t + lag] - mean)).sum();
    Some(s / ((n - lag) as f64 * var))
}

/// Samples strictly above their `support` neighbours on both sides; samples
/// closer than `support` to an edge never qualify.
pub fn count_peaks(x: &[f64], support: usize) -> usize {
    assert!(support >= 1, "peak support must be at least 1");
    if x.len() <= 2 * support {
        return 0;
    }
    (support..x.len() - support)
        .filter(|&t| (1..=support).all(|j| x[t] > x[t - j] && x[t] > x[t + j]))
        .count()
}

/// Chunk boundaries splitting `n` samples into `k` near-equal parts, the
/// first `n % k` chunks one sample longer.
pub fn chunk_bounds(n: usize, k: usize) -> Vec<(usize, usize)> {
    let base = n / k;
    let extra = n % k;
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for c in 0..k {
        let len = base + usize::from(c < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Energy share of chunk `j` (1-based); `None` for a zero-energy signal.
pub fn energy_ratio_by_chunks(x: &[f64], chunks: usize, j: usize) -> Option<f64> {
    assert!((1..=chunks).contains(&j), "chunk {j} outside 1..={chunks}");
    let total: f64 = x.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return None;
    }
    let (a, b) = chunk_bounds(x.len(), chunks)[j - 1];
    Some(x[a..b].iter().map(|v| v * v).sum::<f64>() / total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TimeFeature {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
}

impl TimeFeature {
    pub const ALL: [TimeFeature; 7] = [
        TimeFeature::F1,
        TimeFeature::F2,
        TimeFeature::F3,
        TimeFeature::F4,
        TimeFeature::F5,
        TimeFeature::F6,
        TimeFeature::F7,
    ];

    pub fn description(self) -> &'static str {
        match self {
            TimeFeature::F1 => "autoregressive coefficients",
            TimeFeature::F2 => "maximum",
            TimeFeature::F3 => "average change quantile",
            TimeFeature::F4 => "aggregated linear trend",
            TimeFeature::F5 => "autocorrelation",
            TimeFeature::F6 => "peak count",
            TimeFeature::F7 => "energy ratio by chunks",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeFeatureParams {
    pub ar_order: usize,
    pub quantile_pairs: Vec<(f64, f64)>,
    pub trend_window: usize,
    pub trend_aggregate: TrendAggregate,
    pub ac_lags: Vec<usize>,
    /// Lag reported in the scalar schema.
    pub ac_scalar_lag: usize,
    pub peak_support: usize,
    pub chunk_count: usize,
    /// Chunk reported in the scalar schema (1-based).
    pub chunk_scalar: usize,
}

impl Default for TimeFeatureParams {
    fn default() -> Self {
        TimeFeatureParams {
            ar_order: 4,
            quantile_pairs: vec![(0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0)],
            trend_window: 20,
            trend_aggregate: TrendAggregate::Stderr,
            ac_lags: vec![1, 2, 5],
            ac_scalar_lag: 5,
            peak_support: 3,
            chunk_count: 10,
            chunk_scalar: 1,
        }
    }
}

impl TimeFeatureParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.ar_order == 0 || 4 * self.ar_order >= n {
            return Err(Error::invalid(format!("arOrder {} must satisfy 0 < arOrder < {n}/4", self.ar_order)));
        }
        for &(ql, qh) in &self.quantile_pairs {
            if !(0.0 <= ql && ql < qh && qh <= 1.0) {
                return Err(Error::invalid(format!("quantile pair ({ql}, {qh}) must satisfy 0 <= ql < qh <= 1")));
            }
        }
        if self.trend_window < 3 || self.trend_window > n {
            return Err(Error::invalid(format!("trendWindow {} must lie in 3..={n}", self.trend_window)));
        }
        if self.ac_lags.iter().chain([&self.ac_scalar_lag]).any(|&l| l >= n) {
            return Err(Error::invalid(format!("autocorrelation lags must be below {n}")));
        }
        if self.peak_support == 0 {
            return Err(Error::invalid("peak support must be at least 1"));
        }
        if self.chunk_count == 0 || self.chunk_count > n {
            return Err(Error::invalid(format!("chunkCount {} must lie in 1..={n}", self.chunk_count)));
        }
        if !(1..=self.chunk_count).contains(&self.chunk_scalar) {
            return Err(Error::invalid(format!("scalar chunk {} outside 1..={}", self.chunk_scalar, self.chunk_count)));
        }
        Ok(())
    }
}

/// Scalar schema emits one value per family; extended emits every
/// configured coefficient, corridor, lag and chunk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeSchema {
    #[default]
    Scalar,
    Extended,
}

/// Degenerate-path flags raised while computing one phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FeatureFlags {
    pub ar_ridge: bool,
    pub zero_variance: bool,
    pub zero_energy: bool,
}

/// Column names of family `f` for one phase, without the phase prefix.
pub fn feature_names(f: TimeFeature, p: &TimeFeatureParams, schema: TimeSchema) -> Vec<String> {
    let tag = format!("{f:?}");
    let scalar = schema == TimeSchema::Scalar;
    match f {
        TimeFeature::F1 if scalar => vec![format!("{tag}.ar1")],
        TimeFeature::F1 => (0..=p.ar_order).map(|i| format!("{tag}.ar{i}")).collect(),
        TimeFeature::F2 => vec![format!("{tag}.max")],
        TimeFeature::F3 => {
            let mut names = vec![format!("{tag}.cq[0,1]")];
            if !scalar {
                names.extend(p.quantile_pairs.iter().map(|(l, h)| format!("{tag}.cq[{l},{h}]")));
            }
            names
        }
        TimeFeature::F4 if scalar => vec![format!("{tag}.{}{}", p.trend_aggregate.name(), p.trend_window)],
        TimeFeature::F4 => [TrendAggregate::Slope, TrendAggregate::Intercept, TrendAggregate::Stderr]
            .iter()
            .map(|a| format!("{tag}.{}{}", a.name(), p.trend_window))
            .collect(),
        TimeFeature::F5 if scalar => vec![format!("{tag}.lag{}", p.ac_scalar_lag)],
        TimeFeature::F5 => p.ac_lags.iter().map(|l| format!("{tag}.lag{l}")).collect(),
        TimeFeature::F6 => vec![format!("{tag}.peaks{}", p.peak_support)],
        TimeFeature::F7 if scalar => vec![format!("{tag}.chunk{}of{}", p.chunk_scalar, p.chunk_count)],
        TimeFeature::F7 => (1..=p.chunk_count).map(|j| format!("{tag}.chunk{j}of{}", p.chunk_count)).collect(),
    }
}

/// Values of family `f` for one phase, aligned with `feature_names`.
pub fn feature_values(
    f: TimeFeature,
    x: &[f64],
    p: &TimeFeatureParams,
    schema: TimeSchema,
    flags: &mut FeatureFlags,
) -> Result<Vec<f64>> {
    let scalar = schema == TimeSchema::Scalar;
    Ok(match f {
        TimeFeature::F1 => {
            let fit = ar_coefficients(x, p.ar_order)?;
            flags.ar_ridge |= fit.ridge;
            if scalar {
                vec![fit.coefficients[1]]
            } else {
                fit.coefficients
            }
        }
        TimeFeature::F2 => vec![maximum(x)],
        TimeFeature::F3 => {
            let mut v = vec![avg_change_quantile(x, 0.0, 1.0)];
            if !scalar {
                v.extend(p.quantile_pairs.iter().map(|&(l, h)| avg_change_quantile(x, l, h)));
            }
            v
        }
        TimeFeature::F4 if scalar => vec![agg_linear_trend(x, p.trend_window, p.trend_aggregate)?],
        TimeFeature::F4 => [TrendAggregate::Slope, TrendAggregate::Intercept, TrendAggregate::Stderr]
            .iter()
            .map(|&a| agg_linear_trend(x, p.trend_window, a))
            .collect::<Result<_>>()?,
        TimeFeature::F5 => {
            let lags = if scalar { std::slice::from_ref(&p.ac_scalar_lag) } else { &p.ac_lags[..] };
            lags.iter()
                .map(|&l| {
                    autocorrelation(x, l).unwrap_or_else(|| {
                        flags.zero_variance = true;
                        0.0
                    })
                })
                .collect()
        }
        TimeFeature::F6 => vec![count_peaks(x, p.peak_support) as f64],
        TimeFeature::F7 => {
            let chunks: Vec<usize> = if scalar { vec![p.chunk_scalar] } else { (1..=p.chunk_count).collect() };
            chunks
                .into_iter()
                .map(|j| {
                    energy_ratio_by_chunks(x, p.chunk_count, j).unwrap_or_else(|| {
                        flags.zero_energy = true;
                        0.0
                    })
                })
                .collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn ar_exact_recurrence() {
        let mut x = vec![1.0];
        for _ in 0..60 {
            x.push(0.7 * x.last().unwrap());
        }
        let fit = ar_coefficients(&x, 1).unwrap();
        assert!(!fit.ridge);
        assert!(fit.coefficients[0].abs() < 1e-9);
        assert!((fit.coefficients[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn ar_constant_signal_takes_ridge_path() {
        let fit = ar_coefficients(&[2.5; 40], 3).unwrap();
        assert!(fit.ridge);
        for c in &fit.coefficients[1..] {
            assert!(c.abs() < 1e-3, "{c}");
        }
        assert!(ar_coefficients(&[1.0; 8], 2).is_err());
    }

    #[test]
    fn ar2_estimates_are_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let (mut m1, mut m2) = (0.0, 0.0);
        let trials = 400;
        for _ in 0..trials {
            let mut x = vec![0.0; 167 + 100];
            for t in 2..x.len() {
                x[t] = 0.5 * x[t - 1] - 0.3 * x[t - 2] + noise.sample(&mut rng);
            }
            let c = ar_coefficients(&x[100..], 2).unwrap().coefficients;
            m1 += c[1] / trials as f64;
            m2 += c[2] / trials as f64;
        }
        assert!((m1 - 0.5).abs() < 0.02 && (m2 + 0.3).abs() < 0.02, "{m1} {m2}");
    }

    #[test]
    fn change_quantile_examples() {
        assert_eq!(avg_change_quantile(&[3.0; 20], 0.0, 1.0), 0.0);
        let alt: Vec<f64> = (0..30).map(|k| (k % 2) as f64).collect();
        assert_eq!(avg_change_quantile(&alt, 0.0, 1.0), 1.0);
        // corridor holding only the zeros: no pair has both ends inside
        assert_eq!(avg_change_quantile(&alt, 0.0, 0.2), 0.0);
        let ramp: Vec<f64> = (0..11).map(f64::from).collect();
        assert!((avg_change_quantile(&ramp, 0.2, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn trend_examples() {
        let ramp: Vec<f64> = (0..100).map(|t| 2.0 * t as f64).collect();
        assert!((agg_linear_trend(&ramp, 20, TrendAggregate::Slope).unwrap() - 2.0).abs() < 1e-12);
        assert!(agg_linear_trend(&ramp, 20, TrendAggregate::Stderr).unwrap() < 1e-9);
        let flat = [4.0; 50];
        assert_eq!(agg_linear_trend(&flat, 10, TrendAggregate::Slope).unwrap(), 0.0);
        assert_eq!(agg_linear_trend(&flat, 10, TrendAggregate::Stderr).unwrap(), 0.0);
        assert!(agg_linear_trend(&flat, 51, TrendAggregate::Slope).is_err());
        // window starting at t0 of t^2 has OLS slope 2 t0 + (w - 1)
        let sq: Vec<f64> = (0..40).map(|t| (t * t) as f64).collect();
        let expect = [0.0, 10.0, 20.0, 30.0].iter().map(|t0| 2.0 * t0 + 9.0).sum::<f64>() / 4.0;
        assert!((agg_linear_trend(&sq, 10, TrendAggregate::Slope).unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn autocorrelation_examples() {
        let x: Vec<f64> = (0..167).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 20.0).sin()).collect();
        assert!((autocorrelation(&x, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((autocorrelation(&x, 10).unwrap() + 1.0).abs() < 0.02);
        assert_eq!(autocorrelation(&[1.0; 10], 2), None);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = Normal::new(0.0, 1.0).unwrap();
        let mut within = 0;
        for _ in 0..100 {
            let w: Vec<f64> = (0..167).map(|_| n.sample(&mut rng)).collect();
            within += usize::from(autocorrelation(&w, 5).unwrap().abs() < 3.0 / 167f64.sqrt());
        }
        assert!(within >= 97, "{within}");
    }

    #[test]
    fn peak_examples() {
        let inc: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(count_peaks(&inc, 1), 0);
        assert_eq!(count_peaks(&[0.0, 1.0, 2.0, 1.0, 0.0], 1), 1);
        let s: Vec<f64> = (0..60).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 20.0).sin()).collect();
        assert_eq!(count_peaks(&s, 2), 3);
        // plateaus are not peaks
        assert_eq!(count_peaks(&[0.0, 1.0, 1.0, 0.0], 1), 0);
    }

    #[test]
    fn chunk_examples() {
        assert_eq!(chunk_bounds(167, 10)[0], (0, 17));
        assert_eq!(chunk_bounds(167, 10)[9], (151, 167));
        let mut x = vec![0.0; 50];
        x[12] = 3.0;
        for j in 1..=5 {
            let r = energy_ratio_by_chunks(&x, 5, j).unwrap();
            assert_eq!(r, if j == 2 { 1.0 } else { 0.0 });
        }
        let u = vec![-1.0; 100];
        for j in 1..=10 {
            assert!((energy_ratio_by_chunks(&u, 10, j).unwrap() - 0.1).abs() < 1e-15);
        }
        assert_eq!(energy_ratio_by_chunks(&[0.0; 10], 2, 1), None);
    }

    #[test]
    fn names_match_values() {
        let p = TimeFeatureParams::default();
        let x: Vec<f64> = (0..167).map(|t| (t as f64 * 0.3).sin() + 0.01 * t as f64).collect();
        for schema in [TimeSchema::Scalar, TimeSchema::Extended] {
            for f in TimeFeature::ALL {
                let mut flags = FeatureFlags::default();
                let v = feature_values(f, &x, &p, schema, &mut flags).unwrap();
                assert_eq!(v.len(), feature_names(f, &p, schema).len(), "{f:?} {schema:?}");
                if schema == TimeSchema::Scalar {
                    assert_eq!(v.len(), 1);
                }
            }
        }
    }

    #[test]
    fn params_validate() {
        let p = TimeFeatureParams::default();
        p.validate(167).unwrap();
        assert!(TimeFeatureParams { ar_order: 42, ..p.clone() }.validate(167).is_err());
        assert!(TimeFeatureParams { quantile_pairs: vec![(0.5, 0.5)], ..p.clone() }.validate(167).is_err());
        assert!(TimeFeatureParams { chunk_scalar: 11, ..p }.validate(167).is_err());
    }

    fn signal() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 30..120)
    }

    proptest! {
        #[test]
        fn offset_consistency(x in signal(), c in -50.0f64..50.0) {
            let y: Vec<f64> = x.iter().map(|v| v + c).collect();
            prop_assert!((maximum(&y) - maximum(&x) - c).abs() < 1e-9);
            let (a, b) = (avg_change_quantile(&x, 0.1, 0.9), avg_change_quantile(&y, 0.1, 0.9));
            prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
            let (a, b) = (autocorrelation(&x, 3), autocorrelation(&y, 3));
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }

        #[test]
        fn chunk_ratios_partition(x in signal(), k in 1usize..12) {
            let total: f64 = (1..=k).filter_map(|j| energy_ratio_by_chunks(&x, k, j)).sum();
            if x.iter().any(|v| *v != 0.0) {
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn autocorrelation_is_bounded(x in signal(), lag in 0usize..30) {
            if let Some(r) = autocorrelation(&x, lag) {
                prop_assert!(r.abs() <= (x.len() as f64 / (x.len() - lag) as f64) + 1e-12);
            }
        }
    }
}
