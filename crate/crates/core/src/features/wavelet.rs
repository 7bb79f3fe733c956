//! Wavelet filter catalog and the periodized multilevel DWT.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Daubechies,
    Symlets,
    Coiflets,
    Biorthogonal,
    ReverseBiorthogonal,
    DiscreteMeyer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wavelet {
    pub name: String,
    pub family: Family,
    pub orthogonal: bool,
    pub dec_lo: Vec<f64>,
    pub dec_hi: Vec<f64>,
    pub rec_lo: Vec<f64>,
    pub rec_hi: Vec<f64>,
}

impl Wavelet {
    pub fn filter_len(&self) -> usize {
        self.dec_lo.len()
    }
}

#[derive(Deserialize)]
struct CatalogFile {
    version: u32,
    wavelets: Vec<Wavelet>,
}

const CATALOG_JSON: &str = include_str!("../../data/wavelets_v1.json");

/// The shipped filter catalog.
pub fn catalog() -> &'static [Wavelet] {
    static CATALOG: OnceLock<Vec<Wavelet>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let file: CatalogFile = serde_json::from_str(CATALOG_JSON).expect("embedded wavelet catalog is valid JSON");
        assert_eq!(file.version, 1, "embedded wavelet catalog version");
        file.wavelets
    })
}

pub fn wavelet(name: &str) -> Result<&'static Wavelet> {
    catalog()
        .iter()
        .find(|w| w.name == name)
        .ok_or_else(|| Error::invalid(format!("unknown wavelet '{name}'")))
}

/// A wavelet and decomposition depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletSpec {
    pub wavelet: String,
    pub level: usize,
}

impl WaveletSpec {
    pub fn new(wavelet: &str, level: usize) -> WaveletSpec {
        WaveletSpec { wavelet: wavelet.to_string(), level }
    }

    pub fn validate(&self, signal_len: usize) -> Result<&'static Wavelet> {
        let w = wavelet(&self.wavelet)?;
        let max = max_useful_level(signal_len, w.filter_len());
        if self.level == 0 || self.level > max {
            return Err(Error::invalid(format!(
                "level {} of {} is outside 1..={max} for {signal_len} samples",
                self.level, self.wavelet
            )));
        }
        Ok(w)
    }

    pub fn label(&self) -> String {
        format!("{}@{}", self.wavelet, self.level)
    }
}

/// `floor(log2(n / (filter_len - 1)))`, at least 0.
pub fn max_useful_level(signal_len: usize, filter_len: usize) -> usize {
    assert!(filter_len >= 2, "filter length must be at least 2");
    let ratio = signal_len as f64 / (filter_len - 1) as f64;
    if ratio < 1.0 {
        return 0;
    }
    // integer loop avoids log2 rounding at exact powers of two
    let mut level = 0;
    while (filter_len - 1) << (level + 1) <= signal_len {
        level += 1;
    }
    level
}

/// Multilevel decomposition: `details[0]` is `d_1` (finest).
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub details: Vec<Vec<f64>>,
    pub approximation: Vec<f64>,
    /// Input length at every level, needed to invert odd-length padding.
    pub lengths: Vec<usize>,
}

fn analysis(x: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() + x.len() % 2;
    let half = n / 2;
    let at = |i: usize| if i < x.len() { x[i] } else { 0.0 };
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let (mut sa, mut sd) = (0.0, 0.0);
        for j in 0..lo.len() {
            let idx = (2 * k + 1 + n * lo.len() - j) % n;
            let v = at(idx);
            sa += lo[j] * v;
            sd += hi[j] * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

/// Transpose of `analysis` with the dual (reconstruction) filters.
fn synthesis(a: &[f64], d: &[f64], rec_lo: &[f64], rec_hi: &[f64], out_len: usize) -> Vec<f64> {
    let n = 2 * a.len();
    let len = rec_lo.len();
    let mut x = vec![0.0; n];
    for k in 0..a.len() {
        for j in 0..len {
            // dual analysis filter is the reversed reconstruction filter
            let idx = (2 * k + 1 + n * len - j) % n;
            x[idx] += rec_lo[len - 1 - j] * a[k] + rec_hi[len - 1 - j] * d[k];
        }
    }
    x.truncate(out_len);
    x
}

pub fn dwt_multilevel(x: &[f64], spec: &WaveletSpec) -> Result<Decomposition> {
    let w = spec.validate(x.len())?;
    Ok(decompose(x, w, spec.level))
}

/// Decomposition without the useful-level check.
pub fn decompose(x: &[f64], w: &Wavelet, level: usize) -> Decomposition {
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(level);
    let mut lengths = Vec::with_capacity(level);
    for _ in 0..level {
        lengths.push(approx.len());
        let (a, d) = analysis(&approx, &w.dec_lo, &w.dec_hi);
        details.push(d);
        approx = a;
    }
    Decomposition { details, approximation: approx, lengths }
}

pub fn idwt_multilevel(dec: &Decomposition, w: &Wavelet) -> Vec<f64> {
    let mut approx = dec.approximation.clone();
    for l in (0..dec.details.len()).rev() {
        approx = synthesis(&approx, &dec.details[l], &w.rec_lo, &w.rec_hi, dec.lengths[l]);
    }
    approx
}

/// Coefficient count of `d_l` for `l = 1..=level`.
pub fn detail_lengths(signal_len: usize, level: usize) -> Vec<usize> {
    let mut n = signal_len;
    let mut out = Vec::with_capacity(level);
    for _ in 0..level {
        n = n.div_ceil(2);
        out.push(n);
    }
    out
}

/// `E_l = sum_k d_l(k)^2` per level.
pub fn wavelet_energy(details: &[Vec<f64>]) -> Vec<f64> {
    details.iter().map(|d| d.iter().map(|v| v * v).sum()).collect()
}
