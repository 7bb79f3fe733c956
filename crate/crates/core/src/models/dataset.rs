//! Labelled feature matrices.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Row-major `n x d` values.
    pub x: Vec<f64>,
    pub n: usize,
    pub d: usize,
    pub y: Vec<usize>,
    pub n_classes: usize,
    pub schema: Vec<String>,
}

impl Dataset {
    /// Checks finiteness, `n >= 2` and that labels cover `0..=max` without
    /// gaps.
    pub fn new(rows: Vec<Vec<f64>>, y: Vec<usize>, schema: Vec<String>) -> Result<Dataset> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::invalid(format!("a dataset needs at least 2 samples, got {n}")));
        }
        if y.len() != n {
            return Err(Error::invalid(format!("{} labels for {n} rows", y.len())));
        }
        let d = schema.len();
        let mut x = Vec::with_capacity(n * d);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != d {
                return Err(Error::invalid(format!("row {i} has {} values, schema has {d}", r.len())));
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} column {} is not finite", schema[j])));
            }
            x.extend(r);
        }
        let n_classes = y.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; n_classes];
        for &c in &y {
            seen[c] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("class labels must be contiguous from 0; class {c} is absent")));
        }
        Ok(Dataset { x, n, d, y, n_classes, schema })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.d + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d.max(1)).take(self.n)
    }

    /// Rows `idx` in the given order; keeps the parent's class count.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            x,
            n: idx.len(),
            d: self.d,
            y: idx.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
            schema: self.schema.clone(),
        }
    }

    /// Columns `cols` in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            x.extend(cols.iter().map(|&j| self.value(i, j)));
        }
        Dataset {
            x,
            n: self.n,
            d: cols.len(),
            y: self.y.clone(),
            n_classes: self.n_classes,
            schema: cols.iter().map(|&j| self.schema[j].clone()).collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i, j)).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }
}

/// Per-column z-score parameters; constant columns keep unit scale.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(ds: &Dataset) -> Scaler {
        let n = ds.n as f64;
        let mut mean = vec![0.0; ds.d];
        for r in ds.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; ds.d];
        for r in ds.rows() {
            for j in 0..ds.d {
                var[j] += (r[j] - mean[j]).powi(2) / n;
            }
        }
        let scale = var.iter().map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 }).collect();
        Scaler { mean, scale }
    }

    pub fn identity(d: usize) -> Scaler {
        Scaler { mean: vec![0.0; d], scale: vec![1.0; d] }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}
