//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: Vec<f64>,
    /// `[class][feature]`.
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
    /// Some class variance was lifted to the floor.
    pub floored: bool,
}

pub fn fit_gnb(ds: &Dataset) -> GaussianNb {
    let k = ds.n_classes;
    let counts = ds.class_counts();
    let mut mean = vec![vec![0.0; ds.d]; k];
    let mut var = vec![vec![0.0; ds.d]; k];
    for (i, r) in ds.rows().enumerate() {
        let c = ds.y[i];
        for j in 0..ds.d {
            mean[c][j] += r[j] / counts[c] as f64;
        }
    }
    for (i, r) in ds.rows().enumerate() {
        let c = ds.y[i];
        for j in 0..ds.d {
            var[c][j] += (r[j] - mean[c][j]).powi(2) / counts[c] as f64;
        }
    }
    let overall: f64 = (0..ds.d)
        .map(|j| {
            let col = ds.column(j);
            let m = col.iter().sum::<f64>() / ds.n as f64;
            col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / ds.n as f64
        })
        .sum::<f64>()
        / ds.d.max(1) as f64;
    let floor = if overall > 0.0 { 1e-9 * overall } else { 1e-9 };
    let mut floored = false;
    for (c, row) in var.iter_mut().enumerate() {
        for v in row.iter_mut() {
            if *v < floor {
                floored |= counts[c] <= 1 || *v == 0.0;
                *v = floor;
            }
        }
    }
    let log_prior = counts.iter().map(|&c| (c as f64 / ds.n as f64).ln()).collect();
    GaussianNb { log_prior, mean, var, floored }
}

impl GaussianNb {
    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        (0..self.log_prior.len())
            .map(|c| {
                self.log_prior[c]
                    + x.iter()
                        .zip(&self.mean[c])
                        .zip(&self.var[c])
                        .map(|((v, m), s)| -0.5 * (2.0 * std::f64::consts::PI * s).ln() - (v - m).powi(2) / (2.0 * s))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut l = self.log_joint(x);
        super::ensemble::softmax_in_place(&mut l);
        l
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        super::tree::argmax(&self.log_joint(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample(n: usize, mu: [f64; 2], sd: [f64; 2]) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 2;
            rows.push(vec![Normal::new(mu[c], sd[c]).unwrap().sample(&mut rng)]);
            y.push(c);
        }
        Dataset::new(rows, y, vec!["x".into()]).unwrap()
    }

    #[test]
    fn boundary_matches_the_fitted_crossover() {
        let ds = sample(4000, [0.0, 4.0], [1.0, 1.0]);
        let m = fit_gnb(&ds);
        // equal variances and priors put the analytic boundary at 2
        let mut x = 0.0;
        while m.predict(&[x]) == 0 {
            x += 1e-3;
        }
        assert!((x - 2.0).abs() < 0.04, "{x}");
        let p = m.proba(&[1.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_a_feature_keeps_predictions() {
        let ds = sample(200, [0.0, 1.5], [1.0, 2.0]);
        let mut scaled = ds.clone();
        scaled.x.iter_mut().for_each(|v| *v *= 1e3);
        let (a, b) = (fit_gnb(&ds), fit_gnb(&scaled));
        for k in -50..50 {
            let q = k as f64 * 0.2;
            assert_eq!(a.predict(&[q]), b.predict(&[q * 1e3]));
        }
    }

    #[test]
    fn identical_classes_give_the_prior() {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![(i % 3) as f64]).collect();
        let y = vec![0, 0, 0, 1, 1, 1, 1, 1, 1];
        let rows = [rows[0..3].to_vec(), rows[0..3].to_vec(), rows[0..3].to_vec()].concat();
        let ds = Dataset::new(rows, y, vec!["x".into()]).unwrap();
        let m = fit_gnb(&ds);
        assert!((0..3).all(|v| m.predict(&[v as f64]) == 1));
    }

    #[test]
    fn single_sample_class_is_floored() {
        let ds = Dataset::new(vec![vec![0.0], vec![1.0], vec![5.0]], vec![0, 0, 1], vec!["x".into()]).unwrap();
        let m = fit_gnb(&ds);
        assert!(m.floored);
        assert_eq!(m.predict(&[5.0]), 1);
    }
}
