//! Confusion counts and balanced accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[true][predicted]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: Vec<Vec<u64>>,
}

/// One-vs-rest counts of a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn new(n_classes: usize) -> Confusion {
        Confusion { counts: vec![vec![0; n_classes]; n_classes] }
    }

    pub fn from_predictions(n_classes: usize, truth: &[usize], pred: &[usize]) -> Confusion {
        let mut c = Confusion::new(n_classes);
        for (t, p) in truth.iter().zip(pred) {
            c.counts[*t][*p] += 1;
        }
        c
    }

    /// Build from per-class `(correct, total)` pairs; misses are put in the
    /// next class, which is all a recall needs.
    pub fn from_recalls(pairs: &[(u64, u64)]) -> Confusion {
        let k = pairs.len();
        let mut c = Confusion::new(k);
        for (i, &(ok, total)) in pairs.iter().enumerate() {
            c.counts[i][i] = ok;
            c.counts[i][(i + 1) % k] += total - ok;
        }
        c
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn add(&mut self, other: &Confusion) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn class(&self, k: usize) -> ClassCounts {
        let tp = self.counts[k][k];
        let row: u64 = self.counts[k].iter().sum();
        let col: u64 = self.counts.iter().map(|r| r[k]).sum();
        ClassCounts { tp, fn_: row - tp, fp: col - tp, tn: self.total() - row - (col - tp) }
    }

    pub fn recalls(&self) -> Result<Vec<f64>> {
        (0..self.n_classes())
            .map(|k| {
                let c = self.class(k);
                let support = c.tp + c.fn_;
                if support == 0 {
                    return Err(Error::invalid(format!("class {k} has no true samples")));
                }
                Ok(c.tp as f64 / support as f64)
            })
            .collect()
    }

    /// Mean per-class recall; for two classes this is
    /// `(TP/(TP+FN) + TN/(TN+FP)) / 2`.
    pub fn balanced_accuracy(&self) -> Result<f64> {
        let r = self.recalls()?;
        Ok(r.iter().sum::<f64>() / r.len() as f64)
    }

    pub fn accuracy(&self) -> f64 {
        let ok: u64 = (0..self.n_classes()).map(|k| self.counts[k][k]).sum();
        ok as f64 / self.total() as f64
    }
}

pub fn balanced_accuracy(n_classes: usize, truth: &[usize], pred: &[usize]) -> Result<f64> {
    Confusion::from_predictions(n_classes, truth, pred).balanced_accuracy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_form() {
        let c = Confusion { counts: vec![vec![9406, 0], vec![8, 2697]] };
        let k = c.class(0);
        let binary = 0.5 * (k.tp as f64 / (k.tp + k.fn_) as f64 + k.tn as f64 / (k.tn + k.fp) as f64);
        assert!((c.balanced_accuracy().unwrap() - binary).abs() < 1e-15);
        assert!((binary - 0.998521).abs() < 1e-6);
    }

    #[test]
    fn empty_class_is_rejected() {
        let c = Confusion { counts: vec![vec![3, 1], vec![0, 0]] };
        assert!(c.balanced_accuracy().is_err());
    }

    proptest! {
        #[test]
        fn invariant_to_relabeling(truth in prop::collection::vec(0usize..3, 30..80), shift in 1usize..3, noise in prop::collection::vec(0usize..3, 80)) {
            prop_assume!((0..3).all(|c| truth.contains(&c)));
            let pred: Vec<usize> = truth.iter().zip(&noise).map(|(t, n)| if *n == 0 { (t + 1) % 3 } else { *t }).collect();
            let a = balanced_accuracy(3, &truth, &pred).unwrap();
            let relabel = |v: &[usize]| v.iter().map(|x| (x + shift) % 3).collect::<Vec<_>>();
            let b = balanced_accuracy(3, &relabel(&truth), &relabel(&pred)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn equals_accuracy_when_balanced(per in 1usize..20, noise in prop::collection::vec(0usize..4, 60)) {
            let truth: Vec<usize> = (0..3 * per).map(|i| i % 3).collect();
            let pred: Vec<usize> = truth.iter().zip(noise.iter().cycle()).map(|(t, n)| (t + n) % 3).collect();
            let c = Confusion::from_predictions(3, &truth, &pred);
            prop_assert!((c.balanced_accuracy().unwrap() - c.accuracy()).abs() < 1e-12);
        }
    }
}
