//! Classifier comparison and confusion reports as aligned text and TSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::GridResult;
use super::metrics::Confusion;
use super::timing::Timing;
use crate::error::Result;

/// Best cell of one classifier family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRow {
    pub kind: String,
    pub spec: String,
    pub mean: f64,
    pub std: f64,
    pub confusion: Confusion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApplicationReport {
    pub application: String,
    pub class_names: Vec<String>,
    pub features: Vec<String>,
    pub samples: usize,
    pub rows: Vec<ClassifierRow>,
    /// Index into `rows` of the overall winner.
    pub best: usize,
}

impl ApplicationReport {
    /// One row per classifier family, each the best of its grid.
    pub fn from_grids(
        application: &str,
        class_names: Vec<String>,
        features: Vec<String>,
        samples: usize,
        grids: &[GridResult],
    ) -> ApplicationReport {
        let rows: Vec<ClassifierRow> = grids
            .iter()
            .map(|g| {
                let r = g.best_result();
                ClassifierRow {
                    kind: g.best_spec().kind().to_string(),
                    spec: g.best_spec().label(),
                    mean: r.mean,
                    std: r.std,
                    confusion: r.confusion.clone(),
                }
            })
            .collect();
        let mut best = 0;
        for (i, r) in rows.iter().enumerate() {
            if r.mean > rows[best].mean {
                best = i;
            }
        }
        ApplicationReport { application: application.to_string(), class_names, features, samples, rows, best }
    }

    pub fn row(&self, kind: &str) -> Option<&ClassifierRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "application: {}", self.application);
        let _ = writeln!(s, "samples: {}   features: {}", self.samples, self.features.len());
        let _ = writeln!(s);
        let kw = self.rows.iter().map(|r| r.kind.len()).max().unwrap_or(4).max(10);
        let _ = writeln!(s, "{:<kw$}  {:>17}  best parameters", "classifier", "balanced acc (%)");
        for (i, r) in self.rows.iter().enumerate() {
            let mark = if i == self.best { "*" } else { " " };
            let _ = writeln!(s, "{:<kw$}  {:>9.2} +- {:>5.2}{mark} {}", r.kind, 100.0 * r.mean, 100.0 * r.std, r.spec);
        }
        let best = &self.rows[self.best];
        let _ = writeln!(s);
        let _ = writeln!(s, "pooled out-of-fold confusion of {} (rows true, columns predicted)", best.kind);
        s.push_str(&confusion_text(&best.confusion, &self.class_names)?);
        Ok(s)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("application\tclassifier\tmean_balanced_accuracy\tstd\tparameters\n");
        for r in &self.rows {
            let _ = writeln!(s, "{}\t{}\t{:?}\t{:?}\t{}", self.application, r.kind, r.mean, r.std, r.spec);
        }
        s
    }
}

/// Table of counts with per-class recall and the balanced accuracy.
pub fn confusion_text(c: &Confusion, names: &[String]) -> Result<String> {
    let recalls = c.recalls()?;
    let w = names.iter().map(String::len).max().unwrap_or(5).max(8);
    let mut s = String::new();
    let _ = write!(s, "{:<w$}", "");
    for n in names {
        let _ = write!(s, "  {n:>w$}");
    }
    let _ = writeln!(s, "  {:>8}", "recall");
    for (k, n) in names.iter().enumerate() {
        let _ = write!(s, "{n:<w$}");
        for v in &c.counts[k] {
            let _ = write!(s, "  {v:>w$}");
        }
        let _ = writeln!(s, "  {:>7.2}%", 100.0 * recalls[k]);
    }
    let _ = writeln!(s, "balanced accuracy: {:.2}%", 100.0 * c.balanced_accuracy()?);
    Ok(s)
}

/// Timing rows `(application, classifier, timing)` in the shape of an
/// execution-time table.
pub fn timing_text(rows: &[(String, String, Timing)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<14} {:<10} {:>12} {:>14} {:>14} {:>16}",
        "application", "classifier", "training", "testing-one", "testing-all", "feature-extract"
    );
    for (app, kind, t) in rows {
        let fx = t.feature_extract.map_or("-".to_string(), |v| format!("{:.3} ms", 1e3 * v));
        let _ = writeln!(
            s,
            "{:<14} {:<10} {:>10.3} s {:>11.4} ms {:>11.3} ms {:>16}",
            app,
            kind,
            t.training,
            1e3 * t.testing_one,
            1e3 * t.testing_all,
            fx
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_table_lists_recalls() {
        let c = Confusion { counts: vec![vec![9, 1], vec![0, 5]] };
        let t = confusion_text(&c, &["fault".into(), "other".into()]).unwrap();
        assert!(t.contains("90.00%"));
        assert!(t.contains("balanced accuracy: 95.00%"));
    }

    #[test]
    fn timing_table_has_the_four_columns() {
        let t = Timing { training: 1.0, testing_all: 0.1, testing_one: 1e-5, testing_one_std: 0.0, feature_extract: None, test_instances: 5 };
        let s = timing_text(&[("detect".into(), "gb".into(), t)]);
        for c in Timing::COLUMNS {
            assert!(s.contains(c));
        }
    }
}
