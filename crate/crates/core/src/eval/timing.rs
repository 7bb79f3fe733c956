//! Wall-clock cost of training and prediction.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{train, Dataset, ModelSpec};
use crate::par::Exec;

pub const LATENCY_RUNS: usize = 100;

/// Seconds. `testing_one` is the mean single-instance latency over
/// [`LATENCY_RUNS`] predictions, with its standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub training: f64,
    pub testing_all: f64,
    pub testing_one: f64,
    pub testing_one_std: f64,
    pub feature_extract: Option<f64>,
    pub test_instances: usize,
}

impl Timing {
    pub const COLUMNS: [&'static str; 4] = ["training", "testing-one", "testing-all", "feature-extract"];
}

pub fn timing_report(
    spec: &ModelSpec,
    train_ds: &Dataset,
    test_ds: &Dataset,
    seed: u64,
    feature_extract: Option<f64>,
) -> Result<Timing> {
    if test_ds.n == 0 {
        return Err(Error::invalid("timing needs at least one test instance"));
    }
    let t0 = Instant::now();
    let model = train(spec, train_ds, seed, Exec::available())?;
    let training = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    std::hint::black_box(model.predict_dataset(test_ds, Exec::Sequential)?);
    let testing_all = t0.elapsed().as_secs_f64();
    let mut one = Vec::with_capacity(LATENCY_RUNS);
    for r in 0..LATENCY_RUNS {
        let x = test_ds.row(r % test_ds.n);
        let t0 = Instant::now();
        std::hint::black_box(model.predict(x)?);
        one.push(t0.elapsed().as_secs_f64());
    }
    let mean = one.iter().sum::<f64>() / one.len() as f64;
    let std = (one.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / one.len() as f64).sqrt();
    Ok(Timing { training, testing_all, testing_one: mean, testing_one_std: std, feature_extract, test_instances: test_ds.n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::GbParams;

    #[test]
    fn single_latency_is_below_the_batch_time() {
        let rows: Vec<Vec<f64>> = (0..400).map(|i| vec![i as f64, (i as f64).sin()]).collect();
        let ds = Dataset::new(rows, (0..400).map(|i| i % 2).collect(), vec!["a".into(), "b".into()]).unwrap();
        let spec = ModelSpec::Gb(GbParams { n_estimators: 20, ..Default::default() });
        let t = timing_report(&spec, &ds, &ds, 0, Some(1e-3)).unwrap();
        assert!(t.testing_one <= t.testing_all);
        assert!(t.testing_one_std >= 0.0);
        assert_eq!(Timing::COLUMNS, ["training", "testing-one", "testing-all", "feature-extract"]);
    }
}
