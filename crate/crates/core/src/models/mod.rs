//! Classifiers with a common train/predict contract.

pub mod dataset;
pub mod ensemble;
pub mod gnb;
pub mod knn;
pub mod mlp;
pub mod persist;
pub mod tree;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dataset::{Dataset, Scaler};
pub use knn::Metric;
pub use mlp::{Activation, Schedule};

use crate::error::{Error, Result};
use crate::par::{map_with, Exec};
use ensemble::{BoostParams, Boosted, Forest, ForestParams};
use tree::{Presorted, Target, Tree, TreeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for DtParams {
    fn default() -> Self {
        DtParams { max_depth: None, min_leaf: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features searched per node; `None` uses `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams { n_trees: 100, max_depth: None, min_leaf: 1, max_features: None, bootstrap: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub subsample: f64,
}

impl Default for GbParams {
    fn default() -> Self {
        GbParams { learning_rate: 0.1, n_estimators: 100, max_depth: 3, min_leaf: 1, subsample: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
    pub metric: Metric,
    pub standardize: bool,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5, metric: Metric::L2, standardize: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnbParams {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub alpha: f64,
    pub learning_rate: f64,
    pub schedule: Schedule,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub standardize: bool,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![51, 13],
            activation: Activation::Relu,
            alpha: 0.01,
            learning_rate: 1e-3,
            schedule: Schedule::Constant,
            epochs: 200,
            batch_size: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            standardize: true,
        }
    }
}

impl MlpParams {
    fn config(&self) -> mlp::MlpConfig {
        mlp::MlpConfig {
            hidden: self.hidden.clone(),
            activation: self.activation,
            alpha: self.alpha,
            learning_rate: self.learning_rate,
            schedule: self.schedule,
            epochs: self.epochs,
            batch_size: self.batch_size,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            standardize: self.standardize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Dt(DtParams),
    Rf(RfParams),
    Gb(GbParams),
    Knn(KnnParams),
    Gnb(GnbParams),
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Dt(_) => "dt",
            ModelSpec::Rf(_) => "rf",
            ModelSpec::Gb(_) => "gb",
            ModelSpec::Knn(_) => "knn",
            ModelSpec::Gnb(_) => "gnb",
            ModelSpec::Mlp(_) => "mlp",
        }
    }

    /// Compact `kind(k=v, ...)` label for reports.
    pub fn label(&self) -> String {
        let v = serde_json::to_value(self).expect("model specs serialize");
        let mut parts = Vec::new();
        if let serde_json::Value::Object(map) = v {
            for (k, v) in map {
                if k != "kind" {
                    parts.push(format!("{k}={v}"));
                }
            }
        }
        format!("{}({})", self.kind(), parts.join(", "))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        match self {
            ModelSpec::Dt(p) if p.min_leaf == 0 => bad("dt min_leaf must be at least 1".into()),
            ModelSpec::Rf(p) if p.n_trees == 0 || p.min_leaf == 0 || p.max_features == Some(0) => {
                bad("rf needs n_trees >= 1, min_leaf >= 1 and max_features >= 1".into())
            }
            ModelSpec::Gb(p) if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) => {
                bad(format!("gb learning_rate must be positive, got {}", p.learning_rate))
            }
            ModelSpec::Gb(p) if p.n_estimators == 0 || p.max_depth == 0 || !(p.subsample > 0.0 && p.subsample <= 1.0) => {
                bad("gb needs n_estimators >= 1, max_depth >= 1, subsample in (0, 1]".into())
            }
            ModelSpec::Knn(p) if p.k == 0 => bad("knn k must be at least 1".into()),
            ModelSpec::Mlp(p) if p.hidden.is_empty() || p.hidden.contains(&0) => {
                bad("mlp needs at least one non-empty hidden layer".into())
            }
            ModelSpec::Mlp(p) if !(p.learning_rate > 0.0) || p.batch_size == 0 || p.alpha < 0.0 || p.epochs == 0 => {
                bad("mlp needs learning_rate > 0, batch_size >= 1, epochs >= 1, alpha >= 0".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Fitted {
    Tree(Tree),
    Forest(Forest),
    Boosted(Boosted),
    Knn(knn::Neighbours),
    Gnb(gnb::GaussianNb),
    Mlp(mlp::Network),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
    pub fitted: Fitted,
    /// Degenerate paths taken while fitting.
    pub flags: Vec<String>,
}

pub fn train(spec: &ModelSpec, ds: &Dataset, seed: u64, exec: Exec) -> Result<TrainedModel> {
    spec.validate()?;
    let mut flags = Vec::new();
    if ds.class_counts().iter().filter(|c| **c > 0).count() < 2 {
        flags.push("single class in training data".to_string());
    }
    let fitted = match spec {
        ModelSpec::Dt(p) => {
            let target = Target::Classes { y: &ds.y, n_classes: ds.n_classes };
            let params = TreeParams { max_depth: p.max_depth, min_leaf: p.min_leaf, max_features: None };
            Fitted::Tree(tree::fit_tree::<ChaCha8Rng>(ds, &Presorted::new(ds), &vec![1.0; ds.n], &target, params, None).tree)
        }
        ModelSpec::Rf(p) => {
            let mf = p.max_features.unwrap_or(((ds.d as f64).sqrt().floor() as usize).max(1));
            let params = ForestParams {
                n_trees: p.n_trees,
                tree: TreeParams { max_depth: p.max_depth, min_leaf: p.min_leaf, max_features: Some(mf.min(ds.d)) },
                bootstrap: p.bootstrap,
            };
            Fitted::Forest(ensemble::fit_forest(ds, params, seed, exec))
        }
        ModelSpec::Gb(p) => {
            let params = BoostParams {
                learning_rate: p.learning_rate,
                n_estimators: p.n_estimators,
                tree: TreeParams { max_depth: Some(p.max_depth), min_leaf: p.min_leaf, max_features: None },
                subsample: p.subsample,
            };
            Fitted::Boosted(ensemble::fit_boosted(ds, params, seed, exec)?)
        }
        ModelSpec::Knn(p) => {
            if p.k > ds.n {
                return Err(Error::invalid(format!("knn k = {} exceeds the {} training samples", p.k, ds.n)));
            }
            Fitted::Knn(knn::fit_knn(ds, p.k, p.metric, p.standardize))
        }
        ModelSpec::Gnb(_) => {
            let m = gnb::fit_gnb(ds);
            if m.floored {
                flags.push("variance floor applied".to_string());
            }
            Fitted::Gnb(m)
        }
        ModelSpec::Mlp(p) => Fitted::Mlp(mlp::fit_mlp(ds, &p.config(), seed)?),
    };
    Ok(TrainedModel { spec: spec.clone(), n_features: ds.d, n_classes: ds.n_classes, seed, fitted, flags })
}

impl TrainedModel {
    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::SchemaMismatch(format!("model expects {} features, got {}", self.n_features, x.len())));
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.check(x)?;
        Ok(match &self.fitted {
            Fitted::Tree(t) => t.predict_class(x),
            Fitted::Forest(f) => f.predict(x),
            Fitted::Boosted(b) => b.predict(x),
            Fitted::Knn(k) => k.predict(x),
            Fitted::Gnb(g) => g.predict(x),
            Fitted::Mlp(m) => m.predict(x),
        })
    }

    /// Class scores summing to 1 (leaf proportions, votes or posteriors).
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match &self.fitted {
            Fitted::Tree(t) => t.leaf_value(x).to_vec(),
            Fitted::Forest(f) => f.votes(x),
            Fitted::Boosted(b) => b.proba(x),
            Fitted::Knn(k) => k.votes(x),
            Fitted::Gnb(g) => g.proba(x),
            Fitted::Mlp(m) => m.proba(x),
        })
    }

    pub fn predict_dataset(&self, ds: &Dataset, exec: Exec) -> Result<Vec<usize>> {
        let idx: Vec<usize> = (0..ds.n).collect();
        map_with(exec, &idx, |&i| self.predict(ds.row(i))).into_iter().collect()
    }

    /// Per-round training loss where the model records one.
    pub fn loss_curve(&self) -> &[f64] {
        match &self.fitted {
            Fitted::Boosted(b) => &b.deviance,
            Fitted::Mlp(m) => &m.loss_curve,
            _ => &[],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 3) as f64 * 5.0 + (i as f64 * 0.37).sin(), (i as f64).cos()]).collect();
        let y = (0..60).map(|i| i % 3).collect();
        Dataset::new(rows, y, vec!["a".into(), "b".into()]).unwrap()
    }

    fn all_specs() -> Vec<ModelSpec> {
        vec![
            ModelSpec::Dt(DtParams::default()),
            ModelSpec::Rf(RfParams { n_trees: 10, ..Default::default() }),
            ModelSpec::Gb(GbParams { n_estimators: 10, ..Default::default() }),
            ModelSpec::Knn(KnnParams::default()),
            ModelSpec::Gnb(GnbParams {}),
            ModelSpec::Mlp(MlpParams { hidden: vec![8], epochs: 300, learning_rate: 0.01, ..Default::default() }),
        ]
    }

    #[test]
    fn every_model_is_reproducible_and_fits() {
        let ds = blobs();
        for spec in all_specs() {
            let a = train(&spec, &ds, 5, Exec::Parallel).unwrap();
            let b = train(&spec, &ds, 5, Exec::Sequential).unwrap();
            assert_eq!(a, b, "{}", spec.kind());
            let pred = a.predict_dataset(&ds, Exec::Parallel).unwrap();
            let acc = pred.iter().zip(&ds.y).filter(|(p, y)| p == y).count() as f64 / ds.n as f64;
            assert!(acc > 0.9, "{} accuracy {acc}", spec.kind());
            let s = a.scores(ds.row(0)).unwrap();
            assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{}", spec.kind());
            assert!(a.predict(&[1.0]).is_err());
        }
    }

    #[test]
    fn single_tree_forest_equals_the_tree() {
        let ds = blobs();
        let dt = train(&ModelSpec::Dt(DtParams::default()), &ds, 3, Exec::Sequential).unwrap();
        let rf = ModelSpec::Rf(RfParams { n_trees: 1, max_features: Some(2), bootstrap: false, ..Default::default() });
        let rf = train(&rf, &ds, 3, Exec::Sequential).unwrap();
        for k in 0..200 {
            let q = [k as f64 * 0.08 - 1.0, (k as f64 * 0.3).sin()];
            assert_eq!(dt.predict(&q).unwrap(), rf.predict(&q).unwrap());
        }
    }

    #[test]
    fn specs_parse_from_toml_and_reject_unknown_keys() {
        let s: ModelSpec = toml::from_str("kind = \"gb\"\nlearning_rate = 0.05\nn_estimators = 300").unwrap();
        assert_eq!(s, ModelSpec::Gb(GbParams { learning_rate: 0.05, n_estimators: 300, ..Default::default() }));
        assert!(toml::from_str::<ModelSpec>("kind = \"gb\"\nlearnig_rate = 0.05").is_err());
        let s: ModelSpec = toml::from_str("kind = \"knn\"\nmetric = \"L1\"").unwrap();
        assert_eq!(s, ModelSpec::Knn(KnnParams { metric: Metric::L1, ..Default::default() }));
        assert!(ModelSpec::Gb(GbParams { learning_rate: -1.0, ..Default::default() }).validate().is_err());
        assert!(s.label().starts_with("knn("));
    }
}
