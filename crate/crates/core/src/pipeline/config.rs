//! Pipeline configuration file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::EdConfig;
use crate::error::{Error, Result};
use crate::eval::CvPlan;
use crate::features::wavelet::WaveletSpec;
use crate::features::{energy_pool, TimeFeature, TimeFeatureParams};
use crate::models::{DtParams, GbParams, GnbParams, KnnParams, MlpParams, ModelSpec, RfParams};
use crate::select::{Method, DEFAULT_BINS};
use crate::sim::event::Application;
use crate::sim::saturation::SaturationCurve;
use crate::sim::sweep::{Plant, SweepConfig};
use crate::sim::system::{IsparRating, NetworkConstants};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantConfig {
    pub rating: IsparRating,
    pub saturation: SaturationCurve,
    pub network: NetworkConstants,
}

impl PlantConfig {
    pub fn plant(&self) -> Plant {
        Plant { rating: self.rating.clone(), saturation: self.saturation.clone(), network: self.network.clone() }
    }
}

/// Features of one application: a time-feature block and the wavelet specs
/// whose energies form the selection pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicationConfig {
    #[serde(default = "enabled")]
    pub enabled: bool,
    pub time_features: Vec<TimeFeature>,
    pub wavelets: Vec<WaveletSpec>,
}

fn enabled() -> bool {
    true
}

fn specs(list: &[(&str, usize)]) -> Vec<WaveletSpec> {
    list.iter().map(|&(w, l)| WaveletSpec::new(w, l)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApplicationsConfig {
    pub detect: ApplicationConfig,
    pub locate: ApplicationConfig,
    pub identify: ApplicationConfig,
}

impl Default for ApplicationsConfig {
    fn default() -> Self {
        use TimeFeature::*;
        ApplicationsConfig {
            detect: ApplicationConfig {
                enabled: true,
                time_features: vec![F1, F2, F3],
                wavelets: specs(&[("bior2.2", 3), ("db4", 4), ("rbio3.3", 3), ("rbio4.4", 4), ("sym4", 4)]),
            },
            locate: ApplicationConfig {
                enabled: true,
                time_features: vec![F1, F3, F4],
                wavelets: specs(&[("bior1.3", 1), ("db1", 1), ("coif1", 3), ("rbio1.1", 4), ("sym2", 4)]),
            },
            identify: ApplicationConfig {
                enabled: true,
                time_features: vec![F5, F6, F7],
                wavelets: specs(&[("bior4.4", 4), ("bior2.2", 5), ("db2", 5), ("rbio1.1", 3), ("sym2", 5)]),
            },
        }
    }
}

impl ApplicationsConfig {
    pub fn get(&self, app: Application) -> &ApplicationConfig {
        match app {
            Application::Detect => &self.detect,
            Application::Locate => &self.locate,
            Application::Identify => &self.identify,
        }
    }

    pub fn enabled(&self) -> Vec<Application> {
        Application::ALL.into_iter().filter(|&a| self.get(a).enabled).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub method: Method,
    /// Number of energy columns kept.
    pub count: usize,
    pub bins: usize,
    /// Forest used by `rf-importance`.
    pub forest: RfParams,
    /// Tree and repetitions used by `dt-wavelet-search`.
    pub tree: DtParams,
    pub runs: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            method: Method::Mrmr,
            count: 9,
            bins: DEFAULT_BINS,
            forest: RfParams::default(),
            tree: DtParams::default(),
            runs: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelsConfig {
    /// Every cell is cross-validated; the report keeps the best cell of
    /// each classifier kind.
    pub grid: Vec<ModelSpec>,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        ModelsConfig {
            grid: vec![
                ModelSpec::Dt(DtParams::default()),
                ModelSpec::Dt(DtParams { max_depth: Some(8), ..DtParams::default() }),
                ModelSpec::Rf(RfParams::default()),
                ModelSpec::Gb(GbParams::default()),
                ModelSpec::Gb(GbParams { n_estimators: 300, ..GbParams::default() }),
                ModelSpec::Knn(KnnParams { k: 1, ..KnnParams::default() }),
                ModelSpec::Knn(KnnParams::default()),
                ModelSpec::Gnb(GnbParams::default()),
                ModelSpec::Mlp(MlpParams::default()),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Held-out share of the timing split.
    pub test_fraction: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { test_fraction: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Default stage directory; the command line may override it.
    pub stage_dir: Option<String>,
    pub simulation: SweepConfig,
    pub plant: PlantConfig,
    pub detection: EdConfig,
    pub features: TimeFeatureParams,
    pub applications: ApplicationsConfig,
    pub selection: SelectionConfig,
    pub models: ModelsConfig,
    pub cv: CvPlan,
    pub evaluation: EvaluationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            stage_dir: None,
            simulation: SweepConfig::default(),
            plant: PlantConfig::default(),
            detection: EdConfig::default(),
            features: TimeFeatureParams::default(),
            applications: ApplicationsConfig::default(),
            selection: SelectionConfig::default(),
            models: ModelsConfig::default(),
            cv: CvPlan::default(),
            evaluation: EvaluationConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<PipelineConfig> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Every sub-config checked against its module; failures surface as
    /// config errors.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|e| match e {
            Error::InvalidInput(m) => Error::Config(m),
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        let nc = &self.plant.network;
        nc.validate()?;
        self.plant.rating.validate()?;
        self.plant.saturation.validate()?;
        if !(0.0..=1.0).contains(&self.simulation.fraction) {
            return Err(Error::invalid(format!("simulation.fraction must lie in [0, 1], got {}", self.simulation.fraction)));
        }
        if self.simulation.tables.is_empty() {
            return Err(Error::invalid("simulation.tables is empty"));
        }
        self.detection.validate()?;
        let n = self.detection.cycle_samples;
        if n != nc.cycle_samples() {
            return Err(Error::invalid(format!(
                "detection.cycle_samples {n} differs from the {} samples per cycle of the simulated network",
                nc.cycle_samples()
            )));
        }
        self.features.validate(n)?;
        let apps = self.applications.enabled();
        if apps.is_empty() {
            return Err(Error::invalid("no application is enabled"));
        }
        for app in apps {
            let a = self.applications.get(app);
            let ctx = |e: Error| Error::invalid(format!("applications.{}: {e}", app.name()));
            if a.time_features.is_empty() && a.wavelets.is_empty() {
                return Err(ctx(Error::invalid("needs time features or wavelets")));
            }
            for w in &a.wavelets {
                w.validate(n).map_err(ctx)?;
            }
            let pool = energy_pool(&a.wavelets).len();
            if self.selection.method != Method::DtWaveletSearch && self.selection.count > pool {
                return Err(ctx(Error::invalid(format!(
                    "selection.count {} exceeds the {pool} energy columns of the configured wavelets",
                    self.selection.count
                ))));
            }
        }
        if self.selection.bins < 2 {
            return Err(Error::invalid("selection.bins must be at least 2"));
        }
        if self.selection.runs == 0 {
            return Err(Error::invalid("selection.runs must be at least 1"));
        }
        ModelSpec::Rf(self.selection.forest.clone()).validate()?;
        ModelSpec::Dt(self.selection.tree.clone()).validate()?;
        if self.models.grid.is_empty() {
            return Err(Error::invalid("models.grid is empty"));
        }
        for m in &self.models.grid {
            m.validate()?;
        }
        if self.cv.folds < 2 {
            return Err(Error::invalid("cv.folds must be at least 2"));
        }
        if !(self.evaluation.test_fraction > 0.0 && self.evaluation.test_fraction < 1.0) {
            return Err(Error::invalid("evaluation.test_fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}
