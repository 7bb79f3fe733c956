//! Config-driven stage runner: simulate, detect, extract, select, train,
//! evaluate, report.
//!
//! Every stage writes into `<root>/<stage>-<hash>/`, where the hash covers
//! the config sections the stage and its upstream stages read, so a changed
//! setting never mixes with stale artifacts. A stage directory is complete
//! once its `run.json` exists; that file lists the config hash, the seeds
//! and the SHA-256 of every artifact. Wall-clock measurements are written
//! under `<root>/measurements/` and are the only outputs that differ between
//! identical runs.

pub mod config;
pub mod decision;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::PipelineConfig;
pub use decision::{three_stage_decision, Decision, DecisionModel, DecisionModels, Verdict};

use crate::detect::{detect_and_capture, CaptureWindow};
use crate::error::{Error, Result};
use crate::eval::report::{timing_text, ApplicationReport};
use crate::eval::{grid_search, stratified_split, timing_report, CvPlan, GridResult, Timing};
use crate::features::export::FeatureTable;
use crate::features::extract::EnergyColumn;
use crate::features::{energy_pool, extract_feature_matrix, window_features, FeatureMode, TimeSchema};
use crate::models::{persist, train, Dataset, ModelSpec};
use crate::par::{self, Exec};
use crate::select::wavelet_search::{dt_wavelet_search, RankedSpec};
use crate::select::{mrmr_select, rf_importance, Method, SelectionResult};
use crate::sim::event::{Application, EventKind, Unit};
use crate::sim::record::StoredWaveform;
use crate::sim::sweep::{self, mix, Manifest, SweepTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Simulate,
    Detect,
    Extract,
    Select,
    Train,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Simulate, Stage::Detect, Stage::Extract, Stage::Select, Stage::Train, Stage::Evaluate, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Detect => "detect",
            Stage::Extract => "extract",
            Stage::Select => "select",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }

    pub fn upstream(self) -> Option<Stage> {
        let i = Stage::ALL.iter().position(|&s| s == self).expect("listed");
        i.checked_sub(1).map(|j| Stage::ALL[j])
    }
}

/// Capture of one record, as stored by the detect stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub id: String,
    pub label: EventKind,
    pub unit_label: Option<Unit>,
    pub table: SweepTable,
    /// First sample at or after the event inception.
    pub inception_index: usize,
    pub window: CaptureWindow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectSummary {
    pub records: usize,
    pub captured: usize,
    /// Records whose index never reached the threshold.
    pub missed: Vec<String>,
    /// `(captured, total)` per event label.
    pub by_label: BTreeMap<String, (usize, usize)>,
}

/// Extract-stage description of one application's feature table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractInfo {
    pub application: Application,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    pub window_len: usize,
    pub time_columns: Vec<String>,
    pub energy_columns: Vec<EnergyColumn>,
    pub mode: FeatureMode,
    pub dropped: Vec<String>,
}

/// Select-stage outcome of one application.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionInfo {
    pub application: Application,
    pub method: Method,
    pub chosen_energies: Vec<EnergyColumn>,
    /// Time columns followed by the chosen energies.
    pub columns: Vec<String>,
    pub mode: FeatureMode,
    pub result: Option<SelectionResult>,
    pub ranked: Option<Vec<RankedSpec>>,
}

/// Train-stage description of one application's final model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub application: Application,
    pub class_names: Vec<String>,
    pub mode: FeatureMode,
    pub columns: Vec<String>,
    pub window_len: usize,
    pub spec: ModelSpec,
    pub seed: u64,
    pub cv_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// `run.json` of a stage directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: Stage,
    pub config_hash: String,
    pub upstream: Option<(Stage, String)>,
    pub seed: u64,
    pub seeds: BTreeMap<String, u64>,
    /// Config sections covered by the hash.
    pub key: serde_json::Value,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub const FILE: &'static str = "run.json";
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub application: Application,
    pub classifier: String,
    pub timing: Timing,
}

/// Wall-clock measurements of the evaluate stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    pub timing: Vec<TimingRow>,
    /// Mean and standard deviation (seconds) of the cascaded decision on
    /// captured windows, and the number of windows.
    pub decision_latency: Option<(f64, f64, usize)>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn app_tag(app: Application) -> u64 {
    match app {
        Application::Detect => 1,
        Application::Locate => 2,
        Application::Identify => 3,
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::format("stage artifact", format!("{}: {e}", path.display())))
}

fn labels_tsv(ids: &[String], y: &[usize]) -> String {
    let mut s = String::from("record\tclass\n");
    for (id, c) in ids.iter().zip(y) {
        let _ = writeln!(s, "{id}\t{c}");
    }
    s
}

fn read_labels(path: &Path) -> Result<Vec<(String, usize)>> {
    let text = std::fs::read_to_string(path)?;
    let bad = |d: String| Error::format("label file", d);
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let (id, c) = line.split_once('\t').ok_or_else(|| bad(format!("line {}: expected two fields", n + 1)))?;
        out.push((id.to_string(), c.parse().map_err(|e| bad(format!("line {}: {e}", n + 1)))?));
    }
    Ok(out)
}

/// Feature mode of an application: scalar time block, then energies.
fn app_mode(cfg: &PipelineConfig, app: Application, energies: Vec<EnergyColumn>) -> FeatureMode {
    let a = cfg.applications.get(app);
    if a.time_features.is_empty() {
        FeatureMode::Energies(energies)
    } else {
        FeatureMode::Combined { features: a.time_features.clone(), params: cfg.features.clone(), energies }
    }
}

fn time_columns(cfg: &PipelineConfig, app: Application, n: usize) -> Result<Vec<String>> {
    let a = cfg.applications.get(app);
    if a.time_features.is_empty() {
        return Ok(Vec::new());
    }
    crate::features::extract::schema(
        &FeatureMode::Time { features: a.time_features.clone(), params: cfg.features.clone(), schema: TimeSchema::Scalar },
        n,
    )
}

/// A pipeline bound to a config and a stage root.
pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub root: PathBuf,
    pub exec: Exec,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, root: impl Into<PathBuf>) -> Result<Pipeline> {
        cfg.validate()?;
        Ok(Pipeline { cfg, root: root.into(), exec: Exec::available() })
    }

    /// Config sections read by `stage`, chained to the upstream hash.
    pub fn stage_key(&self, stage: Stage) -> serde_json::Value {
        let c = &self.cfg;
        let up = stage.upstream().map(|u| self.config_hash(u));
        let own = match stage {
            Stage::Simulate => json!({ "seed": c.seed, "simulation": c.simulation, "plant": c.plant }),
            Stage::Detect => json!({ "detection": c.detection }),
            Stage::Extract => json!({ "features": c.features, "applications": c.applications }),
            Stage::Select => json!({ "seed": c.seed, "selection": c.selection }),
            Stage::Train => json!({ "seed": c.seed, "models": c.models, "cv": c.cv }),
            Stage::Evaluate => json!({ "seed": c.seed, "evaluation": c.evaluation }),
            Stage::Report => json!({}),
        };
        json!({ "stage": stage.name(), "upstream": up, "config": own, "version": env!("CARGO_PKG_VERSION") })
    }

    pub fn config_hash(&self, stage: Stage) -> String {
        let key = serde_json::to_vec(&self.stage_key(stage)).expect("config serializes");
        sha256_hex(&key)
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.root.join(format!("{}-{}", stage.name(), &self.config_hash(stage)[..16]))
    }

    pub fn measurements_dir(&self) -> PathBuf {
        self.root.join("measurements")
    }

    /// Directory of a completed stage, or the error naming it.
    pub fn require(&self, stage: Stage) -> Result<PathBuf> {
        let dir = self.stage_dir(stage);
        if dir.join(RunManifest::FILE).is_file() {
            Ok(dir)
        } else {
            Err(Error::MissingArtifact { stage: stage.name().to_string(), path: dir })
        }
    }

    pub fn run_manifest(&self, stage: Stage) -> Result<RunManifest> {
        read_json(&self.require(stage)?.join(RunManifest::FILE))
    }

    /// Run one stage; upstream stages must already be complete.
    pub fn run(&self, stage: Stage) -> Result<PathBuf> {
        if let Some(up) = stage.upstream() {
            self.require(up)?;
        }
        let dir = self.stage_dir(stage);
        if dir.exists() {
            std::fs::remove_dir_all(&dir)?;
        }
        std::fs::create_dir_all(&dir)?;
        let started = Instant::now();
        let seeds = match stage {
            Stage::Simulate => self.simulate(&dir),
            Stage::Detect => self.detect(&dir),
            Stage::Extract => self.extract(&dir),
            Stage::Select => self.select(&dir),
            Stage::Train => self.train(&dir),
            Stage::Evaluate => self.evaluate(&dir),
            Stage::Report => self.report(&dir),
        };
        let seeds = match seeds {
            Ok(s) => s,
            Err(e) => {
                let _ = std::fs::remove_dir_all(&dir);
                return Err(e);
            }
        };
        self.finish(stage, &dir, seeds)?;
        log::info!("{} finished in {:.2} s -> {}", stage.name(), started.elapsed().as_secs_f64(), dir.display());
        Ok(dir)
    }

    /// Run every stage from `from` on.
    pub fn run_from(&self, from: Stage) -> Result<()> {
        for &s in Stage::ALL.iter().skip_while(|&&s| s != from) {
            self.run(s)?;
        }
        Ok(())
    }

    pub fn run_all(&self) -> Result<()> {
        self.run_from(Stage::Simulate)
    }

    fn finish(&self, stage: Stage, dir: &Path, seeds: BTreeMap<String, u64>) -> Result<()> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
        files.sort();
        let mut artifacts = Vec::with_capacity(files.len());
        for f in files {
            let bytes = std::fs::read(&f)?;
            artifacts.push(Artifact {
                file: f.file_name().expect("file").to_string_lossy().into_owned(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let m = RunManifest {
            stage,
            config_hash: self.config_hash(stage),
            upstream: stage.upstream().map(|u| (u, self.config_hash(u))),
            seed: self.cfg.seed,
            seeds,
            key: self.stage_key(stage),
            artifacts,
        };
        std::fs::write(dir.join(RunManifest::FILE), to_json(&m)?)?;
        Ok(())
    }

    fn simulate(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let plan = sweep::plan(&self.cfg.simulation, self.cfg.seed)?;
        sweep::generate(&plan, &self.cfg.plant.plant(), dir, self.exec)?;
        Ok(BTreeMap::from([("sweep".to_string(), self.cfg.seed)]))
    }

    fn detect(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let src = self.require(Stage::Simulate)?;
        let manifest = Manifest::read(&src)?;
        let ed = self.cfg.detection;
        let results = par::map_with(self.exec, &manifest.entries, |e| -> Result<Option<CaptureRecord>> {
            let w = StoredWaveform::read(&src.join(&e.file))?;
            let inception =
                ((w.inception_time - w.start_time) * w.sample_rate - 1e-9).ceil().max(0.0) as usize;
            Ok(detect_and_capture(&w.id, &ed)?.map(|window| CaptureRecord {
                id: e.id.clone(),
                label: e.label,
                unit_label: e.unit_label,
                table: e.table,
                inception_index: inception,
                window,
            }))
        });
        let mut lines = String::new();
        let mut summary =
            DetectSummary { records: manifest.entries.len(), captured: 0, missed: Vec::new(), by_label: BTreeMap::new() };
        for (e, r) in manifest.entries.iter().zip(results) {
            let slot = summary.by_label.entry(e.label.name().to_string()).or_insert((0, 0));
            slot.1 += 1;
            match r? {
                Some(c) => {
                    slot.0 += 1;
                    summary.captured += 1;
                    lines.push_str(&serde_json::to_string(&c)?);
                    lines.push('\n');
                }
                None => summary.missed.push(e.id.clone()),
            }
        }
        if summary.captured == 0 {
            log::warn!("no record triggered the event detector; downstream stages will refuse to run");
        }
        std::fs::write(dir.join("captures.jsonl"), lines)?;
        std::fs::write(dir.join("detect-summary.json"), to_json(&summary)?)?;
        Ok(BTreeMap::new())
    }

    /// Captured windows of the detect stage, in record order.
    pub fn captures(&self) -> Result<Vec<CaptureRecord>> {
        let dir = self.require(Stage::Detect)?;
        let text = std::fs::read_to_string(dir.join("captures.jsonl"))?;
        text.lines()
            .enumerate()
            .map(|(n, l)| {
                serde_json::from_str(l).map_err(|e| Error::format("capture file", format!("line {}: {e}", n + 1)))
            })
            .collect()
    }

    fn extract(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let captures = self.captures()?;
        if captures.is_empty() {
            return Err(Error::EmptyStage {
                stage: Stage::Detect.name().into(),
                detail: "no record triggered the event detector, so there is nothing to extract".into(),
            });
        }
        let n = self.cfg.detection.cycle_samples;
        for app in self.cfg.applications.enabled() {
            let names = app.class_names();
            let members: Vec<(&CaptureRecord, usize)> = captures
                .iter()
                .filter_map(|c| app.class_of(c.label, c.unit_label).map(|k| (c, k)))
                .collect();
            let windows: Vec<CaptureWindow> = members.iter().map(|(c, _)| c.window.clone()).collect();
            let energies = energy_pool(&self.cfg.applications.get(app).wavelets);
            let mode = app_mode(&self.cfg, app, energies.clone());
            let m = extract_feature_matrix(&windows, &mode, self.exec)?;
            let ids: Vec<String> = m.source.iter().map(|&i| members[i].0.id.clone()).collect();
            let y: Vec<usize> = m.source.iter().map(|&i| members[i].1).collect();
            let mut counts = vec![0; names.len()];
            y.iter().for_each(|&k| counts[k] += 1);
            if let Some(k) = counts.iter().position(|&c| c == 0) {
                return Err(Error::EmptyStage {
                    stage: Stage::Detect.name().into(),
                    detail: format!("application {}: class '{}' has no usable captured window", app.name(), names[k]),
                });
            }
            let info = ExtractInfo {
                application: app,
                class_names: names.iter().map(|s| s.to_string()).collect(),
                class_counts: counts,
                window_len: n,
                time_columns: time_columns(&self.cfg, app, n)?,
                energy_columns: energies,
                mode,
                dropped: m.dropped.iter().map(|d| format!("{}: {} = {}", members[d.index].0.id, d.column, d.value)).collect(),
            };
            let table = FeatureTable { schema: m.schema, ids, rows: m.rows };
            table.write_binary(&dir.join(format!("{}.feat", app.name())))?;
            table.write_tsv(&dir.join(format!("{}.tsv", app.name())))?;
            std::fs::write(dir.join(format!("{}-labels.tsv", app.name())), labels_tsv(&table.ids, &y))?;
            std::fs::write(dir.join(format!("{}-extract.json", app.name())), to_json(&info)?)?;
        }
        Ok(BTreeMap::new())
    }

    /// Feature table, labels and description of an application.
    pub fn features(&self, app: Application) -> Result<(FeatureTable, Vec<usize>, ExtractInfo)> {
        let dir = self.require(Stage::Extract)?;
        let table = FeatureTable::read_binary(&dir.join(format!("{}.feat", app.name())))?;
        let labels = read_labels(&dir.join(format!("{}-labels.tsv", app.name())))?;
        if labels.len() != table.ids.len() || labels.iter().zip(&table.ids).any(|((a, _), b)| a != b) {
            return Err(Error::SchemaMismatch(format!("{} labels do not match the feature table", app.name())));
        }
        let info: ExtractInfo = read_json(&dir.join(format!("{}-extract.json", app.name())))?;
        Ok((table, labels.into_iter().map(|(_, c)| c).collect(), info))
    }

    fn dataset(table: &FeatureTable, y: &[usize], columns: &[String]) -> Result<Dataset> {
        let idx: Vec<usize> = columns
            .iter()
            .map(|c| {
                table
                    .schema
                    .iter()
                    .position(|s| s == c)
                    .ok_or_else(|| Error::SchemaMismatch(format!("column '{c}' is not in the feature table")))
            })
            .collect::<Result<_>>()?;
        let rows = table.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        Dataset::new(rows, y.to_vec(), columns.to_vec())
    }

    fn select(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let sel = &self.cfg.selection;
        let mut seeds = BTreeMap::new();
        for app in self.cfg.applications.enabled() {
            let (table, y, info) = self.features(app)?;
            let pool: Vec<String> = info.energy_columns.iter().map(EnergyColumn::name).collect();
            let seed = mix(self.cfg.seed, 10 + app_tag(app));
            let (chosen, result, ranked, params) = if pool.is_empty() {
                (Vec::new(), None, None, "no energy columns configured".to_string())
            } else {
                match sel.method {
                    Method::Mrmr => {
                        let ds = Self::dataset(&table, &y, &pool)?;
                        let r = mrmr_select(&ds, sel.count, sel.bins, self.exec)?;
                        let chosen = r.chosen.iter().map(|&j| info.energy_columns[j].clone()).collect();
                        (chosen, Some(r), None, format!("count {} bins {}", sel.count, sel.bins))
                    }
                    Method::RfImportance => {
                        let ds = Self::dataset(&table, &y, &pool)?;
                        seeds.insert(format!("{}.forest", app.name()), seed);
                        let r = rf_importance(&ds, &sel.forest, sel.count, seed, self.exec)?;
                        let chosen = r.chosen.iter().map(|&j| info.energy_columns[j].clone()).collect();
                        (chosen, Some(r), None, format!("count {} forest {:?}", sel.count, sel.forest))
                    }
                    Method::DtWaveletSearch => {
                        let by_id: BTreeMap<String, CaptureWindow> =
                            self.captures()?.into_iter().map(|c| (c.id, c.window)).collect();
                        let windows: Vec<CaptureWindow> = table.ids.iter().map(|id| by_id[id].clone()).collect();
                        seeds.insert(format!("{}.search", app.name()), seed);
                        let specs = &self.cfg.applications.get(app).wavelets;
                        let ranked = dt_wavelet_search(
                            &windows,
                            &y,
                            info.class_names.len(),
                            specs,
                            sel.runs,
                            &sel.tree,
                            seed,
                            self.exec,
                        )?;
                        let best = ranked.first().ok_or_else(|| Error::EmptyStage {
                            stage: Stage::Select.name().into(),
                            detail: format!("application {}: every wavelet spec failed", app.name()),
                        })?;
                        let chosen = energy_pool(std::slice::from_ref(&best.spec));
                        (chosen, None, Some(ranked), format!("runs {} tree {:?}", sel.runs, sel.tree))
                    }
                }
            };
            let mut columns = info.time_columns.clone();
            columns.extend(chosen.iter().map(EnergyColumn::name));
            let mode = app_mode(&self.cfg, app, chosen.clone());
            let mut text = format!("application: {}\n", app.name());
            let _ = writeln!(text, "time columns: {}", info.time_columns.join(", "));
            match (&result, &ranked) {
                (Some(r), _) => text.push_str(&r.report(&pool, &params)),
                (None, Some(rk)) => {
                    let _ = writeln!(text, "method: {}\nparameters: {params}", Method::DtWaveletSearch.name());
                    for r in rk {
                        let _ = writeln!(text, "  {:<12} {:.4}", r.spec.label(), r.mean_balanced_accuracy);
                    }
                }
                _ => {
                    let _ = writeln!(text, "{params}");
                }
            }
            let _ = writeln!(text, "final columns: {}", columns.join(", "));
            let out = SelectionInfo {
                application: app,
                method: sel.method,
                chosen_energies: chosen,
                columns,
                mode,
                result,
                ranked,
            };
            std::fs::write(dir.join(format!("{}-selection.json", app.name())), to_json(&out)?)?;
            std::fs::write(dir.join(format!("{}-selection.txt", app.name())), text)?;
        }
        Ok(seeds)
    }

    pub fn selection(&self, app: Application) -> Result<SelectionInfo> {
        read_json(&self.require(Stage::Select)?.join(format!("{}-selection.json", app.name())))
    }

    /// Grid cells grouped by classifier kind in order of first appearance.
    fn grid_by_kind(&self) -> Vec<Vec<ModelSpec>> {
        let mut groups: Vec<Vec<ModelSpec>> = Vec::new();
        for spec in &self.cfg.models.grid {
            match groups.iter_mut().find(|g| g[0].kind() == spec.kind()) {
                Some(g) => g.push(spec.clone()),
                None => groups.push(vec![spec.clone()]),
            }
        }
        groups
    }

    fn train(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let mut seeds = BTreeMap::new();
        for app in self.cfg.applications.enabled() {
            let (table, y, info) = self.features(app)?;
            let sel = self.selection(app)?;
            let ds = Self::dataset(&table, &y, &sel.columns)?;
            let cv_seed = mix(mix(self.cfg.seed, self.cfg.cv.seed), 20 + app_tag(app));
            let plan = CvPlan { folds: self.cfg.cv.folds, seed: cv_seed };
            let grids: Vec<GridResult> =
                self.grid_by_kind().iter().map(|g| grid_search(&ds, g, plan, self.exec)).collect::<Result<_>>()?;
            let report = ApplicationReport::from_grids(app.name(), info.class_names.clone(), sel.columns.clone(), ds.n, &grids);
            let spec = grids[report.best].best_spec().clone();
            let seed = mix(self.cfg.seed, 30 + app_tag(app));
            let model = train(&spec, &ds, seed, self.exec)?;
            seeds.insert(format!("{}.cv", app.name()), cv_seed);
            seeds.insert(format!("{}.model", app.name()), seed);
            persist::save(&model, &dir.join(format!("{}.model", app.name())))?;
            let mi = ModelInfo {
                application: app,
                class_names: info.class_names,
                mode: sel.mode,
                columns: sel.columns,
                window_len: info.window_len,
                spec,
                seed,
                cv_seed,
            };
            std::fs::write(dir.join(format!("{}-model.json", app.name())), to_json(&mi)?)?;
            std::fs::write(dir.join(format!("{}-grid.json", app.name())), to_json(&grids)?)?;
        }
        Ok(seeds)
    }

    pub fn decision_model(&self, app: Application) -> Result<DecisionModel> {
        let dir = self.require(Stage::Train)?;
        let info: ModelInfo = read_json(&dir.join(format!("{}-model.json", app.name())))?;
        let model = persist::load(&dir.join(format!("{}.model", app.name())))?;
        DecisionModel::new(app, info.mode, info.columns, info.window_len, model)
    }

    /// The three trained models; every application must be enabled.
    pub fn decision_models(&self) -> Result<DecisionModels> {
        DecisionModels::new(
            self.decision_model(Application::Detect)?,
            self.decision_model(Application::Locate)?,
            self.decision_model(Application::Identify)?,
        )
    }

    fn evaluate(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let train_dir = self.require(Stage::Train)?;
        let mut seeds = BTreeMap::new();
        let mut timing = Vec::new();
        let captures = self.captures()?;
        for app in self.cfg.applications.enabled() {
            let (table, y, info) = self.features(app)?;
            let mi: ModelInfo = read_json(&train_dir.join(format!("{}-model.json", app.name())))?;
            let grids: Vec<GridResult> = read_json(&train_dir.join(format!("{}-grid.json", app.name())))?;
            let ds = Self::dataset(&table, &y, &mi.columns)?;
            let report = ApplicationReport::from_grids(app.name(), info.class_names.clone(), mi.columns.clone(), ds.n, &grids);
            std::fs::write(dir.join(format!("{}-report.json", app.name())), to_json(&report)?)?;

            let seed = mix(self.cfg.seed, 40 + app_tag(app));
            seeds.insert(format!("{}.timing", app.name()), seed);
            let (tr, te) = stratified_split(&ds.y, ds.n_classes, self.cfg.evaluation.test_fraction, seed);
            let members: Vec<&CaptureWindow> = captures
                .iter()
                .filter(|c| app.class_of(c.label, c.unit_label).is_some())
                .map(|c| &c.window)
                .take(crate::eval::timing::LATENCY_RUNS)
                .collect();
            let t0 = Instant::now();
            for w in &members {
                std::hint::black_box(window_features(w, &mi.mode)?);
            }
            let fx = (!members.is_empty()).then(|| t0.elapsed().as_secs_f64() / members.len() as f64);
            let t = timing_report(&mi.spec, &ds.subset(&tr), &ds.subset(&te), seed, fx)?;
            timing.push(TimingRow { application: app, classifier: mi.spec.kind().to_string(), timing: t });
        }
        let latency = if self.cfg.applications.enabled().len() == 3 {
            let models = self.decision_models()?;
            let lat: Vec<f64> = captures
                .iter()
                .take(crate::eval::timing::LATENCY_RUNS)
                .map(|c| three_stage_decision(&c.window, &models).map(|d| d.latency))
                .collect::<Result<_>>()?;
            let mean = lat.iter().sum::<f64>() / lat.len() as f64;
            let std = (lat.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / lat.len() as f64).sqrt();
            Some((mean, std, lat.len()))
        } else {
            None
        };
        let m = Measurements { timing, decision_latency: latency };
        let md = self.measurements_dir();
        std::fs::create_dir_all(&md)?;
        std::fs::write(md.join(format!("evaluate-{}.json", &self.config_hash(Stage::Evaluate)[..16])), to_json(&m)?)?;
        Ok(seeds)
    }

    pub fn application_report(&self, app: Application) -> Result<ApplicationReport> {
        read_json(&self.require(Stage::Evaluate)?.join(format!("{}-report.json", app.name())))
    }

    pub fn measurements(&self) -> Result<Measurements> {
        let path = self.measurements_dir().join(format!("evaluate-{}.json", &self.config_hash(Stage::Evaluate)[..16]));
        if !path.is_file() {
            return Err(Error::MissingArtifact { stage: Stage::Evaluate.name().into(), path });
        }
        read_json(&path)
    }

    fn report(&self, dir: &Path) -> Result<BTreeMap<String, u64>> {
        let mut summary = String::from("application  samples  features  best classifier  balanced accuracy (%)\n");
        let mut tsv = String::from("application\tclassifier\tmean_balanced_accuracy\tstd\tparameters\n");
        for app in self.cfg.applications.enabled() {
            let r = self.application_report(app)?;
            std::fs::write(dir.join(format!("{}.txt", app.name())), r.to_text()?)?;
            std::fs::write(dir.join(format!("{}.tsv", app.name())), r.to_tsv())?;
            tsv.push_str(r.to_tsv().split_once('\n').map_or("", |(_, rest)| rest));
            let b = &r.rows[r.best];
            let _ = writeln!(
                summary,
                "{:<11}  {:>7}  {:>8}  {:<15}  {:>8.2} +- {:.2}",
                app.name(),
                r.samples,
                r.features.len(),
                b.kind,
                100.0 * b.mean,
                100.0 * b.std
            );
        }
        std::fs::write(dir.join("summary.txt"), summary)?;
        std::fs::write(dir.join("summary.tsv"), tsv)?;
        if let Ok(m) = self.measurements() {
            let rows: Vec<(String, String, Timing)> = m
                .timing
                .iter()
                .map(|r| (r.application.name().to_string(), r.classifier.clone(), r.timing.clone()))
                .collect();
            let mut text = timing_text(&rows);
            if let Some((mean, std, n)) = m.decision_latency {
                let _ = writeln!(text, "\ncascaded decision: {:.3} +- {:.3} ms per window over {n} windows", 1e3 * mean, 1e3 * std);
            }
            std::fs::write(self.measurements_dir().join(format!("report-{}-timing.txt", &self.config_hash(Stage::Report)[..16])), text)?;
        }
        Ok(BTreeMap::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_order_and_names() {
        assert_eq!(Stage::Simulate.upstream(), None);
        assert_eq!(Stage::Report.upstream(), Some(Stage::Evaluate));
        assert_eq!(Stage::Train.name(), "train");
    }

    #[test]
    fn hashes_follow_the_config_sections_a_stage_reads() {
        let dir = tempfile::tempdir().unwrap();
        let a = Pipeline::new(PipelineConfig::default(), dir.path()).unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.cv.folds = 5;
        let b = Pipeline::new(cfg, dir.path()).unwrap();
        for s in [Stage::Simulate, Stage::Detect, Stage::Extract, Stage::Select] {
            assert_eq!(a.config_hash(s), b.config_hash(s));
        }
        for s in [Stage::Train, Stage::Evaluate, Stage::Report] {
            assert_ne!(a.config_hash(s), b.config_hash(s));
        }
        let mut cfg = PipelineConfig::default();
        cfg.seed = 1;
        let c = Pipeline::new(cfg, dir.path()).unwrap();
        assert_ne!(a.config_hash(Stage::Simulate), c.config_hash(Stage::Simulate));
    }

    #[test]
    fn missing_upstream_names_the_stage() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(PipelineConfig::default(), dir.path()).unwrap();
        match p.run(Stage::Extract) {
            Err(Error::MissingArtifact { stage, .. }) => assert_eq!(stage, "detect"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
