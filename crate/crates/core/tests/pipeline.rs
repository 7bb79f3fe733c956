use std::path::Path;

use pardiff::models::{ModelSpec, RfParams};
use pardiff::pipeline::{three_stage_decision, Pipeline, PipelineConfig, RunManifest, Stage};
use pardiff::sim::event::Application;
use pardiff::sim::sweep::SweepTable;

fn small_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.seed = 11;
    cfg.simulation.tables = vec![
        SweepTable::PhaseGround,
        SweepTable::TurnTurn,
        SweepTable::WindingWinding,
        SweepTable::Overexcitation,
        SweepTable::MagnetizingInrush,
        SweepTable::SympatheticInrush,
        SweepTable::External,
    ];
    cfg.simulation.max_per_table = Some(6);
    cfg.cv.folds = 3;
    cfg.models.grid = vec![ModelSpec::Rf(RfParams { n_trees: 15, ..Default::default() })];
    cfg
}

fn mtime(dir: &Path) -> std::time::SystemTime {
    std::fs::metadata(dir.join(RunManifest::FILE)).unwrap().modified().unwrap()
}

#[test]
fn model_grid_change_only_invalidates_train_and_later() {
    let tmp = tempfile::tempdir().unwrap();
    let a = Pipeline::new(small_config(), tmp.path()).unwrap();
    a.run_all().unwrap();

    let mut cfg = small_config();
    cfg.models.grid = vec![ModelSpec::Rf(RfParams { n_trees: 20, ..Default::default() })];
    let b = Pipeline::new(cfg, tmp.path()).unwrap();
    for stage in [Stage::Simulate, Stage::Detect, Stage::Extract, Stage::Select] {
        assert_eq!(a.stage_dir(stage), b.stage_dir(stage), "{}", stage.name());
    }
    for stage in [Stage::Train, Stage::Evaluate, Stage::Report] {
        assert_ne!(a.stage_dir(stage), b.stage_dir(stage), "{}", stage.name());
    }
    assert!(b.require(Stage::Train).is_err());

    let before = mtime(&b.stage_dir(Stage::Select));
    b.run_from(Stage::Train).unwrap();
    assert_eq!(mtime(&b.stage_dir(Stage::Select)), before);
    let m = b.run_manifest(Stage::Train).unwrap();
    assert_eq!(m.upstream, Some((Stage::Select, b.config_hash(Stage::Select))));
    for art in &m.artifacts {
        let bytes = std::fs::read(b.stage_dir(Stage::Train).join(&art.file)).unwrap();
        assert_eq!(pardiff::pipeline::sha256_hex(&bytes), art.sha256);
    }
}

#[test]
fn cascade_routes_every_capture_through_two_models() {
    let tmp = tempfile::tempdir().unwrap();
    let p = Pipeline::new(small_config(), tmp.path()).unwrap();
    p.run_all().unwrap();
    let models = p.decision_models().unwrap();
    let captures = p.captures().unwrap();
    assert!(!captures.is_empty());
    let mut agree = 0;
    for c in &captures {
        let d = three_stage_decision(&c.window, &models).unwrap();
        assert_eq!(d.invoked.len(), 2);
        assert_eq!(d.invoked[0], Application::Detect);
        agree += usize::from(d.verdict.matches(c.label, c.unit_label));
    }
    // the windows were part of the training data
    assert!(agree * 2 > captures.len(), "{agree}/{}", captures.len());
}
