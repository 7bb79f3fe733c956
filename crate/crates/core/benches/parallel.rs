use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pardiff::detect::CaptureWindow;
use pardiff::eval::{cross_validate, CvPlan};
use pardiff::features::{energy_pool, extract_feature_matrix, FeatureMode, TimeFeature, TimeFeatureParams, WaveletSpec};
use pardiff::models::ensemble::{fit_forest, ForestParams};
use pardiff::models::tree::TreeParams;
use pardiff::models::{Dataset, GbParams, ModelSpec};
use pardiff::par::Exec;
use pardiff::sim::event::Phase;
use pardiff::sim::sweep::{plan, simulate_plan, Plant, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn windows(n: usize) -> Vec<CaptureWindow> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|_| CaptureWindow {
            start_index: 0,
            trigger_index: 0,
            samples: std::array::from_fn(|_| (0..167).map(|_| rng.random_range(-1.0..1.0)).collect()),
            trigger_phase: Phase::A,
        })
        .collect()
}

fn blobs(n: usize, d: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 3;
        rows.push((0..d).map(|j| rng.random_range(-1.0..1.0) + if j % 3 == c { 1.5 } else { 0.0 }).collect());
        y.push(c);
    }
    Dataset::new(rows, y, (0..d).map(|j| format!("x{j}")).collect()).unwrap()
}

fn simulation(c: &mut Criterion) {
    let cfg = SweepConfig { max_per_table: Some(2), ..Default::default() };
    let p = plan(&cfg, 1).unwrap();
    let plant = Plant::default();
    let mut g = c.benchmark_group("simulate_14_records");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| simulate_plan(&p, &plant, exec).unwrap()));
    }
    g.finish();
}

fn extraction(c: &mut Criterion) {
    let ws = windows(400);
    let mode = FeatureMode::Combined {
        features: TimeFeature::ALL.to_vec(),
        params: TimeFeatureParams::default(),
        energies: energy_pool(&[WaveletSpec::new("db4", 4), WaveletSpec::new("sym2", 5)]),
    };
    let mut g = c.benchmark_group("extract_400_windows");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| extract_feature_matrix(&ws, &mode, exec).unwrap()));
    }
    g.finish();
}

fn forest(c: &mut Criterion) {
    let ds = blobs(600, 18);
    let p = ForestParams { n_trees: 32, tree: TreeParams { max_depth: None, min_leaf: 1, max_features: Some(4) }, bootstrap: true };
    let mut g = c.benchmark_group("forest_32_trees");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| fit_forest(&ds, p, 3, exec)));
    }
    g.finish();
}

fn cross_validation(c: &mut Criterion) {
    let ds = blobs(600, 18);
    let spec = ModelSpec::Gb(GbParams { n_estimators: 20, ..GbParams::default() });
    let mut g = c.benchmark_group("cv_10_fold_gb");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cross_validate(&ds, &spec, CvPlan { folds: 10, seed: 4 }, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, simulation, extraction, forest, cross_validation);
criterion_main!(benches);
