use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use cislunar_core::cnn::{Architecture, CnnParams};
use cislunar_core::dataset::{self, GenerationGrid};
use cislunar_core::dtree::{DecisionTree, TreeParams};
use cislunar_core::{simulate_window, InterferenceModel, InterferenceSpec, LinkBudget, PhaseAngle, RngStream, ScenarioConfig};

fn link_budget(c: &mut Criterion) {
    let cfg = ScenarioConfig::gateway();
    c.bench_function("link_budget/compute", |b| {
        b.iter(|| LinkBudget::compute(black_box(&cfg), PhaseAngle::new(240.0)).unwrap())
    });
}

fn windows(c: &mut Criterion) {
    let cfg = ScenarioConfig::llo();
    let spec = InterferenceSpec::new(InterferenceModel::Model2, -115.0, 0.75).unwrap();
    let mut g = c.benchmark_group("simulate_window");
    for len in [256, 1000] {
        g.bench_function(format!("model2_L{len}"), |b| {
            b.iter(|| simulate_window(&cfg, PhaseAngle::new(240.0), Some(&spec), len, RngStream::new(1, 2)).unwrap())
        });
    }
    g.finish();
}

fn cnn(c: &mut Criterion) {
    let mut g = c.benchmark_group("cnn");
    g.sample_size(10);
    for len in [256, 1000] {
        let arch = Architecture::detector(len);
        let params = CnnParams::init_uniform(arch, 0).unwrap();
        let inputs: Vec<Vec<f64>> = (0..32)
            .map(|i| (0..len).map(|t| ((t * 7 + i * 13) % 17) as f64 / 8.0 - 1.0).collect())
            .collect();
        let xs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
        let labels: Vec<usize> = (0..32).map(|i| i % 2).collect();
        g.bench_function(format!("forward_batch32_L{len}"), |b| b.iter(|| params.predict_proba(&xs).unwrap()));
        g.bench_function(format!("backward_batch32_L{len}"), |b| {
            b.iter_batched(
                || CnnParams::zeros(arch),
                |mut grads| params.backward(&xs, &labels, &mut grads).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

fn dtree(c: &mut Criterion) {
    let grid = GenerationGrid::new(ScenarioConfig::gateway(), InterferenceModel::Model1, 256, 1000);
    let ds = dataset::generate(&grid, 0).unwrap();
    let rows: Vec<&[f64]> = ds.windows.iter().map(|w| w.values.as_slice()).collect();
    let labels: Vec<usize> = ds.windows.iter().map(|w| w.label.class_index()).collect();
    let mut g = c.benchmark_group("dtree");
    g.sample_size(10);
    g.bench_function("fit_1000x256", |b| {
        b.iter(|| DecisionTree::fit(&rows, &labels, TreeParams::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, link_budget, windows, cnn, dtree);
criterion_main!(benches);
