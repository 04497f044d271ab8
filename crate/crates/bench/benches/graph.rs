use causal_lab::distance::{longest_path_distance, DistanceTable};
use causal_lab::graph::{build_causal_dag, DagOptions};
use causal_lab::sampling::sample_points;
use causal_lab::timefn::{check_reverse_lipschitz, dual_potential};
use causal_lab::{CausalGraph, MetricModel, SamplingSpec, Window};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn sprinkled(density: f64) -> CausalGraph {
    let model = MetricModel::minkowski();
    let window = Window::new([0.0, 0.0], [1.0, 1.0]);
    let points = sample_points(&model, &SamplingSpec::sprinkle(density, window, 1)).unwrap();
    build_causal_dag(&model, points, &DagOptions::default().with_window(window)).unwrap()
}

fn graph_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_causal_dag");
    for density in [200.0, 1000.0, 4000.0] {
        let model = MetricModel::minkowski();
        let window = Window::new([0.0, 0.0], [1.0, 1.0]);
        let points = sample_points(&model, &SamplingSpec::sprinkle(density, window, 1)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(points.len()), &points, |b, pts| {
            b.iter(|| build_causal_dag(&model, pts.clone(), &DagOptions::default().with_window(window)).unwrap())
        });
    }
    group.finish();

    let singular = MetricModel::singular_wedge_truncated(0.05);
    let window = Window::new([-0.9, -1.05], [0.9, 1.05]);
    let points = sample_points(&singular, &SamplingSpec::sprinkle(30.0, window, 1)).unwrap();
    c.bench_function("build_causal_dag/singular_wedge", |b| {
        b.iter(|| build_causal_dag(&singular, points.clone(), &DagOptions::default().with_horizon(3.0).with_window(window)).unwrap())
    });
}

fn longest_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("longest_path");
    for density in [200.0, 1000.0, 4000.0] {
        let g = sprinkled(density);
        let (p, q) = (g.nearest_node([0.0, 0.5]), g.nearest_node([1.0, 0.5]));
        group.bench_with_input(BenchmarkId::new("single_pair", g.len()), &g, |b, g| {
            b.iter(|| longest_path_distance(g, p, q).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dual_potential", g.len()), &g, |b, g| {
            b.iter(|| dual_potential(g, p, q).unwrap())
        });
    }
    let g = sprinkled(300.0);
    group.bench_function(BenchmarkId::new("all_pairs", g.len()), |b| b.iter(|| DistanceTable::all_pairs(&g).unwrap()));
    group.finish();
}

fn reverse_lipschitz(c: &mut Criterion) {
    let g = sprinkled(300.0);
    let (p, q) = (g.nearest_node([0.0, 0.5]), g.nearest_node([1.0, 0.5]));
    let (f, _) = dual_potential(&g, p, q).unwrap();
    c.bench_function("check_reverse_lipschitz/300", |b| b.iter(|| check_reverse_lipschitz(&g, &f).unwrap()));
}

criterion_group!(benches, graph_build, longest_paths, reverse_lipschitz);
criterion_main!(benches);
