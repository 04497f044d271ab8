//! Sampled flat spacetime: graph distances against the exact interval, time
//! functions built from a slice, and ladder checks.

use causal_lab::achronal::{
    build_splitting_surface, build_splitting_surface_seeded, chronological_future, default_divergence_threshold,
    detect_divergent_chains, is_achronal, split,
};
use causal_lab::distance::{check_reverse_triangle_set, distance_to_set, longest_path_distance, LadderSpec};
use causal_lab::graph::{build_causal_dag, DagOptions};
use causal_lab::sampling::sample_points;
use causal_lab::timefn::{
    check_bound_inequality, check_reverse_lipschitz, check_steepness, continuity_report, level_set,
    strictly_increasing_on_timelike_edges, time_function_from_surface, BoundStatus, LevelRule,
};
use causal_lab::{CausalGraph, CausalPath, MetricModel, NodeId, NodeSet, SamplingSpec, SetTag, Window};

fn grid(step: f64, lo: [f64; 2], hi: [f64; 2]) -> CausalGraph {
    let model = MetricModel::minkowski();
    let window = Window::new(lo, hi);
    let spec = SamplingSpec::grid(step, window);
    let mut g = build_causal_dag(&model, sample_points(&model, &spec).unwrap(), &DagOptions::default().with_window(window))
        .unwrap();
    g.set_sampling(&spec);
    g
}

fn sprinkle(density: f64, lo: [f64; 2], hi: [f64; 2], seed: u64) -> CausalGraph {
    let model = MetricModel::minkowski();
    let window = Window::new(lo, hi);
    let spec = SamplingSpec::sprinkle(density, window, seed);
    build_causal_dag(&model, sample_points(&model, &spec).unwrap(), &DagOptions::default().with_window(window)).unwrap()
}

fn interval(p: [f64; 2], q: [f64; 2]) -> Option<f64> {
    let (dt, dx) = (q[0] - p[0], q[1] - p[1]);
    (dt >= dx.abs()).then(|| (dt * dt - dx * dx).sqrt())
}

fn slice(g: &CausalGraph, t: f64) -> Vec<NodeId> {
    (0..g.len()).filter(|&v| (g.point(v)[0] - t).abs() < 1e-9).collect()
}

/// Surface grown from the slice at `t`, the way a Cauchy slice is seeded.
fn slice_surface(g: &CausalGraph, t: f64) -> NodeSet {
    let s = NodeSet::new(slice(g, t), SetTag::Generic);
    let f0 = chronological_future(g, &s).unwrap();
    let result = build_splitting_surface_seeded(g, &f0, &s).unwrap();
    assert!(result.converged && result.residue.is_empty());
    result.surface
}

#[test]
fn graph_distance_never_exceeds_the_interval() {
    let g = sprinkle(150.0, [0.0, -1.0], [2.0, 1.0], 11);
    for p in (0..g.len()).step_by(7) {
        for q in 0..g.len() {
            let d = longest_path_distance(&g, p, q).unwrap();
            match interval(g.point(p), g.point(q)) {
                Some(tau) => assert!(d <= tau + 1e-9, "{p}->{q}: {d} > {tau}"),
                None => assert_eq!(d, 0.0),
            }
        }
    }
}

#[test]
fn vertical_grid_pairs_are_exact() {
    let g = grid(0.1, [0.0, -1.0], [2.0, 1.0]);
    let p = g.nearest_node([0.0, 0.0]);
    for t in [0.3, 1.0, 2.0] {
        let q = g.nearest_node([t, 0.0]);
        assert!((longest_path_distance(&g, p, q).unwrap() - t).abs() < 1e-9);
    }
    // off-axis pairs approach the interval from below
    let q = g.nearest_node([2.0, 1.0]);
    let d = longest_path_distance(&g, p, q).unwrap();
    let tau = 3f64.sqrt();
    assert!(d <= tau && d > 0.95 * tau, "{d}");
}

#[test]
fn distance_from_a_slice_is_elapsed_time() {
    let g = grid(0.1, [0.0, -1.0], [1.5, 1.0]);
    let s = slice(&g, 0.0);
    for (t, x) in [(0.5, 0.0), (1.0, 0.3), (1.5, -0.7)] {
        let v = g.nearest_node([t, x]);
        assert!((distance_to_set(&g, &s, v).unwrap() - t).abs() < 1e-9);
    }
    assert!(check_reverse_triangle_set(&g, &s).unwrap().is_empty());
}

#[test]
fn surfaces_from_a_future_split_the_graph() {
    let g = sprinkle(300.0, [0.0, -1.0], [2.0, 1.0], 3);
    let p = g.nearest_node([0.5, 0.0]);
    let f0 = chronological_future(&g, &NodeSet::new([p], SetTag::Generic)).unwrap();
    let result = build_splitting_surface(&g, &f0).unwrap();
    assert!(result.converged);
    assert!(result.residue.is_empty());
    for pair in result.iterates.windows(2) {
        assert!(pair[0].is_subset(&pair[1]));
    }
    for it in &result.iterates {
        assert!(is_achronal(&g, it).unwrap());
    }
    let parts = split(&g, &result.surface).unwrap();
    assert_eq!(parts.future.len() + parts.past.len() + result.surface.len(), g.len());
}

#[test]
fn time_function_from_a_slice_tracks_coordinate_time() {
    let g = grid(0.05, [-1.0, -1.0], [1.0, 1.0]);
    let surface = slice_surface(&g, 0.0);
    let f = time_function_from_surface(&g, &surface).unwrap();
    for v in 0..g.len() {
        let [t, x] = g.point(v);
        // away from the side walls the value is exact
        if x.abs() + t.abs() < 0.95 {
            assert!((f.value(v) - t).abs() < 1e-9, "f{:?} = {}", g.point(v), f.value(v));
        }
    }
    assert!(check_reverse_lipschitz(&g, &f).unwrap().passes());
    assert!(strictly_increasing_on_timelike_edges(&g, &f));
    let steep = check_steepness(g.model(), &g, &f, 0.1).unwrap();
    assert!(steep.passes(0.95), "{steep:?}");
    let zero = level_set(&g, &f, 0.0, LevelRule::Front).unwrap();
    assert_eq!(zero, surface.clone().with_tag(zero.tag));
}

#[test]
fn continuity_of_a_slice_time_function() {
    let g = grid(0.1, [-1.0, -1.0], [1.0, 1.0]);
    let f = time_function_from_surface(&g, &slice_surface(&g, 0.0)).unwrap();
    let report = continuity_report(&g, &f, 5).unwrap();
    assert_eq!(report.top.len(), 5);
    assert!(report.top.windows(2).all(|w| w[0].normalized >= w[1].normalized));
    // |Δt| / |Δx| is at most 1 between grid neighbours
    assert!(report.max_jump <= 1.0 + 1e-9, "{}", report.max_jump);
}

#[test]
fn bound_inequality_along_a_timelike_path() {
    let g = grid(0.05, [-1.0, -1.0], [1.0, 1.0]);
    let f = time_function_from_surface(&g, &slice_surface(&g, 0.0)).unwrap();
    let path = CausalPath::new(vec![[-0.4, 0.0], [-0.1, 0.1], [0.2, 0.1], [0.4, -0.05]]);
    let check = check_bound_inequality(g.model(), &g, &f, &path, 0.05).unwrap();
    assert_eq!(check.status, BoundStatus::Holds, "{check:?}");
    assert!((check.increase - 0.8).abs() < 1e-9);
    assert!(check.length < check.increase);
}

#[test]
fn flat_ladder_has_no_divergent_chains() {
    let ladder = LadderSpec::minkowski_control(vec![0.2, 0.1, 0.05]).build().unwrap();
    let threshold = default_divergence_threshold(&ladder).unwrap();
    assert!(detect_divergent_chains(&ladder, threshold).unwrap().is_empty());
}
