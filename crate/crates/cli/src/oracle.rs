//! Brute-force distance over broken paths `p -> m -> q`.

use causal_lab::{CausalPath, MetricModel, Point, Window};
use rayon::prelude::*;

/// Zoom passes around the best corner after the coarse lattice.
const REFINEMENTS: usize = 8;
const CAUSAL_SAMPLES: usize = 16;

fn admissible(model: &MetricModel, a: Point, b: Point) -> bool {
    model.segment_visible(a, b) && model.segment_future_causal(a, b, CAUSAL_SAMPLES)
}

fn broken_length(model: &MetricModel, p: Point, m: Point, q: Point) -> Option<f64> {
    if !model.domain_contains(m) || !admissible(model, p, m) || !admissible(model, m, q) {
        return None;
    }
    model.curve_length(&CausalPath::new(vec![p, m, q]), 64).ok()
}

fn best_on_lattice(model: &MetricModel, p: Point, q: Point, window: Window, step: f64) -> Option<(f64, Point)> {
    let nx = ((window.hi[0] - window.lo[0]) / step).floor() as usize;
    let ny = ((window.hi[1] - window.lo[1]) / step).floor() as usize;
    (0..=nx)
        .into_par_iter()
        .filter_map(|i| {
            (0..=ny)
                .filter_map(|j| {
                    let m = [window.lo[0] + i as f64 * step, window.lo[1] + j as f64 * step];
                    broken_length(model, p, m, q).map(|l| (l, m))
                })
                .max_by(|a, b| a.0.total_cmp(&b.0))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

/// Supremum of `L(p -> m -> q)` over corners `m` in `window` (and the direct
/// segment), searched on a lattice of `step` and then refined around the best
/// corner. Zero when no admissible broken path exists.
pub fn two_segment_distance(model: &MetricModel, p: Point, q: Point, window: Window, step: f64) -> f64 {
    let direct = if admissible(model, p, q) {
        model.curve_length(&CausalPath::new(vec![p, q]), 64).unwrap_or(0.0)
    } else {
        0.0
    };
    let Some((mut best, mut at)) = best_on_lattice(model, p, q, window, step) else {
        return direct;
    };
    let mut h = step;
    for _ in 0..REFINEMENTS {
        let zoom = Window::new([at[0] - 2.0 * h, at[1] - 2.0 * h], [at[0] + 2.0 * h, at[1] + 2.0 * h]);
        h /= 10.0;
        if let Some((l, m)) = best_on_lattice(model, p, q, zoom, h) {
            if l > best {
                best = l;
                at = m;
            }
        }
    }
    best.max(direct)
}
