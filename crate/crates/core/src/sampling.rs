//! Node sampling: lattices and seeded Poisson sprinklings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricModel, Point};

/// Axis-aligned coordinate rectangle `[lo[0], hi[0]] x [lo[1], hi[1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Point,
    pub hi: Point,
}

impl Window {
    pub fn new(lo: Point, hi: Point) -> Self {
        Window { lo, hi }
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    pub fn is_valid(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
            && self.hi[0] > self.lo[0]
            && self.hi[1] > self.lo[1]
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..2).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SamplingMode {
    /// Lattice `k * step` anchored at the coordinate origin.
    Grid { step: f64 },
    /// Poisson process with intensity `density * sqrt(-det g)`.
    Sprinkle { density: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    #[serde(flatten)]
    pub mode: SamplingMode,
    pub window: Window,
    pub seed: u64,
    /// Extra nodes inserted verbatim (probe points, witnesses).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<Point>,
}

impl SamplingSpec {
    pub fn grid(step: f64, window: Window) -> Self {
        SamplingSpec { mode: SamplingMode::Grid { step }, window, seed: 0, anchors: Vec::new() }
    }

    pub fn sprinkle(density: f64, window: Window, seed: u64) -> Self {
        SamplingSpec { mode: SamplingMode::Sprinkle { density }, window, seed, anchors: Vec::new() }
    }

    pub fn with_anchors(mut self, anchors: Vec<Point>) -> Self {
        self.anchors = anchors;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.window.is_valid() {
            return Err(Error::Argument("degenerate sampling window".into()));
        }
        match self.mode {
            SamplingMode::Grid { step } if !(step > 0.0) => {
                Err(Error::Argument(format!("grid step {step} must be positive")))
            }
            SamplingMode::Sprinkle { density } if !(density > 0.0) => {
                Err(Error::Argument(format!("density {density} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

/// Mean node spacing `sqrt(area / n)`.
pub fn mean_spacing(window: &Window, nodes: usize) -> f64 {
    (window.area() / nodes.max(1) as f64).sqrt()
}

fn lattice(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(move |k| k as f64 * step)
}

pub fn sample_points(model: &MetricModel, spec: &SamplingSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let w = &spec.window;
    let mut points = Vec::new();
    match spec.mode {
        SamplingMode::Grid { step } => {
            for a in lattice(w.lo[0], w.hi[0], step) {
                for b in lattice(w.lo[1], w.hi[1], step) {
                    let p = [a, b];
                    if model.domain_contains(p) {
                        points.push(model.normalize(p));
                    }
                }
            }
        }
        SamplingMode::Sprinkle { density } => {
            let bound = model.volume_element_bound(w.lo, w.hi)?;
            let mean = density * bound * w.area();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let count = if mean > 0.0 {
                Poisson::new(mean)
                    .map_err(|e| Error::Sampling(e.to_string()))?
                    .sample(&mut rng) as usize
            } else {
                0
            };
            for _ in 0..count {
                let p = [rng.gen_range(w.lo[0]..w.hi[0]), rng.gen_range(w.lo[1]..w.hi[1])];
                // draw the thinning variate unconditionally so the stream
                // does not depend on the domain test
                let u: f64 = rng.gen();
                if !model.domain_contains(p) {
                    continue;
                }
                if model.is_flat() || u * bound < model.volume_element(p)? {
                    points.push(model.normalize(p));
                }
            }
        }
    }
    for &a in &spec.anchors {
        if !model.domain_contains(a) {
            return Err(Error::Domain(a[0], a[1]));
        }
        let a = model.normalize(a);
        if !points.contains(&a) {
            points.push(a);
        }
    }
    if points.is_empty() {
        return Err(Error::Sampling(format!("no in-domain points for {}", model.id())));
    }
    Ok(points)
}
