//! Analytic 1+1 dimensional spacetimes.
//!
//! Every model fixes its own coordinate convention; `time_axis` names the
//! coordinate that increases along the time orientation:
//!
//! | id               | coordinates | time axis | removed set                          |
//! |------------------|-------------|-----------|--------------------------------------|
//! | `minkowski2d`    | `(t, x)`    | 0         | none                                 |
//! | `slit_minkowski` | `(x, t)`    | 1         | `{t = 0, -a <= x <= a}`              |
//! | `singular_wedge` | `(x, y)`    | 1         | `x >= 2|y|`, `x <= -1`               |
//! | `slit_cylinder`  | `(t, s)`    | 0         | two half lines at `t = ±pi/4`        |
//!
//! The cylinder's `t` is periodic with period `2 pi`; points are stored in
//! `[-pi, pi)` and segments are drawn in the covering plane (see
//! [`MetricModel::lifts`]).

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];
pub type Vector = [f64; 2];

/// Relative tolerance below which `g(v, v)` counts as null.
pub const NULL_TOLERANCE: f64 = 1e-10;

/// Symmetric 2x2 tensor in coordinate components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor(pub [[f64; 2]; 2]);

impl Tensor {
    pub fn diag(a: f64, b: f64) -> Self {
        Tensor([[a, 0.0], [0.0, b]])
    }

    pub fn contract(&self, u: Vector, v: Vector) -> f64 {
        let m = &self.0;
        u[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + u[1] * (m[1][0] * v[0] + m[1][1] * v[1])
    }

    /// Index lowering: `g(v, .)`.
    pub fn lower(&self, v: Vector) -> Vector {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Result<Tensor> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Numeric("degenerate metric".into()));
        }
        let m = &self.0;
        Ok(Tensor([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = &self.0;
        let half_trace = 0.5 * (m[0][0] + m[1][1]);
        let half_diff = 0.5 * (m[0][0] - m[1][1]);
        let r = (half_diff * half_diff + m[0][1] * m[1][0]).sqrt();
        [half_trace - r, half_trace + r]
    }

    /// One negative and one positive eigenvalue.
    pub fn is_lorentzian(&self) -> bool {
        self.det() < 0.0
    }

    /// Scale used for the relative null test of `g(v, v)`.
    fn magnitude(&self, v: Vector) -> f64 {
        let m = &self.0;
        (m[0][0] * v[0] * v[0]).abs()
            + (m[1][1] * v[1] * v[1]).abs()
            + 2.0 * (m[0][1] * v[0] * v[1]).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalCharacter {
    TimelikeFuture,
    TimelikePast,
    NullFuture,
    NullPast,
    Spacelike,
    Zero,
}

impl CausalCharacter {
    pub fn is_future_causal(self) -> bool {
        matches!(self, Self::TimelikeFuture | Self::NullFuture)
    }

    pub fn is_past_causal(self) -> bool {
        matches!(self, Self::TimelikePast | Self::NullPast)
    }

    pub fn is_causal(self) -> bool {
        self.is_future_causal() || self.is_past_causal()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum ModelKind {
    #[serde(rename = "minkowski2d")]
    Minkowski,
    #[serde(rename = "slit_minkowski")]
    SlitMinkowski {
        #[serde(default = "one")]
        slit_half_width: f64,
    },
    /// `ds^2 = (dx^2 - dy^2) / (x^2 + y^2)` on `{2|y| > x, x > -1}`. A
    /// positive `truncation` additionally removes the strip `|y| < truncation`
    /// (used by refinement ladders approaching the singular point).
    #[serde(rename = "singular_wedge")]
    SingularWedge {
        #[serde(default)]
        truncation: f64,
    },
    #[serde(rename = "slit_cylinder")]
    SlitCylinder,
}

fn one() -> f64 {
    1.0
}

/// An analytic spacetime, optionally with widened light cones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricModel {
    #[serde(flatten)]
    pub kind: ModelKind,
    /// Cone widening `delta` applied as `g - delta * T♭⊗T♭ / |g(T,T)|`.
    #[serde(default)]
    pub widening: f64,
}

pub const MODEL_IDS: [&str; 4] = ["minkowski2d", "slit_minkowski", "singular_wedge", "slit_cylinder"];

impl MetricModel {
    pub fn new(kind: ModelKind) -> Self {
        MetricModel { kind, widening: 0.0 }
    }

    pub fn minkowski() -> Self {
        Self::new(ModelKind::Minkowski)
    }

    pub fn slit_minkowski() -> Self {
        Self::new(ModelKind::SlitMinkowski { slit_half_width: 1.0 })
    }

    pub fn singular_wedge() -> Self {
        Self::new(ModelKind::SingularWedge { truncation: 0.0 })
    }

    pub fn singular_wedge_truncated(truncation: f64) -> Self {
        Self::new(ModelKind::SingularWedge { truncation })
    }

    pub fn slit_cylinder() -> Self {
        Self::new(ModelKind::SlitCylinder)
    }

    /// Model with default parameters for a config id.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "minkowski2d" => Ok(Self::minkowski()),
            "slit_minkowski" => Ok(Self::slit_minkowski()),
            "singular_wedge" => Ok(Self::singular_wedge()),
            "slit_cylinder" => Ok(Self::slit_cylinder()),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ModelKind::Minkowski => "minkowski2d",
            ModelKind::SlitMinkowski { .. } => "slit_minkowski",
            ModelKind::SingularWedge { .. } => "singular_wedge",
            ModelKind::SlitCylinder => "slit_cylinder",
        }
    }

    pub fn time_axis(&self) -> usize {
        match self.kind {
            ModelKind::Minkowski | ModelKind::SlitCylinder => 0,
            ModelKind::SlitMinkowski { .. } | ModelKind::SingularWedge { .. } => 1,
        }
    }

    pub fn space_axis(&self) -> usize {
        1 - self.time_axis()
    }

    /// Point with the given time and space coordinates in this model's order.
    pub fn point(&self, time: f64, space: f64) -> Point {
        let mut p = [0.0; 2];
        p[self.time_axis()] = time;
        p[self.space_axis()] = space;
        p
    }

    pub fn time_of(&self, p: Point) -> f64 {
        p[self.time_axis()]
    }

    /// True when the metric components do not depend on the point.
    pub fn is_flat(&self) -> bool {
        !matches!(self.kind, ModelKind::SingularWedge { .. })
    }

    /// Period of the time coordinate, if it is identified.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            ModelKind::SlitCylinder => Some(2.0 * PI),
            _ => None,
        }
    }

    /// Maps a covering-space point to the fundamental domain.
    pub fn normalize(&self, p: Point) -> Point {
        match self.period() {
            Some(period) => {
                let axis = self.time_axis();
                let mut q = p;
                q[axis] = (p[axis] + 0.5 * period).rem_euclid(period) - 0.5 * period;
                q
            }
            None => p,
        }
    }

    /// Candidate covering-space images of `q` to join with `p` by a straight
    /// segment. Non-periodic models return `q` itself.
    pub fn lifts(&self, p: Point, q: Point) -> Vec<Point> {
        match self.period() {
            Some(period) => {
                let axis = self.time_axis();
                let base = self.normalize(q);
                let shift = ((p[axis] - base[axis]) / period).round();
                (-1..=1)
                    .map(|k| {
                        let mut image = base;
                        image[axis] += (shift + f64::from(k)) * period;
                        image
                    })
                    .collect()
            }
            None => vec![q],
        }
    }

    /// Coordinate distance, minimised over lifts on periodic models.
    pub fn coordinate_distance(&self, p: Point, q: Point) -> f64 {
        self.lifts(p, q)
            .into_iter()
            .map(|l| (l[0] - p[0]).hypot(l[1] - p[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn domain_contains(&self, p: Point) -> bool {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return false;
        }
        match self.kind {
            ModelKind::Minkowski => true,
            ModelKind::SlitMinkowski { slit_half_width } => {
                let (x, t) = (p[0], p[1]);
                !(t == 0.0 && x.abs() <= slit_half_width)
            }
            ModelKind::SingularWedge { truncation } => {
                let (x, y) = (p[0], p[1]);
                2.0 * y.abs() > x && x > -1.0 && y.abs() >= truncation
            }
            ModelKind::SlitCylinder => {
                let q = self.normalize(p);
                let (t, s) = (q[0], q[1]);
                !((t == FRAC_PI_4 && s <= FRAC_PI_4) || (t == -FRAC_PI_4 && s >= -FRAC_PI_4))
            }
        }
    }

    fn check_domain(&self, p: Point) -> Result<()> {
        if self.domain_contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(p[0], p[1]))
        }
    }

    fn base_metric(&self, p: Point) -> Tensor {
        match self.kind {
            ModelKind::Minkowski | ModelKind::SlitCylinder => Tensor::diag(-1.0, 1.0),
            ModelKind::SlitMinkowski { .. } => Tensor::diag(1.0, -1.0),
            ModelKind::SingularWedge { .. } => {
                let conformal = 1.0 / (p[0] * p[0] + p[1] * p[1]);
                Tensor::diag(conformal, -conformal)
            }
        }
    }

    /// Metric tensor without the domain check; callers guarantee `p` is valid.
    pub(crate) fn metric_unchecked(&self, p: Point) -> Tensor {
        let g = self.base_metric(p);
        if self.widening == 0.0 {
            return g;
        }
        let t = self.time_orientation_at(p);
        let flat = g.lower(t);
        let norm = g.contract(t, t).abs();
        let mut out = g.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry -= self.widening * flat[i] * flat[j] / norm;
            }
        }
        Tensor(out)
    }

    pub fn metric_at(&self, p: Point) -> Result<Tensor> {
        self.check_domain(p)?;
        Ok(self.metric_unchecked(p))
    }

    /// Future-pointing timelike vector field `T`.
    pub fn time_orientation_at(&self, _p: Point) -> Vector {
        let mut v = [0.0; 2];
        v[self.time_axis()] = 1.0;
        v
    }

    /// `sqrt(-det g)`.
    pub fn volume_element(&self, p: Point) -> Result<f64> {
        Ok((-self.metric_at(p)?.det()).sqrt())
    }

    /// Upper bound of the volume element over `[lo, hi]`, used as the
    /// thinning envelope when sprinkling.
    pub fn volume_element_bound(&self, lo: Point, hi: Point) -> Result<f64> {
        let widen = (1.0 + self.widening).sqrt();
        match self.kind {
            ModelKind::SingularWedge { truncation } => {
                let dx = if lo[0] > 0.0 { lo[0] } else if hi[0] < 0.0 { -hi[0] } else { 0.0 };
                let dy = if lo[1] > 0.0 { lo[1] } else if hi[1] < 0.0 { -hi[1] } else { 0.0 };
                let r_min = dx.hypot(dy).max(truncation);
                if r_min <= 0.0 {
                    return Err(Error::Sampling(
                        "window touches the singular point; set a truncation".into(),
                    ));
                }
                Ok(widen / (r_min * r_min))
            }
            _ => Ok(widen),
        }
    }

    pub fn causal_character(&self, p: Point, v: Vector) -> Result<CausalCharacter> {
        self.check_domain(p)?;
        Ok(self.classify(p, v))
    }

    pub(crate) fn classify(&self, p: Point, v: Vector) -> CausalCharacter {
        if v[0] == 0.0 && v[1] == 0.0 {
            return CausalCharacter::Zero;
        }
        let g = self.metric_unchecked(p);
        let norm = g.contract(v, v);
        let scale = g.magnitude(v);
        let future = g.contract(self.time_orientation_at(p), v) < 0.0;
        if norm.abs() <= NULL_TOLERANCE * scale {
            if future {
                CausalCharacter::NullFuture
            } else {
                CausalCharacter::NullPast
            }
        } else if norm < 0.0 {
            if future {
                CausalCharacter::TimelikeFuture
            } else {
                CausalCharacter::TimelikePast
            }
        } else {
            CausalCharacter::Spacelike
        }
    }

    /// Whether the straight covering-space segment `p -> q` avoids every
    /// removed set. Endpoints are assumed to lie in the domain.
    pub fn segment_visible(&self, p: Point, q: Point) -> bool {
        match self.kind {
            ModelKind::Minkowski => true,
            ModelKind::SlitMinkowski { slit_half_width } => {
                // (x, t): horizontal cut at t = 0
                !segment_hits_cut(p, q, 1, 0.0, |x| x.abs() <= slit_half_width)
            }
            ModelKind::SingularWedge { truncation } => {
                if truncation > 0.0 && p[1] * q[1] < 0.0 {
                    return false;
                }
                !segment_meets_excluded_wedge(p, q)
            }
            ModelKind::SlitCylinder => {
                let period = 2.0 * PI;
                let (t_lo, t_hi) = (p[0].min(q[0]), p[0].max(q[0]));
                let first = ((t_lo - FRAC_PI_4) / period).floor() as i64 - 1;
                let last = ((t_hi + FRAC_PI_4) / period).ceil() as i64 + 1;
                for m in first..=last {
                    let shift = m as f64 * period;
                    if segment_hits_cut(p, q, 0, FRAC_PI_4 + shift, |s| s <= FRAC_PI_4) {
                        return false;
                    }
                    if segment_hits_cut(p, q, 0, -FRAC_PI_4 + shift, |s| s >= -FRAC_PI_4) {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Straight segment accepted as a causal edge: visible, and causal-future
    /// at `samples` evenly spaced interior points.
    pub fn segment_future_causal(&self, p: Point, q: Point, samples: usize) -> bool {
        let v = [q[0] - p[0], q[1] - p[1]];
        if v == [0.0, 0.0] || !self.segment_visible(p, q) {
            return false;
        }
        let samples = if self.is_flat() { 1 } else { samples.max(1) };
        (0..samples).all(|k| {
            let s = (k as f64 + 0.5) / samples as f64;
            let m = [p[0] + s * v[0], p[1] + s * v[1]];
            self.classify(m, v).is_future_causal()
        })
    }

    /// Proper time of the straight segment by the composite midpoint rule.
    /// Null segments return exactly zero.
    pub(crate) fn segment_length(&self, p: Point, q: Point, subdivisions: usize) -> f64 {
        let v = [q[0] - p[0], q[1] - p[1]];
        let n = if self.is_flat() { 1 } else { subdivisions.max(1) };
        let mut total = 0.0;
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            let m = [p[0] + s * v[0], p[1] + s * v[1]];
            let g = self.metric_unchecked(m);
            let norm = g.contract(v, v);
            if norm < -NULL_TOLERANCE * g.magnitude(v) {
                total += (-norm).sqrt();
            }
        }
        total / n as f64
    }

    /// Length `L = ∫ sqrt(-g(γ', γ'))` of a piecewise straight causal path.
    /// Segments may be future- or past-directed, so reversing a path leaves
    /// its length unchanged.
    pub fn curve_length(&self, path: &CausalPath, subdivisions: usize) -> Result<f64> {
        if subdivisions == 0 {
            return Err(Error::Argument("subdivisions must be positive".into()));
        }
        for &p in &path.vertices {
            self.check_domain(p)?;
        }
        let mut total = 0.0;
        for (index, pair) in path.vertices.windows(2).enumerate() {
            let (p, q) = (pair[0], pair[1]);
            if !self.segment_visible(p, q) {
                let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                return Err(Error::Domain(mid[0], mid[1]));
            }
            let v = [q[0] - p[0], q[1] - p[1]];
            let samples = if self.is_flat() { 1 } else { 8 };
            let characters: Vec<_> = (0..samples)
                .map(|k| {
                    let s = (k as f64 + 0.5) / samples as f64;
                    self.classify([p[0] + s * v[0], p[1] + s * v[1]], v)
                })
                .collect();
            let future = characters.iter().all(|c| c.is_future_causal());
            let past = characters.iter().all(|c| c.is_past_causal());
            if !(future || past) {
                return Err(Error::Causality { index });
            }
            total += self.segment_length(p, q, subdivisions);
        }
        Ok(total)
    }

    /// Steep frame at `p`: `e_0 = w_0` and `e_i = (1 - eps) w_i + w_0` from a
    /// Gram–Schmidt orthonormal frame `w` of the coordinate basis.
    pub fn build_steep_frame(&self, p: Point, spec: FrameSpec) -> Result<Vec<Vector>> {
        let g = self.metric_at(p)?;
        let t = self.time_orientation_at(p);
        let tt = g.contract(t, t);
        if !(tt < 0.0) {
            return Err(Error::Numeric("time orientation is not timelike".into()));
        }
        let w0 = scale(t, 1.0 / (-tt).sqrt());
        let mut basis = [0.0; 2];
        basis[self.space_axis()] = 1.0;
        // g(w0, w0) = -1, so removing the w0 component adds +g(v, w0) w0.
        let along = g.contract(basis, w0);
        let w = [basis[0] + along * w0[0], basis[1] + along * w0[1]];
        let ww = g.contract(w, w);
        if !(ww > 0.0) || !ww.is_finite() {
            return Err(Error::Numeric("Gram–Schmidt produced a non-spacelike vector".into()));
        }
        let w1 = scale(w, 1.0 / ww.sqrt());
        let k = 1.0 - spec.epsilon();
        Ok(vec![w0, [k * w1[0] + w0[0], k * w1[1] + w0[1]]])
    }
}

fn scale(v: Vector, s: f64) -> Vector {
    [v[0] * s, v[1] * s]
}

/// Does segment `p q` meet the line `coord[axis] = level` at a point whose
/// other coordinate satisfies `blocked`? Segments lying along the line are
/// checked at both endpoints and at the clipped overlap.
fn segment_hits_cut(p: Point, q: Point, axis: usize, level: f64, blocked: impl Fn(f64) -> bool) -> bool {
    let other = 1 - axis;
    let (a, b) = (p[axis] - level, q[axis] - level);
    if a == 0.0 && b == 0.0 {
        let (lo, hi) = (p[other].min(q[other]), p[other].max(q[other]));
        return blocked(lo) || blocked(hi) || blocked(0.5 * (lo + hi)) || (lo < 0.0 && hi > 0.0 && blocked(0.0));
    }
    if a * b > 0.0 {
        return false;
    }
    let s = a / (a - b);
    let crossing = p[other] + s * (q[other] - p[other]);
    blocked(crossing)
}

/// Does segment `p q` meet `{x >= 2|y|}`, the convex wedge removed from the
/// singular model?
fn segment_meets_excluded_wedge(p: Point, q: Point) -> bool {
    // x - 2y >= 0 and x + 2y >= 0 along p + s (q - p), s in [0, 1]
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 1.0;
    for sign in [-2.0, 2.0] {
        let a = p[0] + sign * p[1];
        let b = (q[0] + sign * q[1]) - a;
        // a + s b >= 0
        if b == 0.0 {
            if a < 0.0 {
                return false;
            }
        } else if b > 0.0 {
            lo = lo.max(-a / b);
        } else {
            hi = hi.min(-a / b);
        }
    }
    lo <= hi
}

/// Piecewise straight curve given by its vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalPath {
    pub vertices: Vec<Point>,
}

impl CausalPath {
    pub fn new(vertices: Vec<Point>) -> Self {
        CausalPath { vertices }
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        CausalPath { vertices }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    epsilon: f64,
}

impl FrameSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon < 1.0 {
            Ok(FrameSpec { epsilon })
        } else {
            Err(Error::Argument(format!("frame epsilon {epsilon} must lie in (0, 1)")))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Returns `model` with light cones widened by `delta >= 0`. Widening
/// composes: `delta1` then `delta2` equals `delta1 + delta2 + delta1 delta2`.
pub fn widen_cones(model: &MetricModel, delta: f64) -> Result<MetricModel> {
    if !(delta >= 0.0) {
        return Err(Error::Argument(format!("widening {delta} must be non-negative")));
    }
    let mut widened = model.clone();
    widened.widening = model.widening + delta + model.widening * delta;
    Ok(widened)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn minkowski_metric_is_constant() {
        let m = MetricModel::minkowski();
        assert_eq!(m.metric_at([3.0, -7.0]).unwrap(), Tensor::diag(-1.0, 1.0));
    }

    #[test]
    fn singular_metric_values() {
        let m = MetricModel::singular_wedge();
        let g = m.metric_at([0.0, 1.0]).unwrap();
        assert_eq!(g, Tensor::diag(1.0, -1.0));
        let g = m.metric_at([0.0, 2.0]).unwrap();
        assert_eq!(g, Tensor::diag(0.25, -0.25));
    }

    #[test]
    fn singular_domain_is_open() {
        let m = MetricModel::singular_wedge();
        assert!(m.metric_at([0.0, 0.0]).is_err());
        assert!(!m.domain_contains([1.0, 0.5])); // 2|y| = x
        assert!(!m.domain_contains([-1.0, 0.0]));
        assert!(m.domain_contains([-0.5, 0.0]));
        assert!(m.domain_contains([0.99, 0.5]));
    }

    #[test]
    fn characters() {
        let m = MetricModel::minkowski();
        assert_eq!(m.causal_character([0.0, 0.0], [1.0, 0.0]).unwrap(), CausalCharacter::TimelikeFuture);
        assert_eq!(m.causal_character([0.0, 0.0], [1.0, 1.0]).unwrap(), CausalCharacter::NullFuture);
        assert_eq!(m.causal_character([0.0, 0.0], [-1.0, 1.0]).unwrap(), CausalCharacter::NullPast);
        assert_eq!(m.causal_character([0.0, 0.0], [0.5, 1.0]).unwrap(), CausalCharacter::Spacelike);
        assert_eq!(m.causal_character([0.0, 0.0], [0.0, 0.0]).unwrap(), CausalCharacter::Zero);
        let c = MetricModel::slit_cylinder();
        assert_eq!(c.causal_character([0.0, 0.0], [1.0, 0.0]).unwrap(), CausalCharacter::TimelikeFuture);
        let s = MetricModel::singular_wedge();
        assert_eq!(s.causal_character([0.0, 1.0], [0.0, -1.0]).unwrap(), CausalCharacter::TimelikePast);
        assert!(matches!(s.causal_character([0.0, 0.0], [0.0, 1.0]), Err(Error::Domain(..))));
    }

    #[test]
    fn unit_geodesic_length() {
        let m = MetricModel::minkowski();
        let path = CausalPath::new(vec![[0.0, 0.0], [1.0, 0.0]]);
        assert!(close(m.curve_length(&path, 64).unwrap(), 1.0, EPS));
    }

    #[test]
    fn two_segment_slit_path() {
        // (x, t) coordinates; oracle: per-segment sqrt(dt^2 - dx^2)
        let m = MetricModel::slit_minkowski();
        let path = CausalPath::new(vec![[0.0, -2.0], [1.01, 0.0], [0.0, 2.0]]);
        let oracle = 2.0 * (4.0f64 - 1.01 * 1.01).sqrt();
        assert!(close(m.curve_length(&path, 64).unwrap(), oracle, EPS));
        assert!(close(oracle, 3.4524, 1e-4));
        // straight through the slit is not visible
        let through = CausalPath::new(vec![[0.0, -2.0], [0.0, 2.0]]);
        assert!(matches!(m.curve_length(&through, 64), Err(Error::Domain(..))));
    }

    #[test]
    fn truncated_axis_length_is_log() {
        // gamma_w(tau) = (0, w (1 - tau)) on tau in [0, 1 - eps]; oracle is
        // ∫ dtau / (1 - tau) = ln(1 / eps).
        let m = MetricModel::singular_wedge();
        for (w, eps) in [(1.0, 0.1), (0.5, 0.05), (2.0, 0.01)] {
            let path = CausalPath::new(vec![[0.0, w], [0.0, w * eps]]);
            let len = m.curve_length(&path, 1 << 14).unwrap();
            let oracle = (1.0f64 / eps).ln();
            assert!(close(len, oracle, 1e-5), "{len} vs {oracle}");
        }
    }

    #[test]
    fn spacelike_segment_rejected() {
        let m = MetricModel::minkowski();
        let path = CausalPath::new(vec![[0.0, 0.0], [1.0, 2.0]]);
        assert!(matches!(m.curve_length(&path, 8), Err(Error::Causality { index: 0 })));
    }

    #[test]
    fn steep_frame_minkowski() {
        let m = MetricModel::minkowski();
        let frame = m.build_steep_frame([0.3, 0.2], FrameSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(frame[0], [1.0, 0.0]);
        assert_eq!(frame[1], [1.0, 0.5]);
        let g = m.metric_at([0.3, 0.2]).unwrap();
        assert!(close(g.contract(frame[1], frame[1]), -0.75, EPS));
        assert!(close(g.contract(frame[0], frame[0]), -1.0, EPS));
    }

    #[test]
    fn steep_frame_singular_gram() {
        let m = MetricModel::singular_wedge();
        let eps = 0.1;
        let frame = m.build_steep_frame([0.0, 1.0], FrameSpec::new(eps).unwrap()).unwrap();
        let g = m.metric_at([0.0, 1.0]).unwrap();
        // direct contraction against the closed forms
        assert!(close(g.contract(frame[0], frame[0]), -1.0, EPS));
        assert!(close(g.contract(frame[0], frame[1]), -1.0, EPS));
        assert!(close(g.contract(frame[1], frame[1]), (1.0 - eps) * (1.0 - eps) - 1.0, EPS));
    }

    #[test]
    fn frame_spec_bounds() {
        assert!(FrameSpec::new(0.0).is_err());
        assert!(FrameSpec::new(1.0).is_err());
        assert!(FrameSpec::new(0.3).is_ok());
    }

    #[test]
    fn slit_visibility() {
        let m = MetricModel::slit_minkowski();
        assert!(!m.segment_visible([0.0, -1.0], [0.0, 1.0]));
        assert!(m.segment_visible([2.0, -1.0], [2.0, 1.0]));
        assert!(!m.segment_visible([1.0, -1.0], [1.0, 1.0]));
        assert!(m.segment_visible([1.0001, -1.0], [1.0001, 1.0]));
        assert!(!m.domain_contains([0.0, 0.0]));
        assert!(MetricModel::minkowski().segment_visible([0.0, -1.0], [0.0, 1.0]));
    }

    #[test]
    fn singular_visibility() {
        let m = MetricModel::singular_wedge();
        // passes through the removed wedge to the right of the origin
        assert!(!m.segment_visible([0.4, -0.5], [0.4, 0.5]));
        // passes left of the origin
        assert!(m.segment_visible([-0.1, -0.5], [-0.1, 0.5]));
        let t = MetricModel::singular_wedge_truncated(0.1);
        assert!(!t.segment_visible([-0.1, -0.5], [-0.1, 0.5]));
        assert!(t.segment_visible([0.0, 0.1], [0.0, 0.5]));
    }

    #[test]
    fn cylinder_half_lines() {
        let c = MetricModel::slit_cylinder();
        // crossing t = pi/4 below s = pi/4 is blocked
        assert!(!c.segment_visible([0.5, 0.0], [1.0, 0.0]));
        // crossing t = pi/4 above the tip is allowed
        assert!(c.segment_visible([0.5, 1.0], [1.0, 1.0]));
        // crossing t = -pi/4 above s = -pi/4 is blocked
        assert!(!c.segment_visible([-1.0, 0.0], [-0.5, 0.0]));
        assert!(c.segment_visible([-1.0, -1.0], [-0.5, -1.0]));
        // the copy at t = pi/4 - 2 pi in the covering is also a cut
        assert!(!c.segment_visible([-5.6, 0.0], [-5.4, 0.0]));
        let p = c.normalize([PI + 0.1, 0.0]);
        assert!(close(p[0], -PI + 0.1, 1e-12));
    }

    #[test]
    fn cylinder_lifts_cross_seam() {
        let c = MetricModel::slit_cylinder();
        let lifts = c.lifts([3.0, 0.0], [-3.0, 0.0]);
        assert!(lifts.iter().any(|l| close(l[0], -3.0 + 2.0 * PI, 1e-12)));
        assert!(close(c.coordinate_distance([3.0, 0.0], [-3.0, 0.0]), 2.0 * PI - 6.0, 1e-12));
    }

    #[test]
    fn widening_identity_and_composition() {
        let m = MetricModel::slit_cylinder();
        assert_eq!(widen_cones(&m, 0.0).unwrap(), m);
        let w = widen_cones(&m, 0.1).unwrap();
        let g = w.metric_at([0.0, 0.0]).unwrap();
        assert!(close(g.0[0][0], -1.1, EPS));
        assert_eq!(g.0[1][1], 1.0);
        // null direction of g is timelike for the widened metric
        assert_eq!(w.classify([0.0, 0.0], [1.0, 1.0]), CausalCharacter::TimelikeFuture);
        let twice = widen_cones(&w, 0.2).unwrap();
        assert!(close(twice.widening, 0.1 + 0.2 + 0.02, EPS));
        assert!(widen_cones(&m, -0.1).is_err());
    }

    #[test]
    fn model_ids_roundtrip() {
        for id in MODEL_IDS {
            let m = MetricModel::from_id(id).unwrap();
            assert_eq!(m.id(), id);
            let json = serde_json::to_string(&m).unwrap();
            let back: MetricModel = serde_json::from_str(&json).unwrap();
            assert_eq!(back, m);
        }
        assert!(MetricModel::from_id("kerr").is_err());
        let parsed: MetricModel = serde_json::from_str(r#"{"id":"slit_minkowski","slit_half_width":2.0}"#).unwrap();
        assert_eq!(parsed.kind, ModelKind::SlitMinkowski { slit_half_width: 2.0 });
    }
}
