//! Generalised time functions, steepness checks and the discrete distance
//! formula.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::achronal::{
    chronological_future, depth, is_hatting, split, ChainDirection, DivergentChain, NodeSet, SetTag,
};
use crate::distance::{sweep_from, sweep_to, DistanceTable, ALL_PAIRS_LIMIT};
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeId};
use crate::metric::{CausalPath, MetricModel, Point, Vector};

/// Minimum proximity neighbours for a gradient fit.
pub const MIN_NEIGHBOURS: usize = 5;
/// A fit is reliable when its RMS residual is at most this fraction of the
/// local oscillation of `f`.
pub const RESIDUAL_RATIO: f64 = 0.05;
pub const STEEPNESS_QUANTILE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// `d(S, .)` / `0` / `-d(., S)`; `corrected` counts nodes of `I^+(S)`
    /// raised above `d(S, x)` by edges jumping over `S`.
    FromSurface { surface: Vec<NodeId>, corrected: usize },
    DualPotential { p: NodeId, q: NodeId, value: f64 },
    Analytic { formula: String },
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Self {
        ScalarField { values, provenance }
    }

    pub fn constant(graph: &CausalGraph, c: f64) -> Self {
        Self::new(vec![c; graph.len()], Provenance::Analytic { formula: format!("{c}") })
    }

    /// Evaluates `formula` at every node.
    pub fn analytic(graph: &CausalGraph, name: &str, formula: impl Fn(Point) -> f64) -> Self {
        Self::new(graph.points().iter().map(|&p| formula(p)).collect(), Provenance::Analytic { formula: name.into() })
    }

    /// `c` times the model's time coordinate.
    pub fn scaled_time(graph: &CausalGraph, c: f64) -> Self {
        let model = graph.model().clone();
        Self::analytic(graph, &format!("{c}*time"), move |p| c * model.time_of(p))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: NodeId) -> f64 {
        self.values[v]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.values.iter().map(|v| c * v).collect(), Provenance::External)
    }

    pub fn check_len(&self, graph: &CausalGraph) -> Result<()> {
        if self.len() == graph.len() {
            Ok(())
        } else {
            Err(Error::Argument(format!("field has {} values, graph has {} nodes", self.len(), graph.len())))
        }
    }

    /// `{node_id: value}`
    pub fn to_map(&self) -> BTreeMap<NodeId, f64> {
        self.values.iter().copied().enumerate().collect()
    }

    pub fn from_map(map: &BTreeMap<NodeId, f64>, nodes: usize) -> Result<Self> {
        let values = (0..nodes)
            .map(|v| map.get(&v).copied().ok_or_else(|| Error::Argument(format!("field has no value for node {v}"))))
            .collect::<Result<Vec<f64>>>()?;
        if map.len() != nodes {
            return Err(Error::Argument("field has values for unknown nodes".into()));
        }
        Ok(Self::new(values, Provenance::External))
    }
}

/// `f = d(S,x)` on `I^+(S)`, `0` on `S`, `-d(x,S)` on `I^-(S)`.
///
/// On `I^+(S)` the value is the forward sweep `max_u f(u) + w(u,x)`, which
/// is `d(S,x)` except where an edge jumps from `I^-(S)` straight into
/// `I^+(S)`; there it is raised just enough to keep every edge steep.
pub fn time_function_from_surface(graph: &CausalGraph, surface: &NodeSet) -> Result<ScalarField> {
    let report = split(graph, surface)?;
    if !report.residue.is_empty() {
        return Err(Error::Split(report.residue.len()));
    }
    let to_s = sweep_to(graph, surface.nodes())?;
    let from_s = sweep_from(graph, surface.nodes())?;
    let n = graph.len();
    let mut f = vec![0.0; n];
    for v in 0..n {
        if report.past.contains(v) {
            f[v] = -to_s[v];
        }
    }
    let mut corrected = 0;
    for &v in graph.topo_order()? {
        if !report.future.contains(v) {
            continue;
        }
        let best = graph.in_edges(v).map(|e| f[e.from] + e.weight).fold(f64::NEG_INFINITY, f64::max);
        if best > from_s[v] {
            corrected += 1;
        }
        f[v] = best;
    }
    Ok(ScalarField::new(f, Provenance::FromSurface { surface: surface.nodes().to_vec(), corrected }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzViolation {
    pub x: NodeId,
    pub y: NodeId,
    pub increase: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseLipschitzReport {
    /// `f(v) - f(u) < w_uv` on a causal edge.
    pub edge: Vec<LipschitzViolation>,
    /// `f(y) - f(x) < d(x,y)` for `y` in `J^+(x)`.
    pub pair: Vec<LipschitzViolation>,
    /// The subset of `pair` with `d(x,y) > 0`.
    pub chronological: usize,
    /// Pairs examined; every related pair unless the graph exceeds the
    /// all-pairs limit, then those from a strided set of sources.
    pub pairs_checked: usize,
}

impl ReverseLipschitzReport {
    pub fn edge_steep(&self) -> bool {
        self.edge.is_empty()
    }

    pub fn pair_steep(&self) -> bool {
        self.pair.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.edge_steep() && self.pair_steep()
    }
}

pub fn edge_violations(graph: &CausalGraph, f: &ScalarField) -> Vec<LipschitzViolation> {
    graph
        .edges()
        .iter()
        .filter(|e| f.values[e.to] - f.values[e.from] < e.weight)
        .map(|e| LipschitzViolation { x: e.from, y: e.to, increase: f.values[e.to] - f.values[e.from], distance: e.weight })
        .collect()
}

/// Both forms of the reverse-Lipschitz condition `f(y) - f(x) >= d(x,y)`.
pub fn check_reverse_lipschitz(graph: &CausalGraph, f: &ScalarField) -> Result<ReverseLipschitzReport> {
    let n = graph.len();
    let stride = n.div_ceil(ALL_PAIRS_LIMIT).max(1);
    let sources: Vec<NodeId> = (0..n).step_by(stride).collect();
    check_reverse_lipschitz_with(graph, &DistanceTable::for_sources(graph, &sources)?, f)
}

/// As [`check_reverse_lipschitz`], with pairs taken from the sources of a
/// precomputed table of the same graph.
pub fn check_reverse_lipschitz_with(
    graph: &CausalGraph,
    table: &DistanceTable,
    f: &ScalarField,
) -> Result<ReverseLipschitzReport> {
    f.check_len(graph)?;
    if table.len() != graph.len() {
        return Err(Error::Argument("distance table belongs to a different graph".into()));
    }
    let n = graph.len();
    let sources = table.sources();
    let per_source: Vec<(Vec<LipschitzViolation>, usize)> = sources
        .par_iter()
        .map(|&x| {
            let mut out = Vec::new();
            let mut checked = 0;
            for y in 0..n {
                if y == x || !table.related(x, y) {
                    continue;
                }
                checked += 1;
                let (increase, distance) = (f.values[y] - f.values[x], table.get(x, y));
                if increase < distance {
                    out.push(LipschitzViolation { x, y, increase, distance });
                }
            }
            (out, checked)
        })
        .collect();
    let pairs_checked = per_source.iter().map(|p| p.1).sum();
    let pair: Vec<LipschitzViolation> = per_source.into_iter().flat_map(|p| p.0).collect();
    let chronological = pair.iter().filter(|v| v.distance > 0.0).count();
    Ok(ReverseLipschitzReport { edge: edge_violations(graph, f), pair, chronological, pairs_checked })
}

/// Strict increase along every causal edge of positive weight.
pub fn strictly_increasing_on_timelike_edges(graph: &CausalGraph, f: &ScalarField) -> bool {
    graph.edges().iter().filter(|e| e.weight > 0.0).all(|e| f.values[e.to] > f.values[e.from])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub node: NodeId,
    pub point: Point,
    /// `df` as components in the coordinate basis.
    pub differential: Vector,
    /// `∇f = g⁻¹ df`.
    pub gradient: Vector,
    /// `g(∇f, ∇f)`
    pub norm: f64,
    /// `g(∇f, T)`; positive when `∇f` is past-directed.
    pub time_component: f64,
    pub residual: f64,
    pub oscillation: f64,
    pub neighbours: usize,
    pub reliable: bool,
}

/// Gradient of a known differential at `p`.
pub fn gradient_from_differential(model: &MetricModel, p: Point, df: Vector) -> Result<(Vector, f64, f64)> {
    let g = model.metric_at(p)?;
    let inv = g.inverse()?;
    let grad = [inv.0[0][0] * df[0] + inv.0[0][1] * df[1], inv.0[1][0] * df[0] + inv.0[1][1] * df[1]];
    let norm = df[0] * grad[0] + df[1] * grad[1];
    let t = model.time_orientation_at(p);
    Ok((grad, norm, df[0] * t[0] + df[1] * t[1]))
}

/// Weighted (1/distance) least-squares affine fit of `f` over the proximity
/// neighbourhood of `x`.
pub fn estimate_gradient(model: &MetricModel, graph: &CausalGraph, f: &ScalarField, x: NodeId) -> Result<GradientEstimate> {
    f.check_len(graph)?;
    graph.node_id(x)?;
    let p = graph.point(x);
    let neighbours = graph.proximity_neighbors(x);
    let mut samples: Vec<(Vector, f64, f64)> = Vec::with_capacity(neighbours.len() + 1);
    let mut max_weight: f64 = 0.0;
    for &y in neighbours {
        // displacement to the nearest covering image
        let q = model
            .lifts(p, graph.point(y))
            .into_iter()
            .min_by(|a, b| (a[0] - p[0]).hypot(a[1] - p[1]).total_cmp(&(b[0] - p[0]).hypot(b[1] - p[1])))
            .expect("at least one lift");
        let dv = [q[0] - p[0], q[1] - p[1]];
        let dist = dv[0].hypot(dv[1]);
        if dist == 0.0 {
            continue;
        }
        max_weight = max_weight.max(1.0 / dist);
        samples.push((dv, f.values[y], 1.0 / dist));
    }
    let count = samples.len();
    samples.push(([0.0, 0.0], f.values[x], max_weight.max(1.0)));

    let lo = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let oscillation = hi - lo;
    let unreliable = |differential: Vector| GradientEstimate {
        node: x,
        point: p,
        differential,
        gradient: [f64::NAN; 2],
        norm: f64::NAN,
        time_component: f64::NAN,
        residual: f64::INFINITY,
        oscillation,
        neighbours: count,
        reliable: false,
    };
    if count < MIN_NEIGHBOURS {
        return Ok(unreliable([f64::NAN; 2]));
    }

    // normal equations for f ≈ c + a·dv, scaled by the neighbourhood radius
    let scale = samples.iter().map(|s| s.0[0].hypot(s.0[1])).fold(0.0, f64::max);
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(dv, val, w) in &samples {
        let row = [1.0, dv[0] / scale, dv[1] / scale];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * row[i] * row[j];
            }
            rhs[i] += w * row[i] * (val - f.values[x]);
        }
    }
    let Some(sol) = solve3(m, rhs) else {
        return Ok(unreliable([f64::NAN; 2]));
    };
    let df = [sol[1] / scale, sol[2] / scale];
    let (mut sq, mut wsum) = (0.0, 0.0);
    for &(dv, val, w) in &samples {
        let pred = f.values[x] + sol[0] + df[0] * dv[0] + df[1] * dv[1];
        sq += w * (val - pred).powi(2);
        wsum += w;
    }
    let residual = (sq / wsum).sqrt();
    let reliable = residual <= RESIDUAL_RATIO * oscillation || residual == 0.0;
    let (gradient, norm, time_component) = gradient_from_differential(model, p, df)?;
    Ok(GradientEstimate {
        node: x,
        point: p,
        differential: df,
        gradient,
        norm,
        time_component,
        residual,
        oscillation,
        neighbours: count,
        reliable,
    })
}

/// Gaussian elimination with partial pivoting; `None` when near singular.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let norm = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-10 * norm {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / m[row][row];
    }
    Some(x)
}

pub fn estimate_all_gradients(model: &MetricModel, graph: &CausalGraph, f: &ScalarField) -> Result<Vec<GradientEstimate>> {
    (0..graph.len()).into_par_iter().map(|x| estimate_gradient(model, graph, f, x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepnessSummary {
    pub tolerance: f64,
    pub reliable: usize,
    pub unreliable: usize,
    /// Fraction of reliable nodes with `g(∇f,∇f) <= -1 + tol`.
    pub fraction: f64,
    /// Largest `g(∇f,∇f)` over reliable nodes.
    pub worst: f64,
    /// 95th percentile of `g(∇f,∇f)` over reliable nodes.
    pub quantile: f64,
    /// Reliable nodes whose gradient is past-directed (`g(∇f,T) > 0`).
    pub past_directed: usize,
    pub estimates: Vec<GradientEstimate>,
}

impl SteepnessSummary {
    pub fn passes(&self, required_fraction: f64) -> bool {
        self.reliable > 0 && self.fraction >= required_fraction
    }
}

/// Steepness over nodes with reliable gradient fits; nodes with fewer than
/// three proximity neighbours never count.
pub fn check_steepness(model: &MetricModel, graph: &CausalGraph, f: &ScalarField, tol: f64) -> Result<SteepnessSummary> {
    let estimates = estimate_all_gradients(model, graph, f)?;
    let mut norms: Vec<f64> = estimates.iter().filter(|e| e.reliable).map(|e| e.norm).collect();
    norms.sort_by(f64::total_cmp);
    let reliable = norms.len();
    let steep = norms.iter().filter(|&&g| g <= -1.0 + tol).count();
    let quantile = if norms.is_empty() {
        f64::NAN
    } else {
        norms[((STEEPNESS_QUANTILE * reliable as f64).ceil() as usize).clamp(1, reliable) - 1]
    };
    Ok(SteepnessSummary {
        tolerance: tol,
        reliable,
        unreliable: estimates.len() - reliable,
        fraction: if reliable == 0 { 0.0 } else { steep as f64 / reliable as f64 },
        worst: norms.last().copied().unwrap_or(f64::NAN),
        quantile,
        past_directed: estimates.iter().filter(|e| e.reliable && e.time_component > 0.0).count(),
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub status: BoundStatus,
    /// `|f(end) - f(start)|`
    pub increase: f64,
    pub length: f64,
    /// `min √(-g(∇f,∇f))` over the path's vertices.
    pub min_steepness: f64,
    /// `increase - length * min_steepness`
    pub slack: f64,
}

/// `|f(y) - f(x)| >= L(γ) · min_γ √(-g(∇f,∇f))` along a path whose vertices
/// are graph nodes.
pub fn check_bound_inequality(
    model: &MetricModel,
    graph: &CausalGraph,
    f: &ScalarField,
    path: &CausalPath,
    tol: f64,
) -> Result<BoundCheck> {
    f.check_len(graph)?;
    let nodes: Vec<NodeId> = path
        .vertices
        .iter()
        .map(|&p| graph.find_node(p).ok_or_else(|| Error::Argument(format!("path vertex {p:?} is not a node"))))
        .collect::<Result<_>>()?;
    let (first, last) = match (nodes.first(), nodes.last()) {
        (Some(&a), Some(&b)) if nodes.len() >= 2 => (a, b),
        _ => return Err(Error::Argument("path needs at least two vertices".into())),
    };
    let length = model.curve_length(path, 64)?;
    let increase = (f.values[last] - f.values[first]).abs();
    let mut min_steepness = f64::INFINITY;
    let mut reliable = true;
    for &v in &nodes {
        let est = estimate_gradient(model, graph, f, v)?;
        reliable &= est.reliable;
        if est.reliable {
            min_steepness = min_steepness.min((-est.norm).max(0.0).sqrt());
        }
    }
    if !reliable {
        return Ok(BoundCheck { status: BoundStatus::Inconclusive, increase, length, min_steepness, slack: f64::NAN });
    }
    let slack = increase - length * min_steepness;
    let status = if slack >= -tol { BoundStatus::Holds } else { BoundStatus::Fails };
    Ok(BoundCheck { status, increase, length, min_steepness, slack })
}

/// Optimal potential for the distance formula: `f*(x) = max(D_p(x), depth(x) - K)`
/// with `D_p` the longest path from `p` (absent where unreachable), `depth`
/// the longest path ending at `x` and `K` its maximum. Every edge is steep,
/// `f*(p) = 0`, and `max{f*(q) - f*(p), 0} = d(p,q)`.
pub fn dual_potential(graph: &CausalGraph, p: NodeId, q: NodeId) -> Result<(ScalarField, f64)> {
    graph.node_id(q)?;
    let from_p = sweep_from(graph, &[p])?;
    let depth = depth(graph, true)?;
    let k = depth.iter().copied().fold(0.0, f64::max);
    let values: Vec<f64> = from_p.iter().zip(&depth).map(|(&d, &h)| d.max(h - k)).collect();
    let value = (values[q] - values[p]).max(0.0);
    Ok((ScalarField::new(values, Provenance::DualPotential { p, q, value }), value))
}

/// `max{f(q) - f(p), 0}`
pub fn dual_objective(f: &ScalarField, p: NodeId, q: NodeId) -> f64 {
    (f.values[q] - f.values[p]).max(0.0)
}

/// Half the median positive edge weight.
pub fn default_level_tolerance(graph: &CausalGraph) -> f64 {
    let mut w: Vec<f64> = graph.edges().iter().map(|e| e.weight).filter(|&w| w > 0.0).collect();
    if w.is_empty() {
        return 0.0;
    }
    w.sort_by(f64::total_cmp);
    0.5 * w[w.len() / 2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum LevelRule {
    /// Minimal nodes of `{f >= r}`: `f(x) >= r` while `f < r` on `I^-(x)`.
    /// Achronal by construction; equals `S` for a surface-built `f` at `r = 0`.
    Front,
    /// `{x : |f(x) - r| <= tol}`
    Band { tol: f64 },
}

pub fn level_set(graph: &CausalGraph, f: &ScalarField, r: f64, rule: LevelRule) -> Result<NodeSet> {
    f.check_len(graph)?;
    let n = graph.len();
    let set = match rule {
        LevelRule::Band { tol } => NodeSet::new((0..n).filter(|&v| (f.values[v] - r).abs() <= tol), SetTag::Generic),
        LevelRule::Front => {
            let above: Vec<NodeId> = (0..n).filter(|&v| f.values[v] >= r).collect();
            let future_of_above = chronological_future(graph, &NodeSet::new(above.iter().copied(), SetTag::Generic))?;
            NodeSet::new(above.into_iter().filter(|&v| !future_of_above.contains(v)), SetTag::Generic)
        }
    };
    Ok(set)
}

/// Builds the level set `f⁻¹(r)` and tests it as a hatting for `chains`.
pub fn check_level_set_hatting(
    graph: &CausalGraph,
    f: &ScalarField,
    r: f64,
    rule: LevelRule,
    chains: &[DivergentChain],
) -> Result<bool> {
    if !edge_violations(graph, f).is_empty() {
        return Err(Error::Argument("field is not reverse-Lipschitz".into()));
    }
    let set = level_set(graph, f, r, rule)?;
    if set.is_empty() {
        return Err(Error::Argument(format!("level set f = {r} is empty")));
    }
    is_hatting(graph, &set, chains)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub u: NodeId,
    pub v: NodeId,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub max_jump: f64,
    pub top: Vec<Jump>,
}

/// `|f(u) - f(v)| / |u - v|` over proximity edges, largest first.
pub fn continuity_report(graph: &CausalGraph, f: &ScalarField, top_k: usize) -> Result<ContinuityReport> {
    f.check_len(graph)?;
    if !graph.has_proximity() && graph.len() > 1 {
        return Err(Error::Structure("graph has no proximity edges".into()));
    }
    let model = graph.model();
    let mut jumps: Vec<Jump> = graph
        .proximity_edges()
        .iter()
        .map(|&(u, v)| {
            let dist = model.coordinate_distance(graph.point(u), graph.point(v));
            Jump { u, v, normalized: (f.values[u] - f.values[v]).abs() / dist }
        })
        .collect();
    jumps.sort_by(|a, b| b.normalized.total_cmp(&a.normalized).then((a.u, a.v).cmp(&(b.u, b.v))));
    jumps.truncate(top_k);
    Ok(ContinuityReport { max_jump: jumps.first().map_or(0.0, |j| j.normalized), top: jumps })
}

/// `true` when a chain direction is consistent with the field: future chain
/// tails have smaller values than their witnesses.
pub fn chain_consistent(graph: &CausalGraph, f: &ScalarField, chain: &DivergentChain) -> bool {
    let (Some(t), Some(w)) = (graph.find_node(chain.tail_point()), graph.find_node(chain.witness)) else {
        return false;
    };
    match chain.direction {
        ChainDirection::Future => f.values[t] < f.values[w],
        ChainDirection::Past => f.values[t] > f.values[w],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GraphMeta};

    fn dag(n: usize, edges: &[(usize, usize, f64)]) -> CausalGraph {
        CausalGraph::from_parts(
            (0..n).map(|i| [i as f64, 0.0]).collect(),
            edges.iter().map(|&(from, to, weight)| Edge { from, to, weight }).collect(),
            vec![],
            GraphMeta::new(MetricModel::minkowski()),
        )
        .unwrap()
    }

    #[test]
    fn chain_time_function() {
        let g = dag(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let f = time_function_from_surface(&g, &NodeSet::new([1], SetTag::Surface)).unwrap();
        assert_eq!(f.values, vec![-1.0, 0.0, 1.0]);
        assert!(check_reverse_lipschitz(&g, &f).unwrap().passes());
    }

    #[test]
    fn jump_over_surface_is_corrected() {
        // 0 -> 1 -> 2 with a long edge 0 -> 3 bypassing the surface node 1
        let g = dag(4, &[(0, 1, 1.0), (1, 2, 1.0), (0, 3, 3.0), (1, 3, 0.5)]);
        let f = time_function_from_surface(&g, &NodeSet::new([1], SetTag::Surface)).unwrap();
        assert_eq!(f.values[3], 2.0);
        assert!(matches!(f.provenance, Provenance::FromSurface { corrected: 1, .. }));
        assert!(check_reverse_lipschitz(&g, &f).unwrap().passes());
    }

    #[test]
    fn incomplete_split_is_refused() {
        let g = dag(3, &[(0, 1, 1.0)]);
        assert!(matches!(time_function_from_surface(&g, &NodeSet::new([1], SetTag::Surface)), Err(Error::Split(1))));
    }

    #[test]
    fn zero_field_violates() {
        let g = dag(2, &[(0, 1, 0.5)]);
        let r = check_reverse_lipschitz(&g, &ScalarField::constant(&g, 0.0)).unwrap();
        assert_eq!(r.edge.len(), 1);
        assert_eq!(r.pair.len(), 1);
        assert_eq!(r.chronological, 1);
    }

    #[test]
    fn dual_potential_of_unrelated_pair() {
        let g = dag(3, &[(0, 1, 1.0)]);
        let (f, value) = dual_potential(&g, 0, 2).unwrap();
        assert_eq!(value, 0.0);
        assert!(edge_violations(&g, &f).is_empty());
        let (_, value) = dual_potential(&g, 0, 1).unwrap();
        assert_eq!(value, 1.0);
    }

    #[test]
    fn singular_analytic_gradient() {
        let model = MetricModel::singular_wedge();
        let p = [0.3, 0.4];
        let (grad, norm, _) = gradient_from_differential(&model, p, [0.0, 1.0]).unwrap();
        assert!((grad[1] + 0.25).abs() < 1e-15 && grad[0].abs() < 1e-15);
        assert!((norm + 0.25).abs() < 1e-15);
    }

    #[test]
    fn minkowski_time_gradient_is_past_directed() {
        let (grad, norm, tc) = gradient_from_differential(&MetricModel::minkowski(), [0.0, 0.0], [1.0, 0.0]).unwrap();
        assert_eq!(grad, [-1.0, 0.0]);
        assert_eq!(norm, -1.0);
        assert!(tc > 0.0);
    }

    #[test]
    fn field_map_roundtrip() {
        let f = ScalarField::new(vec![0.5, -1.0], Provenance::External);
        let text = serde_json::to_string(&f.to_map()).unwrap();
        assert_eq!(text, r#"{"0":0.5,"1":-1.0}"#);
        let back = ScalarField::from_map(&serde_json::from_str(&text).unwrap(), 2).unwrap();
        assert_eq!(back.values, f.values);
        assert!(ScalarField::from_map(&serde_json::from_str(&text).unwrap(), 3).is_err());
    }

    #[test]
    fn solve3_identity() {
        let m = [[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 4.0]];
        assert_eq!(solve3(m, [2.0, 3.0, 4.0]), Some([1.0, 1.0, 1.0]));
        assert_eq!(solve3([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]], [1.0; 3]), None);
    }
}
