//! Lorentzian distance as longest weighted paths on a causal DAG.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_causal_dag, CausalGraph, DagOptions, NodeId};
use crate::metric::{MetricModel, Point};
use crate::sampling::{sample_points, SamplingMode, SamplingSpec, Window};

/// Largest graph for which [`DistanceTable::all_pairs`] materialises every row.
pub const ALL_PAIRS_LIMIT: usize = 2000;
pub const MAX_SAMPLED_TRIPLES: usize = 100_000;

const UNREACHED: f64 = f64::NEG_INFINITY;

/// Longest path from any of `sources` to every node; `-inf` where unreached.
pub(crate) fn sweep_from(graph: &CausalGraph, sources: &[NodeId]) -> Result<Vec<f64>> {
    let order = graph.topo_order()?;
    let mut dist = vec![UNREACHED; graph.len()];
    for &s in sources {
        dist[graph.node_id(s)?] = 0.0;
    }
    for &u in order {
        let du = dist[u];
        if du == UNREACHED {
            continue;
        }
        for e in graph.out_edges(u) {
            let cand = du + e.weight;
            if cand > dist[e.to] {
                dist[e.to] = cand;
            }
        }
    }
    Ok(dist)
}

/// Longest path from every node into any of `sinks`; `-inf` where the sinks
/// are unreachable.
pub(crate) fn sweep_to(graph: &CausalGraph, sinks: &[NodeId]) -> Result<Vec<f64>> {
    let order = graph.topo_order()?;
    let mut dist = vec![UNREACHED; graph.len()];
    for &s in sinks {
        dist[graph.node_id(s)?] = 0.0;
    }
    for &v in order.iter().rev() {
        let dv = dist[v];
        if dv == UNREACHED {
            continue;
        }
        for e in graph.in_edges(v) {
            let cand = dv + e.weight;
            if cand > dist[e.from] {
                dist[e.from] = cand;
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    FromSource,
    ToSink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Node(NodeId),
    Set(Vec<NodeId>),
}

/// Distances from (or to) a node or node set. Unrelated nodes hold 0; the
/// `reachable` bit separates them from nodes joined by null chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceField {
    pub source: Source,
    pub direction: Direction,
    pub values: Vec<f64>,
    pub reachable: Vec<bool>,
}

impl DistanceField {
    fn from_raw(source: Source, direction: Direction, raw: Vec<f64>) -> Self {
        let reachable = raw.iter().map(|&d| d != UNREACHED).collect();
        let values = raw.into_iter().map(|d| d.max(0.0)).collect();
        DistanceField { source, direction, values, reachable }
    }

    pub fn from_node(graph: &CausalGraph, p: NodeId) -> Result<Self> {
        Ok(Self::from_raw(Source::Node(p), Direction::FromSource, sweep_from(graph, &[p])?))
    }

    pub fn to_node(graph: &CausalGraph, q: NodeId) -> Result<Self> {
        Ok(Self::from_raw(Source::Node(q), Direction::ToSink, sweep_to(graph, &[q])?))
    }

    /// `d(S, .)`
    pub fn from_set(graph: &CausalGraph, set: &[NodeId]) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::Argument("distance to an empty set".into()));
        }
        Ok(Self::from_raw(Source::Set(set.to_vec()), Direction::FromSource, sweep_from(graph, set)?))
    }

    /// `d(., S)`
    pub fn to_set(graph: &CausalGraph, set: &[NodeId]) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::Argument("distance to an empty set".into()));
        }
        Ok(Self::from_raw(Source::Set(set.to_vec()), Direction::ToSink, sweep_to(graph, set)?))
    }

    pub fn value(&self, v: NodeId) -> f64 {
        self.values[v]
    }

    /// Strictly positive distance, i.e. chronologically related.
    pub fn chronological(&self, v: NodeId) -> bool {
        self.values[v] > 0.0
    }
}

/// `d(p, q)`: the heaviest causal path from `p` to `q`, or 0 if there is none.
pub fn longest_path_distance(graph: &CausalGraph, p: NodeId, q: NodeId) -> Result<f64> {
    graph.node_id(q)?;
    Ok(sweep_from(graph, &[p])?[q].max(0.0))
}

/// `d(S, x) = max_{s in S} d(s, x)`
pub fn distance_to_set(graph: &CausalGraph, set: &[NodeId], x: NodeId) -> Result<f64> {
    graph.node_id(x)?;
    Ok(DistanceField::from_set(graph, set)?.value(x))
}

/// `d(x, S) = max_{s in S} d(x, s)`
pub fn distance_from_point_to_set(graph: &CausalGraph, x: NodeId, set: &[NodeId]) -> Result<f64> {
    graph.node_id(x)?;
    Ok(DistanceField::to_set(graph, set)?.value(x))
}

/// Rows of the distance matrix for a subset of source nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    n: usize,
    sources: Vec<NodeId>,
    row_of: Vec<Option<usize>>,
    values: Vec<f64>,
    reach: Vec<bool>,
}

impl DistanceTable {
    pub fn all_pairs(graph: &CausalGraph) -> Result<Self> {
        if graph.len() > ALL_PAIRS_LIMIT {
            return Err(Error::Argument(format!(
                "{} nodes exceeds the all-pairs limit of {ALL_PAIRS_LIMIT}",
                graph.len()
            )));
        }
        Self::for_sources(graph, &(0..graph.len()).collect::<Vec<_>>())
    }

    pub fn for_sources(graph: &CausalGraph, sources: &[NodeId]) -> Result<Self> {
        graph.topo_order()?;
        let n = graph.len();
        let rows: Vec<Vec<f64>> = sources.par_iter().map(|&s| sweep_from(graph, &[s])).collect::<Result<_>>()?;
        let mut row_of = vec![None; n];
        for (k, &s) in sources.iter().enumerate() {
            row_of[s] = Some(k);
        }
        let mut values = Vec::with_capacity(n * sources.len());
        let mut reach = Vec::with_capacity(n * sources.len());
        for row in rows {
            reach.extend(row.iter().map(|&d| d != UNREACHED));
            values.extend(row.iter().map(|&d| d.max(0.0)));
        }
        Ok(DistanceTable { n, sources: sources.to_vec(), row_of, values, reach })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    fn index(&self, p: NodeId, q: NodeId) -> usize {
        let row = self.row_of[p].unwrap_or_else(|| panic!("node {p} is not a source of this table"));
        row * self.n + q
    }

    pub fn get(&self, p: NodeId, q: NodeId) -> f64 {
        self.values[self.index(p, q)]
    }

    /// `q` in `J^+(p)` (including `q = p`).
    pub fn related(&self, p: NodeId, q: NodeId) -> bool {
        self.reach[self.index(p, q)]
    }

    /// Overwrites an entry; used to build negative controls.
    pub fn set(&mut self, p: NodeId, q: NodeId, value: f64) {
        let k = self.index(p, q);
        self.values[k] = value;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleViolation {
    pub x: NodeId,
    pub y: NodeId,
    pub z: NodeId,
    pub d_xz: f64,
    pub d_xy: f64,
    pub d_yz: f64,
}

/// Checks `d(x,z) >= d(x,y) + d(y,z)` on causally ordered triples drawn from
/// the table. Triples with `x, y` among the table's sources are enumerated
/// when there are at most `max_triples` of them, else sampled uniformly.
pub fn check_reverse_triangle_table(table: &DistanceTable, seed: u64, max_triples: usize) -> Vec<TriangleViolation> {
    let n = table.len();
    let is_source: Vec<bool> = (0..n).map(|v| table.row_of[v].is_some()).collect();
    // (x, y) pairs with y a source in J^+(x), weighted by |J^+(y)|
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for &x in table.sources() {
        for y in 0..n {
            if is_source[y] && table.related(x, y) {
                let count = (0..n).filter(|&z| table.related(y, z)).count();
                pairs.push((x, y));
                weights.push(count as u64);
            }
        }
    }
    let total: u64 = weights.iter().sum();
    let check = |x: NodeId, y: NodeId, z: NodeId| -> Option<TriangleViolation> {
        let (d_xz, d_xy, d_yz) = (table.get(x, z), table.get(x, y), table.get(y, z));
        (d_xz < d_xy + d_yz).then_some(TriangleViolation { x, y, z, d_xz, d_xy, d_yz })
    };
    let mut out = Vec::new();
    if total as usize <= max_triples {
        for &(x, y) in &pairs {
            for z in (0..n).filter(|&z| table.related(y, z)) {
                out.extend(check(x, y, z));
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(&weights).expect("positive total weight");
    let mut futures: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for _ in 0..max_triples {
        let (x, y) = pairs[pick.sample(&mut rng)];
        let fut = futures.entry(y).or_insert_with(|| (0..n).filter(|&z| table.related(y, z)).collect());
        let z = fut[rng.gen_range(0..fut.len())];
        out.extend(check(x, y, z));
    }
    out
}

/// Reverse triangle check on graph distances. Small graphs use every node
/// as a source; larger ones a seeded pool of [`ALL_PAIRS_LIMIT`] sources.
pub fn check_reverse_triangle(graph: &CausalGraph, seed: u64) -> Result<Vec<TriangleViolation>> {
    let sources: Vec<NodeId> = if graph.len() <= ALL_PAIRS_LIMIT {
        (0..graph.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut pool = rand::seq::index::sample(&mut rng, graph.len(), ALL_PAIRS_LIMIT).into_vec();
        pool.sort_unstable();
        pool
    };
    let table = DistanceTable::for_sources(graph, &sources)?;
    Ok(check_reverse_triangle_table(&table, seed, MAX_SAMPLED_TRIPLES))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetTriangleViolation {
    pub x: NodeId,
    pub y: NodeId,
    /// `d(S,y)` (future form) or `d(x,S)` (past form).
    pub lhs: f64,
    /// `d(S,x) + d(x,y)` or `d(x,y) + d(y,S)`.
    pub rhs: f64,
}

/// Set forms of the reverse triangle inequality: for `x` in `J^+(S)` and
/// `y` in `J^+(x)`, `d(S,y) >= d(S,x) + d(x,y)`; and for `y` in `J^-(S)`,
/// `d(x,S) >= d(x,y) + d(y,S)`.
pub fn check_reverse_triangle_set(graph: &CausalGraph, set: &[NodeId]) -> Result<Vec<SetTriangleViolation>> {
    let from_s = DistanceField::from_set(graph, set)?;
    let to_s = DistanceField::to_set(graph, set)?;
    let n = graph.len();
    let found: Vec<Vec<SetTriangleViolation>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut out = Vec::new();
            let row = match sweep_from(graph, &[x]) {
                Ok(row) => row,
                Err(_) => return out,
            };
            for y in 0..n {
                if row[y] == UNREACHED {
                    continue;
                }
                let d_xy = row[y].max(0.0);
                if from_s.reachable[x] {
                    let (lhs, rhs) = (from_s.values[y], from_s.values[x] + d_xy);
                    if lhs < rhs {
                        out.push(SetTriangleViolation { x, y, lhs, rhs });
                    }
                }
                if to_s.reachable[y] {
                    let (lhs, rhs) = (to_s.values[x], d_xy + to_s.values[y]);
                    if lhs < rhs {
                        out.push(SetTriangleViolation { x, y, lhs, rhs });
                    }
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

#[derive(Debug, Clone)]
pub struct LadderLevel {
    pub parameter: f64,
    pub graph: CausalGraph,
}

/// Graphs indexed by a strictly decreasing refinement parameter.
#[derive(Debug, Clone)]
pub struct RefinementLadder {
    levels: Vec<LadderLevel>,
}

impl RefinementLadder {
    pub fn new(levels: Vec<LadderLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Argument("empty refinement ladder".into()));
        }
        if levels.windows(2).any(|w| !(w[1].parameter < w[0].parameter)) {
            return Err(Error::Argument("ladder parameters must be strictly decreasing".into()));
        }
        Ok(RefinementLadder { levels })
    }

    pub fn levels(&self) -> &[LadderLevel] {
        &self.levels
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.parameter).collect()
    }

    pub fn finest(&self) -> &LadderLevel {
        self.levels.last().expect("non-empty")
    }
}

/// A point `base + parameter * scale`, following the ladder parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub base: Point,
    #[serde(default)]
    pub scale: Point,
}

impl ProbePoint {
    pub fn fixed(base: Point) -> Self {
        ProbePoint { base, scale: [0.0, 0.0] }
    }

    pub fn scaled(base: Point, scale: Point) -> Self {
        ProbePoint { base, scale }
    }

    pub fn at(&self, parameter: f64) -> Point {
        [self.base[0] + parameter * self.scale[0], self.base[1] + parameter * self.scale[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub from: ProbePoint,
    pub to: ProbePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Singular model truncated at `|y| >= parameter`; sampling fixed.
    Truncation,
    /// Grid step equals the parameter.
    GridStep,
    /// Only the probe points move.
    ProbeOnly,
}

/// Recipe for building a ladder; the probe points are inserted as anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub model: MetricModel,
    pub parameters: Vec<f64>,
    pub refinement: Refinement,
    pub sampling: SamplingSpec,
    pub probe: ProbeSpec,
    #[serde(default)]
    pub anchors: Vec<ProbePoint>,
    #[serde(default)]
    pub horizon: Option<f64>,
}

impl LadderSpec {
    /// Truncated singular wedge, probes `(0, eps) -> (0, 1)` on the axis.
    pub fn singular(epsilons: Vec<f64>, density: f64, seed: u64) -> Self {
        let window = Window::new([-0.9, -1.05], [0.9, 1.05]);
        LadderSpec {
            model: MetricModel::singular_wedge(),
            parameters: epsilons,
            refinement: Refinement::Truncation,
            sampling: SamplingSpec::sprinkle(density, window, seed),
            probe: ProbeSpec {
                from: ProbePoint::scaled([0.0, 0.0], [0.0, 1.0]),
                to: ProbePoint::fixed([0.0, 1.0]),
            },
            anchors: vec![ProbePoint::scaled([0.0, 0.0], [0.0, -1.0]), ProbePoint::fixed([0.0, -1.0])],
            horizon: Some(3.0),
        }
    }

    /// Flat control with the same parameters: probes `(eps, 0) -> (1, 0)` in `(t, x)`.
    pub fn minkowski_control(epsilons: Vec<f64>) -> Self {
        let window = Window::new([-0.2, -0.6], [1.2, 0.6]);
        LadderSpec {
            model: MetricModel::minkowski(),
            parameters: epsilons,
            refinement: Refinement::ProbeOnly,
            sampling: SamplingSpec::grid(0.1, window),
            probe: ProbeSpec {
                from: ProbePoint::scaled([0.0, 0.0], [1.0, 0.0]),
                to: ProbePoint::fixed([1.0, 0.0]),
            },
            anchors: Vec::new(),
            horizon: Some(1.5),
        }
    }

    /// Slit Minkowski under grid refinement, probes `(0,-2) -> (0,2)` in `(x, t)`.
    pub fn slit(steps: Vec<f64>) -> Self {
        let window = Window::new([-2.5, -2.0], [2.5, 2.0]);
        LadderSpec {
            model: MetricModel::slit_minkowski(),
            parameters: steps,
            refinement: Refinement::GridStep,
            sampling: SamplingSpec::grid(0.2, window),
            probe: ProbeSpec { from: ProbePoint::fixed([0.0, -2.0]), to: ProbePoint::fixed([0.0, 2.0]) },
            anchors: Vec::new(),
            horizon: None,
        }
    }

    pub fn model_at(&self, parameter: f64) -> MetricModel {
        match self.refinement {
            Refinement::Truncation => MetricModel {
                kind: crate::metric::ModelKind::SingularWedge { truncation: parameter },
                widening: self.model.widening,
            },
            _ => self.model.clone(),
        }
    }

    pub fn build(&self) -> Result<RefinementLadder> {
        let mut levels = Vec::with_capacity(self.parameters.len());
        for &parameter in &self.parameters {
            let model = self.model_at(parameter);
            let mut sampling = self.sampling.clone();
            if self.refinement == Refinement::GridStep {
                sampling.mode = SamplingMode::Grid { step: parameter };
            }
            sampling.anchors.push(self.probe.from.at(parameter));
            sampling.anchors.push(self.probe.to.at(parameter));
            sampling.anchors.extend(self.anchors.iter().map(|a| a.at(parameter)));
            let points = sample_points(&model, &sampling)?;
            let mut options = DagOptions::default().with_window(sampling.window);
            if let SamplingMode::Grid { step } = sampling.mode {
                // grid spacing is exact; the mean-spacing default would be off by the anchors
                options = options.with_proximity_radius(1.5 * step).with_horizon(4.0 * step);
            }
            if let Some(h) = self.horizon {
                options = options.with_horizon(h);
            }
            let mut graph = build_causal_dag(&model, points, &options)?;
            graph.set_sampling(&sampling);
            levels.push(LadderLevel { parameter, graph });
        }
        RefinementLadder::new(levels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub epsilon: f64,
    pub distance: f64,
    pub log_inv_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of distance against `ln(1/eps)`; absent with
    /// fewer than two rows.
    pub slope: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn regression_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Distance between the probe points at every ladder level. Levels lacking a
/// probe node are skipped with a warning.
pub fn divergence_probe(ladder: &RefinementLadder, probe: &ProbeSpec) -> Result<GrowthTable> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for level in ladder.levels() {
        let eps = level.parameter;
        let (a, b) = (probe.from.at(eps), probe.to.at(eps));
        match (level.graph.find_node(a), level.graph.find_node(b)) {
            (Some(p), Some(q)) => rows.push(GrowthRow {
                epsilon: eps,
                distance: longest_path_distance(&level.graph, p, q)?,
                log_inv_eps: (1.0 / eps).ln(),
            }),
            _ => warnings.push(format!("level {eps}: probe point missing, skipped")),
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.log_inv_eps).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    Ok(GrowthTable { slope: regression_slope(&xs, &ys), rows, warnings })
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
    fn chain_with_shortcut() {
        let g = dag(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.9)]);
        assert_eq!(longest_path_distance(&g, 0, 2).unwrap(), 2.0);
        assert_eq!(longest_path_distance(&g, 2, 0).unwrap(), 0.0);
        assert_eq!(longest_path_distance(&g, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn cyclic_graph_refused() {
        let g = dag(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(matches!(longest_path_distance(&g, 0, 1), Err(Error::Cyclic)));
    }

    #[test]
    fn null_chain_is_related_at_zero() {
        let g = dag(3, &[(0, 1, 0.0)]);
        let f = DistanceField::from_node(&g, 0).unwrap();
        assert_eq!(f.values, vec![0.0, 0.0, 0.0]);
        assert_eq!(f.reachable, vec![true, true, false]);
    }

    #[test]
    fn set_distances() {
        let g = dag(4, &[(0, 1, 1.0), (1, 2, 1.0), (3, 2, 0.5)]);
        assert_eq!(distance_to_set(&g, &[0], 2).unwrap(), 2.0);
        assert_eq!(distance_to_set(&g, &[0, 3], 2).unwrap(), 2.0);
        assert_eq!(distance_to_set(&g, &[1, 3], 2).unwrap(), 1.0);
        assert_eq!(distance_from_point_to_set(&g, 0, &[2]).unwrap(), 2.0);
        assert!(matches!(distance_to_set(&g, &[], 2), Err(Error::Argument(_))));
    }

    #[test]
    fn corrupted_table_is_caught() {
        let g = dag(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let mut t = DistanceTable::all_pairs(&g).unwrap();
        assert!(check_reverse_triangle_table(&t, 0, MAX_SAMPLED_TRIPLES).is_empty());
        t.set(0, 2, 1.5);
        let v = check_reverse_triangle_table(&t, 0, MAX_SAMPLED_TRIPLES);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].x, v[0].y, v[0].z), (0, 1, 2));
    }

    #[test]
    fn slope_of_a_line() {
        assert_eq!(regression_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(2.0));
        assert_eq!(regression_slope(&[1.0], &[2.0]), None);
    }

    #[test]
    fn ladder_parameters_must_decrease() {
        let g = dag(1, &[]);
        let level = |parameter| LadderLevel { parameter, graph: g.clone() };
        assert!(RefinementLadder::new(vec![level(0.1), level(0.1)]).is_err());
        assert!(RefinementLadder::new(vec![level(0.1), level(0.05)]).is_ok());
    }
}
