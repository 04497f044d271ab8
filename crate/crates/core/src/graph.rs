//! Weighted causal DAGs built from sampled nodes.
//!
//! Edge weights are rounded down to multiples of [`WEIGHT_QUANTUM`]. Sums of
//! such weights are exact in `f64` while totals stay below `2^12`, so every
//! discrete identity the crate checks (duality, reverse triangle, steepness
//! equivalence) holds bit for bit rather than up to rounding, and rounding
//! down keeps path weights below the continuum proper time.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{widen_cones, MetricModel, Point};
use crate::sampling::{mean_spacing, SamplingMode, SamplingSpec, Window};

pub type NodeId = usize;

/// `2^-40`
pub const WEIGHT_QUANTUM: f64 = 1.0 / 1_099_511_627_776.0;

pub fn quantize(w: f64) -> f64 {
    (w / WEIGHT_QUANTUM).floor() * WEIGHT_QUANTUM
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub model: MetricModel,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub density: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub proximity_radius: f64,
    #[serde(default)]
    pub window: Option<Window>,
}

impl GraphMeta {
    pub fn new(model: MetricModel) -> Self {
        GraphMeta {
            model,
            seed: None,
            density: None,
            step: None,
            horizon: f64::INFINITY,
            proximity_radius: 0.0,
            window: None,
        }
    }
}

/// Options for [`build_causal_dag`]. Unset radii default to multiples of the
/// mean node spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct DagOptions {
    pub horizon: Option<f64>,
    pub proximity_radius: Option<f64>,
    pub window: Option<Window>,
    /// Quadrature subdivisions for curved metrics.
    pub subdivisions: usize,
    /// Causal-character samples per segment for curved metrics.
    pub causal_samples: usize,
}

impl Default for DagOptions {
    fn default() -> Self {
        DagOptions { horizon: None, proximity_radius: None, window: None, subdivisions: 64, causal_samples: 8 }
    }
}

impl DagOptions {
    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_proximity_radius(mut self, radius: f64) -> Self {
        self.proximity_radius = Some(radius);
        self
    }
}

#[derive(Debug, Clone)]
pub struct CausalGraph {
    points: Vec<Point>,
    /// Sorted by `(from, to)`.
    edges: Vec<Edge>,
    out_start: Vec<usize>,
    /// Edge indices grouped by target.
    in_edges: Vec<usize>,
    in_start: Vec<usize>,
    proximity: Vec<(NodeId, NodeId)>,
    proximity_adj: Vec<Vec<NodeId>>,
    topo: Option<Vec<NodeId>>,
    meta: GraphMeta,
}

impl CausalGraph {
    /// Assembles a graph, quantizing weights and keeping the heaviest of any
    /// parallel edges.
    pub fn from_parts(
        points: Vec<Point>,
        edges: Vec<Edge>,
        proximity: Vec<(NodeId, NodeId)>,
        meta: GraphMeta,
    ) -> Result<Self> {
        let n = points.len();
        let mut best: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        for e in edges {
            if e.from >= n || e.to >= n || e.from == e.to {
                return Err(Error::Argument(format!("invalid edge {} -> {}", e.from, e.to)));
            }
            if !(e.weight >= 0.0) || !e.weight.is_finite() {
                return Err(Error::Argument(format!("edge weight {} must be finite and >= 0", e.weight)));
            }
            let w = quantize(e.weight);
            best.entry((e.from, e.to)).and_modify(|old| *old = old.max(w)).or_insert(w);
        }
        let edges: Vec<Edge> = best.into_iter().map(|((from, to), weight)| Edge { from, to, weight }).collect();

        let mut out_start = vec![0usize; n + 1];
        for e in &edges {
            out_start[e.from + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
        }
        let mut in_start = vec![0usize; n + 1];
        for e in &edges {
            in_start[e.to + 1] += 1;
        }
        for i in 0..n {
            in_start[i + 1] += in_start[i];
        }
        let mut fill = in_start.clone();
        let mut in_edges = vec![0usize; edges.len()];
        for (k, e) in edges.iter().enumerate() {
            in_edges[fill[e.to]] = k;
            fill[e.to] += 1;
        }

        let mut prox: Vec<(NodeId, NodeId)> = proximity
            .into_iter()
            .filter(|&(a, b)| a != b && a < n && b < n)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        prox.sort_unstable();
        prox.dedup();
        let mut proximity_adj = vec![Vec::new(); n];
        for &(a, b) in &prox {
            proximity_adj[a].push(b);
            proximity_adj[b].push(a);
        }

        let mut graph = CausalGraph {
            points,
            edges,
            out_start,
            in_edges,
            in_start,
            proximity: prox,
            proximity_adj,
            topo: None,
            meta,
        };
        graph.topo = graph.kahn();
        Ok(graph)
    }

    fn kahn(&self) -> Option<Vec<NodeId>> {
        let n = self.len();
        let mut indegree: Vec<usize> = (0..n).map(|v| self.in_start[v + 1] - self.in_start[v]).collect();
        let mut ready: Vec<NodeId> = (0..n).filter(|&v| indegree[v] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop() {
            order.push(u);
            for e in self.out_edges(u).iter().rev() {
                indegree[e.to] -= 1;
                if indegree[e.to] == 0 {
                    ready.push(e.to);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, id: NodeId) -> Point {
        self.points[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, u: NodeId) -> &[Edge] {
        &self.edges[self.out_start[u]..self.out_start[u + 1]]
    }

    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edges[self.in_start[v]..self.in_start[v + 1]].iter().map(move |&k| &self.edges[k])
    }

    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let out = self.out_edges(u);
        out.binary_search_by_key(&v, |e| e.to).ok().map(|k| out[k].weight)
    }

    pub fn proximity_edges(&self) -> &[(NodeId, NodeId)] {
        &self.proximity
    }

    pub fn proximity_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.proximity_adj[u]
    }

    pub fn has_proximity(&self) -> bool {
        !self.proximity.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.topo.is_none()
    }

    pub fn topo_order(&self) -> Result<&[NodeId]> {
        self.topo.as_deref().ok_or(Error::Cyclic)
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    /// Records seed and density or step of the sampling that produced the nodes.
    pub fn set_sampling(&mut self, spec: &SamplingSpec) {
        self.meta.seed = Some(spec.seed);
        match spec.mode {
            SamplingMode::Grid { step } => self.meta.step = Some(step),
            SamplingMode::Sprinkle { density } => self.meta.density = Some(density),
        }
        self.meta.window = Some(spec.window);
    }

    pub fn model(&self) -> &MetricModel {
        &self.meta.model
    }

    pub fn node_id(&self, id: NodeId) -> Result<NodeId> {
        if id < self.len() {
            Ok(id)
        } else {
            Err(Error::Argument(format!("node {id} out of range (graph has {} nodes)", self.len())))
        }
    }

    /// Node closest to `p` in coordinate distance; ties go to the lower id.
    pub fn nearest_node(&self, p: Point) -> NodeId {
        let model = &self.meta.model;
        let mut best = (f64::INFINITY, 0);
        for (id, &q) in self.points.iter().enumerate() {
            let d = model.coordinate_distance(p, q);
            if d < best.0 {
                best = (d, id);
            }
        }
        best.1
    }

    /// Node at exactly `p`, if any.
    pub fn find_node(&self, p: Point) -> Option<NodeId> {
        let p = self.meta.model.normalize(p);
        self.points.iter().position(|&q| q == p)
    }

    /// A directed cycle as a node list `v0 -> v1 -> ... -> v0`, if one exists.
    pub fn find_cycle(&self) -> Option<Vec<NodeId>> {
        if self.topo.is_some() {
            return None;
        }
        let n = self.len();
        // nodes left over by Kahn's algorithm all have a leftover predecessor
        let mut indegree: Vec<usize> = (0..n).map(|v| self.in_start[v + 1] - self.in_start[v]).collect();
        let mut removed = vec![false; n];
        let mut ready: Vec<NodeId> = (0..n).filter(|&v| indegree[v] == 0).collect();
        while let Some(u) = ready.pop() {
            removed[u] = true;
            for e in self.out_edges(u) {
                indegree[e.to] -= 1;
                if indegree[e.to] == 0 {
                    ready.push(e.to);
                }
            }
        }
        let start = (0..n).find(|&v| !removed[v])?;
        let mut seen = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut v = start;
        while seen[v] == usize::MAX {
            seen[v] = walk.len();
            walk.push(v);
            v = self.in_edges(v).map(|e| e.from).find(|&u| !removed[u])?;
        }
        let mut cycle: Vec<NodeId> = walk[seen[v]..].to_vec();
        cycle.reverse();
        Some(cycle)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self.points.iter().enumerate().map(|(i, p)| (i, p[0], p[1])).collect(),
            edges: self.edges.iter().map(|e| (e.from, e.to, e.weight)).collect(),
            proximity: self.proximity.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn from_file(file: GraphFile) -> Result<Self> {
        let mut points = vec![[f64::NAN; 2]; file.nodes.len()];
        for &(id, a, b) in &file.nodes {
            if id >= points.len() {
                return Err(Error::Argument(format!("node id {id} is not dense")));
            }
            points[id] = [a, b];
        }
        let edges = file.edges.iter().map(|&(from, to, weight)| Edge { from, to, weight }).collect();
        Self::from_parts(points, edges, file.proximity, file.meta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_file(file)
    }
}

/// On-disk graph: `{nodes:[[id,x0,x1]...], edges:[[u,v,w]...], proximity:[[u,v]...], meta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<(NodeId, f64, f64)>,
    pub edges: Vec<(NodeId, NodeId, f64)>,
    pub proximity: Vec<(NodeId, NodeId)>,
    pub meta: GraphMeta,
}

fn bounding_window(points: &[Point]) -> Window {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    for i in 0..2 {
        if hi[i] <= lo[i] {
            hi[i] = lo[i] + 1.0;
        }
    }
    Window::new(lo, hi)
}

/// For each node, the nodes within `radius` (excluding itself), via uniform
/// bucketing. Periodic models and unbounded radii fall back to all pairs.
fn candidates(model: &MetricModel, points: &[Point], radius: f64) -> Vec<Vec<NodeId>> {
    let n = points.len();
    let all_pairs = model.period().is_some() || !radius.is_finite();
    if all_pairs {
        return (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && model.coordinate_distance(points[i], points[j]) <= radius)
                    .collect()
            })
            .collect();
    }
    let bw = bounding_window(points);
    let cell = |p: Point| -> (i64, i64) {
        (((p[0] - bw.lo[0]) / radius).floor() as i64, ((p[1] - bw.lo[1]) / radius).floor() as i64)
    };
    let mut buckets: BTreeMap<(i64, i64), Vec<NodeId>> = BTreeMap::new();
    for (i, &p) in points.iter().enumerate() {
        buckets.entry(cell(p)).or_default().push(i);
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let (cx, cy) = cell(points[i]);
            let mut out = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(bucket) = buckets.get(&(cx + dx, cy + dy)) {
                        for &j in bucket {
                            let d = (points[j][0] - points[i][0]).hypot(points[j][1] - points[i][1]);
                            if j != i && d <= radius {
                                out.push(j);
                            }
                        }
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}

/// Builds the causal DAG: an edge `u -> v` for every visible, future-directed
/// causal straight segment of coordinate length at most the horizon, weighted
/// by its proper time; plus undirected proximity edges.
pub fn build_causal_dag(model: &MetricModel, nodes: Vec<Point>, options: &DagOptions) -> Result<CausalGraph> {
    if nodes.is_empty() {
        return Err(Error::Sampling("no nodes".into()));
    }
    if let Some(&p) = nodes.iter().find(|&&p| !model.domain_contains(p)) {
        return Err(Error::Domain(p[0], p[1]));
    }
    let nodes: Vec<Point> = nodes.into_iter().map(|p| model.normalize(p)).collect();
    let window = options.window.unwrap_or_else(|| bounding_window(&nodes));
    let spacing = mean_spacing(&window, nodes.len());
    let horizon = options.horizon.unwrap_or(4.0 * spacing);
    let proximity_radius = options.proximity_radius.unwrap_or(1.5 * spacing);
    if !(horizon > 0.0) || !(proximity_radius >= 0.0) {
        return Err(Error::Argument("horizon and proximity radius must be positive".into()));
    }

    let near = candidates(model, &nodes, horizon);
    let edges: Vec<Edge> = near
        .par_iter()
        .enumerate()
        .map(|(i, js)| {
            let p = nodes[i];
            let mut out = Vec::new();
            for &j in js {
                let mut best: Option<f64> = None;
                for q in model.lifts(p, nodes[j]) {
                    let d = (q[0] - p[0]).hypot(q[1] - p[1]);
                    if d > horizon || !model.segment_future_causal(p, q, options.causal_samples) {
                        continue;
                    }
                    let w = model.segment_length(p, q, options.subdivisions);
                    best = Some(best.map_or(w, |b: f64| b.max(w)));
                }
                if let Some(weight) = best {
                    out.push(Edge { from: i, to: j, weight });
                }
            }
            out
        })
        .flatten()
        .collect();

    let proximity: Vec<(NodeId, NodeId)> = candidates(model, &nodes, proximity_radius)
        .into_iter()
        .enumerate()
        .flat_map(|(i, js)| js.into_iter().filter(move |&j| j > i).map(move |j| (i, j)))
        .collect();

    let mut meta = GraphMeta::new(model.clone());
    meta.horizon = horizon;
    meta.proximity_radius = proximity_radius;
    meta.window = Some(window);
    CausalGraph::from_parts(nodes, edges, proximity, meta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleProbeRow {
    pub delta: f64,
    pub cycle_found: bool,
    pub witness: Vec<NodeId>,
    pub witness_points: Vec<Point>,
}

/// Rebuilds the graph on `nodes` with cones widened by each `delta` and
/// reports whether a causal cycle appears.
pub fn stable_causality_probe(
    model: &MetricModel,
    nodes: &[Point],
    deltas: &[f64],
    options: &DagOptions,
) -> Result<Vec<CycleProbeRow>> {
    deltas
        .iter()
        .map(|&delta| {
            let widened = widen_cones(model, delta)?;
            let graph = build_causal_dag(&widened, nodes.to_vec(), options)?;
            let witness = graph.find_cycle().unwrap_or_default();
            Ok(CycleProbeRow {
                delta,
                cycle_found: !witness.is_empty(),
                witness_points: witness.iter().map(|&v| graph.point(v)).collect(),
                witness,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_points, SamplingSpec};

    fn edge(from: NodeId, to: NodeId, weight: f64) -> Edge {
        Edge { from, to, weight }
    }

    /// Independent DFS cycle check (white/grey/black colouring).
    fn has_cycle_dfs(g: &CausalGraph) -> bool {
        fn visit(g: &CausalGraph, u: NodeId, colour: &mut [u8]) -> bool {
            colour[u] = 1;
            for e in g.out_edges(u) {
                if colour[e.to] == 1 || (colour[e.to] == 0 && visit(g, e.to, colour)) {
                    return true;
                }
            }
            colour[u] = 2;
            false
        }
        let mut colour = vec![0u8; g.len()];
        (0..g.len()).any(|u| colour[u] == 0 && visit(g, u, &mut colour))
    }

    #[test]
    fn unit_timelike_edge() {
        let g = build_causal_dag(&MetricModel::minkowski(), vec![[0.0, 0.0], [1.0, 0.0]], &DagOptions::default().with_horizon(2.0))
            .unwrap();
        assert_eq!(g.edges(), &[edge(0, 1, 1.0)]);
    }

    #[test]
    fn spacelike_pair_has_no_edge() {
        let g = build_causal_dag(&MetricModel::minkowski(), vec![[0.0, 0.0], [1.0, 2.0]], &DagOptions::default().with_horizon(5.0))
            .unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn sprinkled_minkowski_is_acyclic() {
        let window = Window::new([0.0, 0.0], [1.0, 1.0]);
        let pts = sample_points(&MetricModel::minkowski(), &SamplingSpec::sprinkle(300.0, window, 11)).unwrap();
        let g = build_causal_dag(&MetricModel::minkowski(), pts, &DagOptions::default().with_window(window)).unwrap();
        assert!(!has_cycle_dfs(&g));
        let order = g.topo_order().unwrap();
        let mut pos = vec![0; g.len()];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        assert!(g.edges().iter().all(|e| pos[e.from] < pos[e.to]));
    }

    #[test]
    fn widened_minkowski_stays_acyclic() {
        let window = Window::new([0.0, 0.0], [1.0, 1.0]);
        let pts = sample_points(&MetricModel::minkowski(), &SamplingSpec::grid(0.1, window)).unwrap();
        let model = widen_cones(&MetricModel::minkowski(), 0.1).unwrap();
        let g = build_causal_dag(&model, pts, &DagOptions::default()).unwrap();
        assert!(!g.is_cyclic());
        assert!(!has_cycle_dfs(&g));
    }

    #[test]
    fn zero_widening_leaves_graph_unchanged() {
        let window = Window::new([0.0, 0.0], [1.0, 1.0]);
        let pts = sample_points(&MetricModel::minkowski(), &SamplingSpec::grid(0.1, window)).unwrap();
        let a = build_causal_dag(&MetricModel::minkowski(), pts.clone(), &DagOptions::default()).unwrap();
        let b = build_causal_dag(&widen_cones(&MetricModel::minkowski(), 0.0).unwrap(), pts, &DagOptions::default()).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn cycle_witness_is_a_cycle() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]];
        let g = CausalGraph::from_parts(
            pts,
            vec![edge(0, 1, 1.0), edge(1, 2, 1.0), edge(2, 3, 1.0), edge(3, 1, 1.0)],
            vec![],
            GraphMeta::new(MetricModel::minkowski()),
        )
        .unwrap();
        assert!(g.is_cyclic());
        assert!(matches!(g.topo_order(), Err(Error::Cyclic)));
        let cycle = g.find_cycle().unwrap();
        assert_eq!(cycle.len(), 3);
        for k in 0..cycle.len() {
            assert!(g.edge_weight(cycle[k], cycle[(k + 1) % cycle.len()]).is_some());
        }
    }

    #[test]
    fn weights_are_quantized_and_parallel_edges_merge() {
        let g = CausalGraph::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0]],
            vec![edge(0, 1, 0.1), edge(0, 1, 0.3)],
            vec![],
            GraphMeta::new(MetricModel::minkowski()),
        )
        .unwrap();
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].weight, quantize(0.3));
        assert!((g.edges()[0].weight - 0.3).abs() < 1e-12);
        let bad = CausalGraph::from_parts(vec![[0.0, 0.0]; 2], vec![edge(0, 1, -1.0)], vec![], GraphMeta::new(MetricModel::minkowski()));
        assert!(bad.is_err());
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let window = Window::new([0.0, -0.5], [1.0, 0.5]);
        let pts = sample_points(&MetricModel::minkowski(), &SamplingSpec::sprinkle(60.0, window, 5)).unwrap();
        let g = build_causal_dag(&MetricModel::minkowski(), pts, &DagOptions::default().with_window(window)).unwrap();
        let text = serde_json::to_string(&g.to_file()).unwrap();
        let back = CausalGraph::from_file(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.points(), g.points());
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.proximity_edges(), g.proximity_edges());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(value["nodes"][0].as_array().unwrap().len() == 3);
        assert!(value["edges"][0].as_array().unwrap().len() == 3);
        assert!(value["meta"]["model"]["id"] == "minkowski2d");
    }

    #[test]
    fn slit_blocks_edges() {
        let model = MetricModel::slit_minkowski();
        let g = build_causal_dag(&model, vec![[0.0, -1.0], [0.0, 1.0], [2.0, -1.0], [2.0, 1.0]], &DagOptions::default().with_horizon(3.0))
            .unwrap();
        assert!(g.edge_weight(0, 1).is_none());
        assert_eq!(g.edge_weight(2, 3), Some(2.0));
    }

    #[test]
    fn cylinder_edges_cross_the_seam() {
        let model = MetricModel::slit_cylinder();
        let g = build_causal_dag(&model, vec![[3.0, 0.0], [-3.0, 0.0]], &DagOptions::default().with_horizon(1.0)).unwrap();
        let w = g.edge_weight(0, 1).unwrap();
        assert!((w - (2.0 * std::f64::consts::PI - 6.0)).abs() < 1e-12);
        assert!(g.edge_weight(1, 0).is_none());
    }
}
