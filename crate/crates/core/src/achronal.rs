//! Chronological futures, achronal sets, splitting surfaces and hattings.

use serde::{Deserialize, Serialize};

use crate::distance::{sweep_from, sweep_to, DistanceTable, RefinementLadder, ALL_PAIRS_LIMIT};
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeId};
use crate::metric::Point;
use crate::sampling::mean_spacing;

/// Iteration cap for [`build_splitting_surface`].
pub const SURFACE_ITERATION_CAP: usize = 128;
/// Witness candidates per direction in [`detect_divergent_chains`].
pub const WITNESS_CANDIDATES: usize = 8;
/// Coordinate tolerance when locating a witness on each ladder level.
pub const WITNESS_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SetTag {
    #[default]
    Generic,
    Achronal,
    FutureSet,
    PastSet,
    Surface,
    Hatting,
}

/// Sorted, duplicate-free set of node ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct NodeSet {
    #[serde(default)]
    pub tag: SetTag,
    nodes: Vec<NodeId>,
}

impl NodeSet {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>, tag: SetTag) -> Self {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        NodeSet { tag, nodes }
    }

    pub fn empty(tag: SetTag) -> Self {
        NodeSet { tag, nodes: Vec::new() }
    }

    pub fn from_mask(mask: &[bool], tag: SetTag) -> Self {
        NodeSet { tag, nodes: (0..mask.len()).filter(|&v| mask[v]).collect() }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.nodes {
            if v < n {
                mask[v] = true;
            }
        }
        mask
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.nodes.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet::new(self.nodes.iter().chain(&other.nodes).copied(), self.tag)
    }

    pub fn with_tag(mut self, tag: SetTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn validate(&self, graph: &CausalGraph) -> Result<()> {
        match self.nodes.last() {
            Some(&v) if v >= graph.len() => Err(Error::Argument(format!("node {v} out of range"))),
            _ => Ok(()),
        }
    }
}

/// Nodes reachable from the mask by a path of positive weight (`forward`), or
/// reaching it by one.
fn chronological_mask(graph: &CausalGraph, from: &[bool], forward: bool) -> Result<Vec<bool>> {
    let order = graph.topo_order()?;
    let n = graph.len();
    let mut reach = from.to_vec();
    let mut chrono = vec![false; n];
    let mut visit = |v: NodeId, neighbours: &mut dyn Iterator<Item = (NodeId, f64)>| {
        for (u, w) in neighbours {
            if chrono[u] || (reach[u] && w > 0.0) {
                chrono[v] = true;
            }
            if reach[u] {
                reach[v] = true;
            }
        }
    };
    if forward {
        for &v in order {
            visit(v, &mut graph.in_edges(v).map(|e| (e.from, e.weight)));
        }
    } else {
        for &v in order.iter().rev() {
            visit(v, &mut graph.out_edges(v).iter().map(|e| (e.to, e.weight)));
        }
    }
    Ok(chrono)
}

/// For each node `x`, whether `I^+(x)` (`forward`) or `I^-(x)` leaves the mask.
fn escapes(graph: &CausalGraph, inside: &[bool], forward: bool) -> Result<Vec<bool>> {
    let outside: Vec<bool> = inside.iter().map(|&b| !b).collect();
    // I^+(x) meets the outside iff x is in I^-(outside)
    chronological_mask(graph, &outside, !forward)
}

/// `I^+(U)`: nodes reachable from `U` by a causal path of positive weight.
pub fn chronological_future(graph: &CausalGraph, set: &NodeSet) -> Result<NodeSet> {
    set.validate(graph)?;
    Ok(NodeSet::from_mask(&chronological_mask(graph, &set.mask(graph.len()), true)?, SetTag::FutureSet))
}

/// `I^-(U)`.
pub fn chronological_past(graph: &CausalGraph, set: &NodeSet) -> Result<NodeSet> {
    set.validate(graph)?;
    Ok(NodeSet::from_mask(&chronological_mask(graph, &set.mask(graph.len()), false)?, SetTag::PastSet))
}

/// `None` if the set is achronal, else a pair `(a, c)` of members with `d(a, c) > 0`.
pub fn achronality_witness(graph: &CausalGraph, set: &NodeSet) -> Result<Option<(NodeId, NodeId)>> {
    set.validate(graph)?;
    let future = chronological_mask(graph, &set.mask(graph.len()), true)?;
    let Some(&c) = set.nodes().iter().find(|&&v| future[v]) else {
        return Ok(None);
    };
    let into_c = sweep_to(graph, &[c])?;
    let a = set.nodes().iter().copied().find(|&a| into_c[a] > 0.0).expect("c has a chronological predecessor in the set");
    Ok(Some((a, c)))
}

pub fn is_achronal(graph: &CausalGraph, set: &NodeSet) -> Result<bool> {
    Ok(achronality_witness(graph, set)?.is_none())
}

fn is_future_closed(graph: &CausalGraph, mask: &[bool]) -> Result<bool> {
    let future = chronological_mask(graph, mask, true)?;
    Ok(future.iter().zip(mask).all(|(&f, &m)| !f || m))
}

fn is_past_closed(graph: &CausalGraph, mask: &[bool]) -> Result<bool> {
    let past = chronological_mask(graph, mask, false)?;
    Ok(past.iter().zip(mask).all(|(&p, &m)| !p || m))
}

/// Discrete boundary: nodes outside `A` with a proximity neighbour inside.
/// For a future set only nodes with `I^+(x) ⊆ A` are kept, for a past set
/// only those with `I^-(x) ⊆ A`, which makes the result achronal.
pub fn boundary(graph: &CausalGraph, set: &NodeSet) -> Result<NodeSet> {
    set.validate(graph)?;
    let n = graph.len();
    let inside = set.mask(n);
    if set.is_empty() || set.len() == n {
        return Ok(NodeSet::empty(SetTag::Achronal));
    }
    if !graph.has_proximity() {
        return Err(Error::Structure("graph has no proximity edges".into()));
    }
    let mut keep: Vec<bool> = (0..n)
        .map(|x| !inside[x] && graph.proximity_neighbors(x).iter().any(|&y| inside[y]))
        .collect();
    if is_future_closed(graph, &inside)? {
        let leaks = escapes(graph, &inside, true)?;
        keep.iter_mut().zip(&leaks).for_each(|(k, &l)| *k &= !l);
    }
    if is_past_closed(graph, &inside)? {
        let leaks = escapes(graph, &inside, false)?;
        keep.iter_mut().zip(&leaks).for_each(|(k, &l)| *k &= !l);
    }
    Ok(NodeSet::from_mask(&keep, SetTag::Achronal))
}

/// Causal boundary of a past set `P`: `{x ∉ P : I^-(x) ⊆ P}`; of a future
/// set `F`: `{x ∉ F : I^+(x) ⊆ F}`.
fn causal_boundary(graph: &CausalGraph, inside: &[bool], of_future: bool) -> Result<Vec<bool>> {
    let leaks = escapes(graph, inside, of_future)?;
    Ok((0..graph.len()).map(|x| !inside[x] && !leaks[x]).collect())
}

/// Nodes whose proximity degree is below 3; their discrete boundary
/// membership is unreliable.
pub fn boundary_unreliable(graph: &CausalGraph) -> NodeSet {
    NodeSet::new((0..graph.len()).filter(|&v| graph.proximity_neighbors(v).len() < 3), SetTag::Generic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub future: NodeSet,
    pub past: NodeSet,
    /// Nodes in none, or more than one, of `I^+(S)`, `S`, `I^-(S)`.
    pub residue: Vec<NodeId>,
}

pub fn split(graph: &CausalGraph, surface: &NodeSet) -> Result<SplitReport> {
    let future = chronological_future(graph, surface)?;
    let past = chronological_past(graph, surface)?;
    let residue = (0..graph.len())
        .filter(|&v| {
            let count = [future.contains(v), surface.contains(v), past.contains(v)].iter().filter(|&&b| b).count();
            count != 1
        })
        .collect();
    Ok(SplitReport { future, past, residue })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceResult {
    pub surface: NodeSet,
    pub iterates: Vec<NodeSet>,
    /// Steps performed, counting the final unchanged one.
    pub iterations: usize,
    pub converged: bool,
    pub residue: Vec<NodeId>,
}

/// Achronal `S ⊇ ∂F0` with every node in exactly one of `I^+(S)`, `S`, `I^-(S)`.
pub fn build_splitting_surface(graph: &CausalGraph, f0: &NodeSet) -> Result<SurfaceResult> {
    build_splitting_surface_seeded(graph, f0, &NodeSet::empty(SetTag::Generic))
}

/// As [`build_splitting_surface`] with `seed` (achronal, on the causal
/// boundary of `F0`) adjoined to the first iterate.
pub fn build_splitting_surface_seeded(graph: &CausalGraph, f0: &NodeSet, seed: &NodeSet) -> Result<SurfaceResult> {
    f0.validate(graph)?;
    seed.validate(graph)?;
    let n = graph.len();
    if !is_future_closed(graph, &f0.mask(n))? {
        return Err(Error::Argument("F0 is not a future set".into()));
    }
    let mut current = boundary(graph, f0)?.union(seed).with_tag(SetTag::Surface);
    if let Some((a, c)) = achronality_witness(graph, &current)? {
        return Err(Error::Construction(format!("iterate 0 is not achronal: {a} precedes {c}")));
    }
    let mut iterates = vec![current.clone()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < SURFACE_ITERATION_CAP {
        iterations += 1;
        let odd = iterations % 2 == 1;
        let mask = current.mask(n);
        let added = if odd {
            causal_boundary(graph, &chronological_mask(graph, &mask, false)?, false)?
        } else {
            causal_boundary(graph, &chronological_mask(graph, &mask, true)?, true)?
        };
        let next = NodeSet::from_mask(&mask.iter().zip(&added).map(|(&a, &b)| a || b).collect::<Vec<_>>(), SetTag::Surface);
        if let Some((a, c)) = achronality_witness(graph, &next)? {
            return Err(Error::Construction(format!("iterate {iterations} is not achronal: {a} precedes {c}")));
        }
        let unchanged = next == current;
        iterates.push(next.clone());
        current = next;
        if unchanged {
            converged = true;
            break;
        }
    }
    let residue = split(graph, &current)?.residue;
    Ok(SurfaceResult { surface: current, iterates, iterations, converged, residue })
}

/// Symmetric difference of `S` and `boundary(I^+(S))`, excluding nodes with
/// unreliable proximity neighbourhoods.
pub fn surface_boundary_mismatch(graph: &CausalGraph, surface: &NodeSet) -> Result<Vec<NodeId>> {
    let rebuilt = boundary(graph, &chronological_future(graph, surface)?)?;
    let unreliable = boundary_unreliable(graph);
    Ok((0..graph.len())
        .filter(|&v| surface.contains(v) != rebuilt.contains(v) && !unreliable.contains(v))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainDirection {
    /// `d(x_k, w)` grows: the chain runs into the past of its witness.
    Future,
    /// `d(w, x_k)` grows.
    Past,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergentChain {
    pub direction: ChainDirection,
    /// One node per ladder level, in that level's graph.
    pub nodes: Vec<NodeId>,
    pub points: Vec<Point>,
    pub witness: Point,
    /// `d(x_k, w)` (future) or `d(w, x_k)` (past) per level.
    pub growth: Vec<f64>,
}

impl DivergentChain {
    pub fn tail_point(&self) -> Point {
        *self.points.last().expect("chains are non-empty")
    }
}

fn level_spacing(graph: &CausalGraph) -> f64 {
    match graph.meta().window {
        Some(w) => mean_spacing(&w, graph.len()),
        None => f64::INFINITY,
    }
}

/// Node at `p`, or the nearest one within `radius`.
fn match_node(graph: &CausalGraph, p: Point, radius: f64) -> Option<NodeId> {
    graph.find_node(p).or_else(|| {
        let v = graph.nearest_node(p);
        (graph.model().coordinate_distance(graph.point(v), p) <= radius).then_some(v)
    })
}

/// Five times the median positive pairwise distance on the coarsest level.
pub fn default_divergence_threshold(ladder: &RefinementLadder) -> Result<f64> {
    let graph = &ladder.levels()[0].graph;
    let sources: Vec<NodeId> = (0..graph.len()).step_by(graph.len().div_ceil(ALL_PAIRS_LIMIT).max(1)).collect();
    let table = DistanceTable::for_sources(graph, &sources)?;
    let mut positive: Vec<f64> = sources
        .iter()
        .flat_map(|&p| (0..graph.len()).map(move |q| (p, q)))
        .map(|(p, q)| table.get(p, q))
        .filter(|&d| d > 0.0)
        .collect();
    if positive.is_empty() {
        return Ok(f64::INFINITY);
    }
    positive.sort_by(f64::total_cmp);
    Ok(5.0 * positive[positive.len() / 2])
}

/// Finite proxies for divergent sequences. Witnesses are the final-level
/// nodes of highest in-score (longest path ending there) or out-score that
/// are present at the same coordinates on every level; per level the chain node is the one
/// farthest from the witness. A chain is kept when its growth is strictly
/// increasing, ends above `threshold`, and its nodes converge in coordinates.
pub fn detect_divergent_chains(ladder: &RefinementLadder, threshold: f64) -> Result<Vec<DivergentChain>> {
    let levels = ladder.levels();
    let finest = &ladder.finest().graph;
    let spacings: Vec<f64> = levels.iter().map(|l| level_spacing(&l.graph)).collect();
    let mut chains = Vec::new();
    for direction in [ChainDirection::Future, ChainDirection::Past] {
        let score = match direction {
            ChainDirection::Future => depth(finest, true)?,
            ChainDirection::Past => depth(finest, false)?,
        };
        let mut order: Vec<NodeId> = (0..finest.len()).collect();
        order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
        let mut tried = 0;
        for w in order {
            if tried == WITNESS_CANDIDATES || score[w] <= 0.0 {
                break;
            }
            let witness = finest.point(w);
            // the witness is a fixed point of spacetime: it must sit at the
            // same coordinates on every level
            let matched: Option<Vec<NodeId>> =
                levels.iter().map(|l| match_node(&l.graph, witness, WITNESS_MATCH)).collect();
            let Some(matched) = matched else { continue };
            tried += 1;
            if let Some(chain) = trace_chain(ladder, &matched, witness, direction, &spacings)? {
                if chain.growth.last().is_some_and(|&g| g > threshold) {
                    chains.push(chain);
                }
            }
        }
    }
    Ok(chains)
}

/// Longest path ending at (`incoming`) or starting from each node.
pub(crate) fn depth(graph: &CausalGraph, incoming: bool) -> Result<Vec<f64>> {
    let all: Vec<NodeId> = (0..graph.len()).collect();
    let raw = if incoming { sweep_from(graph, &all)? } else { sweep_to(graph, &all)? };
    Ok(raw.into_iter().map(|d| d.max(0.0)).collect())
}

fn trace_chain(
    ladder: &RefinementLadder,
    witnesses: &[NodeId],
    witness: Point,
    direction: ChainDirection,
    spacings: &[f64],
) -> Result<Option<DivergentChain>> {
    let mut nodes = Vec::new();
    let mut points = Vec::new();
    let mut growth = Vec::new();
    for (level, &w) in ladder.levels().iter().zip(witnesses) {
        let field = match direction {
            ChainDirection::Future => sweep_to(&level.graph, &[w])?,
            ChainDirection::Past => sweep_from(&level.graph, &[w])?,
        };
        let (best, &d) = field
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty graph");
        nodes.push(best);
        points.push(level.graph.point(best));
        growth.push(d.max(0.0));
    }
    if growth.windows(2).any(|g| !(g[1] > g[0])) {
        return Ok(None);
    }
    let model = ladder.finest().graph.model();
    let tail = *points.last().expect("non-empty ladder");
    let gaps: Vec<f64> = points.iter().map(|&p| model.coordinate_distance(p, tail)).collect();
    let converging = (1..gaps.len()).all(|k| gaps[k] <= gaps[k - 1] + spacings[k]);
    Ok(converging.then_some(DivergentChain { direction, nodes, points, witness, growth }))
}

fn tail_node(graph: &CausalGraph, chain: &DivergentChain) -> Option<NodeId> {
    match_node(graph, chain.tail_point(), level_spacing(graph))
}

fn witness_node(graph: &CausalGraph, chain: &DivergentChain) -> Result<NodeId> {
    match_node(graph, chain.witness, level_spacing(graph))
        .ok_or_else(|| Error::Construction(format!("witness {:?} not present in graph", chain.witness)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HattingCase {
    Base,
    Adjoin,
    Project,
    Cut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HattingStep {
    pub element: NodeId,
    pub direction: ChainDirection,
    pub case: HattingCase,
    pub added: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HattingResult {
    pub hatting: NodeSet,
    pub steps: Vec<HattingStep>,
}

/// Candidates on `boundary(A)`, falling back to the causal boundary when the
/// proximity boundary misses every admissible node.
fn boundary_candidates(graph: &CausalGraph, a: &[bool], of_future: bool, admissible: &[bool]) -> Result<Vec<NodeId>> {
    let n = graph.len();
    let prox = boundary(graph, &NodeSet::from_mask(a, SetTag::Generic))?;
    let found: Vec<NodeId> = prox.nodes().iter().copied().filter(|&v| admissible[v]).collect();
    if !found.is_empty() {
        return Ok(found);
    }
    let causal = causal_boundary(graph, a, of_future)?;
    Ok((0..n).filter(|&v| causal[v] && admissible[v]).collect())
}

/// Inductive hatting construction over the witnesses of past chains `P` and
/// future chains `F`, processed as `p_0, f_0, p_1, f_1, ...`.
pub fn build_hatting(graph: &CausalGraph, chains: &[DivergentChain]) -> Result<HattingResult> {
    if chains.is_empty() {
        return Err(Error::Argument("no divergent chains".into()));
    }
    let n = graph.len();
    let mut future_w: Vec<NodeId> = Vec::new();
    let mut past_w: Vec<NodeId> = Vec::new();
    for chain in chains {
        let w = witness_node(graph, chain)?;
        let list = match chain.direction {
            ChainDirection::Future => &mut future_w,
            ChainDirection::Past => &mut past_w,
        };
        if !list.contains(&w) {
            list.push(w);
        }
    }
    let tails = |w: NodeId, direction: ChainDirection| -> Vec<NodeId> {
        chains
            .iter()
            .filter(|c| c.direction == direction && witness_node(graph, c).ok() == Some(w))
            .filter_map(|c| tail_node(graph, c))
            .collect()
    };

    let mut order: Vec<(NodeId, ChainDirection)> = Vec::new();
    for k in 0..future_w.len().max(past_w.len()) {
        if let Some(&p) = past_w.get(k) {
            order.push((p, ChainDirection::Past));
        }
        if let Some(&f) = future_w.get(k) {
            order.push((f, ChainDirection::Future));
        }
    }
    let (base, base_dir) = order[0];
    let mut s = vec![false; n];
    s[base] = true;
    let mut steps = vec![HattingStep { element: base, direction: base_dir, case: HattingCase::Base, added: vec![base] }];

    for &(e, direction) in &order[1..] {
        let future_of_s = chronological_mask(graph, &s, true)?;
        let past_of_s = chronological_mask(graph, &s, false)?;
        let forward = direction == ChainDirection::Future;
        // the element lies on the "wrong" side when it is in I^-(S) for a
        // future witness (I^+(S) for a past one)
        let (wrong, other) = if forward { (&past_of_s, &future_of_s) } else { (&future_of_s, &past_of_s) };
        let (case, added) = if !s[e] && !wrong[e] && !other[e] {
            (HattingCase::Adjoin, vec![e])
        } else if s[e] {
            (HattingCase::Adjoin, Vec::new())
        } else if wrong[e] {
            // move along I^±(e) onto ∂I^∓(S), nearest in coordinates
            let beyond = chronological_mask(graph, &index_mask(n, e), forward)?;
            let candidates = boundary_candidates(graph, wrong, !forward, &beyond)?;
            let p = graph.point(e);
            let best = candidates
                .into_iter()
                .min_by(|&a, &b| {
                    let (da, db) = (graph.model().coordinate_distance(graph.point(a), p), graph.model().coordinate_distance(graph.point(b), p));
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .ok_or_else(|| Error::Construction(format!("no projection of node {e} onto the boundary")))?;
            (HattingCase::Project, vec![best])
        } else {
            // all boundary nodes of I^±(S) between the chain tails and e
            let towards_e = chronological_mask(graph, &index_mask(n, e), !forward)?;
            let mut admissible = vec![false; n];
            for t in tails(e, direction) {
                let beyond_tail = chronological_mask(graph, &index_mask(n, t), forward)?;
                for v in 0..n {
                    admissible[v] |= beyond_tail[v] && towards_e[v];
                }
            }
            let cut = boundary_candidates(graph, other, forward, &admissible)?;
            if cut.is_empty() {
                return Err(Error::Construction(format!("no boundary nodes between the chain tails and node {e}")));
            }
            (HattingCase::Cut, cut)
        };
        for &v in &added {
            s[v] = true;
        }
        steps.push(HattingStep { element: e, direction, case, added });
    }
    let hatting = NodeSet::from_mask(&s, SetTag::Hatting);
    if let Some((a, c)) = achronality_witness(graph, &hatting)? {
        return Err(Error::Construction(format!("hatting is not achronal: {a} precedes {c}")));
    }
    Ok(HattingResult { hatting, steps })
}

fn index_mask(n: usize, v: NodeId) -> Vec<bool> {
    let mut m = vec![false; n];
    m[v] = true;
    m
}

/// `H` is achronal, every future chain ends in `I^-(H)` and every past chain
/// in `I^+(H)`. Chain tails are located by coordinates.
pub fn is_hatting(graph: &CausalGraph, hatting: &NodeSet, chains: &[DivergentChain]) -> Result<bool> {
    if hatting.is_empty() || !is_achronal(graph, hatting)? {
        return Ok(false);
    }
    let past = chronological_past(graph, hatting)?;
    let future = chronological_future(graph, hatting)?;
    for chain in chains {
        let Some(t) = tail_node(graph, chain) else { return Ok(false) };
        let ok = match chain.direction {
            ChainDirection::Future => past.contains(t),
            ChainDirection::Past => future.contains(t),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
