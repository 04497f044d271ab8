//! Seeded corpus of sprinkled Minkowski DAGs with query pairs, the LP
//! oracle for the distance formula, and the edge/pair steepness comparison.

use causal_lab::achronal::{build_splitting_surface, chronological_future};
use causal_lab::distance::{longest_path_distance, DistanceTable};
use causal_lab::graph::{build_causal_dag, DagOptions};
use causal_lab::sampling::sample_points;
use causal_lab::timefn::{
    check_reverse_lipschitz_with, dual_objective, dual_potential, edge_violations, time_function_from_surface, Provenance,
};
use causal_lab::{CausalGraph, MetricModel, NodeId, NodeSet, SamplingSpec, ScalarField, SetTag, Window};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::CorpusSpec;
use crate::error::{CliError, Result};

/// Share of query pairs drawn with `q` in the causal future of `p`.
const RELATED_SHARE: f64 = 0.75;
const MAX_RESAMPLES: u64 = 1000;

pub struct CorpusGraph {
    pub graph: CausalGraph,
    pub pairs: Vec<(NodeId, NodeId)>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sprinkles until the node count is between 2 and `max_nodes`.
fn sprinkle_dag(density: f64, window: Window, max_nodes: usize, rng: &mut ChaCha8Rng) -> Result<CausalGraph> {
    let model = MetricModel::minkowski();
    for _ in 0..MAX_RESAMPLES {
        let spec = SamplingSpec::sprinkle(density, window, rng.gen());
        let points = match sample_points(&model, &spec) {
            Ok(p) => p,
            Err(causal_lab::Error::Sampling(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if points.len() < 2 || points.len() > max_nodes {
            continue;
        }
        let mut graph = build_causal_dag(&model, points, &DagOptions::default().with_window(window))?;
        graph.set_sampling(&spec);
        return Ok(graph);
    }
    Err(CliError::Argument(format!("density {density} never produced between 2 and {max_nodes} nodes")))
}

fn reachable_from(graph: &CausalGraph, p: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; graph.len()];
    let mut stack = vec![p];
    seen[p] = true;
    while let Some(u) = stack.pop() {
        for e in graph.out_edges(u) {
            if !seen[e.to] {
                seen[e.to] = true;
                stack.push(e.to);
            }
        }
    }
    (0..graph.len()).filter(|&v| v != p && seen[v]).collect()
}

fn draw_pairs(graph: &CausalGraph, count: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let n = graph.len();
    (0..count)
        .map(|_| {
            let p = rng.gen_range(0..n);
            if rng.gen_bool(RELATED_SHARE) {
                if let Some(&q) = reachable_from(graph, p).choose(rng) {
                    return (p, q);
                }
            }
            (p, rng.gen_range(0..n))
        })
        .collect()
}

pub fn build_corpus(spec: &CorpusSpec, seed: u64) -> Result<Vec<CorpusGraph>> {
    (0..spec.graphs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let graph = sprinkle_dag(spec.density, spec.window, spec.max_nodes, &mut rng)?;
            let pairs = draw_pairs(&graph, spec.pairs, &mut rng);
            Ok(CorpusGraph { graph, pairs })
        })
        .collect()
}

/// Tiny DAGs for the LP oracle, on streams disjoint from the main corpus.
pub fn build_small_corpus(spec: &CorpusSpec, seed: u64) -> Result<Vec<CausalGraph>> {
    (0..spec.small_graphs as u64)
        .into_par_iter()
        .map(|i| sprinkle_dag(spec.small_density, spec.window, spec.small_max_nodes, &mut rng_for(seed, (1 << 32) + i)))
        .collect()
}

/// `min z` subject to `z >= f_q - f_p`, `z >= 0`, `f_p = 0` and
/// `f_v - f_u >= w_uv` on every edge, solved as a linear program.
pub fn lp_distance(graph: &CausalGraph, p: NodeId, q: NodeId) -> Result<f64> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let z = lp.add_var(1.0, (0.0, f64::INFINITY));
    let f: Vec<_> = (0..graph.len())
        .map(|v| if v == p { lp.add_var(0.0, (0.0, 0.0)) } else { lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)) })
        .collect();
    if q != p {
        lp.add_constraint([(z, 1.0), (f[q], -1.0)], ComparisonOp::Ge, 0.0);
    }
    for e in graph.edges() {
        lp.add_constraint([(f[e.to], 1.0), (f[e.from], -1.0)], ComparisonOp::Ge, e.weight);
    }
    let solution = lp.solve().map_err(|e| CliError::Argument(format!("LP oracle failed: {e}")))?;
    Ok(solution.objective())
}

pub struct DualityRow {
    pub graph: usize,
    pub p: NodeId,
    pub q: NodeId,
    pub longest_path: f64,
    pub dual_value: f64,
    /// `f*` satisfies every edge constraint and attains `dual_value`.
    pub certified: bool,
}

impl DualityRow {
    pub fn abs_diff(&self) -> f64 {
        (self.longest_path - self.dual_value).abs()
    }
}

pub fn duality_rows(corpus: &[CorpusGraph]) -> Result<Vec<DualityRow>> {
    let per_graph: Vec<Vec<DualityRow>> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            item.pairs
                .iter()
                .map(|&(p, q)| {
                    let longest_path = longest_path_distance(&item.graph, p, q)?;
                    let (field, dual_value) = dual_potential(&item.graph, p, q)?;
                    let certified = edge_violations(&item.graph, &field).is_empty()
                        && field.values[p] == 0.0
                        && dual_objective(&field, p, q) == dual_value;
                    Ok(DualityRow { graph: i, p, q, longest_path, dual_value, certified })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_graph.into_iter().flatten().collect())
}

pub struct LpRow {
    pub graph: usize,
    pub p: NodeId,
    pub q: NodeId,
    pub longest_path: f64,
    pub lp_value: f64,
}

/// Every ordered pair of every small DAG against the LP oracle.
pub fn lp_rows(graphs: &[CausalGraph]) -> Result<Vec<LpRow>> {
    let per_graph: Vec<Vec<LpRow>> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let mut rows = Vec::new();
            for p in 0..g.len() {
                for q in 0..g.len() {
                    rows.push(LpRow { graph: i, p, q, longest_path: longest_path_distance(g, p, q)?, lp_value: lp_distance(g, p, q)? });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_graph.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EquivalenceTally {
    pub fields: usize,
    pub edge_steep: usize,
    pub pair_steep: usize,
    /// Fields where the edge form and the `J^+` pair form disagree.
    pub counterexamples: usize,
    /// Fields where the edge form and the chronological pair form disagree.
    pub chronological_counterexamples: usize,
    pub pairs_checked: usize,
}

impl EquivalenceTally {
    fn add(&mut self, other: EquivalenceTally) {
        self.fields += other.fields;
        self.edge_steep += other.edge_steep;
        self.pair_steep += other.pair_steep;
        self.counterexamples += other.counterexamples;
        self.chronological_counterexamples += other.chronological_counterexamples;
        self.pairs_checked += other.pairs_checked;
    }
}

/// Steep, non-steep and borderline fields on one graph: the surface time
/// function, each pair's `f*`, `0.9 f*`, `f*` with one node lowered, and zero.
fn test_fields(item: &CorpusGraph, rng: &mut ChaCha8Rng) -> Result<Vec<ScalarField>> {
    let g = &item.graph;
    let mut fields = Vec::new();
    let start = NodeSet::new([rng.gen_range(0..g.len())], SetTag::Generic);
    let surface = build_splitting_surface(g, &chronological_future(g, &start)?)?;
    if surface.residue.is_empty() {
        fields.push(time_function_from_surface(g, &surface.surface)?);
    }
    let mean_weight = g.edges().iter().map(|e| e.weight).sum::<f64>() / g.edges().len().max(1) as f64;
    for &(p, q) in &item.pairs {
        let (star, _) = dual_potential(g, p, q)?;
        fields.push(star.scaled(0.9));
        let mut lowered = star.clone();
        lowered.values[rng.gen_range(0..g.len())] -= rng.gen_range(0.0..1.0) * mean_weight;
        lowered.provenance = Provenance::External;
        fields.push(lowered);
        fields.push(star);
    }
    fields.push(ScalarField::constant(g, 0.0));
    Ok(fields)
}

pub fn lipschitz_equivalence(corpus: &[CorpusGraph], seed: u64) -> Result<EquivalenceTally> {
    let tallies: Vec<EquivalenceTally> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let mut rng = rng_for(seed ^ 0x5eed, i as u64);
            let table = DistanceTable::all_pairs(&item.graph)?;
            let mut tally = EquivalenceTally::default();
            for field in test_fields(item, &mut rng)? {
                let report = check_reverse_lipschitz_with(&item.graph, &table, &field)?;
                let (edge, pair, chrono) = (report.edge_steep(), report.pair_steep(), report.chronological == 0);
                tally.add(EquivalenceTally {
                    fields: 1,
                    edge_steep: edge as usize,
                    pair_steep: pair as usize,
                    counterexamples: (edge != pair) as usize,
                    chronological_counterexamples: (edge != chrono) as usize,
                    pairs_checked: report.pairs_checked,
                });
            }
            Ok(tally)
        })
        .collect::<Result<_>>()?;
    let mut total = EquivalenceTally::default();
    for t in tallies {
        total.add(t);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> CorpusSpec {
        CorpusSpec {
            graphs: 3,
            density: 60.0,
            window: Window::new([0.0, 0.0], [1.0, 1.0]),
            max_nodes: 100,
            pairs: 5,
            small_graphs: 3,
            small_density: 10.0,
            small_max_nodes: 12,
        }
    }

    #[test]
    fn corpus_is_seeded() {
        let a = build_corpus(&spec(), 4).unwrap();
        let b = build_corpus(&spec(), 4).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.graph.points(), y.graph.points());
            assert_eq!(x.pairs, y.pairs);
            assert!(x.graph.len() <= 100);
        }
    }

    #[test]
    fn lp_matches_longest_path_on_small_dags() {
        for g in build_small_corpus(&spec(), 2).unwrap() {
            assert!(g.len() <= 12);
            for p in 0..g.len() {
                for q in 0..g.len() {
                    let lp = lp_distance(&g, p, q).unwrap();
                    assert!((lp - longest_path_distance(&g, p, q).unwrap()).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn no_equivalence_counterexamples() {
        let corpus = build_corpus(&spec(), 9).unwrap();
        let t = lipschitz_equivalence(&corpus, 9).unwrap();
        assert_eq!(t.counterexamples, 0);
        assert_eq!(t.chronological_counterexamples, 0);
        assert!(t.edge_steep > 0 && t.edge_steep < t.fields);
    }
}
