//! Runs an [`ExperimentConfig`]: ops execute in order against a store of
//! named artifacts; every op appends check records to the report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use causal_lab::achronal::{
    build_hatting, build_splitting_surface_seeded, chronological_future, default_divergence_threshold,
    detect_divergent_chains, is_achronal, is_hatting, ChainDirection, HattingCase,
};
use causal_lab::distance::{divergence_probe, longest_path_distance, LadderSpec};
use causal_lab::graph::{build_causal_dag, stable_causality_probe, DagOptions};
use causal_lab::sampling::sample_points;
use causal_lab::timefn::{
    check_bound_inequality, check_level_set_hatting, check_reverse_lipschitz, check_steepness, gradient_from_differential,
    level_set, strictly_increasing_on_timelike_edges, time_function_from_surface, BoundStatus, LevelRule, Provenance,
    SteepnessSummary,
};
use causal_lab::{
    CausalGraph, CausalPath, DivergentChain, FrameSpec, MetricModel, NodeSet, Point, RefinementLadder, ScalarField, SetTag,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Op, SetSpec, VerifyCheck};
use crate::corpus::{build_corpus, build_small_corpus, duality_rows, lipschitz_equivalence, lp_rows};
use crate::error::{CliError, Result};
use crate::io::{chains_bytes, field_bytes, graph_bytes, load_set, save_ladder, set_bytes};
use crate::oracle::two_segment_distance;
use crate::report::{CheckRecord, PlotData, Report, RunStamp, Status};

/// Random walk length for the bound-inequality paths.
const BOUND_PATH_EDGES: usize = 8;

/// Named artifacts of one kind; ops default to the most recent one.
struct Store<T> {
    kind: &'static str,
    items: BTreeMap<String, T>,
    latest: Option<String>,
}

impl<T> Store<T> {
    fn new(kind: &'static str) -> Self {
        Store { kind, items: BTreeMap::new(), latest: None }
    }

    fn insert(&mut self, name: String, item: T) {
        self.items.insert(name.clone(), item);
        self.latest = Some(name);
    }

    /// Forgets `name` after a failed stage so later stages cannot pick up a stale artifact.
    fn poison(&mut self, name: &str) {
        self.items.remove(name);
        self.latest = None;
    }

    fn get(&self, name: Option<&str>) -> Result<(&str, &T)> {
        let name = match name {
            Some(n) => n,
            None => self.latest.as_deref().ok_or_else(|| CliError::MissingArtifact(format!("no {} produced yet", self.kind)))?,
        };
        self.items
            .get_key_value(name)
            .map(|(k, v)| (k.as_str(), v))
            .ok_or_else(|| CliError::MissingArtifact(format!("{} `{name}`", self.kind)))
    }
}

struct GraphEntry {
    graph: CausalGraph,
    seconds: f64,
}

struct SetEntry {
    graph: String,
    set: NodeSet,
}

struct FieldEntry {
    graph: String,
    field: ScalarField,
}

struct LadderEntry {
    spec: Option<LadderSpec>,
    ladder: RefinementLadder,
}

struct ChainsEntry {
    graph: String,
    chains: Vec<DivergentChain>,
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    out: PathBuf,
    graphs: Store<GraphEntry>,
    surfaces: Store<SetEntry>,
    sets: Store<SetEntry>,
    fields: Store<FieldEntry>,
    ladders: Store<LadderEntry>,
    chains: Store<ChainsEntry>,
}

fn op_name(name: &Option<String>, kind: &str, index: usize) -> String {
    name.clone().unwrap_or_else(|| format!("{kind}{index}"))
}

impl<'a> Runner<'a> {
    fn write(&self, file: &str, bytes: &[u8], record: &mut CheckRecord) -> Result<()> {
        std::fs::write(self.out.join(file), bytes)?;
        record.artifacts.insert(file.to_string(), crate::report::sha256_hex(bytes));
        Ok(())
    }

    fn add_graph(&mut self, name: String, graph: CausalGraph, seconds: f64, op: &str) -> Result<CheckRecord> {
        let mut rec = CheckRecord::new(format!("graph:{name}"), op, if graph.is_cyclic() { Status::Inconclusive } else { Status::Pass })
            .value("nodes", graph.len() as f64)
            .value("edges", graph.edges().len() as f64)
            .value("proximity_edges", graph.proximity_edges().len() as f64)
            .value("horizon", graph.meta().horizon);
        if graph.is_cyclic() {
            rec = rec.message("graph contains a causal cycle");
        }
        self.write(&format!("graph-{name}.json"), &graph_bytes(&graph)?, &mut rec)?;
        self.graphs.insert(name, GraphEntry { graph, seconds });
        Ok(rec)
    }

    fn resolve_set(&self, graph_name: &str, graph: &CausalGraph, spec: &SetSpec) -> Result<NodeSet> {
        let set = match spec {
            SetSpec::Point { point } => NodeSet::new([graph.nearest_node(*point)], SetTag::Generic),
            SetSpec::Nodes { nodes } => NodeSet::new(nodes.iter().copied(), SetTag::Generic),
            SetSpec::TimeSlice { time, tol } => {
                let model = graph.model();
                NodeSet::new((0..graph.len()).filter(|&v| (model.time_of(graph.point(v)) - time).abs() <= *tol), SetTag::Generic)
            }
            SetSpec::Artifact { name } => {
                let entry = self
                    .surfaces
                    .get(Some(name))
                    .or_else(|_| self.sets.get(Some(name)))
                    .map(|(_, e)| e)?;
                if entry.graph != graph_name {
                    return Err(CliError::Argument(format!("set `{name}` belongs to graph `{}`, not `{graph_name}`", entry.graph)));
                }
                entry.set.clone()
            }
            SetSpec::File { path } => load_set(path)?,
        };
        set.validate(graph)?;
        if set.is_empty() {
            return Err(CliError::Argument(format!("set {spec:?} is empty")));
        }
        Ok(set)
    }

    /// Names this op would create, so a failure can poison them.
    fn outputs(op: &Op, index: usize) -> Vec<(&'static str, String)> {
        match op {
            Op::Sample { name, .. } => vec![("graph", op_name(name, "sample", index))],
            Op::LoadGraph { name, .. } => vec![("graph", op_name(name, "graph", index))],
            Op::Surface { name, .. } => vec![("surface", op_name(name, "surface", index))],
            Op::Ladder { name, .. } => vec![("ladder", op_name(name, "ladder", index))],
            Op::Hatting { name, .. } => {
                let n = op_name(name, "hatting", index);
                vec![("chains", n.clone()), ("set", n.clone()), ("graph", n)]
            }
            Op::Timefn { name, .. } => vec![("field", op_name(name, "field", index))],
            Op::LevelSet { name, .. } => vec![("set", op_name(name, "level", index))],
            _ => Vec::new(),
        }
    }

    fn poison(&mut self, op: &Op, index: usize) {
        for (kind, name) in Self::outputs(op, index) {
            match kind {
                "graph" => self.graphs.poison(&name),
                "surface" => self.surfaces.poison(&name),
                "set" => self.sets.poison(&name),
                "field" => self.fields.poison(&name),
                "ladder" => self.ladders.poison(&name),
                _ => self.chains.poison(&name),
            }
        }
    }

    fn run_op(&mut self, op: &Op, index: usize) -> Result<Vec<CheckRecord>> {
        let cfg = self.config;
        let kind = op.kind();
        match op {
            Op::Sample { name, model, sampling, graph } => {
                let start = Instant::now();
                let model = model.clone().unwrap_or_else(|| cfg.model.clone());
                let sampling = sampling
                    .as_ref()
                    .or(cfg.sampling.as_ref())
                    .ok_or_else(|| CliError::Config("sample needs a sampling section".into()))?;
                let spec = sampling.to_spec(cfg.seed);
                let options = graph.as_ref().unwrap_or(&cfg.graph).options(spec.window);
                let mut g = build_causal_dag(&model, sample_points(&model, &spec)?, &options)?;
                g.set_sampling(&spec);
                let seconds = start.elapsed().as_secs_f64();
                Ok(vec![self.add_graph(op_name(name, "sample", index), g, seconds, kind)?])
            }
            Op::LoadGraph { name, path } => {
                let start = Instant::now();
                let g = CausalGraph::load(path)?;
                Ok(vec![self.add_graph(op_name(name, "graph", index), g, start.elapsed().as_secs_f64(), kind)?])
            }
            Op::Distance { graph, from, to, expect, oracle, max_seconds } => {
                let start = Instant::now();
                let (gname, entry) = self.graphs.get(graph.as_deref())?;
                let g = &entry.graph;
                let locate = |p: Point| {
                    g.find_node(p).ok_or_else(|| {
                        CliError::Argument(format!("no node at {p:?} in graph `{gname}`; add the point as a sampling anchor"))
                    })
                };
                let (p, q) = (locate(*from)?, locate(*to)?);
                let d = longest_path_distance(g, p, q)?;
                let seconds = entry.seconds + start.elapsed().as_secs_f64();
                let mut ok = true;
                let mut rec = CheckRecord::new(format!("distance:{gname}:{p}->{q}"), kind, Status::Pass)
                    .value("distance", d)
                    .value("from_node", p as f64)
                    .value("to_node", q as f64);
                if let Some(range) = expect {
                    ok &= range.contains(d);
                    if let Some(m) = range.min {
                        rec = rec.tol("min", m);
                    }
                    if let Some(m) = range.max {
                        rec = rec.tol("max", m);
                    }
                }
                if let Some(o) = oracle {
                    let window = g.meta().window.ok_or_else(|| CliError::Argument("oracle needs a graph window".into()))?;
                    let reference = two_segment_distance(g.model(), *from, *to, window, o.step);
                    ok &= d >= o.relative[0] * reference && d <= o.relative[1] * reference;
                    rec = rec
                        .value("oracle", reference)
                        .tol("oracle_step", o.step)
                        .tol("relative_min", o.relative[0])
                        .tol("relative_max", o.relative[1]);
                }
                if let Some(limit) = max_seconds {
                    ok &= seconds <= *limit;
                    rec = rec.tol("max_seconds", *limit);
                }
                rec.status = if ok { Status::Pass } else { Status::Fail };
                Ok(vec![rec])
            }
            Op::Surface { name, graph, future_of, f0, seed_with_set } => {
                let (gname, entry) = self.graphs.get(graph.as_deref())?;
                let g = &entry.graph;
                let (f0_set, seed) = match (future_of, f0) {
                    (Some(spec), None) => {
                        let u = self.resolve_set(gname, g, spec)?;
                        let f0 = chronological_future(g, &u)?;
                        (f0, if *seed_with_set { u } else { NodeSet::empty(SetTag::Generic) })
                    }
                    (None, Some(spec)) => (self.resolve_set(gname, g, spec)?, NodeSet::empty(SetTag::Generic)),
                    _ => return Err(CliError::Config("surface needs exactly one of `future_of` and `f0`".into())),
                };
                let result = build_splitting_surface_seeded(g, &f0_set, &seed)?;
                let nested = result.iterates.windows(2).all(|w| w[0].is_subset(&w[1]));
                let achronal = is_achronal(g, &result.surface)?;
                let ok = nested && achronal && result.residue.is_empty() && result.converged;
                let name = op_name(name, "surface", index);
                let mut rec = CheckRecord::passed(format!("splitting-surface:{name}"), kind, ok)
                    .value("nodes", g.len() as f64)
                    .value("f0", f0_set.len() as f64)
                    .value("surface", result.surface.len() as f64)
                    .value("iterations", result.iterations as f64)
                    .value("residue", result.residue.len() as f64)
                    .value("nested", nested as u8 as f64)
                    .value("achronal", achronal as u8 as f64)
                    .value("converged", result.converged as u8 as f64)
                    .tol("residue", 0.0);
                self.write(&format!("surface-{name}.json"), &set_bytes(&result.surface)?, &mut rec)?;
                self.write(&format!("surface-{name}-iterates.json"), &serde_json::to_vec(&result.iterates)?, &mut rec)?;
                let gname = gname.to_string();
                self.surfaces.insert(name, SetEntry { graph: gname, set: result.surface });
                Ok(vec![rec])
            }
            Op::Ladder { name, ladder } => {
                let spec = ladder.to_spec(cfg.seed);
                let built = spec.build()?;
                let name = op_name(name, "ladder", index);
                let mut rec = CheckRecord::passed(format!("ladder:{name}"), kind, true);
                for (k, level) in built.levels().iter().enumerate() {
                    rec = rec.value(&format!("level{k}_parameter"), level.parameter).value(&format!("level{k}_nodes"), level.graph.len() as f64);
                }
                let dir = format!("ladder-{name}");
                for (file, hash) in save_ladder(&built, &self.out.join(&dir))? {
                    rec.artifacts.insert(format!("{dir}/{file}"), hash);
                }
                self.ladders.insert(name, LadderEntry { spec: Some(spec), ladder: built });
                Ok(vec![rec])
            }
            Op::ProbeDivergence { ladder, slope } => {
                let (lname, entry) = self.ladders.get(ladder.as_deref())?;
                let spec = entry.spec.as_ref().ok_or_else(|| CliError::Argument(format!("ladder `{lname}` has no probe spec")))?;
                let table = divergence_probe(&entry.ladder, &spec.probe)?;
                let mut rec = CheckRecord::new(format!("divergence:{lname}"), kind, Status::Pass);
                for (k, row) in table.rows.iter().enumerate() {
                    rec = rec.value(&format!("distance{k}"), row.distance);
                }
                if let Some(m) = slope.min {
                    rec = rec.tol("slope_min", m);
                }
                if let Some(m) = slope.max {
                    rec = rec.tol("slope_max", m);
                }
                match table.slope {
                    Some(s) => {
                        rec = rec.value("slope", s);
                        rec.status = if slope.contains(s) { Status::Pass } else { Status::Fail };
                    }
                    None => {
                        rec.status = Status::Inconclusive;
                        rec.message = Some("fewer than two ladder levels carry the probe".into());
                    }
                }
                if !table.warnings.is_empty() && rec.message.is_none() {
                    rec.message = Some(table.warnings.join("; "));
                }
                let plot = PlotData::Growth(table.rows.iter().map(|r| (r.epsilon, r.distance, r.log_inv_eps)).collect());
                self.write(&format!("growth-{lname}.csv"), &crate::plot::plot_csv_bytes(&plot)?, &mut rec)?;
                Ok(vec![rec.plot(plot)])
            }
            Op::Hatting { name, ladder, threshold } => {
                let (lname, entry) = self.ladders.get(ladder.as_deref())?;
                let threshold = match threshold {
                    Some(t) => *t,
                    None => default_divergence_threshold(&entry.ladder)?,
                };
                let chains = detect_divergent_chains(&entry.ladder, threshold)?;
                let graph = entry.ladder.finest().graph.clone();
                let result = build_hatting(&graph, &chains)?;
                let ok = is_hatting(&graph, &result.hatting, &chains)?;
                let count = |d: ChainDirection| chains.iter().filter(|c| c.direction == d).count() as f64;
                let cases = |c: HattingCase| result.steps.iter().filter(|s| s.case == c).count() as f64;
                let name = op_name(name, "hatting", index);
                let mut rec = CheckRecord::passed(format!("hatting:{name}"), kind, ok)
                    .value("future_chains", count(ChainDirection::Future))
                    .value("past_chains", count(ChainDirection::Past))
                    .value("hatting", result.hatting.len() as f64)
                    .value("adjoined", cases(HattingCase::Adjoin))
                    .value("projected", cases(HattingCase::Project))
                    .value("cut", cases(HattingCase::Cut))
                    .tol("threshold", threshold);
                rec = rec.message(format!("chains from ladder `{lname}`, hatting on its finest level"));
                self.write(&format!("chains-{name}.json"), &chains_bytes(&chains)?, &mut rec)?;
                self.write(&format!("hatting-{name}.json"), &set_bytes(&result.hatting)?, &mut rec)?;
                let graph_rec = self.add_graph(name.clone(), graph, 0.0, kind)?;
                self.sets.insert(name.clone(), SetEntry { graph: name.clone(), set: result.hatting });
                self.chains.insert(name.clone(), ChainsEntry { graph: name, chains });
                Ok(vec![graph_rec, rec])
            }
            Op::Timefn { name, graph, surface } => {
                let (sname, s) = self.surfaces.get(surface.as_deref())?;
                let gname = graph.clone().unwrap_or_else(|| s.graph.clone());
                if gname != s.graph {
                    return Err(CliError::Argument(format!("surface `{sname}` belongs to graph `{}`", s.graph)));
                }
                let g = &self.graphs.get(Some(&gname))?.1.graph;
                let f = time_function_from_surface(g, &s.set)?;
                let corrected = match f.provenance {
                    Provenance::FromSurface { corrected, .. } => corrected,
                    _ => 0,
                };
                let name = op_name(name, "field", index);
                let mut rec = CheckRecord::passed(format!("timefn:{name}"), kind, true)
                    .value("min", f.values.iter().copied().fold(f64::INFINITY, f64::min))
                    .value("max", f.values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                    .value("corrected", corrected as f64);
                self.write(&format!("field-{name}.json"), &field_bytes(&f)?, &mut rec)?;
                self.fields.insert(name, FieldEntry { graph: gname, field: f });
                Ok(vec![rec])
            }
            Op::Verify { graph, field, checks, steep_tol, steep_fraction, bound_paths, bound_tol } => {
                let (fname, fe) = self.fields.get(field.as_deref())?;
                let gname = graph.clone().unwrap_or_else(|| fe.graph.clone());
                let g = &self.graphs.get(Some(&gname))?.1.graph;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(index as u64);
                checks
                    .iter()
                    .map(|&check| {
                        verify_one(g, &fe.field, check, *steep_tol, *steep_fraction, *bound_paths, *bound_tol, &mut rng)
                            .map(|r| CheckRecord { name: format!("{}:{fname}", r.name), op: kind.to_string(), ..r })
                    })
                    .collect()
            }
            Op::LevelSet { name, field, r, rule, chains } => {
                let (fname, fe) = self.fields.get(field.as_deref())?;
                let g = &self.graphs.get(Some(&fe.graph))?.1.graph;
                let set = level_set(g, &fe.field, *r, *rule)?;
                let achronal = is_achronal(g, &set)?;
                let chain_entry = match chains {
                    Some(c) => Some(self.chains.get(Some(c))?.1),
                    None => self.chains.get(None).ok().map(|(_, e)| e).filter(|e| e.graph == fe.graph),
                };
                let name = op_name(name, "level", index);
                let mut rec = match chain_entry {
                    Some(ce) => {
                        if ce.graph != fe.graph {
                            return Err(CliError::Argument(format!("chains live on graph `{}`, field on `{}`", ce.graph, fe.graph)));
                        }
                        let ok = check_level_set_hatting(g, &fe.field, *r, *rule, &ce.chains)?;
                        CheckRecord::passed(format!("level-set-hatting:{name}"), kind, ok)
                    }
                    None => CheckRecord::passed(format!("level-set:{name}"), kind, achronal),
                };
                rec = rec.value("r", *r).value("nodes", set.len() as f64).value("achronal", achronal as u8 as f64);
                if let LevelRule::Band { tol } = rule {
                    rec = rec.tol("band", *tol);
                }
                rec = rec.message(format!("level set of field `{fname}`"));
                self.write(&format!("level-{name}.json"), &set_bytes(&set)?, &mut rec)?;
                let graph = fe.graph.clone();
                self.sets.insert(name, SetEntry { graph, set });
                Ok(vec![rec])
            }
            Op::DualityCorpus { corpus, tol, max_seconds } => {
                let start = Instant::now();
                let items = build_corpus(corpus, cfg.seed)?;
                let rows = duality_rows(&items)?;
                let small = build_small_corpus(corpus, cfg.seed)?;
                let lp = lp_rows(&small)?;
                let seconds = start.elapsed().as_secs_f64();
                let max_diff = rows.iter().map(|r| r.abs_diff()).fold(0.0, f64::max);
                let agree = rows.iter().filter(|r| r.abs_diff() <= *tol && r.certified).count();
                let mut ok = agree == rows.len() && !rows.is_empty();
                let mut rec = CheckRecord::new("duality", kind, Status::Pass)
                    .value("graphs", items.len() as f64)
                    .value("pairs", rows.len() as f64)
                    .value("chronological_pairs", rows.iter().filter(|r| r.longest_path > 0.0).count() as f64)
                    .value("max_nodes", items.iter().map(|i| i.graph.len()).max().unwrap_or(0) as f64)
                    .value("agreeing_fraction", agree as f64 / rows.len().max(1) as f64)
                    .value("max_abs_diff", max_diff)
                    .tol("abs_diff", *tol);
                if let Some(limit) = max_seconds {
                    ok &= seconds <= *limit;
                    rec = rec.tol("max_seconds", *limit);
                }
                rec.status = if ok { Status::Pass } else { Status::Fail };
                let plot = PlotData::Duality(
                    rows.iter().enumerate().map(|(i, r)| (i, r.longest_path, r.dual_value, r.abs_diff())).collect(),
                );
                self.write("duality.csv", &crate::plot::plot_csv_bytes(&plot)?, &mut rec)?;
                let mut out = vec![rec.plot(plot)];
                if !small.is_empty() {
                    let lp_diff = lp.iter().map(|r| (r.lp_value - r.longest_path).abs()).fold(0.0, f64::max);
                    out.push(
                        CheckRecord::passed("duality-lp-oracle", kind, lp_diff <= *tol && !lp.is_empty())
                            .value("graphs", small.len() as f64)
                            .value("pairs", lp.len() as f64)
                            .value("max_nodes", small.iter().map(|g| g.len()).max().unwrap_or(0) as f64)
                            .value("max_abs_diff", lp_diff)
                            .tol("abs_diff", *tol),
                    );
                }
                Ok(out)
            }
            Op::LipschitzEquivalence { corpus } => {
                let items = build_corpus(corpus, cfg.seed)?;
                let t = lipschitz_equivalence(&items, cfg.seed)?;
                let ok = t.counterexamples == 0 && t.chronological_counterexamples == 0 && t.fields > 0;
                Ok(vec![CheckRecord::passed("reverse-lipschitz-equivalence", kind, ok)
                    .value("graphs", items.len() as f64)
                    .value("fields", t.fields as f64)
                    .value("edge_steep", t.edge_steep as f64)
                    .value("pair_steep", t.pair_steep as f64)
                    .value("counterexamples", t.counterexamples as f64)
                    .value("chronological_counterexamples", t.chronological_counterexamples as f64)
                    .value("pairs_checked", t.pairs_checked as f64)
                    .tol("counterexamples", 0.0)])
            }
            Op::StableCausality { graph, deltas } => {
                let (gname, entry) = self.graphs.get(graph.as_deref())?;
                let g = &entry.graph;
                let meta = g.meta();
                let options = DagOptions {
                    horizon: Some(meta.horizon),
                    proximity_radius: Some(meta.proximity_radius),
                    window: meta.window,
                    ..DagOptions::default()
                };
                let rows = stable_causality_probe(g.model(), g.points(), deltas, &options)?;
                let ok = rows.iter().all(|r| r.cycle_found == (r.delta > 0.0));
                let mut rec = CheckRecord::passed(format!("stable-causality:{gname}"), kind, ok);
                for r in &rows {
                    rec = rec.value(&format!("cycle_at_{}", r.delta), r.cycle_found as u8 as f64);
                    rec = rec.value(&format!("witness_len_at_{}", r.delta), r.witness.len() as f64);
                }
                rec = rec.tol("acyclic_at_delta", 0.0);
                self.write(&format!("cycles-{gname}.json"), &serde_json::to_vec_pretty(&rows)?, &mut rec)?;
                Ok(vec![rec])
            }
            Op::FrameFormulas { models, epsilons, points, tol } => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let mut worst: f64 = 0.0;
                let mut samples = 0;
                for model in models {
                    for &eps in epsilons {
                        let spec = FrameSpec::new(eps)?;
                        for _ in 0..*points {
                            let p = random_in_domain(model, &mut rng)?;
                            let e = model.build_steep_frame(p, spec)?;
                            let g = model.metric_at(p)?;
                            let k = (1.0 - eps) * (1.0 - eps);
                            for i in 0..e.len() {
                                for j in i..e.len() {
                                    let expected = if i > 0 && i == j { k - 1.0 } else { -1.0 };
                                    worst = worst.max((g.contract(e[i], e[j]) - expected).abs());
                                }
                            }
                            samples += 1;
                        }
                    }
                }
                Ok(vec![CheckRecord::passed("frame-formulas", kind, worst <= *tol)
                    .value("max_deviation", worst)
                    .value("frames", samples as f64)
                    .tol("max_deviation", *tol)])
            }
            Op::Counterexample { graph, radii, tol, steep_tol, steep_fraction } => {
                let (gname, entry) = self.graphs.get(graph.as_deref())?;
                let g = &entry.graph;
                let model = g.model().clone();
                let axis = model.time_axis();
                let mut df = [0.0; 2];
                df[axis] = 1.0;
                let mut max_dev: f64 = 0.0;
                let mut rec = CheckRecord::new(format!("counterexample:{gname}"), kind, Status::Pass);
                for (k, &r) in radii.iter().enumerate() {
                    let p = model.point(r, 0.0);
                    let (_, norm, _) = gradient_from_differential(&model, p, df)?;
                    let steepness = (-norm).max(0.0).sqrt();
                    max_dev = max_dev.max((steepness - p[0].hypot(p[1])).abs());
                    rec = rec.value(&format!("steepness_at_r{k}"), steepness);
                }
                let h = ScalarField::analytic(g, &format!("x{axis}"), move |p| p[axis]);
                let summary = check_steepness(&model, g, &h, *steep_tol)?;
                let increasing = strictly_increasing_on_timelike_edges(g, &h);
                let steep = summary.passes(*steep_fraction);
                let ok = max_dev <= *tol && !steep && increasing;
                rec.status = if ok { Status::Pass } else { Status::Fail };
                rec = steepness_values(rec, &summary)
                    .value("max_radius_deviation", max_dev)
                    .value("steep", steep as u8 as f64)
                    .value("increasing", increasing as u8 as f64)
                    .tol("radius", *tol)
                    .tol("steep_tol", *steep_tol)
                    .tol("steep_fraction", *steep_fraction)
                    .message("passes when the steepness check fails while h increases on timelike edges");
                Ok(vec![rec.plot(steepness_plot(&summary))])
            }
        }
    }
}

fn random_in_domain(model: &MetricModel, rng: &mut ChaCha8Rng) -> Result<Point> {
    for _ in 0..100_000 {
        let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        if model.domain_contains(p) {
            return Ok(p);
        }
    }
    Err(CliError::Argument(format!("could not sample a point in the domain of {}", model.id())))
}

fn steepness_values(rec: CheckRecord, s: &SteepnessSummary) -> CheckRecord {
    rec.value("fraction", s.fraction)
        .value("worst", s.worst)
        .value("quantile", s.quantile)
        .value("reliable", s.reliable as f64)
        .value("unreliable", s.unreliable as f64)
        .value("past_directed", s.past_directed as f64)
}

fn steepness_plot(s: &SteepnessSummary) -> PlotData {
    PlotData::Steepness(s.estimates.iter().map(|e| (e.node, e.norm, e.reliable)).collect())
}

/// A random walk along positive-weight edges, as a causal path of node points.
fn random_path(graph: &CausalGraph, rng: &mut ChaCha8Rng) -> Option<CausalPath> {
    let starts: Vec<usize> = (0..graph.len()).filter(|&v| graph.out_edges(v).iter().any(|e| e.weight > 0.0)).collect();
    let mut v = *starts.get(rng.gen_range(0..starts.len().max(1)))?;
    let mut points = vec![graph.point(v)];
    for _ in 0..BOUND_PATH_EDGES {
        let next: Vec<usize> = graph.out_edges(v).iter().filter(|e| e.weight > 0.0).map(|e| e.to).collect();
        if next.is_empty() {
            break;
        }
        v = next[rng.gen_range(0..next.len())];
        points.push(graph.point(v));
    }
    Some(CausalPath::new(points))
}

#[allow(clippy::too_many_arguments)]
pub fn verify_one(
    g: &CausalGraph,
    f: &ScalarField,
    check: VerifyCheck,
    steep_tol: f64,
    steep_fraction: f64,
    bound_paths: usize,
    bound_tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CheckRecord> {
    let op = "verify";
    Ok(match check {
        VerifyCheck::Flip => {
            let r = check_reverse_lipschitz(g, f)?;
            CheckRecord::passed("reverse-lipschitz", op, r.passes())
                .value("edge_violations", r.edge.len() as f64)
                .value("pair_violations", r.pair.len() as f64)
                .value("chronological_violations", r.chronological as f64)
                .value("pairs_checked", r.pairs_checked as f64)
                .value("edges", g.edges().len() as f64)
                .tol("violations", 0.0)
        }
        VerifyCheck::Increasing => {
            let timelike = g.edges().iter().filter(|e| e.weight > 0.0).count();
            let bad = g.edges().iter().filter(|e| e.weight > 0.0 && f.values[e.to] <= f.values[e.from]).count();
            debug_assert_eq!(bad == 0, strictly_increasing_on_timelike_edges(g, f));
            CheckRecord::passed("strict-increase", op, bad == 0)
                .value("timelike_edges", timelike as f64)
                .value("violations", bad as f64)
                .tol("violations", 0.0)
        }
        VerifyCheck::Steep => {
            let s = check_steepness(g.model(), g, f, steep_tol)?;
            let status = if s.reliable == 0 {
                Status::Inconclusive
            } else if s.passes(steep_fraction) {
                Status::Pass
            } else {
                Status::Fail
            };
            steepness_values(CheckRecord::new("steepness", op, status), &s)
                .tol("tol", steep_tol)
                .tol("fraction", steep_fraction)
                .plot(steepness_plot(&s))
        }
        VerifyCheck::Bound => {
            let (mut holds, mut fails, mut inconclusive) = (0, 0, 0);
            let mut min_slack = f64::INFINITY;
            for _ in 0..bound_paths {
                let Some(path) = random_path(g, rng) else { break };
                let b = check_bound_inequality(g.model(), g, f, &path, bound_tol)?;
                match b.status {
                    BoundStatus::Holds => holds += 1,
                    BoundStatus::Fails => fails += 1,
                    BoundStatus::Inconclusive => inconclusive += 1,
                }
                if !b.slack.is_nan() {
                    min_slack = min_slack.min(b.slack);
                }
            }
            let status = if fails > 0 {
                Status::Fail
            } else if holds == 0 {
                Status::Inconclusive
            } else {
                Status::Pass
            };
            CheckRecord::new("bound-inequality", op, status)
                .value("holds", holds as f64)
                .value("fails", fails as f64)
                .value("inconclusive", inconclusive as f64)
                .value("min_slack", if min_slack.is_finite() { min_slack } else { f64::NAN })
                .tol("slack", bound_tol)
        }
    })
}

/// Runs the pipeline, writing artifacts and `report.json` under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.validate()?;
    std::fs::create_dir_all(out)?;
    let mut runner = Runner {
        config,
        out: out.to_path_buf(),
        graphs: Store::new("graph"),
        surfaces: Store::new("surface"),
        sets: Store::new("node set"),
        fields: Store::new("field"),
        ladders: Store::new("ladder"),
        chains: Store::new("chain list"),
    };
    let mut records = Vec::new();
    let mut stamp = RunStamp {
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        ..RunStamp::default()
    };
    for (index, op) in config.pipeline.iter().enumerate() {
        let start = Instant::now();
        let produced = runner.run_op(op, index);
        stamp.seconds.insert(format!("{index:02}-{}", op.kind()), start.elapsed().as_secs_f64());
        match produced {
            Ok(mut recs) => records.append(&mut recs),
            Err(CliError::MissingArtifact(what)) => {
                runner.poison(op, index);
                records.push(
                    CheckRecord::new(format!("{}{index}", op.kind()), op.kind(), Status::Inconclusive)
                        .message(format!("skipped: needs {what}")),
                );
            }
            Err(e) => {
                runner.poison(op, index);
                records.push(CheckRecord::new(format!("{}{index}", op.kind()), op.kind(), Status::Fail).message(e.to_string()));
            }
        }
    }
    dedupe_names(&mut records);
    let report = Report::new(&config.name, config.seed, records, stamp);
    report.save(&out.join("report.json"))?;
    Ok(report)
}

fn dedupe_names(records: &mut [CheckRecord]) {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for r in records.iter_mut() {
        let n = seen.entry(r.name.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            r.name = format!("{}#{}", r.name, n);
        }
    }
}
