use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_lab::achronal::{
    build_hatting, build_splitting_surface_seeded, chronological_future, default_divergence_threshold, detect_divergent_chains,
    is_hatting,
};
use causal_lab::distance::{divergence_probe, longest_path_distance, DistanceField, LadderSpec};
use causal_lab::graph::{build_causal_dag, stable_causality_probe, DagOptions};
use causal_lab::sampling::sample_points;
use causal_lab::timefn::{dual_objective, dual_potential, edge_violations, time_function_from_surface};
use causal_lab::{CausalGraph, MetricModel, NodeSet, Point, SamplingMode, SamplingSpec, SetTag, Window};
use causal_lab_cli::config::{Range, VerifyCheck};
use causal_lab_cli::io::{field_bytes, load_field, load_ladder, load_pairs, load_set, save_ladder, set_bytes};
use causal_lab_cli::pipeline::verify_one;
use causal_lab_cli::plot::plot_csv_bytes;
use causal_lab_cli::report::{exit_code, PlotData, RunStamp};
use causal_lab_cli::{emit_plot_data, run_experiment, set_workers, CheckRecord, CliError, ExperimentConfig, Report, Result, Status};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Discrete Lorentzian causality laboratory.
#[derive(Parser)]
#[command(name = "causal-lab", version)]
struct Cli {
    /// Worker threads for parallel stages; results do not depend on it.
    #[arg(long, global = true, env = "CAUSAL_LAB_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Grid,
    Sprinkle,
}

#[derive(Subcommand)]
enum Command {
    /// Sample nodes and build the causal DAG.
    Sample {
        /// Model id, or a JSON object such as `{"id":"singular_wedge","truncation":0.05}`.
        #[arg(long)]
        model: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        density: Option<f64>,
        /// `lo0,lo1,hi0,hi1`
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        proximity_radius: Option<f64>,
        /// Extra node `x0,x1`; repeatable.
        #[arg(long = "anchor", value_parser = parse_point, allow_hyphen_values = true)]
        anchors: Vec<Point>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Longest-path distance between nodes, or to/from a node set.
    Distance {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
        /// Node set JSON; with `--to` gives d(S, to), with `--from` d(from, S),
        /// alone the whole field d(S, .).
        #[arg(long)]
        set_file: Option<PathBuf>,
    },
    /// Splitting surface from a future set F0.
    Surface {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "seed-set")]
        seed_set: PathBuf,
        /// Use I+ of the seed set as F0 instead of the set itself.
        #[arg(long = "future-of")]
        future_of: bool,
        /// Achronal nodes adjoined to the first iterate.
        #[arg(long)]
        adjoin: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Divergent chains and a hatting over a ladder directory.
    Hatting {
        #[arg(long)]
        ladder_dir: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        chains_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time function from a splitting surface.
    Timefn {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a field: steep, flip (reverse-Lipschitz), bound, increasing.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "steep,flip,bound")]
        checks: Vec<VerifyCheck>,
        #[arg(long, default_value_t = 0.1)]
        steep_tol: f64,
        #[arg(long, default_value_t = 0.95)]
        steep_fraction: f64,
        #[arg(long, default_value_t = 100)]
        bound_paths: usize,
        #[arg(long, default_value_t = 0.05)]
        bound_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dual potential against longest path for node pairs `[[p, q], ...]`.
    VerifyDuality {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance growth along a refinement ladder.
    ProbeDivergence {
        #[arg(long)]
        model: String,
        /// Decreasing ladder parameters.
        #[arg(long, value_delimiter = ',')]
        ladder: Vec<f64>,
        #[arg(long, default_value_t = 30.0)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the ladder graphs here (input for `hatting`).
        #[arg(long)]
        ladder_dir: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        slope_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        slope_max: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Causal cycles of the slit cylinder under widened cones.
    StableCausalityProbe {
        #[arg(long, default_value = "slit_cylinder")]
        model: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.5")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 80.0)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2.5)]
        horizon: f64,
        /// `lo0,lo1,hi0,hi1`; defaults to one period times s in [-1.6, 1.6].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and write its report.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// CSV plot data for one check of a report.
    EmitPlot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        check: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [a, b] => Ok([a, b]),
        _ => Err(format!("expected `x0,x1`, got `{s}`")),
    }
}

fn parse_model(s: &str) -> Result<MetricModel> {
    if s.trim_start().starts_with('{') {
        Ok(serde_json::from_str(s)?)
    } else {
        Ok(MetricModel::from_id(s)?)
    }
}

fn window_from(v: &[f64]) -> Result<Window> {
    match v {
        [a, b, c, d] => Ok(Window::new([*a, *b], [*c, *d])),
        _ => Err(CliError::Argument("window needs four values lo0,lo1,hi0,hi1".into())),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn finish(report: Report, out: Option<&Path>) -> Result<i32> {
    if let Some(path) = out {
        report.save(path)?;
    }
    print_json(&report)?;
    Ok(report.exit_code())
}

fn run(cli: Cli) -> Result<i32> {
    set_workers(cli.workers)?;
    match cli.command {
        Command::Sample { model, mode, step, density, window, seed, horizon, proximity_radius, anchors, out } => {
            let model = parse_model(&model)?;
            let window = window_from(&window)?;
            let mode = match mode {
                Mode::Grid => SamplingMode::Grid { step: step.ok_or_else(|| CliError::Argument("--step is required for grid".into()))? },
                Mode::Sprinkle => SamplingMode::Sprinkle {
                    density: density.ok_or_else(|| CliError::Argument("--density is required for sprinkle".into()))?,
                },
            };
            let spec = SamplingSpec { mode, window, seed, anchors };
            let options = DagOptions { horizon, proximity_radius, ..DagOptions::default().with_window(window) };
            let mut graph = build_causal_dag(&model, sample_points(&model, &spec)?, &options)?;
            graph.set_sampling(&spec);
            graph.save(&out)?;
            eprintln!("{} nodes, {} edges, {} proximity edges", graph.len(), graph.edges().len(), graph.proximity_edges().len());
            Ok(0)
        }
        Command::Distance { graph, from, to, set_file } => {
            let g = CausalGraph::load(&graph)?;
            match (set_file, from, to) {
                (None, Some(p), Some(q)) => {
                    let d = longest_path_distance(&g, g.node_id(p)?, g.node_id(q)?)?;
                    print_json(&serde_json::json!({ "from": p, "to": q, "distance": d }))?;
                }
                (Some(path), from, to) => {
                    let set = load_set(&path)?;
                    set.validate(&g)?;
                    let field = match (from, to) {
                        (Some(x), None) => {
                            let f = DistanceField::to_set(&g, set.nodes())?;
                            print_json(&serde_json::json!({ "from": x, "distance": f.value(g.node_id(x)?) }))?;
                            return Ok(0);
                        }
                        (None, Some(x)) => {
                            let f = DistanceField::from_set(&g, set.nodes())?;
                            print_json(&serde_json::json!({ "to": x, "distance": f.value(g.node_id(x)?) }))?;
                            return Ok(0);
                        }
                        (None, None) => DistanceField::from_set(&g, set.nodes())?,
                        _ => return Err(CliError::Argument("use at most one of --from and --to with --set-file".into())),
                    };
                    print_json(&field)?;
                }
                _ => return Err(CliError::Argument("give --from and --to, or --set-file".into())),
            }
            Ok(0)
        }
        Command::Surface { graph, seed_set, future_of, adjoin, out } => {
            let g = CausalGraph::load(&graph)?;
            let mut f0 = load_set(&seed_set)?;
            if future_of {
                f0 = chronological_future(&g, &f0)?;
            }
            let seed = match adjoin {
                Some(path) => load_set(&path)?,
                None => NodeSet::empty(SetTag::Generic),
            };
            let result = build_splitting_surface_seeded(&g, &f0, &seed)?;
            std::fs::write(&out, set_bytes(&result.surface)?)?;
            print_json(&serde_json::json!({
                "surface": result.surface.len(),
                "iterations": result.iterations,
                "converged": result.converged,
                "residue": result.residue,
            }))?;
            Ok(if result.residue.is_empty() && result.converged { 0 } else { 2 })
        }
        Command::Hatting { ladder_dir, threshold, chains_out, out } => {
            let ladder = load_ladder(&ladder_dir)?;
            let threshold = match threshold {
                Some(t) => t,
                None => default_divergence_threshold(&ladder)?,
            };
            let chains = detect_divergent_chains(&ladder, threshold)?;
            if let Some(path) = chains_out {
                write_json(&path, &chains)?;
            }
            let graph = &ladder.finest().graph;
            let result = build_hatting(graph, &chains)?;
            std::fs::write(&out, set_bytes(&result.hatting)?)?;
            let ok = is_hatting(graph, &result.hatting, &chains)?;
            print_json(&serde_json::json!({
                "threshold": threshold,
                "chains": chains.len(),
                "hatting": result.hatting.nodes(),
                "is_hatting": ok,
            }))?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Timefn { graph, surface, out } => {
            let g = CausalGraph::load(&graph)?;
            let f = time_function_from_surface(&g, &load_set(&surface)?)?;
            std::fs::write(&out, field_bytes(&f)?)?;
            Ok(0)
        }
        Command::Verify { graph, field, checks, steep_tol, steep_fraction, bound_paths, bound_tol, seed, out } => {
            let g = CausalGraph::load(&graph)?;
            let f = load_field(&field, g.len())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let records = checks
                .iter()
                .map(|&c| verify_one(&g, &f, c, steep_tol, steep_fraction, bound_paths, bound_tol, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            finish(Report::new("verify", seed, records, RunStamp::default()), out.as_deref())
        }
        Command::VerifyDuality { graph, pairs, tol, csv, out } => {
            let g = CausalGraph::load(&graph)?;
            let mut rows = Vec::new();
            let mut certified = true;
            for (i, (p, q)) in load_pairs(&pairs)?.into_iter().enumerate() {
                let (p, q) = (g.node_id(p)?, g.node_id(q)?);
                let d = longest_path_distance(&g, p, q)?;
                let (f, value) = dual_potential(&g, p, q)?;
                certified &= edge_violations(&g, &f).is_empty() && dual_objective(&f, p, q) == value;
                rows.push((i, d, value, (d - value).abs()));
            }
            let max_diff = rows.iter().map(|r| r.3).fold(0.0, f64::max);
            let plot = PlotData::Duality(rows);
            if let Some(path) = csv {
                std::fs::write(path, plot_csv_bytes(&plot)?)?;
            }
            let rec = CheckRecord::passed("duality", "verify-duality", certified && max_diff <= tol)
                .value("max_abs_diff", max_diff)
                .tol("abs_diff", tol)
                .plot(plot);
            finish(Report::new("verify-duality", 0, vec![rec], RunStamp::default()), out.as_deref())
        }
        Command::ProbeDivergence { model, ladder, density, seed, ladder_dir, slope_min, slope_max, out } => {
            let spec = match parse_model(&model)?.id() {
                "singular_wedge" => LadderSpec::singular(ladder, density, seed),
                "minkowski2d" => LadderSpec::minkowski_control(ladder),
                "slit_minkowski" => LadderSpec::slit(ladder),
                other => return Err(CliError::Argument(format!("no divergence ladder for model `{other}`"))),
            };
            let built = spec.build()?;
            if let Some(dir) = ladder_dir {
                save_ladder(&built, &dir)?;
            }
            let table = divergence_probe(&built, &spec.probe)?;
            let plot = PlotData::Growth(table.rows.iter().map(|r| (r.epsilon, r.distance, r.log_inv_eps)).collect());
            std::fs::write(&out, plot_csv_bytes(&plot)?)?;
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            print_json(&serde_json::json!({ "slope": table.slope, "rows": table.rows }))?;
            let range = Range { min: slope_min, max: slope_max };
            Ok(match table.slope {
                Some(s) if range.contains(s) => 0,
                Some(_) => 2,
                None => 3,
            })
        }
        Command::StableCausalityProbe { model, deltas, density, seed, horizon, window, out } => {
            let model = parse_model(&model)?;
            let window = if window.is_empty() {
                Window::new([-std::f64::consts::PI, -1.6], [std::f64::consts::PI, 1.6])
            } else {
                window_from(&window)?
            };
            let points = sample_points(&model, &SamplingSpec::sprinkle(density, window, seed))?;
            let options = DagOptions::default().with_window(window).with_horizon(horizon);
            let rows = stable_causality_probe(&model, &points, &deltas, &options)?;
            if let Some(path) = out {
                write_json(&path, &rows)?;
            }
            for r in &rows {
                println!("delta {:<6} cycle {:<5} witness {:?}", r.delta, r.cycle_found, r.witness);
            }
            let ok = rows.iter().all(|r| r.cycle_found == (r.delta > 0.0));
            Ok(exit_code(if ok { Status::Pass } else { Status::Fail }))
        }
        Command::Report { config, out_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir.unwrap_or_else(|| cfg.output_dir());
            let report = run_experiment(&cfg, &dir)?;
            for c in &report.checks {
                let status = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Inconclusive => "INCONCLUSIVE",
                };
                println!("{status:<12} {}{}", c.name, c.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default());
            }
            println!("report: {} (digest {})", dir.join("report.json").display(), report.digest);
            Ok(report.exit_code())
        }
        Command::EmitPlot { report, check, out } => {
            emit_plot_data(&Report::load(&report)?, &check, &out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
