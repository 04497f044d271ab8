//! Experiment configs: a model, sampling, and an ordered list of ops.

use std::path::{Path, PathBuf};

use causal_lab::distance::LadderSpec;
use causal_lab::graph::DagOptions;
use causal_lab::timefn::LevelRule;
use causal_lab::{MetricModel, Point, SamplingMode, SamplingSpec, Window};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Global seed; every random choice in the run derives from it.
    pub seed: u64,
    pub model: MetricModel,
    #[serde(default)]
    pub sampling: Option<SamplingSection>,
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub pipeline: Vec<Op>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pipeline.is_empty() {
            return Err(CliError::Config("pipeline is empty".into()));
        }
        if let Some(s) = &self.sampling {
            s.to_spec(self.seed).validate()?;
        }
        for op in &self.pipeline {
            if let Op::Surface { future_of, f0, .. } = op {
                if future_of.is_some() == f0.is_some() {
                    return Err(CliError::Config("surface needs exactly one of `future_of` and `f0`".into()));
                }
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(&self.name))
    }
}

/// A [`SamplingSpec`] whose seed defaults to the global one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSection {
    #[serde(flatten)]
    pub mode: SamplingMode,
    pub window: Window,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<Point>,
}

impl SamplingSection {
    pub fn to_spec(&self, global_seed: u64) -> SamplingSpec {
        SamplingSpec { mode: self.mode, window: self.window, seed: self.seed.unwrap_or(global_seed), anchors: self.anchors.clone() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub proximity_radius: Option<f64>,
}

impl GraphSection {
    pub fn options(&self, window: Window) -> DagOptions {
        DagOptions { horizon: self.horizon, proximity_radius: self.proximity_radius, ..DagOptions::default().with_window(window) }
    }
}

/// Closed interval; either end may be open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

impl Range {
    pub fn contains(&self, v: f64) -> bool {
        !v.is_nan() && self.min.is_none_or(|m| v >= m) && self.max.is_none_or(|m| v <= m)
    }
}

/// Ways of naming a node set inside a pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    /// The node nearest to a point.
    Point { point: Point },
    Nodes { nodes: Vec<usize> },
    /// Nodes whose time coordinate is within `tol` of `time`.
    TimeSlice {
        time: f64,
        #[serde(default = "slice_tol")]
        tol: f64,
    },
    /// A set produced earlier in the pipeline.
    Artifact { name: String },
    File { path: PathBuf },
}

fn slice_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum LadderSection {
    Singular {
        parameters: Vec<f64>,
        density: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    MinkowskiControl { parameters: Vec<f64> },
    Slit { parameters: Vec<f64> },
    Custom { spec: LadderSpec },
}

impl LadderSection {
    pub fn to_spec(&self, global_seed: u64) -> LadderSpec {
        match self {
            LadderSection::Singular { parameters, density, seed } => {
                LadderSpec::singular(parameters.clone(), *density, seed.unwrap_or(global_seed))
            }
            LadderSection::MinkowskiControl { parameters } => LadderSpec::minkowski_control(parameters.clone()),
            LadderSection::Slit { parameters } => LadderSpec::slit(parameters.clone()),
            LadderSection::Custom { spec } => spec.clone(),
        }
    }
}

/// The sprinkled Minkowski DAGs used for the duality and reverse-Lipschitz checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub graphs: usize,
    pub density: f64,
    #[serde(default = "unit_window")]
    pub window: Window,
    pub max_nodes: usize,
    pub pairs: usize,
    /// Tiny DAGs solved by the LP oracle.
    #[serde(default)]
    pub small_graphs: usize,
    #[serde(default = "small_density")]
    pub small_density: f64,
    #[serde(default = "small_max_nodes")]
    pub small_max_nodes: usize,
}

fn unit_window() -> Window {
    Window::new([0.0, 0.0], [1.0, 1.0])
}

fn small_density() -> f64 {
    10.0
}

fn small_max_nodes() -> usize {
    12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyCheck {
    /// Steepness of the estimated gradient.
    Steep,
    /// Reverse-Lipschitz condition, edge and pair forms.
    Flip,
    /// Bound inequality along random causal paths.
    Bound,
    /// Strict increase along timelike edges.
    Increasing,
}

impl std::str::FromStr for VerifyCheck {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
            .map_err(|_| CliError::Argument(format!("unknown check `{s}` (expected steep, flip, bound or increasing)")))
    }
}

fn steep_tol() -> f64 {
    0.1
}

fn steep_fraction() -> f64 {
    0.95
}

fn bound_paths() -> usize {
    100
}

fn bound_tol() -> f64 {
    0.05
}

fn two_segment_step() -> f64 {
    0.01
}

fn frame_points() -> usize {
    100
}

fn frame_tol() -> f64 {
    1e-12
}

fn duality_tol() -> f64 {
    1e-9
}

fn radius_tol() -> f64 {
    1e-9
}

fn level_rule() -> LevelRule {
    LevelRule::Front
}

/// Brute force over broken paths `p -> m -> q` with `m` on a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSegmentOracle {
    #[serde(default = "two_segment_step")]
    pub step: f64,
    /// Accepted estimate range as multiples of the oracle value.
    pub relative: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    /// Samples nodes and builds the causal DAG. Model, sampling and graph
    /// options default to the top-level ones.
    Sample {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        model: Option<MetricModel>,
        #[serde(default)]
        sampling: Option<SamplingSection>,
        #[serde(default)]
        graph: Option<GraphSection>,
    },
    LoadGraph {
        #[serde(default)]
        name: Option<String>,
        path: PathBuf,
    },
    Distance {
        #[serde(default)]
        graph: Option<String>,
        from: Point,
        to: Point,
        #[serde(default)]
        expect: Option<Range>,
        #[serde(default)]
        oracle: Option<TwoSegmentOracle>,
        #[serde(default)]
        max_seconds: Option<f64>,
    },
    Surface {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        graph: Option<String>,
        /// `F0 = I^+(U)`.
        #[serde(default)]
        future_of: Option<SetSpec>,
        /// A future set used as `F0` directly.
        #[serde(default)]
        f0: Option<SetSpec>,
        /// Adjoin `U` to the first iterate.
        #[serde(default)]
        seed_with_set: bool,
    },
    Ladder {
        #[serde(default)]
        name: Option<String>,
        ladder: LadderSection,
    },
    ProbeDivergence {
        #[serde(default)]
        ladder: Option<String>,
        slope: Range,
    },
    Hatting {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        ladder: Option<String>,
        #[serde(default)]
        threshold: Option<f64>,
    },
    Timefn {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        graph: Option<String>,
        #[serde(default)]
        surface: Option<String>,
    },
    Verify {
        #[serde(default)]
        graph: Option<String>,
        #[serde(default)]
        field: Option<String>,
        checks: Vec<VerifyCheck>,
        #[serde(default = "steep_tol")]
        steep_tol: f64,
        #[serde(default = "steep_fraction")]
        steep_fraction: f64,
        #[serde(default = "bound_paths")]
        bound_paths: usize,
        #[serde(default = "bound_tol")]
        bound_tol: f64,
    },
    LevelSet {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        field: Option<String>,
        #[serde(default)]
        r: f64,
        #[serde(default = "level_rule")]
        rule: LevelRule,
        /// Chains to test the level set against as a hatting.
        #[serde(default)]
        chains: Option<String>,
    },
    DualityCorpus {
        corpus: CorpusSpec,
        #[serde(default = "duality_tol")]
        tol: f64,
        #[serde(default)]
        max_seconds: Option<f64>,
    },
    LipschitzEquivalence { corpus: CorpusSpec },
    StableCausality {
        #[serde(default)]
        graph: Option<String>,
        deltas: Vec<f64>,
    },
    FrameFormulas {
        models: Vec<MetricModel>,
        epsilons: Vec<f64>,
        #[serde(default = "frame_points")]
        points: usize,
        #[serde(default = "frame_tol")]
        tol: f64,
    },
    /// `h` = a coordinate function on the singular wedge: steepness must fail
    /// near the origin although `h` increases along every timelike edge.
    Counterexample {
        #[serde(default)]
        graph: Option<String>,
        radii: Vec<f64>,
        #[serde(default = "radius_tol")]
        tol: f64,
        #[serde(default = "steep_tol")]
        steep_tol: f64,
        #[serde(default = "steep_fraction")]
        steep_fraction: f64,
    },
}

impl Op {
    pub fn kind(&self) -> &'static str {
        match self {
            Op::Sample { .. } => "sample",
            Op::LoadGraph { .. } => "load_graph",
            Op::Distance { .. } => "distance",
            Op::Surface { .. } => "surface",
            Op::Ladder { .. } => "ladder",
            Op::ProbeDivergence { .. } => "probe_divergence",
            Op::Hatting { .. } => "hatting",
            Op::Timefn { .. } => "timefn",
            Op::Verify { .. } => "verify",
            Op::LevelSet { .. } => "level_set",
            Op::DualityCorpus { .. } => "duality_corpus",
            Op::LipschitzEquivalence { .. } => "lipschitz_equivalence",
            Op::StableCausality { .. } => "stable_causality",
            Op::FrameFormulas { .. } => "frame_formulas",
            Op::Counterexample { .. } => "counterexample",
        }
    }
}
