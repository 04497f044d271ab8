//! Acceptance suite: runs each bundled config, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use causal_lab_cli::{run_experiment, ExperimentConfig, Report, Status};

struct Criterion {
    id: usize,
    name: &'static str,
    config: &'static str,
    /// `(check-name prefix, summary keys)` shown on the result line.
    show: &'static [(&'static str, &'static [&'static str])],
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "distance formula duality",
        config: "minkowski_duality",
        show: &[
            ("duality", &["graphs", "pairs", "max_abs_diff", "agreeing_fraction"]),
            ("duality-lp-oracle", &["graphs", "pairs", "max_abs_diff"]),
        ],
    },
    Criterion {
        id: 2,
        name: "reverse-Lipschitz equivalence",
        config: "reverse_lipschitz_equivalence",
        show: &[("reverse-lipschitz-equivalence", &["fields", "edge_steep", "counterexamples", "chronological_counterexamples"])],
    },
    Criterion {
        id: 3,
        name: "Minkowski convergence",
        config: "minkowski_convergence",
        show: &[("distance", &["distance", "oracle"])],
    },
    Criterion { id: 4, name: "slit Minkowski", config: "slit_minkowski", show: &[("distance", &["distance", "oracle"])] },
    Criterion {
        id: 5,
        name: "singular divergence",
        config: "singular_divergence",
        show: &[("divergence:singular", &["slope"]), ("divergence:control", &["slope"])],
    },
    Criterion { id: 6, name: "frame formulas", config: "frame_formulas", show: &[("frame-formulas", &["frames", "max_deviation"])] },
    Criterion {
        id: 7,
        name: "splitting surfaces",
        config: "splitting_surfaces",
        show: &[("splitting-surface", &["nodes", "surface", "iterations", "residue"])],
    },
    Criterion {
        id: 8,
        name: "time function from surface",
        config: "minkowski_time_function",
        show: &[
            ("reverse-lipschitz", &["edge_violations", "pair_violations"]),
            ("strict-increase", &["violations"]),
            ("steepness", &["fraction", "worst"]),
        ],
    },
    Criterion {
        id: 9,
        name: "hatting",
        config: "singular_hatting",
        show: &[("hatting", &["future_chains", "past_chains", "hatting"]), ("level-set-hatting", &["nodes", "achronal"])],
    },
    Criterion {
        id: 10,
        name: "stable-causality probe",
        config: "cylinder_stable_causality",
        show: &[("stable-causality", &["cycle_at_0", "cycle_at_0.05", "cycle_at_0.1", "cycle_at_0.5"])],
    },
    Criterion {
        id: 11,
        name: "counterexample reproduction",
        config: "singular_counterexample",
        show: &[("counterexample", &["max_radius_deviation", "fraction", "steep", "increasing"])],
    },
];

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn describe(report: &Report, show: &[(&str, &[&str])]) -> String {
    let mut parts = Vec::new();
    for (prefix, keys) in show {
        for check in report.checks.iter().filter(|c| c.name.starts_with(prefix) && !c.name.starts_with(&format!("{prefix}-"))) {
            let values: Vec<String> = keys
                .iter()
                .filter_map(|k| check.summary.get(*k).map(|v| format!("{k}={}", fmt(*v))))
                .collect();
            parts.push(format!("{} [{}]", check.name, values.join(" ")));
        }
    }
    for check in report.checks.iter().filter(|c| c.status != Status::Pass) {
        parts.push(format!("{} {:?}: {}", check.name, check.status, check.message.as_deref().unwrap_or("")));
    }
    parts.join("; ")
}

fn fmt(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e9 {
        format!("{v}")
    } else if v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.6}")
    }
}

fn run(c: &Criterion, scratch: &std::path::Path) -> (bool, String) {
    let config = match ExperimentConfig::load(&configs_dir().join(format!("{}.json", c.config))) {
        Ok(config) => config,
        Err(e) => return (false, format!("config: {e}")),
    };
    match run_experiment(&config, &scratch.join(c.config)) {
        Ok(report) => (report.status() == Status::Pass, describe(&report, c.show)),
        Err(e) => (false, format!("run failed: {e}")),
    }
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temp dir");
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let (pass, detail) = run(c, scratch.path());
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {} ({}.json): {} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.config,
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
