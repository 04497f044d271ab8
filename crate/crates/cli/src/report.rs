//! Check records, reports and their hashes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

/// Data behind a check, in the shape its CSV takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum PlotData {
    /// `(epsilon, distance, log_inv_eps)`
    Growth(Vec<(f64, f64, f64)>),
    /// `(node_id, g_grad_grad, reliable)`
    Steepness(Vec<(usize, f64, bool)>),
    /// `(pair_id, longest_path, dual_value, abs_diff)`
    Duality(Vec<(usize, f64, f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub op: String,
    pub status: Status,
    pub summary: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    /// Artifact file name to its sha256.
    pub artifacts: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotData>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, op: &str, status: Status) -> Self {
        CheckRecord {
            name: name.into(),
            op: op.to_string(),
            status,
            summary: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            message: None,
            plot: None,
        }
    }

    pub fn passed(name: impl Into<String>, op: &str, pass: bool) -> Self {
        Self::new(name, op, if pass { Status::Pass } else { Status::Fail })
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.summary.insert(key.to_string(), v);
        self
    }

    pub fn tol(mut self, key: &str, v: f64) -> Self {
        self.tolerances.insert(key.to_string(), v);
        self
    }

    pub fn message(mut self, text: impl Into<String>) -> Self {
        self.message = Some(text.into());
        self
    }

    pub fn plot(mut self, data: PlotData) -> Self {
        self.plot = Some(data);
        self
    }
}

/// Wall-clock facts about a run; excluded from the digest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStamp {
    pub timestamp: u64,
    pub seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    /// sha256 over everything above.
    pub digest: String,
    pub run: RunStamp,
}

#[derive(Serialize)]
struct Hashed<'a> {
    version: &'a str,
    config: &'a str,
    seed: u64,
    checks: &'a [CheckRecord],
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Report {
    pub fn new(config: &str, seed: u64, checks: Vec<CheckRecord>, run: RunStamp) -> Self {
        let mut report = Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.to_string(),
            seed,
            checks,
            digest: String::new(),
            run,
        };
        report.digest = report.compute_digest();
        report
    }

    pub fn compute_digest(&self) -> String {
        let body = Hashed { version: &self.version, config: &self.config, seed: self.seed, checks: &self.checks };
        sha256_hex(&serde_json::to_vec(&body).expect("report serializes"))
    }

    /// Worst status over all checks; `Pass` for an empty report.
    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    /// 0 when everything passes, 2 if anything fails, 3 if only inconclusive.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.status())
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass => 0,
        Status::Fail => 2,
        Status::Inconclusive => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_the_run_stamp() {
        let checks = vec![CheckRecord::passed("a", "verify", true).value("x", 1.5).tol("x", 0.1)];
        let a = Report::new("c", 1, checks.clone(), RunStamp::default());
        let mut stamp = RunStamp { timestamp: 99, ..RunStamp::default() };
        stamp.seconds.insert("verify".into(), 3.0);
        let b = Report::new("c", 1, checks, stamp);
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.digest.len(), 64);
        let c = Report::new("c", 2, a.checks.clone(), RunStamp::default());
        assert_ne!(a.digest, c.digest);
    }

    #[test]
    fn exit_codes_follow_the_worst_status() {
        let rec = |s| CheckRecord::new("x", "verify", s);
        let report = |v: Vec<CheckRecord>| Report::new("c", 0, v, RunStamp::default());
        assert_eq!(report(vec![rec(Status::Pass)]).exit_code(), 0);
        assert_eq!(report(vec![rec(Status::Pass), rec(Status::Inconclusive)]).exit_code(), 3);
        assert_eq!(report(vec![rec(Status::Inconclusive), rec(Status::Fail)]).exit_code(), 2);
    }

    #[test]
    fn report_roundtrips_through_json() {
        let rec = CheckRecord::passed("g", "probe_divergence", true).plot(PlotData::Growth(vec![(0.1, 2.3, std::f64::consts::LN_10)]));
        let report = Report::new("c", 4, vec![rec], RunStamp::default());
        let back: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.compute_digest(), report.digest);
    }
}
