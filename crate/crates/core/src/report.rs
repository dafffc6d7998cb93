//! Check results and the report document written by the verification suites.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    /// Label of the claim the check exercises.
    pub claim: String,
    pub status: Status,
    /// Elements, matrices and constants backing the verdict (the error or
    /// skip reason when the check did not run to completion).
    pub witness: Value,
    pub wall_time_ms: u64,
}

impl CheckResult {
    /// SHA-256 of the canonical witness serialization, first 16 hex digits.
    pub fn witness_digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.witness).expect("witness serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: Value,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format {s:?} (expected json or csv)")),
        }
    }
}

impl Report {
    pub fn new(config: Value, checks: Vec<CheckResult>) -> Self {
        Report { tool: "voalog".into(), version: env!("CARGO_PKG_VERSION").into(), config, checks }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// The report with every timing field zeroed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.wall_time_ms = 0;
        }
        r
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["summary"] = json!({
            "pass": self.count(Status::Pass),
            "fail": self.count(Status::Fail),
            "skipped": self.count(Status::Skipped),
        });
        v
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per check: id, status, claim, witness digest, time.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "status", "claim", "witness_digest", "wall_time_ms"]).expect("in-memory write");
        for c in &self.checks {
            w.write_record([c.id.as_str(), c.status.as_str(), c.claim.as_str(), &c.witness_digest(), &c.wall_time_ms.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Json => self.to_json_string(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }
}
