use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Version of the report layout; bumped on any change of field names.
pub const SCHEMA_VERSION: u32 = 1;

/// A reported number together with the replication count behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub reps: u64,
}

/// Outcome of one acceptance check. Non-gating checks are diagnostics:
/// reported, but ignored by [`ExperimentReport::passed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub name: String,
    pub statistic: f64,
    /// Human-readable acceptance rule, e.g. `"<= 0.05"`.
    pub rule: String,
    pub reps: u64,
    pub passed: bool,
    pub gating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    /// Stream namespace of this experiment under the master seed.
    pub stream_namespace: u32,
    pub master_seed: u64,
    pub config: BTreeMap<String, serde_json::Value>,
    /// Stream identifiers of the replications, in order.
    pub replication_streams: Vec<u64>,
    pub summary: BTreeMap<String, Measured>,
    pub criteria: Vec<CriterionOutcome>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, stream_namespace: u32, master_seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            stream_namespace,
            master_seed,
            config: BTreeMap::new(),
            replication_streams: Vec::new(),
            summary: BTreeMap::new(),
            criteria: Vec::new(),
        }
    }

    pub fn echo(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.config.insert(key.to_string(), v);
        self
    }

    /// Records the stream ids of replications `0..reps`.
    pub fn streams(&mut self, reps: u32) -> &mut Self {
        let base = u64::from(self.stream_namespace) << 32;
        self.replication_streams.extend((0..reps).map(|r| base | u64::from(r)));
        self
    }

    pub fn stat(&mut self, key: &str, value: f64, reps: u64) -> &mut Self {
        self.summary.insert(key.to_string(), Measured { value, reps });
        self
    }

    pub fn check(&mut self, name: &str, statistic: f64, rule: &str, reps: u64, passed: bool) -> &mut Self {
        self.push(name, statistic, rule, reps, passed, true)
    }

    pub fn diagnostic(&mut self, name: &str, statistic: f64, rule: &str, reps: u64, passed: bool) -> &mut Self {
        self.push(name, statistic, rule, reps, passed, false)
    }

    fn push(&mut self, name: &str, statistic: f64, rule: &str, reps: u64, passed: bool, gating: bool) -> &mut Self {
        self.criteria.push(CriterionOutcome {
            name: name.to_string(),
            statistic,
            rule: rule.to_string(),
            reps,
            passed,
            gating,
        });
        self
    }

    /// All gating checks passed.
    pub fn passed(&self) -> bool {
        self.criteria.iter().filter(|c| c.gating).all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only serializable values")
    }

    /// Long format: `experiment,section,key,value,reps,rule,passed`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("experiment,section,key,value,reps,rule,passed\n");
        for (k, v) in &self.config {
            let _ = writeln!(s, "{},config,{},{},,,", self.experiment, k, csv_field(&v.to_string()));
        }
        for (k, m) in &self.summary {
            let _ = writeln!(s, "{},summary,{},{},{},,", self.experiment, k, m.value, m.reps);
        }
        for c in &self.criteria {
            let section = if c.gating { "criterion" } else { "diagnostic" };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                self.experiment,
                section,
                c.name,
                c.statistic,
                c.reps,
                csv_field(&c.rule),
                c.passed
            );
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Concatenated long-format CSV of several reports, with a single header.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        let csv = r.to_csv();
        if i == 0 {
            out.push_str(&csv);
        } else {
            out.push_str(csv.split_once('\n').map_or("", |(_, rest)| rest));
        }
    }
    out
}
