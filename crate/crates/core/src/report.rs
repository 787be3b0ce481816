//! Structured outcome of a verification run.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub claim_id: String,
    /// Named measured quantities; a `BTreeMap` keeps serialization ordered.
    pub measured: BTreeMap<String, f64>,
    /// Primary bound the headline quantity is compared against.
    pub bound: f64,
    /// `bound − measured` for the headline quantity.
    pub margin: f64,
    pub passed: bool,
    pub provenance: Vec<String>,
    /// Offending input, embedded on failure so the run can be replayed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<serde_json::Value>,
}

impl CheckReport {
    pub fn new(claim_id: impl Into<String>) -> CheckReport {
        CheckReport {
            claim_id: claim_id.into(),
            measured: BTreeMap::new(),
            bound: 0.0,
            margin: 0.0,
            passed: true,
            provenance: Vec::new(),
            instance: None,
        }
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.measured.insert(name.into(), value);
        self
    }

    pub fn tag(&mut self, tag: impl Into<String>) -> &mut Self {
        self.provenance.push(tag.into());
        self
    }

    /// Record a sub-condition; the report passes only if all of them hold.
    pub fn require(&mut self, ok: bool) -> &mut Self {
        self.passed &= ok;
        self
    }

    pub fn headline(&mut self, measured: f64, bound: f64) -> &mut Self {
        self.bound = bound;
        self.margin = bound - measured;
        self
    }

    /// Attach the instance when the report failed.
    pub fn attach_on_failure(&mut self, instance: impl FnOnce() -> serde_json::Value) -> &mut Self {
        if !self.passed {
            self.instance = Some(instance());
        }
        self
    }
}
