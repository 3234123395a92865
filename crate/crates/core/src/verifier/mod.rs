//! Executable checks for the identities, theorems, remarks, and lemmas, each
//! producing a reconstructible [`CheckReport`].

mod checks;
mod suite;

pub use checks::*;
pub use suite::default_suite;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A typed parameter value recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<u64> for ParamValue {
    fn from(v: u64) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

/// What the check claims about the estimated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Target {
    /// Two-sided agreement with a value.
    Value { value: f64 },
    /// The quantity is claimed to be at most `bound`.
    AtMost { bound: f64 },
    /// The quantity is claimed to be at least `bound`.
    AtLeast { bound: f64 },
    /// Reported for inspection; no assertion.
    Report,
}

impl Target {
    pub fn value(v: f64) -> Self {
        Target::Value { value: v }
    }

    pub fn at_most(b: f64) -> Self {
        Target::AtMost { bound: b }
    }

    pub fn at_least(b: f64) -> Self {
        Target::AtLeast { bound: b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// The 4-sigma three-way verdict.
///
/// For inequality targets: `fail` when the estimate violates the bound by
/// more than `z` standard errors, `pass` when it confirms the claim by more
/// than `z` standard errors, `indeterminate` when the interval straddles the
/// bound. For value targets: `pass` iff the target is within `z` standard
/// errors.
pub fn derive_verdict(value: f64, std_error: f64, target: Target, z: f64) -> Verdict {
    let band = z * std_error;
    match target {
        Target::Value { value: t } => {
            if (value - t).abs() <= band {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        Target::AtMost { bound } => {
            let margin = value - bound;
            if margin > band {
                Verdict::Fail
            } else if margin < -band {
                Verdict::Pass
            } else {
                Verdict::Indeterminate
            }
        }
        Target::AtLeast { bound } => {
            let margin = bound - value;
            if margin > band {
                Verdict::Fail
            } else if margin < -band {
                Verdict::Pass
            } else {
                Verdict::Indeterminate
            }
        }
        Target::Report => Verdict::Pass,
    }
}

/// Verdict record for one executed check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params: BTreeMap<String, ParamValue>,
    pub estimate: f64,
    pub std_error: f64,
    pub n: u64,
    pub target: Target,
    pub tolerance_policy: String,
    pub verdict: Verdict,
}

impl CheckReport {
    /// Builds a report with the verdict derived from the standard 4-sigma rule.
    pub fn derived(
        check_id: &str,
        params: BTreeMap<String, ParamValue>,
        estimate: f64,
        std_error: f64,
        n: u64,
        target: Target,
        policy: &str,
    ) -> Self {
        let verdict = derive_verdict(estimate, std_error, target, crate::estimators::CONFIDENCE_Z);
        Self {
            check_id: check_id.to_string(),
            params,
            estimate,
            std_error,
            n,
            target,
            tolerance_policy: policy.to_string(),
            verdict,
        }
    }
}

/// Builds a parameter map from key/value pairs.
pub fn param_map<const K: usize>(pairs: [(&str, ParamValue); K]) -> BTreeMap<String, ParamValue> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
