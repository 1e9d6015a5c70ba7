//! Verification reports.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use serde_json::Value;

/// A real serialized with 12 significant digits (non-finite values as `null`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn rounded(self) -> Option<f64> {
        self.0
            .is_finite()
            .then(|| format!("{:.11e}", self.0).parse().expect("formatted float parses"))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.rounded() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_none(),
        }
    }
}

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.rounded() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "nan"),
        }
    }
}

/// One named inequality with its measured sides.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// The inequality in words, with the slack it was checked under.
    pub inequality: String,
    pub lhs: Num,
    pub rhs: Num,
    /// `rhs - lhs` for `≤`, `lhs - rhs` for `≥`.
    pub margin: Num,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, inequality: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check {
            name: name.into(),
            inequality: inequality.into(),
            lhs: Num(lhs),
            rhs: Num(rhs),
            margin: Num(rhs - lhs),
            passed: lhs <= rhs,
        }
    }

    pub fn ge(name: impl Into<String>, inequality: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Check {
            name: name.into(),
            inequality: inequality.into(),
            lhs: Num(lhs),
            rhs: Num(rhs),
            margin: Num(lhs - rhs),
            passed: lhs >= rhs,
        }
    }

    pub fn eq(name: impl Into<String>, inequality: impl Into<String>, lhs: usize, rhs: usize) -> Self {
        Check {
            name: name.into(),
            inequality: inequality.into(),
            lhs: Num(lhs as f64),
            rhs: Num(rhs as f64),
            margin: Num(0.0),
            passed: lhs == rhs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub dim_cap: usize,
    pub config: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub construction: String,
    pub measured: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(construction: impl Into<String>, dim_cap: usize) -> Self {
        VerificationReport {
            construction: construction.into(),
            measured: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                dim_cap,
                config: BTreeMap::new(),
            },
            passed: true,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.provenance.config.insert(key.to_string(), to_value(value));
        self
    }

    pub fn measure(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.measured.insert(key.to_string(), to_value(value));
        self
    }

    pub fn measure_num(&mut self, key: &str, value: f64) -> &mut Self {
        self.measure(key, Num(value))
    }

    pub fn check(&mut self, c: Check) -> &mut Self {
        self.passed &= c.passed;
        self.checks.push(c);
        self
    }

    pub fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.notes.push(n.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per check: `name,inequality,lhs,rhs,margin,passed`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,inequality,lhs,rhs,margin,passed\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},\"{}\",{},{},{},{}\n",
                c.name, c.inequality, c.lhs, c.rhs, c.margin, c.passed
            ));
        }
        out
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("value serializes")
}
