//! Line-delimited JSON diagnostic reports: one header object, then one object
//! per check.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "ssguard-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Info => "INFO",
        })
    }
}

/// f64 that survives JSON even when infinite or NaN (written as a string).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "nan" => Ok(Num(f64::NAN)),
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                _ => Err(serde::de::Error::custom(format!("bad number {s:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    /// The claim being checked, in words.
    pub reference: String,
    pub residual: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Num>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub wall_ms: f64,
}

impl Entry {
    /// FAIL iff residual > tolerance (a NaN residual fails).
    pub fn check(name: impl Into<String>, reference: impl Into<String>, residual: f64, tolerance: f64) -> Entry {
        let verdict = if residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        Entry {
            name: name.into(),
            reference: reference.into(),
            residual: Num(residual),
            tolerance: Some(Num(tolerance)),
            verdict,
            note: None,
            wall_ms: 0.0,
        }
    }

    pub fn info(name: impl Into<String>, reference: impl Into<String>, value: f64) -> Entry {
        Entry {
            name: name.into(),
            reference: reference.into(),
            residual: Num(value),
            tolerance: None,
            verdict: Verdict::Info,
            note: None,
            wall_ms: 0.0,
        }
    }

    pub fn inconclusive(name: impl Into<String>, reference: impl Into<String>, value: f64, note: impl Into<String>) -> Entry {
        Entry {
            name: name.into(),
            reference: reference.into(),
            residual: Num(value),
            tolerance: None,
            verdict: Verdict::Inconclusive,
            note: Some(note.into()),
            wall_ms: 0.0,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Entry {
        let note = note.into();
        self.note = Some(match self.note.take() {
            Some(n) => format!("{n}; {note}"),
            None => note,
        });
        self
    }

    /// Downgrades a failing check to INFO: the identity only holds for exact
    /// solutions, so a large residual is reported but not failed.
    pub fn informational(mut self) -> Entry {
        if self.verdict == Verdict::Fail {
            self.verdict = Verdict::Info;
        }
        self
    }

    pub fn timed(mut self, start: Instant) -> Entry {
        self.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn residual(&self) -> f64 {
        self.residual.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default)]
    pub norms: BTreeMap<String, Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    schema: String,
    tool_version: String,
    profile: ProfileMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticReport {
    pub tool_version: String,
    pub profile: ProfileMeta,
    pub entries: Vec<Entry>,
}

impl DiagnosticReport {
    pub fn new(profile: ProfileMeta) -> Self {
        DiagnosticReport { tool_version: env!("CARGO_PKG_VERSION").to_string(), profile, entries: Vec::new() }
    }

    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }

    pub fn extend(&mut self, es: impl IntoIterator<Item = Entry>) {
        self.entries.extend(es);
    }

    pub fn any_fail(&self) -> bool {
        self.entries.iter().any(|e| e.verdict == Verdict::Fail)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let h = Header { schema: SCHEMA.into(), tool_version: self.tool_version.clone(), profile: self.profile.clone() };
        out.push_str(&serde_json::to_string(&h).expect("header serializes"));
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`to_jsonl`](Self::to_jsonl).
    pub fn from_jsonl(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or("empty report")?;
        let h: Header = serde_json::from_str(head).map_err(|e| format!("header: {e}"))?;
        if h.schema != SCHEMA {
            return Err(format!("unsupported schema {:?}", h.schema));
        }
        let entries = lines
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("entry {i}: {e}")))
            .collect::<std::result::Result<Vec<Entry>, String>>()?;
        Ok(DiagnosticReport { tool_version: h.tool_version, profile: h.profile, entries })
    }

    /// Aligned plain-text table for terminals.
    pub fn to_table(&self) -> String {
        let w = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        for e in &self.entries {
            let tol = e.tolerance.map(|t| format!("{:.3e}", t.0)).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{:<w$}  {:<12}  {:>11.4e}  tol {:>9}", e.name, e.verdict.to_string(), e.residual.0, tol));
            if let Some(n) = &e.note {
                out.push_str("  ");
                out.push_str(n);
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for DiagnosticReport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| Error::Report("empty report".into()))?;
        let h: Header = serde_json::from_str(first).map_err(|e| Error::Report(format!("header: {e}")))?;
        if h.schema != SCHEMA {
            return Err(Error::Report(format!("unsupported schema {:?}", h.schema)));
        }
        let entries = lines
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Report(format!("entry {}: {e}", i + 1))))
            .collect::<Result<Vec<Entry>>>()?;
        Ok(DiagnosticReport { tool_version: h.tool_version, profile: h.profile, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_tolerance() {
        assert_eq!(Entry::check("a", "r", 1e-9, 1e-8).verdict, Verdict::Pass);
        assert_eq!(Entry::check("a", "r", 1e-8, 1e-8).verdict, Verdict::Pass);
        assert_eq!(Entry::check("a", "r", 2e-8, 1e-8).verdict, Verdict::Fail);
        assert_eq!(Entry::check("a", "r", f64::NAN, 1e-8).verdict, Verdict::Fail);
    }

    #[test]
    fn roundtrip_is_lossless() {
        let mut meta = ProfileMeta { gamma: Some(0.4), symmetry: Some("cartesian".into()), ..Default::default() };
        meta.norms.insert("grad_sup".into(), Num(1.0 / 3.0));
        let mut r = DiagnosticReport::new(meta);
        r.push(Entry::check("res.velocity", "velocity form vanishes", 0.1 + 0.2, 1e-8));
        r.push(Entry::info("x", "y", f64::INFINITY).with_note("unbounded"));
        r.push(Entry::inconclusive("z", "w", f64::NAN, "n"));
        let text = r.to_jsonl();
        let back: DiagnosticReport = text.parse().unwrap();
        assert_eq!(back.to_jsonl(), text);
        assert_eq!(back.entries[0].residual.0, 0.1 + 0.2);
        assert!(back.entries[2].residual.0.is_nan());
    }

    #[test]
    fn rejects_foreign_schema() {
        assert!("{\"schema\":\"other\",\"tool_version\":\"0\",\"profile\":{}}".parse::<DiagnosticReport>().is_err());
    }
}
