//! Signature-based behavior detection.
//!
//! A signature is a bad-prefix pattern over action events. Detection
//! flattens the model once and searches the product with each pattern for
//! a reachable accepting state; a match comes with the shortest behavior
//! that triggers it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automata::{SequentialAutomaton, Validate};
use crate::check::{check_bad_prefix, flatten, CheckError, Trace, Verdict};
use crate::compose::{MacroInput, MimicAutomaton, MimicConfiguration};
use crate::format::{self, Diagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub fn name(self) -> &'static str {
        match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
            Severity::Critical => "critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            "critical" => Ok(Severity::Critical),
            other => Err(format!("unknown severity `{other}` (low, medium, high, critical)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub id: String,
    pub description: String,
    pub pattern: SequentialAutomaton,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("signature `{0}` has no final state and can never match")]
    Unmatchable(String),
    #[error("signature `{id}` defined in both {} and {}", first.display(), second.display())]
    Duplicate {
        id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}", render_diagnostics(.0))]
    Parse(Vec<Diagnostic>),
    #[error(transparent)]
    Check(#[from] CheckError),
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

impl Signature {
    pub fn check(&self) -> Result<(), DetectError> {
        if self.pattern.finals.is_empty() || !self.pattern.validate().is_valid() {
            return Err(DetectError::Unmatchable(self.id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignatureResult {
    pub id: String,
    pub description: String,
    pub severity: Severity,
    pub matched: bool,
    pub witness: Option<Trace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub model: String,
    pub metadata: BTreeMap<String, String>,
    pub states: usize,
    pub transitions: usize,
    pub results: Vec<SignatureResult>,
}

impl DetectionReport {
    pub fn any_match(&self) -> bool {
        self.results.iter().any(|r| r.matched)
    }
}

/// Scans every behavior reachable from `cfg` under `universe` against
/// each signature.
pub fn detect(
    ma: &MimicAutomaton,
    cfg: &MimicConfiguration,
    universe: &[MacroInput],
    signatures: &[Signature],
    bound: usize,
) -> Result<DetectionReport, DetectError> {
    for s in signatures {
        s.check()?;
    }
    let ts = flatten(ma, cfg, universe, bound)?;
    let results = signatures
        .par_iter()
        .map(|s| {
            let r = check_bad_prefix(ma, &ts, &s.pattern)?;
            Ok(SignatureResult {
                id: s.id.clone(),
                description: s.description.clone(),
                severity: s.severity,
                matched: r.verdict == Verdict::Violated,
                witness: r.counterexample,
            })
        })
        .collect::<Result<Vec<_>, CheckError>>()?;
    Ok(DetectionReport {
        model: ma.name.clone(),
        metadata: ma.metadata.clone(),
        states: ts.len(),
        transitions: ts.transition_count(),
        results,
    })
}

/// Reads signatures from files and directories (every `*.ma` file
/// inside, non-recursively). Ids must be unique across all sources.
pub fn load_signatures<P: AsRef<Path>>(sources: &[P]) -> Result<Vec<Signature>, DetectError> {
    let mut files = Vec::new();
    for src in sources {
        let src = src.as_ref();
        if src.is_dir() {
            let entries = std::fs::read_dir(src).map_err(|e| DetectError::Io {
                path: src.to_owned(),
                message: e.to_string(),
            })?;
            let mut inside: Vec<PathBuf> = entries
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "ma"))
                .collect();
            inside.sort();
            files.extend(inside);
        } else {
            files.push(src.to_owned());
        }
    }
    let mut out: Vec<Signature> = Vec::new();
    let mut origin: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in files {
        let text = std::fs::read_to_string(&path).map_err(|e| DetectError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let doc = format::parse(&text, &path.display().to_string()).map_err(DetectError::Parse)?;
        for sig in doc.signatures()? {
            if let Some(first) = origin.get(&sig.id) {
                return Err(DetectError::Duplicate {
                    id: sig.id,
                    first: first.clone(),
                    second: path,
                });
            }
            origin.insert(sig.id.clone(), path.clone());
            out.push(sig);
        }
    }
    Ok(out)
}
