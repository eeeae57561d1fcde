//! The declarative text format.
//!
//! A document is a sequence of blocks `kind name { … }`, one field per
//! line:
//!
//! ```text
//! sa parity {
//!   states: even odd
//!   initial: even
//!   inputs: 0 1
//!   outputs: 0 1
//!   delta: even 0 -> even / 0
//!   delta: even 1 -> odd / 1
//!   delta: odd 0 -> odd / 1
//!   delta: odd 1 -> even / 0
//! }
//! ```
//!
//! Kinds are `sa`, `ca`, `pca`, `ha`, `binding`, `ma`, `dhr`,
//! `serial_dhr`, `property` and `signature`. Blocks refer to each other by
//! name. Parsing reports every problem as a located [`Diagnostic`];
//! [`serialize`] writes the canonical form.

mod lex;
mod read;
mod resolve;
mod write;


use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{AnyCa, SequentialAutomaton};
use crate::check::{Method, Predicate};
use crate::compose::{BindingMode, MacroInput, MimicAutomaton, MimicConfiguration};
use crate::detect::Severity;
use crate::dhr::{DhrStructure, SerialDhr, VoterPolicy};
use crate::word::Word;

pub use write::serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagKind {
    Lexical,
    Syntax,
    Reference,
    Semantic,
}

impl fmt::Display for DiagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagKind::Lexical => "lexical",
            DiagKind::Syntax => "syntax",
            DiagKind::Reference => "reference",
            DiagKind::Semantic => "semantic",
        })
    }
}

/// A position in a source file; lines and columns count from 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Loc {
    pub file: String,
    pub line: usize,
    pub col: usize,
}

impl Loc {
    pub fn new(file: &str, line: usize, col: usize) -> Self {
        Loc {
            file: file.to_owned(),
            line,
            col,
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Diagnostic {
    pub loc: Loc,
    pub kind: DiagKind,
    pub message: String,
    /// What would have been accepted here, when that is a short list.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn new(kind: DiagKind, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic {
            loc,
            kind,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub fn expecting<S: ToString>(mut self, expected: impl IntoIterator<Item = S>) -> Self {
        self.expected = expected.into_iter().map(|s| s.to_string()).collect();
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} error: {}", self.loc, self.kind, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// Block kinds, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Binding,
    Ca,
    Dhr,
    Ha,
    Ma,
    Pca,
    Property,
    Sa,
    SerialDhr,
    Signature,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Binding,
        Kind::Ca,
        Kind::Dhr,
        Kind::Ha,
        Kind::Ma,
        Kind::Pca,
        Kind::Property,
        Kind::Sa,
        Kind::SerialDhr,
        Kind::Signature,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Binding => "binding",
            Kind::Ca => "ca",
            Kind::Dhr => "dhr",
            Kind::Ha => "ha",
            Kind::Ma => "ma",
            Kind::Pca => "pca",
            Kind::Property => "property",
            Kind::Sa => "sa",
            Kind::SerialDhr => "serial_dhr",
            Kind::Signature => "signature",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    /// `ca` and `pca` blocks share one namespace.
    fn namespace(self) -> Kind {
        if self == Kind::Pca {
            Kind::Ca
        } else {
            self
        }
    }
}

/// A hierarchy by reference to `sa` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaSpec {
    pub sas: Vec<String>,
    pub root: String,
    pub gamma: BTreeMap<(String, String), BTreeSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitSpec {
    Sa(String),
    Ha(String),
    Nested(String),
}

/// A binding with cell states and lattices written by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingSpec {
    pub mode: BindingMode,
    pub ca: String,
    pub map: BTreeMap<String, UnitSpec>,
    pub readout: BTreeMap<Vec<String>, String>,
    pub readout_default: Option<String>,
    pub readout_cell: Option<usize>,
    pub outer: Option<String>,
    pub t_max: Option<usize>,
    pub init: Option<Vec<String>>,
    pub voter: Option<VoterPolicy>,
}

/// Input blocks for exploration (`universe`) and for probabilistic runs
/// (`policy`, cycled). Seeds drive lattice-driven roots.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputSpec {
    pub universe: Vec<Word>,
    pub universe_seed: Vec<Vec<String>>,
    pub policy: Vec<Word>,
    pub policy_seed: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaSpec {
    pub root_binding: String,
    pub max_depth: Option<usize>,
    pub init: Option<Vec<String>>,
    pub inputs: InputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhrSpec {
    /// Executor for each scheduler cell state, in cell-state order.
    pub executors: Vec<String>,
    pub scheduler: String,
    pub voter: Option<VoterPolicy>,
    pub init: Vec<String>,
    pub faults: BTreeMap<usize, String>,
    pub inputs: InputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerialSpec {
    pub stages: Vec<String>,
    pub inputs: InputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyKind {
    Invariant(Predicate),
    Reach(Predicate),
    /// Name of an `sa` block used as the monitor.
    BadPrefix(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertySpec {
    pub kind: PropertyKind,
    pub horizon: Option<usize>,
    pub method: Option<Method>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureSpec {
    pub pattern: String,
    pub severity: Severity,
    pub description: String,
}

/// Where a block and each of its lines came from.
#[derive(Debug, Clone, Default)]
pub(crate) struct BlockOrigin {
    pub loc: Loc,
    /// `(field key, location, value tokens)` per field line and table row.
    pub lines: Vec<(String, Loc, Vec<String>)>,
}

impl Default for Loc {
    fn default() -> Self {
        Loc::new("<memory>", 0, 0)
    }
}

/// Source locations. Not part of a document's content: two documents
/// with equal blocks are equal wherever they came from.
#[derive(Debug, Clone, Default)]
pub(crate) struct Origins(pub BTreeMap<(Kind, String), BlockOrigin>);

impl PartialEq for Origins {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// A parsed set of blocks, keyed by name within each kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelDocument {
    pub sas: BTreeMap<String, SequentialAutomaton>,
    /// Both `ca` and `pca` blocks.
    pub cas: BTreeMap<String, AnyCa>,
    pub has: BTreeMap<String, HaSpec>,
    pub bindings: BTreeMap<String, BindingSpec>,
    pub mas: BTreeMap<String, MaSpec>,
    pub dhrs: BTreeMap<String, DhrSpec>,
    pub serials: BTreeMap<String, SerialSpec>,
    pub properties: BTreeMap<String, PropertySpec>,
    pub signatures: BTreeMap<String, SignatureSpec>,
    pub(crate) origins: Origins,
}

/// A runnable machine with its starting point and input sets.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub ma: MimicAutomaton,
    pub initial: MimicConfiguration,
    pub universe: Vec<MacroInput>,
    pub policy: Vec<MacroInput>,
    pub dhr: Option<DhrStructure>,
    pub serial: Option<SerialDhr>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("no model named `{0}` (models are ma, dhr and serial_dhr blocks)")]
    UnknownModel(String),
    #[error("no property named `{0}`")]
    UnknownProperty(String),
    #[error("{}", render_all(.0))]
    Diagnostics(Vec<Diagnostic>),
}

pub fn render_all(ds: &[Diagnostic]) -> String {
    ds.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Parses and validates one document.
pub fn parse(text: &str, file: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    parse_files(&[(file, text)])
}

/// Parses several files as one document set: names resolve across all of
/// them, and a name may be defined once per kind over the whole set.
pub fn parse_files<F: AsRef<str>, T: AsRef<str>>(files: &[(F, T)]) -> Result<ModelDocument, Vec<Diagnostic>> {
    let mut doc = ModelDocument::default();
    let mut diags = Vec::new();
    for (file, text) in files {
        match read::read(text.as_ref(), file.as_ref()) {
            Ok(part) => doc.merge(part, &mut diags),
            Err(mut ds) => diags.append(&mut ds),
        }
    }
    if diags.is_empty() {
        diags = doc.validate();
    }
    if diags.is_empty() {
        Ok(doc)
    } else {
        diags.sort();
        diags.dedup();
        Err(diags)
    }
}

impl ModelDocument {
    pub fn is_empty(&self) -> bool {
        self.block_names().is_empty()
    }

    /// Every `(kind, name)` in the document, in canonical order.
    pub fn block_names(&self) -> Vec<(Kind, String)> {
        let mut out: Vec<(Kind, String)> = Vec::new();
        out.extend(self.bindings.keys().map(|n| (Kind::Binding, n.clone())));
        for (n, c) in &self.cas {
            let k = if c.is_probabilistic() { Kind::Pca } else { Kind::Ca };
            out.push((k, n.clone()));
        }
        out.extend(self.dhrs.keys().map(|n| (Kind::Dhr, n.clone())));
        out.extend(self.has.keys().map(|n| (Kind::Ha, n.clone())));
        out.extend(self.mas.keys().map(|n| (Kind::Ma, n.clone())));
        out.extend(self.properties.keys().map(|n| (Kind::Property, n.clone())));
        out.extend(self.sas.keys().map(|n| (Kind::Sa, n.clone())));
        out.extend(self.serials.keys().map(|n| (Kind::SerialDhr, n.clone())));
        out.extend(self.signatures.keys().map(|n| (Kind::Signature, n.clone())));
        out.sort();
        out
    }

    /// Names of the runnable models.
    pub fn model_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .mas
            .keys()
            .chain(self.dhrs.keys())
            .chain(self.serials.keys())
            .cloned()
            .collect();
        v.sort();
        v
    }

    fn merge(&mut self, other: ModelDocument, diags: &mut Vec<Diagnostic>) {
        let seen: BTreeSet<(Kind, String)> = self
            .block_names()
            .into_iter()
            .map(|(k, n)| (k.namespace(), n))
            .collect();
        for (kind, name) in other.block_names() {
            if seen.contains(&(kind.namespace(), name.clone())) {
                let loc = other.origin(kind, &name).loc.clone();
                let first = self.origin(kind, &name).loc.clone();
                diags.push(Diagnostic::new(
                    DiagKind::Semantic,
                    loc,
                    format!("duplicate {} `{name}` (first defined at {first})", kind.keyword()),
                ));
            }
        }
        let ModelDocument {
            sas,
            cas,
            has,
            bindings,
            mas,
            dhrs,
            serials,
            properties,
            signatures,
            origins,
        } = other;
        self.sas.extend(sas);
        self.cas.extend(cas);
        self.has.extend(has);
        self.bindings.extend(bindings);
        self.mas.extend(mas);
        self.dhrs.extend(dhrs);
        self.serials.extend(serials);
        self.properties.extend(properties);
        self.signatures.extend(signatures);
        for (k, v) in origins.0 {
            self.origins.0.entry(k).or_insert(v);
        }
    }

    pub(crate) fn origin(&self, kind: Kind, name: &str) -> BlockOrigin {
        self.origins
            .0
            .get(&(kind.namespace(), name.to_owned()))
            .cloned()
            .unwrap_or_default()
    }
}
