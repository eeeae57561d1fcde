//! The composite machine: hierarchical, sequential and cellular automata
//! coupled through bindings.
//!
//! A [`Binding`] couples a cellular automaton with sequential behavior in one
//! of two directions:
//!
//! * [`BindingMode::SaFromCa`]: every cell hosts a [`Unit`]. One macro tick
//!   runs all hosted units to completion on a shared input block while the
//!   lattice is frozen, then applies exactly one lattice update.
//! * [`BindingMode::CaFromSa`]: one macro tick runs the cellular automaton to
//!   a fixpoint (or its step cap), reads the final lattice out as one input
//!   symbol and fires exactly one transition of the outer automaton.
//!
//! Units may host whole bindings ([`Unit::Nested`]), so the two directions
//! can call each other up to `max_depth` levels. The macro clock counts
//! ticks at the top level and is the only notion of time.

mod chance;
mod engine;
pub mod fixtures;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::automata::{
    AnyCa, AutomatonError, HaConfiguration, HierarchicalAutomaton, Invariant, Lattice, Report,
    RunResult, SequentialAutomaton, Subject, Validate,
};
use crate::dhr::vote::{Vote, VoterPolicy};
use crate::word::{render_word, Word};

pub use chance::{Chance, Deterministic, Sampler};
pub(crate) use chance::enumerate;

pub const DEFAULT_MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BindingMode {
    /// Cells host sequential behavior; a unit run lasts one lattice step.
    SaFromCa,
    /// A full lattice run lasts one transition of the outer automaton.
    CaFromSa,
}

impl BindingMode {
    pub fn keyword(self) -> &'static str {
        match self {
            BindingMode::SaFromCa => "sa_from_ca",
            BindingMode::CaFromSa => "ca_from_sa",
        }
    }
}

/// What a cell hosts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Unit {
    PlainSa(String),
    /// The input is delivered to the whole hierarchy; `path` is reserved and
    /// must be empty.
    HaUnit { ha: String, path: Vec<String> },
    Nested(String),
}

/// Maps the final lattice of a lattice run to an input symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Readout {
    /// Explicit rows, with an optional fallback for missing lattices.
    Table {
        entries: BTreeMap<Lattice, String>,
        default: Option<String>,
    },
    /// The name of the state of one cell.
    Cell(usize),
}

impl Readout {
    pub fn read(&self, lattice: &Lattice, cell_states: &[String]) -> Option<String> {
        match self {
            Readout::Table { entries, default } => {
                entries.get(lattice).or(default.as_ref()).cloned()
            }
            Readout::Cell(i) => lattice.cells().get(*i).map(|&c| cell_states[c].clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub mode: BindingMode,
    pub ca: String,
    /// Hosted unit for every cell-state index.
    pub cell_map: BTreeMap<usize, Unit>,
    pub readout: Option<Readout>,
    pub outer_sa: Option<String>,
    /// Step cap for the lattice run in `CaFromSa` mode.
    pub t_max: usize,
    /// Starting lattice when the binding is hosted as a nested unit, or
    /// when a front-end needs a default.
    pub initial: Option<Lattice>,
    /// Arbitrates the per-cell output words in `SaFromCa` mode.
    pub voter: Option<VoterPolicy>,
}

impl Binding {
    pub fn sa_from_ca(name: impl Into<String>, ca: impl Into<String>) -> Self {
        Binding {
            name: name.into(),
            mode: BindingMode::SaFromCa,
            ca: ca.into(),
            cell_map: BTreeMap::new(),
            readout: None,
            outer_sa: None,
            t_max: crate::automata::DEFAULT_RUN_CAP,
            initial: None,
            voter: None,
        }
    }

    pub fn ca_from_sa(
        name: impl Into<String>,
        ca: impl Into<String>,
        outer_sa: impl Into<String>,
        readout: Readout,
        t_max: usize,
    ) -> Self {
        Binding {
            mode: BindingMode::CaFromSa,
            outer_sa: Some(outer_sa.into()),
            readout: Some(readout),
            t_max,
            ..Binding::sa_from_ca(name, ca)
        }
    }

    pub fn host(mut self, cell_state: usize, unit: Unit) -> Self {
        self.cell_map.insert(cell_state, unit);
        self
    }

    pub fn with_initial(mut self, lattice: Lattice) -> Self {
        self.initial = Some(lattice);
        self
    }

    pub fn with_voter(mut self, voter: VoterPolicy) -> Self {
        self.voter = Some(voter);
        self
    }
}

/// Chains several `SaFromCa` bindings: a sequencer automaton walks its
/// states on `advance`, and each state mapped to a stage runs that stage
/// with the previous stage's observed output as its input block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerialPlan {
    /// Hierarchy whose root automaton is the sequencer.
    pub ha: String,
    pub advance: String,
    pub stage_of: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MimicAutomaton {
    pub name: String,
    pub ha_set: Vec<HierarchicalAutomaton>,
    pub sa_set: Vec<SequentialAutomaton>,
    pub ca_set: Vec<AnyCa>,
    pub bindings: Vec<Binding>,
    pub root_binding: String,
    pub max_depth: usize,
    pub serial: Option<SerialPlan>,
    /// Free-form notes, e.g. how a modeled structure maps onto the parts.
    pub metadata: BTreeMap<String, String>,
}

/// Run-time state of one hosted unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitState {
    Sa(String),
    Ha(HaConfiguration),
    Nested(Box<BindingState>),
}

/// Run-time state of one binding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BindingState {
    pub lattice: Lattice,
    /// One entry per cell.
    pub units: Vec<UnitState>,
    /// Outer automaton state in `CaFromSa` mode.
    pub outer: Option<String>,
}

/// Run-time state of a composite machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MimicConfiguration {
    pub root: BindingState,
    /// Downstream stages of a serial plan, in sequencing order.
    pub stages: Vec<BindingState>,
    pub macro_clock: u64,
}

impl MimicConfiguration {
    pub fn lattice(&self) -> &Lattice {
        &self.root.lattice
    }

    pub fn unit_states(&self) -> &[UnitState] {
        &self.root.units
    }

    /// Everything but the clock; equal keys mean equal future behavior.
    pub fn key(&self) -> ConfigKey {
        ConfigKey {
            root: self.root.clone(),
            stages: self.stages.clone(),
        }
    }
}

/// Clock-free identity of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConfigKey {
    pub root: BindingState,
    pub stages: Vec<BindingState>,
}

impl ConfigKey {
    pub fn with_clock(&self, macro_clock: u64) -> MimicConfiguration {
        MimicConfiguration {
            root: self.root.clone(),
            stages: self.stages.clone(),
            macro_clock,
        }
    }
}

/// Input of one macro tick.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroInput {
    /// Input block for `SaFromCa` roots.
    Block(Word),
    /// Starting lattice of the inner run for `CaFromSa` roots.
    Seed(Lattice),
}

/// What a tick produced, as seen from outside.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    /// Output word of a voted tick or of an outer transition.
    Word(Word),
    /// Unarbitrated per-cell output words.
    Cells(Vec<Word>),
    Abstain,
}

impl Observed {
    /// Single word view: cells concatenate, abstention is empty.
    pub fn as_word(&self) -> Word {
        match self {
            Observed::Word(w) => w.clone(),
            Observed::Cells(ws) => ws.concat(),
            Observed::Abstain => Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Observed::Word(w) => render_word(w),
            Observed::Cells(ws) => ws.iter().map(|w| render_word(w)).collect::<Vec<_>>().join("|"),
            Observed::Abstain => "abstain".to_owned(),
        }
    }

    fn from_vote(vote: Vote) -> Self {
        match vote {
            Vote::Agreed { word, .. } => Observed::Word(word),
            Vote::Abstain => Observed::Abstain,
        }
    }
}

/// What one cell did during a `SaFromCa` tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellRun {
    /// Lattice of the hosting binding while this unit ran.
    pub host_lattice: Lattice,
    pub outcome: UnitOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitOutcome {
    Run(RunResult),
    Nested(Box<TickRecord>),
}

impl CellRun {
    pub fn output_word(&self) -> Word {
        match &self.outcome {
            UnitOutcome::Run(r) => r.output_word.clone(),
            UnitOutcome::Nested(t) => t.output.as_word(),
        }
    }
}

/// Inner lattice run of a `CaFromSa` tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InnerRun {
    pub trace: Vec<Lattice>,
    pub symbol: String,
    pub outer_before: String,
    pub outer_after: String,
}

/// Record of one tick of one binding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TickRecord {
    pub binding: String,
    pub input: MacroInput,
    pub lattice_before: Lattice,
    pub lattice_after: Lattice,
    pub cells: Vec<CellRun>,
    pub inner: Option<InnerRun>,
    pub vote: Option<Vote>,
    pub output: Observed,
    /// Lattice updates applied by this binding itself (not nested ones).
    pub phi_applications: usize,
    /// Outer transitions fired by this binding itself.
    pub delta_applications: usize,
}

/// Record of one top-level macro tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MacroTick {
    pub clock_before: u64,
    /// The root binding first, then downstream serial stages that ran.
    pub stages: Vec<TickRecord>,
    /// Stage index whose vote abstained, which ends a serial run.
    pub abstained_at: Option<usize>,
}

impl MacroTick {
    pub fn root(&self) -> &TickRecord {
        &self.stages[0]
    }

    /// Observation of the last stage that ran.
    pub fn output(&self) -> &Observed {
        &self.stages.last().expect("a tick runs at least the root").output
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MacroTrace {
    pub ticks: Vec<MacroTick>,
    /// Set when a serial stage abstained and the run stopped early.
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("binding nesting deeper than {max_depth}")]
    Nesting { max_depth: usize },
    #[error("binding `{binding}` expects {expected} input")]
    ModeMismatch { binding: String, expected: &'static str },
    #[error("cell {cell} of `{binding}` rejected `{symbol}` at position {position}")]
    InputRejected {
        binding: String,
        cell: usize,
        symbol: String,
        position: usize,
    },
    #[error("readout of `{binding}` undefined on lattice {lattice}")]
    Readout { binding: String, lattice: String },
    #[error("binding `{binding}` has no initial lattice")]
    MissingInitial { binding: String },
    #[error("cellular automaton `{name}` is probabilistic but no random source was supplied")]
    Nondeterministic { name: String },
    #[error("invalid composite automaton: {0:?}")]
    Invalid(Report),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Validation reports grouped by component kind, plus the composition
/// layer itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentReports {
    pub sa: Report,
    pub ca: Report,
    pub ha: Report,
    pub pa: Report,
    pub composition: Report,
}

impl ComponentReports {
    pub fn is_valid(&self) -> bool {
        self.sa.is_valid()
            && self.ca.is_valid()
            && self.ha.is_valid()
            && self.pa.is_valid()
            && self.composition.is_valid()
    }

    pub fn groups(&self) -> [(&'static str, &Report); 5] {
        [
            ("sa", &self.sa),
            ("ca", &self.ca),
            ("ha", &self.ha),
            ("pa", &self.pa),
            ("composition", &self.composition),
        ]
    }

    pub fn flatten(&self) -> Report {
        let mut all = Report::default();
        for (_, r) in self.groups() {
            all.extend(r.clone());
        }
        all
    }
}

impl MimicAutomaton {
    /// A machine with a single root binding.
    pub fn new(name: impl Into<String>, root_binding: impl Into<String>) -> Self {
        MimicAutomaton {
            name: name.into(),
            ha_set: Vec::new(),
            sa_set: Vec::new(),
            ca_set: Vec::new(),
            bindings: Vec::new(),
            root_binding: root_binding.into(),
            max_depth: DEFAULT_MAX_DEPTH,
            serial: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_sa(mut self, sa: SequentialAutomaton) -> Self {
        self.sa_set.push(sa);
        self
    }

    pub fn with_ha(mut self, ha: HierarchicalAutomaton) -> Self {
        self.ha_set.push(ha);
        self
    }

    pub fn with_ca(mut self, ca: impl Into<AnyCa>) -> Self {
        self.ca_set.push(ca.into());
        self
    }

    pub fn with_binding(mut self, binding: Binding) -> Self {
        self.bindings.push(binding);
        self
    }

    pub fn sa(&self, name: &str) -> Result<&SequentialAutomaton, MaError> {
        self.sa_set.iter().find(|s| s.name == name).ok_or_else(|| MaError::Unknown {
            kind: "sequential automaton",
            name: name.to_owned(),
        })
    }

    pub fn ha(&self, name: &str) -> Result<&HierarchicalAutomaton, MaError> {
        self.ha_set.iter().find(|s| s.name == name).ok_or_else(|| MaError::Unknown {
            kind: "hierarchical automaton",
            name: name.to_owned(),
        })
    }

    pub fn ca(&self, name: &str) -> Result<&AnyCa, MaError> {
        self.ca_set.iter().find(|s| s.name() == name).ok_or_else(|| MaError::Unknown {
            kind: "cellular automaton",
            name: name.to_owned(),
        })
    }

    pub fn binding(&self, name: &str) -> Result<&Binding, MaError> {
        self.bindings.iter().find(|b| b.name == name).ok_or_else(|| MaError::Unknown {
            kind: "binding",
            name: name.to_owned(),
        })
    }

    pub fn root(&self) -> Result<&Binding, MaError> {
        self.binding(&self.root_binding)
    }

    /// Whether any cellular automaton in the machine is probabilistic.
    pub fn is_probabilistic(&self) -> bool {
        self.ca_set.iter().any(AnyCa::is_probabilistic)
    }

    /// Bindings of a serial plan in sequencing order; just the root binding
    /// otherwise.
    pub fn stage_order(&self) -> Result<Vec<String>, MaError> {
        let Some(plan) = &self.serial else {
            return Ok(vec![self.root_binding.clone()]);
        };
        let ha = self.ha(&plan.ha)?;
        let sequencer = ha.sa(&ha.root).ok_or_else(|| MaError::Unknown {
            kind: "sequential automaton",
            name: ha.root.clone(),
        })?;
        let mut order = Vec::new();
        let mut state = sequencer.initial.clone();
        let mut seen = BTreeSet::new();
        while seen.insert(state.clone()) {
            if let Some(stage) = plan.stage_of.get(&state) {
                order.push(stage.clone());
            }
            if sequencer.finals.contains(&state) {
                break;
            }
            match sequencer.transition(&state, &plan.advance) {
                Some(t) => state = t.target.clone(),
                None => break,
            }
        }
        Ok(order)
    }

    /// Runs validation on every component and on the composition layer.
    pub fn check_components(&self) -> ComponentReports {
        let mut reports = ComponentReports::default();
        for sa in &self.sa_set {
            reports.sa.extend(sa.validate());
        }
        for ha in &self.ha_set {
            reports.ha.extend(ha.validate());
        }
        for ca in &self.ca_set {
            match ca {
                AnyCa::Deterministic(c) => reports.ca.extend(c.validate()),
                AnyCa::Probabilistic(p) => reports.pa.extend(p.validate()),
            }
        }
        reports.composition = self.validate_composition();
        reports
    }

    fn validate_composition(&self) -> Report {
        let mut report = Report::default();
        let owner = self.name.as_str();
        let mut push = |inv: Invariant, subject: Subject, detail: String| {
            report.push(owner, inv, subject, detail)
        };
        let member = |s: &str| Subject::Member(s.to_owned());

        let mut seen = BTreeSet::new();
        for name in self
            .sa_set
            .iter()
            .map(|s| ("sa", s.name.as_str()))
            .chain(self.ha_set.iter().map(|h| ("ha", h.name.as_str())))
            .chain(self.ca_set.iter().map(|c| ("ca", c.name())))
            .chain(self.bindings.iter().map(|b| ("binding", b.name.as_str())))
        {
            if !seen.insert(name) {
                push(Invariant::DuplicateName, member(name.1), name.0.to_owned());
            }
        }

        for b in &self.bindings {
            let Ok(ca) = self.ca(&b.ca) else {
                push(Invariant::UnknownMember, member(&b.name), format!("cellular automaton `{}`", b.ca));
                continue;
            };
            let shape = ca.shape();
            for (q, name) in shape.cell_states.iter().enumerate() {
                if !b.cell_map.contains_key(&q) {
                    push(
                        Invariant::UncoveredCellState,
                        member(&b.name),
                        format!("cell state `{name}`"),
                    );
                }
            }
            if let Some(&q) = b.cell_map.keys().find(|&&q| q >= shape.cell_states.len()) {
                push(Invariant::UnknownCellState, member(&b.name), format!("index {q}"));
            }
            for unit in b.cell_map.values() {
                match unit {
                    Unit::PlainSa(s) if self.sa(s).is_err() => {
                        push(Invariant::UnknownMember, member(&b.name), format!("sequential automaton `{s}`"))
                    }
                    Unit::HaUnit { ha, path } => {
                        if self.ha(ha).is_err() {
                            push(Invariant::UnknownMember, member(&b.name), format!("hierarchical automaton `{ha}`"));
                        }
                        if !path.is_empty() {
                            push(Invariant::BindingShape, member(&b.name), "hierarchy paths must select the whole hierarchy".into());
                        }
                    }
                    Unit::Nested(n) => match self.binding(n) {
                        Err(_) => push(Invariant::UnknownMember, member(&b.name), format!("binding `{n}`")),
                        Ok(inner) => {
                            let width = self.ca(&inner.ca).map(|c| c.shape().width).ok();
                            match (&inner.initial, width) {
                                (None, _) => push(
                                    Invariant::BindingShape,
                                    member(n),
                                    "nested binding needs an initial lattice".into(),
                                ),
                                (Some(l), Some(w)) if l.width() != w => push(
                                    Invariant::BindingShape,
                                    member(n),
                                    format!("initial lattice width {} != {w}", l.width()),
                                ),
                                _ => {}
                            }
                        }
                    },
                    _ => {}
                }
            }
            if let Some(init) = &b.initial {
                if shape.check_lattice(init).is_err() {
                    push(Invariant::BindingShape, member(&b.name), "initial lattice does not fit".into());
                }
            }
            if let Some(v) = &b.voter {
                if !v.is_valid_for(shape.width) {
                    push(Invariant::BindingShape, member(&b.name), format!("quorum {} outside 1..={}", v.quorum, shape.width));
                }
            }
            match b.mode {
                BindingMode::SaFromCa => {
                    if b.readout.is_some() || b.outer_sa.is_some() {
                        push(Invariant::BindingShape, member(&b.name), "readout and outer automaton belong to ca_from_sa".into());
                    }
                }
                BindingMode::CaFromSa => {
                    let outer = match &b.outer_sa {
                        None => {
                            push(Invariant::BindingShape, member(&b.name), "missing outer automaton".into());
                            None
                        }
                        Some(o) => match self.sa(o) {
                            Ok(sa) => Some(sa),
                            Err(_) => {
                                push(Invariant::UnknownMember, member(&b.name), format!("sequential automaton `{o}`"));
                                None
                            }
                        },
                    };
                    match (&b.readout, outer) {
                        (None, _) => push(Invariant::ReadoutNotTotal, member(&b.name), "missing readout".into()),
                        (Some(readout), Some(outer)) => {
                            let mut missing = 0usize;
                            let mut foreign = BTreeSet::new();
                            for l in shape.all_lattices().take(1 << 16) {
                                match readout.read(&l, &shape.cell_states) {
                                    None => missing += 1,
                                    Some(sym) if !outer.has_input(&sym) => {
                                        foreign.insert(sym);
                                    }
                                    _ => {}
                                }
                            }
                            if missing > 0 {
                                push(Invariant::ReadoutNotTotal, member(&b.name), format!("{missing} lattices unmapped"));
                            }
                            for sym in foreign {
                                push(Invariant::UnknownSymbol, member(&b.name), format!("readout symbol `{sym}` not accepted by `{}`", outer.name));
                            }
                        }
                        _ => {}
                    }
                }
            }
        }

        if self.binding(&self.root_binding).is_err() {
            push(Invariant::UnknownRoot, member(&self.root_binding), String::new());
        } else if let Some(depth) = self.nesting_depth() {
            if depth > self.max_depth {
                push(
                    Invariant::NestingDepth,
                    member(&self.root_binding),
                    format!("depth {depth} exceeds {}", self.max_depth),
                );
            }
        } else {
            push(Invariant::NestingDepth, member(&self.root_binding), "cyclic nesting".into());
        }

        if let Some(plan) = &self.serial {
            match self.ha(&plan.ha) {
                Err(_) => push(Invariant::UnknownMember, member(&plan.ha), "serial sequencer".into()),
                Ok(_) => match self.stage_order() {
                    Ok(order) => {
                        if order.first() != Some(&self.root_binding) {
                            push(Invariant::BindingShape, member(&self.root_binding), "root binding must be the first stage".into());
                        }
                        for stage in &order {
                            match self.binding(stage) {
                                Ok(b) if b.mode != BindingMode::SaFromCa => push(Invariant::BindingShape, member(stage), "serial stages must be sa_from_ca".into()),
                                Err(_) => push(Invariant::UnknownMember, member(stage), "serial stage".into()),
                                _ => {}
                            }
                        }
                    }
                    Err(e) => push(Invariant::BindingShape, member(&plan.ha), e.to_string()),
                },
            }
        }
        report
    }

    /// Longest chain of bindings reachable from the root through nested
    /// units, counting the root as depth 1; `None` on a cycle.
    pub fn nesting_depth(&self) -> Option<usize> {
        fn visit(
            ma: &MimicAutomaton,
            name: &str,
            stack: &mut Vec<String>,
        ) -> Option<usize> {
            if stack.iter().any(|s| s == name) {
                return None;
            }
            let Ok(b) = ma.binding(name) else { return Some(0) };
            stack.push(name.to_owned());
            let mut deepest = 0;
            for unit in b.cell_map.values() {
                if let Unit::Nested(n) = unit {
                    deepest = deepest.max(visit(ma, n, stack)?);
                }
            }
            stack.pop();
            Some(deepest + 1)
        }
        let mut roots = self.stage_order().unwrap_or_default();
        if roots.is_empty() {
            roots.push(self.root_binding.clone());
        }
        roots
            .iter()
            .map(|r| visit(self, r, &mut Vec::new()))
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    /// Validates everything and returns the machine, or the grouped reports.
    pub fn validated(self) -> Result<Self, Box<ComponentReports>> {
        let reports = self.check_components();
        if reports.is_valid() {
            Ok(self)
        } else {
            Err(Box::new(reports))
        }
    }
}

impl Validate for MimicAutomaton {
    fn validate(&self) -> Report {
        self.check_components().flatten()
    }
}
