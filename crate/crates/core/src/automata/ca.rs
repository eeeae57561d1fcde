//! One-dimensional cellular automata, deterministic and probabilistic.
//!
//! Cell states are stored as indices into the automaton's ordered
//! `cell_states`. A neighborhood of radius `r` is the `2r + 1` cells
//! centered on a position, read left to right; it is encoded as a base-`|Q|`
//! number with the leftmost cell most significant, which is also the row
//! order of rule tables.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use super::validate::{Invariant, Report, Subject, Validate};
use super::AutomatonError;
use crate::word::render_word;

/// Successor-lattice cap for exact distribution expansion.
pub const DEFAULT_SUCCESSOR_CAP: usize = 4096;
/// Default step cap for a run to fixpoint.
pub const DEFAULT_RUN_CAP: usize = 1000;
/// Absolute tolerance on probability sums.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// A row of cells, each an index into the owning automaton's cell states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Lattice(pub Vec<usize>);

impl Lattice {
    pub fn new(cells: Vec<usize>) -> Self {
        Lattice(cells)
    }

    pub fn uniform(width: usize, state: usize) -> Self {
        Lattice(vec![state; width])
    }

    pub fn cells(&self) -> &[usize] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// Cell-state names, for display.
    pub fn names<'a>(&self, states: &'a [String]) -> Vec<&'a str> {
        self.0.iter().map(|&c| states[c].as_str()).collect()
    }

    pub fn render(&self, states: &[String]) -> String {
        render_word(&self.names(states))
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Out-of-range neighbors read as this cell state.
    Fixed(usize),
}

/// The geometry shared by deterministic and probabilistic automata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeShape {
    pub cell_states: Vec<String>,
    pub width: usize,
    pub radius: usize,
    pub boundary: Boundary,
}

impl LatticeShape {
    pub fn new<S: Into<String>>(
        cell_states: impl IntoIterator<Item = S>,
        width: usize,
        radius: usize,
        boundary: Boundary,
    ) -> Self {
        LatticeShape {
            cell_states: cell_states.into_iter().map(Into::into).collect(),
            width,
            radius,
            boundary,
        }
    }

    pub fn arity(&self) -> usize {
        2 * self.radius + 1
    }

    /// Number of distinct neighborhoods, `|Q|^(2r+1)`.
    pub fn neighborhood_count(&self) -> usize {
        self.cell_states.len().pow(self.arity() as u32)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.cell_states.iter().position(|s| s == name)
    }

    fn cell_at(&self, cells: &[usize], index: isize) -> usize {
        let n = cells.len() as isize;
        if (0..n).contains(&index) {
            cells[index as usize]
        } else {
            match self.boundary {
                Boundary::Periodic => cells[index.rem_euclid(n) as usize],
                Boundary::Fixed(q) => q,
            }
        }
    }

    /// Encoded neighborhood of cell `i`.
    pub fn neighborhood_code(&self, cells: &[usize], i: usize) -> usize {
        let q = self.cell_states.len();
        let r = self.radius as isize;
        let mut code = 0;
        for offset in -r..=r {
            code = code * q + self.cell_at(cells, i as isize + offset);
        }
        code
    }

    pub fn encode(&self, neighborhood: &[usize]) -> usize {
        let q = self.cell_states.len();
        neighborhood.iter().fold(0, |acc, &c| acc * q + c)
    }

    pub fn decode(&self, mut code: usize) -> Vec<usize> {
        let q = self.cell_states.len();
        let mut out = vec![0; self.arity()];
        for slot in out.iter_mut().rev() {
            *slot = code % q;
            code /= q;
        }
        out
    }

    fn neighborhood_names(&self, code: usize) -> Vec<String> {
        self.decode(code)
            .into_iter()
            .map(|c| self.cell_states[c].clone())
            .collect()
    }

    pub fn check_lattice(&self, lattice: &Lattice) -> Result<(), AutomatonError> {
        if lattice.width() != self.width {
            return Err(AutomatonError::Dimension {
                expected: self.width,
                got: lattice.width(),
            });
        }
        if let Some(&bad) = lattice.0.iter().find(|&&c| c >= self.cell_states.len()) {
            return Err(AutomatonError::UnknownCellState { index: bad });
        }
        Ok(())
    }

    /// Parses a lattice from cell-state names.
    pub fn lattice_from_names<S: AsRef<str>>(&self, names: &[S]) -> Option<Lattice> {
        names
            .iter()
            .map(|n| self.state_index(n.as_ref()))
            .collect::<Option<Vec<_>>>()
            .map(Lattice)
    }

    /// All `|Q|^width` lattices in lexicographic order.
    pub fn all_lattices(&self) -> impl Iterator<Item = Lattice> + '_ {
        let q = self.cell_states.len();
        let total = q.checked_pow(self.width as u32).unwrap_or(usize::MAX);
        (0..total).map(move |mut code| {
            let mut cells = vec![0; self.width];
            for slot in cells.iter_mut().rev() {
                *slot = code % q;
                code /= q;
            }
            Lattice(cells)
        })
    }

    fn validate_into(&self, owner: &str, report: &mut Report) {
        if self.width == 0 || self.radius == 0 {
            report.push(
                owner,
                Invariant::Geometry,
                Subject::Automaton,
                format!("width {}, radius {}", self.width, self.radius),
            );
        }
        if self.cell_states.is_empty() {
            report.push(owner, Invariant::Geometry, Subject::Automaton, "no cell states");
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.cell_states {
            if !seen.insert(s) {
                report.push(owner, Invariant::DuplicateName, Subject::State(s.clone()), "");
            }
        }
        if let Boundary::Fixed(q) = self.boundary {
            if q >= self.cell_states.len() {
                report.push(
                    owner,
                    Invariant::UnknownCellState,
                    Subject::Automaton,
                    format!("boundary state index {q}"),
                );
            }
        }
    }
}

/// Built-in local rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinRule {
    /// Sum of all non-center neighbors modulo `|Q|`; for `r = 1` over
    /// `{0, 1}` this is `left xor right`.
    Xor,
    Identity,
    /// Most frequent state in the neighborhood; ties go to the center if
    /// it is among the most frequent, otherwise to the lowest index.
    Majority,
}

impl BuiltinRule {
    pub const ALL: [BuiltinRule; 3] = [BuiltinRule::Xor, BuiltinRule::Identity, BuiltinRule::Majority];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinRule::Xor => "xor",
            BuiltinRule::Identity => "identity",
            BuiltinRule::Majority => "majority",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        BuiltinRule::ALL.into_iter().find(|r| r.name() == name)
    }

    pub fn apply(self, neighborhood: &[usize], states: usize) -> usize {
        let center = neighborhood.len() / 2;
        match self {
            BuiltinRule::Identity => neighborhood[center],
            BuiltinRule::Xor => {
                neighborhood
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != center)
                    .map(|(_, &c)| c)
                    .sum::<usize>()
                    % states
            }
            BuiltinRule::Majority => {
                let mut counts = vec![0usize; states];
                for &c in neighborhood {
                    counts[c] += 1;
                }
                let best = counts.iter().copied().max().unwrap_or(0);
                if counts[neighborhood[center]] == best {
                    neighborhood[center]
                } else {
                    counts.iter().position(|&c| c == best).unwrap_or(0)
                }
            }
        }
    }
}

/// A deterministic local rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalRule {
    Builtin(BuiltinRule),
    /// One entry per encoded neighborhood; `None` marks a missing row.
    Table(Vec<Option<usize>>),
}

/// A deterministic one-dimensional cellular automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularAutomaton {
    pub name: String,
    pub shape: LatticeShape,
    pub rule: LocalRule,
}

/// How a run to fixpoint ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Fixpoint,
    StepCap,
}

/// Trace of a run; the first lattice is the starting one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CaRun {
    pub trace: Vec<Lattice>,
    pub terminated_by: Termination,
}

impl CaRun {
    pub fn final_lattice(&self) -> &Lattice {
        self.trace.last().expect("trace always holds the initial lattice")
    }
}

impl CellularAutomaton {
    pub fn new(name: impl Into<String>, shape: LatticeShape, rule: LocalRule) -> Self {
        CellularAutomaton {
            name: name.into(),
            shape,
            rule,
        }
    }

    pub fn builtin(name: impl Into<String>, shape: LatticeShape, rule: BuiltinRule) -> Self {
        Self::new(name, shape, LocalRule::Builtin(rule))
    }

    /// Tabulates `rule` over every neighborhood.
    pub fn from_fn(
        name: impl Into<String>,
        shape: LatticeShape,
        rule: impl Fn(&[usize]) -> usize,
    ) -> Self {
        let table = (0..shape.neighborhood_count())
            .map(|code| Some(rule(&shape.decode(code))))
            .collect();
        Self::new(name, shape, LocalRule::Table(table))
    }

    /// Local rule on an encoded neighborhood.
    pub fn local(&self, code: usize) -> Option<usize> {
        match &self.rule {
            LocalRule::Builtin(b) => Some(b.apply(&self.shape.decode(code), self.shape.cell_states.len())),
            LocalRule::Table(t) => t.get(code).copied().flatten(),
        }
    }

    /// Rule row for every neighborhood, builtins expanded.
    pub fn table(&self) -> Vec<Option<usize>> {
        (0..self.shape.neighborhood_count())
            .map(|code| self.local(code))
            .collect()
    }

    /// One synchronous update of every cell.
    pub fn step(&self, lattice: &Lattice) -> Result<Lattice, AutomatonError> {
        self.shape.check_lattice(lattice)?;
        let cells = lattice.cells();
        (0..cells.len())
            .map(|i| {
                let code = self.shape.neighborhood_code(cells, i);
                self.local(code).ok_or_else(|| AutomatonError::UndefinedRule {
                    automaton: self.name.clone(),
                    neighborhood: self.shape.neighborhood_names(code).join(" "),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Lattice)
    }

    /// Iterates [`step`](Self::step) until a fixpoint or `t_max` steps.
    pub fn run(&self, lattice: &Lattice, t_max: usize) -> Result<CaRun, AutomatonError> {
        self.shape.check_lattice(lattice)?;
        let mut trace = vec![lattice.clone()];
        loop {
            if trace.len() - 1 == t_max {
                return Ok(CaRun {
                    trace,
                    terminated_by: Termination::StepCap,
                });
            }
            let current = trace.last().unwrap();
            let next = self.step(current)?;
            if &next == current {
                return Ok(CaRun {
                    trace,
                    terminated_by: Termination::Fixpoint,
                });
            }
            trace.push(next);
        }
    }

    pub fn validated(self) -> Result<Self, Report> {
        let r = self.validate();
        if r.is_valid() {
            Ok(self)
        } else {
            Err(r)
        }
    }
}

impl Validate for CellularAutomaton {
    fn validate(&self) -> Report {
        let mut report = Report::default();
        self.shape.validate_into(&self.name, &mut report);
        if !report.is_valid() {
            return report;
        }
        if let LocalRule::Table(table) = &self.rule {
            let q = self.shape.cell_states.len();
            for code in 0..self.shape.neighborhood_count() {
                let subject = Subject::Neighborhood(self.shape.neighborhood_names(code));
                match table.get(code).copied().flatten() {
                    None => report.push(&self.name, Invariant::Totality, subject, ""),
                    Some(s) if s >= q => report.push(
                        &self.name,
                        Invariant::UnknownCellState,
                        subject,
                        format!("index {s}"),
                    ),
                    _ => {}
                }
            }
        }
        report
    }
}

/// A distribution over cell states, as `(state, probability)` pairs.
pub type Distribution = Vec<(usize, f64)>;

/// A cellular automaton whose local rule yields a distribution; cells are
/// sampled independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticCellularAutomaton {
    pub name: String,
    pub shape: LatticeShape,
    /// One entry per encoded neighborhood.
    pub rule: Vec<Option<Distribution>>,
}

impl ProbabilisticCellularAutomaton {
    pub fn new(name: impl Into<String>, shape: LatticeShape, rule: Vec<Option<Distribution>>) -> Self {
        ProbabilisticCellularAutomaton {
            name: name.into(),
            shape,
            rule,
        }
    }

    pub fn from_fn(
        name: impl Into<String>,
        shape: LatticeShape,
        rule: impl Fn(&[usize]) -> Distribution,
    ) -> Self {
        let table = (0..shape.neighborhood_count())
            .map(|code| Some(rule(&shape.decode(code))))
            .collect();
        Self::new(name, shape, table)
    }

    /// Point-mass distributions from a deterministic automaton.
    pub fn from_deterministic(ca: &CellularAutomaton) -> Self {
        let rule = ca
            .table()
            .into_iter()
            .map(|row| row.map(|s| vec![(s, 1.0)]))
            .collect();
        Self::new(ca.name.clone(), ca.shape.clone(), rule)
    }

    fn distribution(&self, cells: &[usize], i: usize) -> Result<&Distribution, AutomatonError> {
        let code = self.shape.neighborhood_code(cells, i);
        self.rule
            .get(code)
            .and_then(Option::as_ref)
            .ok_or_else(|| AutomatonError::UndefinedRule {
                automaton: self.name.clone(),
                neighborhood: self.shape.neighborhood_names(code).join(" "),
            })
    }

    /// Samples every cell independently from its neighborhood's distribution.
    pub fn step<R: Rng + ?Sized>(&self, lattice: &Lattice, rng: &mut R) -> Result<Lattice, AutomatonError> {
        self.shape.check_lattice(lattice)?;
        let cells = lattice.cells();
        let mut next = Vec::with_capacity(cells.len());
        for i in 0..cells.len() {
            let dist = self.distribution(cells, i)?;
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = None;
            for &(state, p) in dist {
                if p <= 0.0 {
                    continue;
                }
                acc += p;
                chosen = Some(state);
                if u < acc {
                    break;
                }
            }
            next.push(chosen.unwrap_or(cells[i]));
        }
        Ok(Lattice(next))
    }

    /// Exact successor distribution of one step.
    ///
    /// The number of successors is the product of the per-cell support
    /// sizes; beyond `cap` this fails and sampling should be used instead.
    pub fn step_distribution(
        &self,
        lattice: &Lattice,
        cap: usize,
    ) -> Result<BTreeMap<Lattice, f64>, AutomatonError> {
        self.shape.check_lattice(lattice)?;
        let cells = lattice.cells();
        let mut per_cell = Vec::with_capacity(cells.len());
        let mut count: usize = 1;
        for i in 0..cells.len() {
            let support: Vec<(usize, f64)> = self
                .distribution(cells, i)?
                .iter()
                .copied()
                .filter(|&(_, p)| p > 0.0)
                .collect();
            count = count.saturating_mul(support.len().max(1));
            if count > cap {
                return Err(AutomatonError::TooManySuccessors { cap });
            }
            per_cell.push(support);
        }
        let mut out: BTreeMap<Lattice, f64> = BTreeMap::new();
        let mut partial: Vec<(Vec<usize>, f64)> = vec![(Vec::with_capacity(cells.len()), 1.0)];
        for support in per_cell {
            let mut next = Vec::with_capacity(partial.len() * support.len());
            for (prefix, p) in &partial {
                for &(state, q) in &support {
                    let mut cells = prefix.clone();
                    cells.push(state);
                    next.push((cells, p * q));
                }
            }
            partial = next;
        }
        for (cells, p) in partial {
            *out.entry(Lattice(cells)).or_insert(0.0) += p;
        }
        Ok(out)
    }
}

impl Validate for ProbabilisticCellularAutomaton {
    fn validate(&self) -> Report {
        let mut report = Report::default();
        self.shape.validate_into(&self.name, &mut report);
        if !report.is_valid() {
            return report;
        }
        let q = self.shape.cell_states.len();
        for code in 0..self.shape.neighborhood_count() {
            let subject = Subject::Neighborhood(self.shape.neighborhood_names(code));
            let Some(dist) = self.rule.get(code).and_then(Option::as_ref) else {
                report.push(&self.name, Invariant::Totality, subject, "");
                continue;
            };
            if let Some(&(s, _)) = dist.iter().find(|&&(s, _)| s >= q) {
                report.push(
                    &self.name,
                    Invariant::UnknownCellState,
                    subject.clone(),
                    format!("index {s}"),
                );
            }
            if dist.iter().any(|&(_, p)| p < 0.0 || !p.is_finite()) {
                report.push(&self.name, Invariant::NegativeProbability, subject.clone(), "");
            }
            let sum: f64 = dist.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                report.push(
                    &self.name,
                    Invariant::Normalization,
                    subject,
                    format!("sum {sum}"),
                );
            }
        }
        report
    }
}

/// Either kind of cellular automaton, as held by a composite automaton.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyCa {
    Deterministic(CellularAutomaton),
    Probabilistic(ProbabilisticCellularAutomaton),
}

impl AnyCa {
    pub fn name(&self) -> &str {
        match self {
            AnyCa::Deterministic(c) => &c.name,
            AnyCa::Probabilistic(p) => &p.name,
        }
    }

    pub fn shape(&self) -> &LatticeShape {
        match self {
            AnyCa::Deterministic(c) => &c.shape,
            AnyCa::Probabilistic(p) => &p.shape,
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(self, AnyCa::Probabilistic(_))
    }
}

impl Validate for AnyCa {
    fn validate(&self) -> Report {
        match self {
            AnyCa::Deterministic(c) => c.validate(),
            AnyCa::Probabilistic(p) => p.validate(),
        }
    }
}

impl From<CellularAutomaton> for AnyCa {
    fn from(c: CellularAutomaton) -> Self {
        AnyCa::Deterministic(c)
    }
}

impl From<ProbabilisticCellularAutomaton> for AnyCa {
    fn from(p: ProbabilisticCellularAutomaton) -> Self {
        AnyCa::Probabilistic(p)
    }
}
