use std::fmt;

/// The element a violation is about. Used by the text front-end to map a
/// violation back to the source line that introduced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Automaton,
    State(String),
    Symbol(String),
    Transition { state: String, symbol: String },
    Neighborhood(Vec<String>),
    Refinement { sa: String, state: String },
    Member(String),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Automaton => f.write_str("automaton"),
            Subject::State(s) => write!(f, "state `{s}`"),
            Subject::Symbol(s) => write!(f, "symbol `{s}`"),
            Subject::Transition { state, symbol } => write!(f, "transition ({state}, {symbol})"),
            Subject::Neighborhood(n) => write!(f, "neighborhood ({})", n.join(" ")),
            Subject::Refinement { sa, state } => write!(f, "refinement of ({sa}, {state})"),
            Subject::Member(m) => write!(f, "member `{m}`"),
        }
    }
}

/// Which invariant was broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Invariant {
    UnknownInitial,
    UnknownFinal,
    DuplicateName,
    Totality,
    UnknownTarget,
    UnknownSymbol,
    UnknownOutput,
    MissingOutput,
    Geometry,
    UnknownCellState,
    Normalization,
    NegativeProbability,
    UnknownRoot,
    UnknownMember,
    TreeShape,
    UncoveredCellState,
    ReadoutNotTotal,
    NestingDepth,
    BindingShape,
    UnknownProposition,
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::UnknownInitial => "initial state not in states",
            Invariant::UnknownFinal => "final state not in states",
            Invariant::DuplicateName => "duplicate name",
            Invariant::Totality => "transition function not total",
            Invariant::UnknownTarget => "transition target not in states",
            Invariant::UnknownSymbol => "symbol not in input alphabet",
            Invariant::UnknownOutput => "output not in output alphabet",
            Invariant::MissingOutput => "transition has no output",
            Invariant::Geometry => "width and radius must be at least 1",
            Invariant::UnknownCellState => "cell state not in cell states",
            Invariant::Normalization => "distribution does not sum to 1",
            Invariant::NegativeProbability => "negative probability",
            Invariant::UnknownRoot => "root not among the automata",
            Invariant::UnknownMember => "reference to unknown automaton",
            Invariant::TreeShape => "refinement graph is not a tree",
            Invariant::UncoveredCellState => "cell state has no hosted unit",
            Invariant::ReadoutNotTotal => "readout is not total",
            Invariant::NestingDepth => "binding nesting is cyclic or too deep",
            Invariant::BindingShape => "binding is inconsistent with its mode",
            Invariant::UnknownProposition => "unknown proposition",
        };
        f.write_str(s)
    }
}

/// One broken invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Name of the automaton the violation was found in.
    pub owner: String,
    pub invariant: Invariant,
    pub subject: Subject,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} at {}", self.owner, self.invariant, self.subject)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// A list of violations; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(
        &mut self,
        owner: &str,
        invariant: Invariant,
        subject: Subject,
        detail: impl Into<String>,
    ) {
        self.violations.push(Violation {
            owner: owner.to_owned(),
            invariant,
            subject,
            detail: detail.into(),
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.violations.extend(other.violations);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter()
    }
}

/// Anything that can check its own structural invariants.
pub trait Validate {
    fn validate(&self) -> Report;
}
