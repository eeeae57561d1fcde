//! The component automata: sequential, cellular (deterministic and
//! probabilistic) and hierarchical.

pub mod ca;
pub mod fixtures;
pub mod ha;
pub mod sa;
pub mod validate;

use thiserror::Error;

pub use ca::{
    AnyCa, Boundary, BuiltinRule, CaRun, CellularAutomaton, Distribution, Lattice, LatticeShape,
    LocalRule, ProbabilisticCellularAutomaton, Termination, DEFAULT_RUN_CAP,
    DEFAULT_SUCCESSOR_CAP, PROBABILITY_TOLERANCE,
};
pub use ha::{HaConfiguration, HierarchicalAutomaton};
pub use sa::{RunResult, SequentialAutomaton, Transition};
pub use validate::{Invariant, Report, Subject, Validate, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("{automaton}: unknown state `{state}`")]
    UnknownState { automaton: String, state: String },
    #[error("{automaton}: symbol `{symbol}` at position {position} is not in the input alphabet")]
    RejectedInput {
        automaton: String,
        symbol: String,
        position: usize,
    },
    #[error("{automaton}: no transition from `{state}` on `{symbol}`")]
    Stuck {
        automaton: String,
        state: String,
        symbol: String,
    },
    #[error("{automaton}: no active automaton can take `{symbol}`")]
    HaStuck { automaton: String, symbol: String },
    #[error("lattice width {got} does not match automaton width {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("cell state index {index} is out of range")]
    UnknownCellState { index: usize },
    #[error("{automaton}: rule undefined on neighborhood ({neighborhood})")]
    UndefinedRule {
        automaton: String,
        neighborhood: String,
    },
    #[error("more than {cap} successor lattices; use Monte Carlo estimation instead")]
    TooManySuccessors { cap: usize },
}
