//! Checking composite machines.
//!
//! The pipeline is: validate every component by kind
//! ([`MimicAutomaton::check_components`]), flatten the machine into an
//! explicit transition system (or a DTMC when lattices are probabilistic),
//! then check invariants, reachability or bad-prefix patterns on it.

mod dot;
mod prob;
pub mod props;

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::automata::{AutomatonError, SequentialAutomaton};
use crate::compose::{
    ConfigKey, Deterministic, MaError, MacroInput, MimicAutomaton, MimicConfiguration, Observed,
};
use crate::word::render_word;

pub use dot::raw_ca_dot;
pub use prob::{
    build_dtmc, reach_probability_exact, reach_probability_mc, Dtmc, DtmcState, Horizon,
};
pub use props::{Predicate, Prop};

pub const DEFAULT_BOUND: usize = 1_000_000;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("the input universe is empty")]
    EmptyUniverse,
    #[error("state bound {bound} exceeded with {frontier} states still unexplored")]
    Explosion { bound: usize, frontier: usize },
    #[error("machine has probabilistic lattices; build a DTMC instead")]
    Probabilistic,
    #[error("unknown proposition `{name}`; known: {known}")]
    UnknownProposition { name: String, known: String },
    #[error("predicate syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("value iteration did not converge in {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("pattern `{pattern}` has no final state")]
    Pattern { pattern: String },
    #[error("the input policy is empty")]
    EmptyPolicy,
    #[error(transparent)]
    Ma(#[from] MaError),
}

impl CheckError {
    /// Whether the failure is a resource limit rather than a modeling
    /// error.
    pub fn is_resource_bound(&self) -> bool {
        matches!(
            self,
            CheckError::Explosion { .. }
                | CheckError::Convergence { .. }
                | CheckError::Ma(MaError::Automaton(AutomatonError::TooManySuccessors { .. }))
        )
    }
}

/// Label of one flattened transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Action {
    pub input: MacroInput,
    pub output: Observed,
}

impl Action {
    pub fn render_input(&self, ma: &MimicAutomaton) -> String {
        match &self.input {
            MacroInput::Block(w) => render_word(w),
            MacroInput::Seed(l) => {
                let states = ma
                    .root()
                    .and_then(|b| ma.ca(&b.ca))
                    .map(|c| c.shape().cell_states.clone())
                    .unwrap_or_default();
                if states.is_empty() {
                    l.to_string()
                } else {
                    l.render(&states)
                }
            }
        }
    }

    /// Events a pattern monitor consumes for this action, in order:
    /// `input(w)` then `output(v)`, or `abstain` when the vote failed.
    pub fn events(&self, ma: &MimicAutomaton) -> Vec<String> {
        let out = match &self.output {
            Observed::Abstain => "abstain".to_owned(),
            o => format!("output({})", o.render()),
        };
        vec![format!("input({})", self.render_input(ma)), out]
    }

    pub fn render(&self, ma: &MimicAutomaton) -> String {
        format!("{} / {}", self.render_input(ma), self.output.render())
    }
}

/// Monitor component of a product state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MonitorState {
    pub state: String,
    pub accepting: bool,
}

/// Decoded view of one explicit state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateView {
    pub config: ConfigKey,
    /// A serial run stopped here after an abstention.
    pub halted: bool,
    pub monitor: Option<MonitorState>,
}

impl StateView {
    pub fn of(cfg: &MimicConfiguration) -> Self {
        StateView {
            config: cfg.key(),
            halted: false,
            monitor: None,
        }
    }
}

/// Explicit reachable state graph; state 0 is initial and states are
/// numbered in breadth-first discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSystem {
    pub states: Vec<StateView>,
    pub initial: usize,
    pub transitions: Vec<Vec<(Action, usize)>>,
}

impl TransitionSystem {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    /// Atomic propositions of `predicate` that hold in `state`.
    pub fn labels(&self, ma: &MimicAutomaton, state: usize, predicate: &Predicate) -> Vec<String> {
        predicate
            .atoms()
            .into_iter()
            .filter(|p| Predicate::Atom((*p).clone()).eval(ma, &self.states[state]))
            .map(ToString::to_string)
            .collect()
    }
}

/// A path from the initial state: `states.len() == actions.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub states: Vec<StateView>,
    pub actions: Vec<Action>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn inputs(&self) -> Vec<MacroInput> {
        self.actions.iter().map(|a| a.input.clone()).collect()
    }

    pub fn last(&self) -> &StateView {
        self.states.last().expect("a trace has a first state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Probability {
        p: f64,
        method: Method,
        error_bound: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    pub iterations: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    /// Violation path for invariants and patterns, witness for reachability.
    pub counterexample: Option<Trace>,
    pub stats: Stats,
}

/// Breadth-first construction of the configurations reachable from `cfg`
/// under every input of `universe`.
pub fn flatten(
    ma: &MimicAutomaton,
    cfg: &MimicConfiguration,
    universe: &[MacroInput],
    bound: usize,
) -> Result<TransitionSystem, CheckError> {
    if universe.is_empty() {
        return Err(CheckError::EmptyUniverse);
    }
    if ma.is_probabilistic() {
        return Err(CheckError::Probabilistic);
    }
    let start = StateView::of(cfg);
    let mut ts = TransitionSystem {
        states: vec![start.clone()],
        initial: 0,
        transitions: vec![Vec::new()],
    };
    let mut index = HashMap::from([(start, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        if ts.states[s].halted {
            continue;
        }
        let current = ts.states[s].config.with_clock(0);
        let mut edges = Vec::with_capacity(universe.len());
        for input in universe {
            let (next, tick) = ma.step(&current, input, &mut Deterministic)?;
            let view = StateView {
                config: next.key(),
                halted: tick.abstained_at.is_some(),
                monitor: None,
            };
            let id = match index.get(&view) {
                Some(&id) => id,
                None => {
                    if ts.states.len() >= bound {
                        return Err(CheckError::Explosion {
                            bound,
                            frontier: queue.len() + 1,
                        });
                    }
                    let id = ts.states.len();
                    index.insert(view.clone(), id);
                    ts.states.push(view);
                    ts.transitions.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            edges.push((
                Action {
                    input: input.clone(),
                    output: tick.output().clone(),
                },
                id,
            ));
        }
        ts.transitions[s] = edges;
    }
    Ok(ts)
}

/// Shortest path from the initial state to a state satisfying `target`.
fn shortest_to(
    ts: &TransitionSystem,
    mut target: impl FnMut(usize) -> bool,
) -> Option<Trace> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; ts.len()];
    let mut seen = vec![false; ts.len()];
    let mut queue = VecDeque::from([ts.initial]);
    seen[ts.initial] = true;
    while let Some(s) = queue.pop_front() {
        if target(s) {
            let mut states = vec![ts.states[s].clone()];
            let mut actions = Vec::new();
            let mut at = s;
            while let Some((from, edge)) = parent[at] {
                actions.push(ts.transitions[from][edge].0.clone());
                states.push(ts.states[from].clone());
                at = from;
            }
            states.reverse();
            actions.reverse();
            return Some(Trace { states, actions });
        }
        for (edge, (_, t)) in ts.transitions[s].iter().enumerate() {
            if !seen[*t] {
                seen[*t] = true;
                parent[*t] = Some((s, edge));
                queue.push_back(*t);
            }
        }
    }
    None
}

fn stats(ts: &TransitionSystem) -> Stats {
    Stats {
        states: ts.len(),
        transitions: ts.transition_count(),
        ..Stats::default()
    }
}

/// Holds iff `predicate` is true in every reachable state; otherwise the
/// shortest path to a violating state.
pub fn check_invariant(
    ma: &MimicAutomaton,
    ts: &TransitionSystem,
    predicate: &Predicate,
) -> Result<CheckResult, CheckError> {
    predicate.check_against(ma)?;
    let cex = shortest_to(ts, |s| !predicate.eval(ma, &ts.states[s]));
    Ok(CheckResult {
        verdict: if cex.is_some() { Verdict::Violated } else { Verdict::Holds },
        counterexample: cex,
        stats: stats(ts),
    })
}

/// Holds with a shortest witness iff some reachable state satisfies
/// `target`; violated without a path otherwise.
pub fn check_reach(
    ma: &MimicAutomaton,
    ts: &TransitionSystem,
    target: &Predicate,
) -> Result<CheckResult, CheckError> {
    target.check_against(ma)?;
    let witness = shortest_to(ts, |s| target.eval(ma, &ts.states[s]));
    Ok(CheckResult {
        verdict: if witness.is_some() { Verdict::Holds } else { Verdict::Violated },
        counterexample: witness,
        stats: stats(ts),
    })
}

/// Advances a monitor over the events of one action. Unknown events and
/// missing transitions leave the monitor where it is; final states absorb.
pub fn monitor_step(pattern: &SequentialAutomaton, state: &str, events: &[String]) -> String {
    let mut current = state.to_owned();
    for e in events {
        if pattern.finals.contains(&current) {
            break;
        }
        if let Some(t) = pattern.transition(&current, e) {
            current = t.target.clone();
        }
    }
    current
}

/// Synchronous product of `ts` with a pattern monitor.
pub fn product(ma: &MimicAutomaton, ts: &TransitionSystem, pattern: &SequentialAutomaton) -> TransitionSystem {
    let monitor = |state: String| MonitorState {
        accepting: pattern.finals.contains(&state),
        state,
    };
    let first = StateView {
        monitor: Some(monitor(pattern.initial.clone())),
        ..ts.states[ts.initial].clone()
    };
    let mut out = TransitionSystem {
        states: vec![first],
        initial: 0,
        transitions: vec![Vec::new()],
    };
    let mut index: HashMap<(usize, String), usize> = HashMap::from([((ts.initial, pattern.initial.clone()), 0)]);
    let mut queue = VecDeque::from([(ts.initial, pattern.initial.clone())]);
    while let Some((s, m)) = queue.pop_front() {
        let id = index[&(s, m.clone())];
        let mut edges = Vec::new();
        for (action, t) in &ts.transitions[s] {
            let next = monitor_step(pattern, &m, &action.events(ma));
            let key = (*t, next.clone());
            let tid = match index.get(&key) {
                Some(&tid) => tid,
                None => {
                    let tid = out.states.len();
                    out.states.push(StateView {
                        monitor: Some(monitor(next)),
                        ..ts.states[*t].clone()
                    });
                    out.transitions.push(Vec::new());
                    index.insert(key.clone(), tid);
                    queue.push_back(key);
                    tid
                }
            };
            edges.push((action.clone(), tid));
        }
        out.transitions[id] = edges;
    }
    out
}

/// Violated, with the shortest offending path, iff some behavior drives
/// the pattern into a final state.
pub fn check_bad_prefix(
    ma: &MimicAutomaton,
    ts: &TransitionSystem,
    pattern: &SequentialAutomaton,
) -> Result<CheckResult, CheckError> {
    if pattern.finals.is_empty() {
        return Err(CheckError::Pattern {
            pattern: pattern.name.clone(),
        });
    }
    let prod = product(ma, ts, pattern);
    let cex = shortest_to(&prod, |s| prod.states[s].monitor.as_ref().is_some_and(|m| m.accepting));
    Ok(CheckResult {
        verdict: if cex.is_some() { Verdict::Violated } else { Verdict::Holds },
        counterexample: cex,
        stats: stats(&prod),
    })
}

/// Every distinct rendered event of `ts`, for checking pattern alphabets.
pub fn observable_events(ma: &MimicAutomaton, ts: &TransitionSystem) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for edges in &ts.transitions {
        for (a, _) in edges {
            for e in a.events(ma) {
                *out.entry(e).or_insert(0) += 1;
            }
        }
    }
    out
}

pub use dot::ts_dot;
