//! Deterministic Mealy-style sequential automata.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::validate::{Invariant, Report, Subject, Validate};
use super::AutomatonError;
use crate::word::Word;

/// Target and emitted symbol of one transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub target: String,
    pub output: Option<String>,
}

/// A finite deterministic transducer with initial and final states.
///
/// Transitions are total unless `partial` is set; a partial automaton
/// that meets an undefined `(state, symbol)` pair gets stuck, which the
/// run reports as a rejection rather than an error. An automaton with an
/// empty output alphabet is a pure acceptor and emits nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentialAutomaton {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub finals: BTreeSet<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub transitions: BTreeMap<(String, String), Transition>,
    pub partial: bool,
}

/// Outcome of running a sequential automaton over a whole word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RunResult {
    pub final_state: String,
    pub accepted: bool,
    pub output_word: Word,
    pub steps: usize,
}

impl SequentialAutomaton {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
        initial: impl Into<String>,
        inputs: impl IntoIterator<Item = S>,
        outputs: impl IntoIterator<Item = S>,
    ) -> Self {
        SequentialAutomaton {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
            initial: initial.into(),
            finals: BTreeSet::new(),
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
            transitions: BTreeMap::new(),
            partial: false,
        }
    }

    pub fn with_final(mut self, state: impl Into<String>) -> Self {
        self.finals.insert(state.into());
        self
    }

    pub fn with_transition(
        mut self,
        from: impl Into<String>,
        symbol: impl Into<String>,
        to: impl Into<String>,
        output: Option<&str>,
    ) -> Self {
        self.transitions.insert(
            (from.into(), symbol.into()),
            Transition {
                target: to.into(),
                output: output.map(str::to_owned),
            },
        );
        self
    }

    pub fn with_partial(mut self, partial: bool) -> Self {
        self.partial = partial;
        self
    }

    /// Returns `self` if it passes validation, the report otherwise.
    pub fn validated(self) -> Result<Self, Report> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(report)
        }
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.states.iter().any(|s| s == state)
    }

    pub fn has_input(&self, symbol: &str) -> bool {
        self.inputs.iter().any(|s| s == symbol)
    }

    pub fn is_acceptor(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn transition(&self, state: &str, symbol: &str) -> Option<&Transition> {
        // BTreeMap<(String, String), _> cannot be probed with borrowed pairs.
        self.transitions
            .get(&(state.to_owned(), symbol.to_owned()))
    }

    /// One transition: the successor state and the emitted symbol.
    pub fn step(
        &self,
        state: &str,
        symbol: &str,
    ) -> Result<(String, Option<String>), AutomatonError> {
        if !self.has_state(state) {
            return Err(AutomatonError::UnknownState {
                automaton: self.name.clone(),
                state: state.to_owned(),
            });
        }
        if !self.has_input(symbol) {
            return Err(AutomatonError::RejectedInput {
                automaton: self.name.clone(),
                symbol: symbol.to_owned(),
                position: 0,
            });
        }
        match self.transition(state, symbol) {
            Some(t) => Ok((t.target.clone(), t.output.clone())),
            None => Err(AutomatonError::Stuck {
                automaton: self.name.clone(),
                state: state.to_owned(),
                symbol: symbol.to_owned(),
            }),
        }
    }

    /// Runs from the initial state.
    pub fn run<S: AsRef<str>>(&self, input: &[S]) -> Result<RunResult, AutomatonError> {
        self.run_from(&self.initial, input)
    }

    /// Folds [`step`](Self::step) over `input` starting at `state`.
    ///
    /// A symbol outside the input alphabet is an error naming its position.
    /// Getting stuck on an undefined transition ends the run early with a
    /// rejected result whose `steps` counts the symbols consumed.
    pub fn run_from<S: AsRef<str>>(
        &self,
        state: &str,
        input: &[S],
    ) -> Result<RunResult, AutomatonError> {
        if let Some((position, bad)) = input
            .iter()
            .enumerate()
            .find(|(_, s)| !self.has_input(s.as_ref()))
        {
            return Err(AutomatonError::RejectedInput {
                automaton: self.name.clone(),
                symbol: bad.as_ref().to_owned(),
                position,
            });
        }
        let mut current = state.to_owned();
        let mut output_word = Vec::with_capacity(input.len());
        for (steps, symbol) in input.iter().enumerate() {
            match self.step(&current, symbol.as_ref()) {
                Ok((next, out)) => {
                    current = next;
                    output_word.extend(out);
                }
                Err(AutomatonError::Stuck { .. }) => {
                    return Ok(RunResult {
                        final_state: current,
                        accepted: false,
                        output_word,
                        steps,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        Ok(RunResult {
            accepted: self.finals.contains(&current),
            final_state: current,
            output_word,
            steps: input.len(),
        })
    }
}

impl Validate for SequentialAutomaton {
    fn validate(&self) -> Report {
        let mut report = Report::default();
        let owner = &self.name;
        let states: BTreeSet<&str> = self.states.iter().map(String::as_str).collect();
        let inputs: BTreeSet<&str> = self.inputs.iter().map(String::as_str).collect();
        let outputs: BTreeSet<&str> = self.outputs.iter().map(String::as_str).collect();

        for (list, what) in [
            (&self.states, "state"),
            (&self.inputs, "input symbol"),
            (&self.outputs, "output symbol"),
        ] {
            let mut seen = BTreeSet::new();
            for item in list {
                if !seen.insert(item) {
                    report.push(
                        owner,
                        Invariant::DuplicateName,
                        Subject::Member(item.clone()),
                        format!("{what} listed twice"),
                    );
                }
            }
        }
        if !states.contains(self.initial.as_str()) {
            report.push(
                owner,
                Invariant::UnknownInitial,
                Subject::State(self.initial.clone()),
                "",
            );
        }
        for f in &self.finals {
            if !states.contains(f.as_str()) {
                report.push(owner, Invariant::UnknownFinal, Subject::State(f.clone()), "");
            }
        }
        for ((from, symbol), t) in &self.transitions {
            let subject = Subject::Transition {
                state: from.clone(),
                symbol: symbol.clone(),
            };
            if !states.contains(from.as_str()) {
                report.push(owner, Invariant::UnknownTarget, subject.clone(), "source state");
            }
            if !inputs.contains(symbol.as_str()) {
                report.push(owner, Invariant::UnknownSymbol, subject.clone(), "");
            }
            if !states.contains(t.target.as_str()) {
                report.push(
                    owner,
                    Invariant::UnknownTarget,
                    subject.clone(),
                    format!("target `{}`", t.target),
                );
            }
            match &t.output {
                Some(o) if !outputs.contains(o.as_str()) => report.push(
                    owner,
                    Invariant::UnknownOutput,
                    subject.clone(),
                    format!("output `{o}`"),
                ),
                None if !self.outputs.is_empty() => {
                    report.push(owner, Invariant::MissingOutput, subject.clone(), "")
                }
                _ => {}
            }
        }
        if !self.partial {
            for s in &self.states {
                for a in &self.inputs {
                    if self.transition(s, a).is_none() {
                        report.push(
                            owner,
                            Invariant::Totality,
                            Subject::Transition {
                                state: s.clone(),
                                symbol: a.clone(),
                            },
                            "",
                        );
                    }
                }
            }
        }
        report
    }
}
