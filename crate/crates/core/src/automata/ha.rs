//! Hierarchical automata: sequential automata arranged in a refinement tree.
//!
//! `gamma` maps a `(automaton, state)` pair to the automata that refine that
//! state. While the parent sits in the state, the children are active.
//! Stepping gives priority to the shallowest enabled automata; entering a
//! state activates its refinements at their initial states and leaving one
//! deactivates the whole subtree underneath.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::sa::{RunResult, SequentialAutomaton};
use super::validate::{Invariant, Report, Subject, Validate};
use super::AutomatonError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchicalAutomaton {
    pub name: String,
    pub sas: Vec<SequentialAutomaton>,
    pub root: String,
    pub gamma: BTreeMap<(String, String), BTreeSet<String>>,
}

/// The active automata and their current states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HaConfiguration {
    pub active: BTreeMap<String, String>,
}

impl HaConfiguration {
    pub fn state_of(&self, sa: &str) -> Option<&str> {
        self.active.get(sa).map(String::as_str)
    }
}

impl HierarchicalAutomaton {
    pub fn new(name: impl Into<String>, sas: Vec<SequentialAutomaton>, root: impl Into<String>) -> Self {
        HierarchicalAutomaton {
            name: name.into(),
            sas,
            root: root.into(),
            gamma: BTreeMap::new(),
        }
    }

    pub fn with_refinement<S: Into<String>>(
        mut self,
        sa: impl Into<String>,
        state: impl Into<String>,
        children: impl IntoIterator<Item = S>,
    ) -> Self {
        self.gamma
            .entry((sa.into(), state.into()))
            .or_default()
            .extend(children.into_iter().map(Into::into));
        self
    }

    pub fn sa(&self, name: &str) -> Option<&SequentialAutomaton> {
        self.sas.iter().find(|s| s.name == name)
    }

    fn refinement(&self, sa: &str, state: &str) -> Option<&BTreeSet<String>> {
        self.gamma.get(&(sa.to_owned(), state.to_owned()))
    }

    /// Depth of each automaton reachable from the root (root = 0).
    pub fn depths(&self) -> BTreeMap<String, usize> {
        let mut depths = BTreeMap::new();
        let mut stack = vec![(self.root.clone(), 0usize)];
        while let Some((sa, d)) = stack.pop() {
            if depths.insert(sa.clone(), d).is_some() {
                continue;
            }
            for ((owner, _), children) in &self.gamma {
                if owner == &sa {
                    stack.extend(children.iter().map(|c| (c.clone(), d + 1)));
                }
            }
        }
        depths
    }

    /// Input symbols any member accepts.
    pub fn input_alphabet(&self) -> BTreeSet<&str> {
        self.sas
            .iter()
            .flat_map(|s| s.inputs.iter().map(String::as_str))
            .collect()
    }

    fn activate(&self, sa: &str, state: &str, active: &mut BTreeMap<String, String>) {
        if let Some(children) = self.refinement(sa, state) {
            for child in children {
                if let Some(c) = self.sa(child) {
                    active.insert(child.clone(), c.initial.clone());
                    self.activate(child, &c.initial, active);
                }
            }
        }
    }

    fn deactivate_below(&self, sa: &str, state: &str, active: &mut BTreeMap<String, String>) {
        if let Some(children) = self.refinement(sa, state) {
            for child in children {
                if let Some(child_state) = active.remove(child) {
                    self.deactivate_below(child, &child_state, active);
                }
            }
        }
    }

    /// Root at its initial state, refinements closed downward.
    pub fn initial(&self) -> HaConfiguration {
        let mut active = BTreeMap::new();
        if let Some(root) = self.sa(&self.root) {
            active.insert(root.name.clone(), root.initial.clone());
            self.activate(&root.name, &root.initial, &mut active);
        }
        HaConfiguration { active }
    }

    /// Whether `config` satisfies the active-tree invariant.
    pub fn is_legal(&self, config: &HaConfiguration) -> bool {
        let Some(root) = self.sa(&self.root) else {
            return false;
        };
        let Some(root_state) = config.state_of(&root.name) else {
            return false;
        };
        let mut expected = BTreeSet::from([root.name.as_str()]);
        let mut stack = vec![(root.name.as_str(), root_state)];
        while let Some((sa, state)) = stack.pop() {
            if !self.sa(sa).is_some_and(|s| s.has_state(state)) {
                return false;
            }
            if let Some(children) = self.refinement(sa, state) {
                for child in children {
                    let Some(child_state) = config.state_of(child) else {
                        return false;
                    };
                    expected.insert(child);
                    stack.push((child, child_state));
                }
            }
        }
        expected.len() == config.active.len()
    }

    /// Fires the shallowest enabled automata on `symbol`.
    ///
    /// All enabled automata at the winning depth fire together; they live in
    /// disjoint subtrees. The emitted symbol is the one produced by the first
    /// fired automaton in name order.
    pub fn step(
        &self,
        config: &HaConfiguration,
        symbol: &str,
    ) -> Result<(HaConfiguration, Option<String>), AutomatonError> {
        if !self.input_alphabet().contains(symbol) {
            return Err(AutomatonError::RejectedInput {
                automaton: self.name.clone(),
                symbol: symbol.to_owned(),
                position: 0,
            });
        }
        let depths = self.depths();
        let mut enabled: BTreeMap<usize, Vec<(&str, &str)>> = BTreeMap::new();
        for (sa, state) in &config.active {
            let Some(machine) = self.sa(sa) else { continue };
            if machine.has_input(symbol) && machine.transition(state, symbol).is_some() {
                let depth = depths.get(sa).copied().unwrap_or(usize::MAX);
                enabled.entry(depth).or_default().push((sa.as_str(), state.as_str()));
            }
        }
        // Outermost-first priority; this is the only place it is decided.
        let Some((_, firing)) = enabled.into_iter().next() else {
            return Err(AutomatonError::HaStuck {
                automaton: self.name.clone(),
                symbol: symbol.to_owned(),
            });
        };
        let mut active = config.active.clone();
        let mut emitted = None;
        for (sa, state) in firing {
            let machine = self.sa(sa).expect("active automata are members");
            let (target, output) = machine.step(state, symbol)?;
            if emitted.is_none() {
                emitted = output;
            }
            if target != state {
                self.deactivate_below(sa, state, &mut active);
                active.insert(sa.to_owned(), target.clone());
                self.activate(sa, &target, &mut active);
            }
        }
        Ok((HaConfiguration { active }, emitted))
    }

    /// Folds [`step`](Self::step) over a word from `config`.
    ///
    /// The run result reports the root's state; getting stuck ends the run
    /// with a rejected result.
    pub fn run_from<S: AsRef<str>>(
        &self,
        config: &HaConfiguration,
        input: &[S],
    ) -> Result<(HaConfiguration, RunResult), AutomatonError> {
        let alphabet = self.input_alphabet();
        if let Some((position, bad)) = input
            .iter()
            .enumerate()
            .find(|(_, s)| !alphabet.contains(s.as_ref()))
        {
            return Err(AutomatonError::RejectedInput {
                automaton: self.name.clone(),
                symbol: bad.as_ref().to_owned(),
                position,
            });
        }
        let root = self.sa(&self.root).expect("validated hierarchy has its root");
        let mut current = config.clone();
        let mut output_word = Vec::new();
        let mut steps = 0;
        let mut stuck = false;
        for symbol in input {
            match self.step(&current, symbol.as_ref()) {
                Ok((next, out)) => {
                    current = next;
                    output_word.extend(out);
                    steps += 1;
                }
                Err(AutomatonError::HaStuck { .. }) => {
                    stuck = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let final_state = current
            .state_of(&root.name)
            .unwrap_or(&root.initial)
            .to_owned();
        let result = RunResult {
            accepted: !stuck && root.finals.contains(&final_state),
            final_state,
            output_word,
            steps,
        };
        Ok((current, result))
    }

    pub fn run<S: AsRef<str>>(
        &self,
        input: &[S],
    ) -> Result<(HaConfiguration, RunResult), AutomatonError> {
        self.run_from(&self.initial(), input)
    }
}

impl Validate for HierarchicalAutomaton {
    fn validate(&self) -> Report {
        let mut report = Report::default();
        let owner = &self.name;
        let mut names = BTreeSet::new();
        for sa in &self.sas {
            if !names.insert(sa.name.as_str()) {
                report.push(owner, Invariant::DuplicateName, Subject::Member(sa.name.clone()), "");
            }
            report.extend(sa.validate());
        }
        if !names.contains(self.root.as_str()) {
            report.push(owner, Invariant::UnknownRoot, Subject::Member(self.root.clone()), "");
            return report;
        }
        let mut parents: BTreeMap<&str, usize> = BTreeMap::new();
        for ((sa, state), children) in &self.gamma {
            let subject = Subject::Refinement {
                sa: sa.clone(),
                state: state.clone(),
            };
            match self.sa(sa) {
                None => report.push(owner, Invariant::UnknownMember, subject.clone(), format!("`{sa}`")),
                Some(m) if !m.has_state(state) => {
                    report.push(owner, Invariant::UnknownTarget, subject.clone(), format!("state `{state}`"))
                }
                _ => {}
            }
            for child in children {
                if !names.contains(child.as_str()) {
                    report.push(owner, Invariant::UnknownMember, subject.clone(), format!("`{child}`"));
                }
                *parents.entry(child.as_str()).or_default() += 1;
            }
        }
        if parents.contains_key(self.root.as_str()) {
            report.push(
                owner,
                Invariant::TreeShape,
                Subject::Member(self.root.clone()),
                "root refines a state",
            );
        }
        let depths = self.depths();
        for name in &names {
            if *name == self.root {
                continue;
            }
            match parents.get(name).copied().unwrap_or(0) {
                1 => {}
                n => report.push(
                    owner,
                    Invariant::TreeShape,
                    Subject::Member((*name).to_owned()),
                    format!("refines {n} states, expected exactly one"),
                ),
            }
            if !depths.contains_key(*name) {
                report.push(
                    owner,
                    Invariant::TreeShape,
                    Subject::Member((*name).to_owned()),
                    "not reachable from the root",
                );
            }
        }
        report
    }
}
