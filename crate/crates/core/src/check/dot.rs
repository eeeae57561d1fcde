use std::fmt::Write;

use super::{Dtmc, TransitionSystem};
use crate::automata::{AnyCa, AutomatonError, DEFAULT_SUCCESSOR_CAP};
use crate::compose::{MimicAutomaton, UnitState};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn unit_label(u: &UnitState) -> String {
    match u {
        UnitState::Sa(s) => s.clone(),
        UnitState::Ha(c) => c.active.values().cloned().collect::<Vec<_>>().join("+"),
        UnitState::Nested(b) => format!("<{}>", b.lattice),
    }
}

fn state_label(ma: &MimicAutomaton, view: &super::StateView) -> String {
    let root = &view.config.root;
    let names = ma
        .root()
        .and_then(|b| ma.ca(&b.ca))
        .map(|c| root.lattice.render(&c.shape().cell_states))
        .unwrap_or_else(|_| root.lattice.to_string());
    let units: Vec<String> = root.units.iter().map(unit_label).collect();
    let mut label = format!("{names} {}", units.join(","));
    if let Some(o) = &root.outer {
        let _ = write!(label, " outer={o}");
    }
    if let Some(m) = &view.monitor {
        let _ = write!(label, " mon={}", m.state);
    }
    label
}

/// Graphviz rendering of a transition system.
pub fn ts_dot(ma: &MimicAutomaton, ts: &TransitionSystem) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", escape(&ma.name));
    for (i, v) in ts.states.iter().enumerate() {
        let shape = if v.monitor.as_ref().is_some_and(|m| m.accepting) {
            "doublecircle"
        } else {
            "ellipse"
        };
        let _ = writeln!(out, "  s{i} [label=\"{}\", shape={shape}];", escape(&state_label(ma, v)));
    }
    let _ = writeln!(out, "  init [shape=point];\n  init -> s{};", ts.initial);
    for (i, edges) in ts.transitions.iter().enumerate() {
        for (a, t) in edges {
            let _ = writeln!(out, "  s{i} -> s{t} [label=\"{}\"];", escape(&a.render(ma)));
        }
    }
    out.push_str("}\n");
    out
}

impl Dtmc {
    /// Graphviz rendering with transition probabilities on edges.
    pub fn to_dot(&self, ma: &MimicAutomaton) -> String {
        let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", escape(&ma.name));
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(
                out,
                "  s{i} [label=\"{} @{}\"];",
                escape(&state_label(ma, &s.view)),
                s.phase
            );
        }
        let _ = writeln!(out, "  init [shape=point];\n  init -> s{};", self.initial);
        for (i, row) in self.rows.iter().enumerate() {
            for (t, p) in row {
                let _ = writeln!(out, "  s{i} -> s{t} [label=\"{p}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// The global map of a cellular automaton as a graph over all lattices.
pub fn raw_ca_dot(ca: &AnyCa) -> Result<String, AutomatonError> {
    let shape = ca.shape();
    let count = (shape.cell_states.len() as f64).powi(shape.width as i32);
    if count > DEFAULT_SUCCESSOR_CAP as f64 {
        return Err(AutomatonError::TooManySuccessors {
            cap: DEFAULT_SUCCESSOR_CAP,
        });
    }
    let mut out = format!("digraph \"{}\" {{\n", escape(ca.name()));
    let states = &shape.cell_states;
    for l in shape.all_lattices() {
        let from = escape(&l.render(states));
        match ca {
            AnyCa::Deterministic(c) => {
                let to = c.step(&l)?;
                let _ = writeln!(out, "  \"{from}\" -> \"{}\";", escape(&to.render(states)));
            }
            AnyCa::Probabilistic(p) => {
                for (to, prob) in p.step_distribution(&l, DEFAULT_SUCCESSOR_CAP)? {
                    let _ = writeln!(
                        out,
                        "  \"{from}\" -> \"{}\" [label=\"{prob}\"];",
                        escape(&to.render(states))
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}
