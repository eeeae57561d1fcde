//! Atomic propositions over configurations and boolean predicates over
//! them.
//!
//! Propositions:
//!
//! * `true`, `false`
//! * `lattice_has(q)`: some root cell is in cell state `q`
//! * `cell<i>(q)`: root cell `i` is in cell state `q`
//! * `cell<i>_state(s)`: the unit hosted by root cell `i` is in state `s`
//!   (any active state of a hierarchy; the outer state of a nested
//!   lattice-driven binding)
//! * `outer(s)`: the root's outer automaton is in state `s`
//! * `accepting`: the monitor of a product is in a final state
//!
//! Predicates combine them with `!`, `&`, `|` and parentheses.

use std::fmt;

use super::{CheckError, MonitorState, StateView};
use crate::compose::{BindingState, MimicAutomaton, MimicConfiguration, UnitState};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Prop {
    True,
    False,
    LatticeHas(String),
    Cell(usize, String),
    CellState(usize, String),
    Outer(String),
    Accepting,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Atom(Prop),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

pub const KNOWN: &[&str] = &[
    "true",
    "false",
    "lattice_has(q)",
    "cell<i>(q)",
    "cell<i>_state(s)",
    "outer(s)",
    "accepting",
];

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::True => f.write_str("true"),
            Prop::False => f.write_str("false"),
            Prop::LatticeHas(q) => write!(f, "lattice_has({q})"),
            Prop::Cell(i, q) => write!(f, "cell{i}({q})"),
            Prop::CellState(i, s) => write!(f, "cell{i}_state({s})"),
            Prop::Outer(s) => write!(f, "outer({s})"),
            Prop::Accepting => f.write_str("accepting"),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Atom(p) => write!(f, "{p}"),
            Predicate::Not(p) => match **p {
                Predicate::Atom(_) | Predicate::Not(_) => write!(f, "!{p}"),
                _ => write!(f, "!({p})"),
            },
            Predicate::And(a, b) => {
                write_operand(f, a)?;
                f.write_str(" & ")?;
                write_operand(f, b)
            }
            Predicate::Or(a, b) => {
                write_operand(f, a)?;
                f.write_str(" | ")?;
                write_operand(f, b)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, p: &Predicate) -> fmt::Result {
    match p {
        Predicate::And(..) | Predicate::Or(..) => write!(f, "({p})"),
        _ => write!(f, "{p}"),
    }
}

impl Predicate {
    pub fn atom(p: Prop) -> Self {
        Predicate::Atom(p)
    }

    pub fn parse(text: &str) -> Result<Self, CheckError> {
        let mut p = Parser { text, pos: 0 };
        let e = p.or()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn atoms(&self) -> Vec<&Prop> {
        match self {
            Predicate::Atom(p) => vec![p],
            Predicate::Not(p) => p.atoms(),
            Predicate::And(a, b) | Predicate::Or(a, b) => {
                let mut v = a.atoms();
                v.extend(b.atoms());
                v
            }
        }
    }

    /// Rejects propositions that cannot refer to anything in `ma`.
    pub fn check_against(&self, ma: &MimicAutomaton) -> Result<(), CheckError> {
        let Ok(root) = ma.root() else { return Ok(()) };
        let Ok(ca) = ma.ca(&root.ca) else { return Ok(()) };
        let shape = ca.shape();
        let unknown = |p: &Prop| CheckError::UnknownProposition {
            name: p.to_string(),
            known: KNOWN.join(", "),
        };
        let any_state = |s: &str| {
            ma.sa_set.iter().any(|sa| sa.has_state(s))
                || ma.ha_set.iter().any(|h| h.sas.iter().any(|sa| sa.has_state(s)))
        };
        for p in self.atoms() {
            let ok = match p {
                Prop::True | Prop::False | Prop::Accepting => true,
                Prop::LatticeHas(q) => shape.state_index(q).is_some(),
                Prop::Cell(i, q) => *i < shape.width && shape.state_index(q).is_some(),
                Prop::CellState(i, s) => *i < shape.width && any_state(s),
                Prop::Outer(s) => root
                    .outer_sa
                    .as_deref()
                    .and_then(|o| ma.sa(o).ok())
                    .is_some_and(|o| o.has_state(s)),
            };
            if !ok {
                return Err(unknown(p));
            }
        }
        Ok(())
    }

    pub fn eval(&self, ma: &MimicAutomaton, view: &StateView) -> bool {
        self.eval_parts(ma, &view.config.root, view.monitor.as_ref())
    }

    /// Same as [`eval`](Self::eval) on `StateView::of(cfg)`, without the copy.
    pub fn holds_in(&self, ma: &MimicAutomaton, cfg: &MimicConfiguration) -> bool {
        self.eval_parts(ma, &cfg.root, None)
    }

    fn eval_parts(&self, ma: &MimicAutomaton, root: &BindingState, monitor: Option<&MonitorState>) -> bool {
        match self {
            Predicate::Atom(p) => eval_prop(p, ma, root, monitor),
            Predicate::Not(p) => !p.eval_parts(ma, root, monitor),
            Predicate::And(a, b) => a.eval_parts(ma, root, monitor) && b.eval_parts(ma, root, monitor),
            Predicate::Or(a, b) => a.eval_parts(ma, root, monitor) || b.eval_parts(ma, root, monitor),
        }
    }
}

fn cell_name<'a>(ma: &'a MimicAutomaton, root: &BindingState, i: usize) -> Option<&'a str> {
    let b = ma.root().ok()?;
    let shape = ma.ca(&b.ca).ok()?.shape();
    root.lattice
        .cells()
        .get(i)
        .map(|&c| shape.cell_states[c].as_str())
}

fn eval_prop(p: &Prop, ma: &MimicAutomaton, root: &BindingState, monitor: Option<&MonitorState>) -> bool {
    match p {
        Prop::True => true,
        Prop::False => false,
        Prop::Accepting => monitor.is_some_and(|m| m.accepting),
        Prop::LatticeHas(q) => {
            (0..root.lattice.width()).any(|i| cell_name(ma, root, i) == Some(q.as_str()))
        }
        Prop::Cell(i, q) => cell_name(ma, root, *i) == Some(q.as_str()),
        Prop::CellState(i, s) => match root.units.get(*i) {
            Some(UnitState::Sa(x)) => x == s,
            Some(UnitState::Ha(c)) => c.active.values().any(|x| x == s),
            Some(UnitState::Nested(b)) => b.outer.as_deref() == Some(s.as_str()),
            None => false,
        },
        Prop::Outer(s) => root.outer.as_deref() == Some(s.as_str()),
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> CheckError {
        CheckError::Syntax {
            position: self.pos,
            message: message.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(0, char::len_utf8);
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Predicate, CheckError> {
        let mut left = self.and()?;
        while self.eat('|') {
            left = Predicate::Or(Box::new(left), Box::new(self.and()?));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Predicate, CheckError> {
        let mut left = self.not()?;
        while self.eat('&') {
            left = Predicate::And(Box::new(left), Box::new(self.not()?));
        }
        Ok(left)
    }

    fn not(&mut self) -> Result<Predicate, CheckError> {
        if self.eat('!') {
            return Ok(Predicate::Not(Box::new(self.not()?)));
        }
        if self.eat('(') {
            let e = self.or()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Predicate, CheckError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected a proposition"));
        }
        let name = &self.text[start..start + len];
        self.pos += len;
        let arg = if self.rest().starts_with('(') {
            let close = self.rest().find(')').ok_or_else(|| self.error("expected `)`"))?;
            let arg = self.rest()[1..close].trim().to_owned();
            self.pos += close + 1;
            Some(arg)
        } else {
            None
        };
        let unknown = || CheckError::UnknownProposition {
            name: match &arg {
                Some(a) => format!("{name}({a})"),
                None => name.to_owned(),
            },
            known: KNOWN.join(", "),
        };
        let prop = match (name, arg.clone()) {
            ("true", None) => Prop::True,
            ("false", None) => Prop::False,
            ("accepting", None) => Prop::Accepting,
            ("lattice_has", Some(q)) => Prop::LatticeHas(q),
            ("outer", Some(s)) => Prop::Outer(s),
            (n, Some(a)) if n.starts_with("cell") => {
                let body = &n[4..];
                let (digits, state) = match body.strip_suffix("_state") {
                    Some(d) => (d, true),
                    None => (body, false),
                };
                let i: usize = digits.parse().map_err(|_| unknown())?;
                if state {
                    Prop::CellState(i, a)
                } else {
                    Prop::Cell(i, a)
                }
            }
            _ => return Err(unknown()),
        };
        Ok(Predicate::Atom(prop))
    }
}
