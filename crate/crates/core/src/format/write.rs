use std::fmt::Write;

use super::lex::quote_if_needed;
use super::{InputSpec, Kind, ModelDocument, PropertyKind, UnitSpec};
use crate::automata::{AnyCa, Boundary, LatticeShape, LocalRule, SequentialAutomaton};
use crate::check::Method;
use crate::dhr::{VoterKind, VoterPolicy};
use crate::word::{render_word, Word};

fn field(out: &mut String, key: &str, values: &[String]) {
    out.push_str("  ");
    out.push_str(key);
    out.push(':');
    for v in values {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
}

fn word_token(w: &Word) -> String {
    quote_if_needed(&render_word(w))
}

fn voter(v: &VoterPolicy) -> Vec<String> {
    match &v.kind {
        VoterKind::StrictMajority => vec!["majority".into(), v.quorum.to_string()],
        VoterKind::PluralityWithTiebreak { preference } => {
            let mut out = vec!["plurality".into(), v.quorum.to_string()];
            if !preference.is_empty() {
                out.push("prefer".into());
                out.extend(preference.iter().map(word_token));
            }
            out
        }
    }
}

fn inputs(out: &mut String, i: &InputSpec) {
    if !i.universe.is_empty() {
        field(out, "universe", &i.universe.iter().map(word_token).collect::<Vec<_>>());
    }
    for s in &i.universe_seed {
        field(out, "universe_seed", s);
    }
    if !i.policy.is_empty() {
        field(out, "policy", &i.policy.iter().map(word_token).collect::<Vec<_>>());
    }
    for s in &i.policy_seed {
        field(out, "policy_seed", s);
    }
}

fn sa(out: &mut String, a: &SequentialAutomaton) {
    field(out, "states", &a.states);
    field(out, "initial", std::slice::from_ref(&a.initial));
    if !a.finals.is_empty() {
        field(out, "finals", &a.finals.iter().cloned().collect::<Vec<_>>());
    }
    if !a.inputs.is_empty() {
        field(out, "inputs", &a.inputs);
    }
    if !a.outputs.is_empty() {
        field(out, "outputs", &a.outputs);
    }
    if a.partial {
        field(out, "partial", &["true".into()]);
    }
    for ((s, x), t) in &a.transitions {
        let mut v = vec![s.clone(), x.clone(), "->".into(), t.target.clone()];
        if let Some(o) = &t.output {
            v.extend(["/".into(), o.clone()]);
        }
        field(out, "delta", &v);
    }
}

fn shape(out: &mut String, s: &LatticeShape) {
    field(out, "states", &s.cell_states);
    field(out, "width", &[s.width.to_string()]);
    field(out, "radius", &[s.radius.to_string()]);
    match s.boundary {
        Boundary::Periodic => field(out, "boundary", &["periodic".into()]),
        Boundary::Fixed(q) => field(out, "boundary", &["fixed".into(), s.cell_states[q].clone()]),
    }
}

fn ca(out: &mut String, c: &AnyCa) {
    let s = c.shape();
    shape(out, s);
    let names = |code: usize| -> String {
        s.decode(code)
            .into_iter()
            .map(|q| s.cell_states[q].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    match c {
        AnyCa::Deterministic(d) => match &d.rule {
            LocalRule::Builtin(b) => field(out, "rule expr", &[b.name().into()]),
            LocalRule::Table(rows) => {
                out.push_str("  rule table:\n");
                for (code, q) in rows.iter().enumerate() {
                    if let Some(q) = q {
                        let _ = writeln!(out, "    {} -> {}", names(code), s.cell_states[*q]);
                    }
                }
            }
        },
        AnyCa::Probabilistic(p) => {
            out.push_str("  rule table:\n");
            for (code, dist) in p.rule.iter().enumerate() {
                if let Some(dist) = dist {
                    let outcomes: Vec<String> = dist
                        .iter()
                        .map(|(q, pr)| format!("{}@{pr}", s.cell_states[*q]))
                        .collect();
                    let _ = writeln!(out, "    {} -> {}", names(code), outcomes.join(" "));
                }
            }
        }
    }
}

/// Canonical text: blocks sorted by kind then name, fields in a fixed
/// order, one field per line.
pub fn serialize(doc: &ModelDocument) -> String {
    let mut out = String::new();
    for (i, (kind, name)) in doc.block_names().into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{} {name} {{", kind.keyword());
        match kind {
            Kind::Sa => sa(&mut out, &doc.sas[&name]),
            Kind::Ca | Kind::Pca => ca(&mut out, &doc.cas[&name]),
            Kind::Ha => {
                let h = &doc.has[&name];
                field(&mut out, "sas", &h.sas);
                field(&mut out, "root", std::slice::from_ref(&h.root));
                for ((s, q), kids) in &h.gamma {
                    let mut v = vec![s.clone(), q.clone(), "->".into()];
                    v.extend(kids.iter().cloned());
                    field(&mut out, "gamma", &v);
                }
            }
            Kind::Binding => {
                let b = &doc.bindings[&name];
                field(&mut out, "mode", &[b.mode.keyword().into()]);
                field(&mut out, "ca", std::slice::from_ref(&b.ca));
                for (q, u) in &b.map {
                    let (k, x) = match u {
                        UnitSpec::Sa(x) => ("sa", x),
                        UnitSpec::Ha(x) => ("ha", x),
                        UnitSpec::Nested(x) => ("nested", x),
                    };
                    field(&mut out, "map", &[q.clone(), "->".into(), k.into(), x.clone()]);
                }
                for (cells, sym) in &b.readout {
                    let mut v = cells.clone();
                    v.extend(["->".into(), sym.clone()]);
                    field(&mut out, "readout", &v);
                }
                if let Some(d) = &b.readout_default {
                    field(&mut out, "readout_default", std::slice::from_ref(d));
                }
                if let Some(c) = b.readout_cell {
                    field(&mut out, "readout_cell", &[c.to_string()]);
                }
                if let Some(o) = &b.outer {
                    field(&mut out, "outer", std::slice::from_ref(o));
                }
                if let Some(t) = b.t_max {
                    field(&mut out, "t_max", &[t.to_string()]);
                }
                if let Some(l) = &b.init {
                    field(&mut out, "init", l);
                }
                if let Some(v) = &b.voter {
                    field(&mut out, "voter", &voter(v));
                }
            }
            Kind::Ma => {
                let m = &doc.mas[&name];
                field(&mut out, "root_binding", std::slice::from_ref(&m.root_binding));
                if let Some(d) = m.max_depth {
                    field(&mut out, "max_depth", &[d.to_string()]);
                }
                if let Some(l) = &m.init {
                    field(&mut out, "init", l);
                }
                inputs(&mut out, &m.inputs);
            }
            Kind::Dhr => {
                let d = &doc.dhrs[&name];
                field(&mut out, "executors", &d.executors);
                field(&mut out, "scheduler", std::slice::from_ref(&d.scheduler));
                if let Some(v) = &d.voter {
                    field(&mut out, "voter", &voter(v));
                }
                field(&mut out, "init", &d.init);
                for (slot, sa) in &d.faults {
                    field(&mut out, "fault", &[slot.to_string(), "->".into(), sa.clone()]);
                }
                inputs(&mut out, &d.inputs);
            }
            Kind::SerialDhr => {
                let s = &doc.serials[&name];
                field(&mut out, "stages", &s.stages);
                inputs(&mut out, &s.inputs);
            }
            Kind::Property => {
                let p = &doc.properties[&name];
                match &p.kind {
                    PropertyKind::Invariant(e) => field(&mut out, "invariant", &[e.to_string()]),
                    PropertyKind::Reach(e) => field(&mut out, "reach", &[e.to_string()]),
                    PropertyKind::BadPrefix(s) => field(&mut out, "bad_prefix", std::slice::from_ref(s)),
                }
                if let Some(h) = p.horizon {
                    field(&mut out, "horizon", &[h.to_string()]);
                }
                if let Some(m) = p.method {
                    let m = match m {
                        Method::Exact => "exact",
                        Method::MonteCarlo => "monte_carlo",
                    };
                    field(&mut out, "method", &[m.into()]);
                }
            }
            Kind::Signature => {
                let s = &doc.signatures[&name];
                field(&mut out, "pattern", std::slice::from_ref(&s.pattern));
                field(&mut out, "severity", &[s.severity.to_string()]);
                if !s.description.is_empty() {
                    field(&mut out, "description", &[quote_if_needed(&s.description)]);
                }
            }
        }
        out.push_str("}\n");
    }
    out
}
