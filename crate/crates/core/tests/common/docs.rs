//! Random valid documents in the text format, with shuffled blocks and
//! fields, comments and irregular spacing.

use rand::seq::SliceRandom;
use rand::Rng;

use super::all_words;

struct Sa {
    name: String,
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    finals: bool,
}

struct Ca {
    name: String,
    states: Vec<String>,
    width: usize,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    next: usize,
    blocks: Vec<(String, Vec<String>)>,
}

const STATE_POOL: [&str; 6] = ["idle", "busy", "s0", "s1", "q_x", "done"];
const CELL_POOL: [[&str; 3]; 2] = [["0", "1", "2"], ["off", "on", "hot"]];

impl<R: Rng> Gen<'_, R> {
    fn name(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        xs.choose(self.rng).unwrap()
    }

    fn sa(&mut self, inputs: &[&str], outputs: &[&str], finals: bool) -> Sa {
        let name = self.name("sa");
        let n = self.rng.gen_range(1..=4);
        let mut states: Vec<String> = STATE_POOL.choose_multiple(self.rng, n).map(|s| s.to_string()).collect();
        states.sort();
        let partial = self.rng.gen_bool(0.2);
        let mut fields = vec![
            format!("states: {}", states.join(" ")),
            format!("initial: {}", self.pick(&states)),
            format!("inputs: {}", inputs.join(" ")),
        ];
        if finals {
            let k = self.rng.gen_range(1..=states.len());
            let f: Vec<&String> = states.choose_multiple(self.rng, k).collect();
            fields.push(format!("finals: {}", f.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")));
        }
        if !outputs.is_empty() {
            fields.push(format!("outputs: {}", outputs.join(" ")));
        }
        if partial {
            fields.push("partial: true".into());
        }
        for s in &states {
            for x in inputs {
                if partial && self.rng.gen_bool(0.3) {
                    continue;
                }
                let t = self.pick(&states).clone();
                let mut line = format!("delta: {s} {x} -> {t}");
                if !outputs.is_empty() {
                    line.push_str(&format!(" / {}", self.pick(outputs)));
                }
                fields.push(line);
            }
        }
        self.blocks.push((format!("sa {name}"), fields));
        Sa {
            name,
            states,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            finals,
        }
    }

    fn ca(&mut self, probabilistic: bool, states: Option<Vec<String>>, width: Option<usize>) -> Ca {
        let name = self.name(if probabilistic { "pca" } else { "ca" });
        let states = states.unwrap_or_else(|| {
            let pool = *self.pick(&CELL_POOL);
            let k = self.rng.gen_range(1..=3);
            pool[..k].iter().map(|s| s.to_string()).collect()
        });
        let width = width.unwrap_or_else(|| self.rng.gen_range(1..=4));
        let mut fields = vec![format!("states: {}", states.join(" ")), format!("width: {width}")];
        if self.rng.gen_bool(0.5) {
            fields.push("radius: 1".into());
        }
        match self.rng.gen_range(0..3) {
            0 => {}
            1 => fields.push("boundary: periodic".into()),
            _ => fields.push(format!("boundary: fixed {}", self.pick(&states))),
        }
        let use_expr = self.rng.gen_bool(0.4);
        if use_expr {
            let e = *self.pick(&["xor", "identity", "majority"]);
            fields.push(format!("rule expr: {e}"));
        } else {
            let mut rows = Vec::new();
            for nb in all_words(states.len(), 3) {
                let names: Vec<&str> = nb.iter().map(|&q| states[q].as_str()).collect();
                let rhs = if probabilistic && states.len() > 1 && self.rng.gen_bool(0.6) {
                    let pick: Vec<&String> = states.choose_multiple(self.rng, 2).collect();
                    let (p, q) = *self.pick(&[(0.5, 0.5), (0.25, 0.75), (0.125, 0.875)]);
                    format!("{}@{p} {}@{q}", pick[0], pick[1])
                } else if probabilistic {
                    format!("{}@1", self.pick(&states))
                } else {
                    self.pick(&states).clone()
                };
                rows.push(format!("    {} -> {rhs}", names.join(" ")));
            }
            rows.shuffle(self.rng);
            fields.push(format!("rule table:\n{}", rows.join("\n")));
        }
        self.blocks.push((format!("{} {name}", if probabilistic { "pca" } else { "ca" }), fields));
        Ca { name, states, width }
    }

    fn lattice(&mut self, ca: &Ca) -> String {
        (0..ca.width).map(|_| self.pick(&ca.states).clone()).collect::<Vec<_>>().join(" ")
    }

    fn predicate(&mut self, ca: &Ca, sa: &Sa) -> String {
        let atoms = [
            "true".to_owned(),
            format!("lattice_has({})", self.pick(&ca.states)),
            format!("cell0({})", self.pick(&ca.states)),
            format!("cell0_state({})", self.pick(&sa.states)),
            "accepting".to_owned(),
        ];
        let a = self.pick(&atoms).clone();
        let b = self.pick(&atoms).clone();
        match self.rng.gen_range(0..4) {
            0 => a,
            1 => format!("!{a}"),
            2 => format!("{a} & ({b} | false)"),
            _ => format!("!({a} | {b})"),
        }
    }

    fn document(&mut self) {
        let bits = ["0", "1"];
        // Plain machine over parity-like units.
        let units: Vec<Sa> = (0..self.rng.gen_range(1..=2)).map(|_| self.sa(&bits, &bits, true)).collect();
        let prob = self.rng.gen_bool(0.3);
        let ca = self.ca(prob, None, None);
        let binding = self.name("bind");
        let mut fields = vec!["mode: sa_from_ca".to_owned(), format!("ca: {}", ca.name)];
        for q in &ca.states {
            let u = self.pick(&units).name.clone();
            fields.push(format!("map: {q} -> sa {u}"));
        }
        if self.rng.gen_bool(0.7) {
            fields.push(format!("init: {}", self.lattice(&ca)));
        }
        if self.rng.gen_bool(0.3) {
            let quorum = self.rng.gen_range(ca.width / 2 + 1..=ca.width);
            if self.rng.gen_bool(0.5) {
                fields.push(format!("voter: majority {quorum}"));
            } else {
                fields.push(format!("voter: plurality {quorum} prefer 1 01"));
            }
        }
        self.blocks.push((format!("binding {binding}"), fields));

        let ma = self.name("ma");
        let mut fields = vec![format!("root_binding: {binding}")];
        if self.rng.gen_bool(0.3) {
            fields.push(format!("max_depth: {}", self.rng.gen_range(1..=5)));
        }
        fields.push(format!("init: {}", self.lattice(&ca)));
        if self.rng.gen_bool(0.5) {
            fields.push(format!("universe: {}", self.pick(&["0 1", "01 \"\"", "1 10 110"])));
        }
        if self.rng.gen_bool(0.3) {
            fields.push(format!("policy: {}", self.pick(&["0", "1 0", "011"])));
        }
        self.blocks.push((format!("ma {ma}"), fields));

        let prop = self.name("prop");
        let unit0 = &units[0];
        let p = self.predicate(&ca, unit0);
        let kind = *self.pick(&["invariant", "reach"]);
        let mut fields = vec![format!("{kind}: {p}")];
        if self.rng.gen_bool(0.4) {
            fields.push(format!("horizon: {}", self.rng.gen_range(0..10)));
        }
        if self.rng.gen_bool(0.3) {
            fields.push(format!("method: {}", self.pick(&["exact", "monte_carlo"])));
        }
        self.blocks.push((format!("property {prop}"), fields));

        // Lattice-driven machine read out into an outer automaton.
        if self.rng.gen_bool(0.5) {
            let syms = ["lo", "hi"];
            let outer = self.sa(&syms, &bits, false);
            let w2 = self.rng.gen_range(1..=2);
            let ca2 = self.ca(false, None, Some(w2));
            let b2 = self.name("bind");
            let mut fields = vec!["mode: ca_from_sa".to_owned(), format!("ca: {}", ca2.name), format!("outer: {}", outer.name)];
            for q in &ca2.states {
                fields.push(format!("map: {q} -> sa {}", units[0].name));
            }
            let width = ca2.width;
            let lattices = all_words(ca2.states.len(), width);
            let skip = self.rng.gen_bool(0.5);
            for (k, l) in lattices.iter().enumerate() {
                if skip && k % 2 == 1 {
                    continue;
                }
                let names: Vec<&str> = l.iter().map(|&q| ca2.states[q].as_str()).collect();
                fields.push(format!("readout: {} -> {}", names.join(" "), self.pick(&syms)));
            }
            if skip || self.rng.gen_bool(0.3) {
                fields.push(format!("readout_default: {}", self.pick(&syms)));
            }
            if self.rng.gen_bool(0.5) {
                fields.push(format!("t_max: {}", self.rng.gen_range(1..20)));
            }
            fields.push(format!("init: {}", self.lattice(&ca2)));
            self.blocks.push((format!("binding {b2}"), fields));
            let m2 = self.name("ma");
            let mut fields = vec![format!("root_binding: {b2}")];
            if self.rng.gen_bool(0.5) {
                fields.push(format!("universe_seed: {}", self.lattice(&ca2)));
                fields.push(format!("universe_seed: {}", self.lattice(&ca2)));
            }
            self.blocks.push((format!("ma {m2}"), fields));
            let op = self.name("prop");
            let s = self.pick(&outer.states).clone();
            self.blocks.push((format!("property {op}"), vec![format!("invariant: outer({s}) | true")]));
        }

        // Hierarchy hosted in a one-cell lattice.
        if self.rng.gen_bool(0.4) {
            let top = self.sa(&["go"], &["x"], true);
            let child = self.sa(&["tick"], &["y"], false);
            let ha = self.name("ha");
            let s = self.pick(&top.states).clone();
            self.blocks.push((
                format!("ha {ha}"),
                vec![format!("sas: {} {}", top.name, child.name), format!("root: {}", top.name), format!("gamma: {} {s} -> {}", top.name, child.name)],
            ));
            let ca3 = self.ca(false, Some(vec!["0".into()]), Some(1));
            let b3 = self.name("bind");
            self.blocks.push((
                format!("binding {b3}"),
                vec!["mode: sa_from_ca".into(), format!("ca: {}", ca3.name), format!("map: 0 -> ha {ha}"), "init: 0".into()],
            ));
            let m3 = self.name("ma");
            self.blocks.push((format!("ma {m3}"), vec![format!("root_binding: {b3}"), "universe: go, tick,".into()]));
        }

        // Redundant executors, a serial chain and signatures.
        if self.rng.gen_bool(0.5) {
            let execs: Vec<Sa> = (0..2).map(|_| self.sa(&bits, &bits, true)).collect();
            let width = *self.pick(&[1usize, 3]);
            let states: Vec<String> = vec!["0".into(), "1".into()];
            let prob = self.rng.gen_bool(0.3);
            let sched = self.ca(prob, Some(states.clone()), Some(width));
            let mut dhrs = Vec::new();
            for _ in 0..self.rng.gen_range(1..=2) {
                let d = self.name("dhr");
                let mut fields = vec![
                    format!("executors: {} {}", execs[0].name, execs[1].name),
                    format!("scheduler: {}", sched.name),
                    format!("init: {}", self.lattice(&sched)),
                ];
                if self.rng.gen_bool(0.5) {
                    fields.push(format!("voter: majority {}", width / 2 + 1));
                }
                if self.rng.gen_bool(0.4) {
                    let slot = self.rng.gen_range(0..width);
                    let f = self.pick(&execs).name.clone();
                    fields.push(format!("fault: {slot} -> {f}"));
                }
                if self.rng.gen_bool(0.3) {
                    fields.push("universe: 0 1 01".into());
                }
                self.blocks.push((format!("dhr {d}"), fields));
                dhrs.push(d);
            }
            if dhrs.len() == 2 {
                let s = self.name("serial");
                self.blocks.push((format!("serial_dhr {s}"), vec![format!("stages: {} {}", dhrs[0], dhrs[1])]));
            }
            let pattern = self.sa(&["output(1)", "abstain"], &[], true);
            let sig = self.name("sig");
            let mut fields = vec![
                format!("pattern: {}", pattern.name),
                format!("severity: {}", self.pick(&["low", "medium", "high", "critical"])),
            ];
            if self.rng.gen_bool(0.7) {
                fields.push(format!("description: {}", self.pick(&["\"emits a one\"", "single", "\"say \\\"hi\\\"\""])));
            }
            self.blocks.push((format!("signature {sig}"), fields));
            let bp = self.name("prop");
            self.blocks.push((format!("property {bp}"), vec![format!("bad_prefix: {}", pattern.name)]));
        }
    }

    fn render(mut self) -> String {
        self.blocks.shuffle(self.rng);
        let mut out = String::new();
        if self.rng.gen_bool(0.3) {
            out.push_str("# generated\n\n");
        }
        for (header, mut fields) in self.blocks {
            fields.shuffle(self.rng);
            out.push_str(&header);
            out.push_str(" {\n");
            for f in fields {
                let indent = if self.rng.gen_bool(0.8) { "  " } else { "\t  " };
                let f = if self.rng.gen_bool(0.1) { f.replacen(": ", ":   ", 1) } else { f };
                out.push_str(indent);
                out.push_str(&f);
                if self.rng.gen_bool(0.1) && !f.contains('\n') && !f.contains('"') {
                    out.push_str("  # note");
                }
                out.push('\n');
            }
            out.push_str("}\n");
            if self.rng.gen_bool(0.5) {
                out.push('\n');
            }
        }
        out
    }
}

/// A random document that parses and validates.
pub fn gen_document<R: Rng>(rng: &mut R) -> String {
    let mut g = Gen { rng, next: 0, blocks: Vec::new() };
    g.document();
    g.render()
}
