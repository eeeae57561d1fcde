use std::collections::{BTreeMap, BTreeSet};

use super::lex::{tokenize, Line, Tok};
use super::{
    BindingSpec, BlockOrigin, DhrSpec, DiagKind, Diagnostic, HaSpec, InputSpec, Kind, Loc, MaSpec,
    ModelDocument, PropertyKind, PropertySpec, SerialSpec, SignatureSpec, UnitSpec,
};
use crate::automata::{
    AnyCa, Boundary, BuiltinRule, CellularAutomaton, Distribution, LatticeShape, LocalRule,
    ProbabilisticCellularAutomaton, SequentialAutomaton, Transition,
};
use crate::check::{Method, Predicate};
use crate::compose::BindingMode;
use crate::dhr::{VoterKind, VoterPolicy};
use crate::word::{parse_word, Word};

/// Neighborhood tables larger than this are rejected rather than allocated.
const MAX_TABLE: usize = 1 << 20;

struct Field {
    key: String,
    loc: Loc,
    values: Vec<Tok>,
    rows: Vec<Line>,
}

struct Block {
    kind: Kind,
    name: String,
    loc: Loc,
    fields: Vec<Field>,
    /// No syntax errors inside; only clean blocks are read further.
    clean: bool,
}

fn fields_of(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Sa => &["states", "initial", "finals", "inputs", "outputs", "partial", "delta"],
        Kind::Ca | Kind::Pca => &["states", "width", "radius", "boundary", "rule expr", "rule table"],
        Kind::Ha => &["sas", "root", "gamma"],
        Kind::Binding => &[
            "mode",
            "ca",
            "map",
            "readout",
            "readout_default",
            "readout_cell",
            "outer",
            "t_max",
            "init",
            "voter",
        ],
        Kind::Ma => &[
            "root_binding",
            "max_depth",
            "init",
            "universe",
            "universe_seed",
            "policy",
            "policy_seed",
        ],
        Kind::Dhr => &["executors", "scheduler", "voter", "init", "fault", "universe", "policy"],
        Kind::SerialDhr => &["stages", "universe", "policy"],
        Kind::Property => &["invariant", "reach", "bad_prefix", "horizon", "method"],
        Kind::Signature => &["pattern", "severity", "description"],
    }
}

fn repeatable(key: &str) -> bool {
    matches!(
        key,
        "delta" | "gamma" | "map" | "readout" | "universe_seed" | "policy_seed" | "fault"
    )
}

/// Whether `s` can stand for a block, state or symbol name.
pub(crate) fn is_name(s: &str) -> bool {
    !s.is_empty()
        && !s.ends_with(':')
        && !matches!(s, "->" | "/" | "{" | "}")
        && !s.contains(|c: char| c.is_whitespace() || matches!(c, '#' | '"' | '\\' | ','))
}

struct Reader<'a> {
    file: &'a str,
    diags: Vec<Diagnostic>,
}

impl Reader<'_> {
    fn loc(&self, line: usize, col: usize) -> Loc {
        Loc::new(self.file, line, col)
    }

    fn err(&mut self, kind: DiagKind, loc: Loc, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(kind, loc, msg));
    }

    fn blocks(&mut self, lines: Vec<Line>) -> Vec<Block> {
        let mut out = Vec::new();
        let mut it = lines.into_iter().peekable();
        while let Some(line) = it.next() {
            let head = &line.toks[0];
            let loc = self.loc(line.no, head.col);
            let Some(kind) = Kind::from_keyword(&head.text).filter(|_| !head.quoted) else {
                self.diags.push(
                    Diagnostic::new(DiagKind::Syntax, loc, format!("unexpected `{}`", head.text))
                        .expecting(Kind::ALL.map(|k| k.keyword())),
                );
                continue;
            };
            let name_ok = line.toks.len() == 3
                && is_name(&line.toks[1].text)
                && !line.toks[1].quoted
                && line.toks[2].text == "{";
            if !name_ok {
                let (col, what) = match line.toks.get(1) {
                    Some(t) if !is_name(&t.text) || t.quoted => (t.col, "a block name"),
                    Some(_) => (line.toks.get(2).map_or(head.col, |t| t.col), "`{` at end of line"),
                    None => (head.col, "a block name"),
                };
                self.diags.push(
                    Diagnostic::new(DiagKind::Syntax, self.loc(line.no, col), "malformed block header")
                        .expecting([what]),
                );
                // Skip to the closing brace so one bad header is one error.
                for l in it.by_ref() {
                    if l.toks.len() == 1 && l.toks[0].text == "}" {
                        break;
                    }
                }
                continue;
            }
            let name = line.toks[1].text.clone();
            let mut block = Block {
                kind,
                name,
                loc,
                fields: Vec::new(),
                clean: true,
            };
            let before = self.diags.len();
            let mut closed = false;
            for l in it.by_ref() {
                if l.toks[0].text == "}" && !l.toks[0].quoted {
                    if l.toks.len() > 1 {
                        self.err(
                            DiagKind::Syntax,
                            self.loc(l.no, l.toks[1].col),
                            "unexpected text after `}`",
                        );
                    }
                    closed = true;
                    break;
                }
                self.field_line(&mut block, l);
            }
            if !closed {
                self.diags.push(
                    Diagnostic::new(
                        DiagKind::Syntax,
                        block.loc.clone(),
                        format!("block `{}` is not closed", block.name),
                    )
                    .expecting(["}"]),
                );
            }
            block.clean = self.diags.len() == before;
            out.push(block);
        }
        out
    }

    fn field_line(&mut self, block: &mut Block, l: Line) {
        let t0 = &l.toks[0];
        let key_of = |t: &Tok| -> Option<String> {
            (!t.quoted && t.text.len() > 1)
                .then(|| t.text.strip_suffix(':').map(str::to_owned))
                .flatten()
        };
        let (key, rest) = if let Some(k) = key_of(t0) {
            (k, 1)
        } else if t0.text == "rule" && !t0.quoted {
            match l.toks.get(1).and_then(key_of) {
                Some(k) => (format!("rule {k}"), 2),
                None => {
                    let col = l.toks.get(1).map_or(t0.col, |t| t.col);
                    self.diags.push(
                        Diagnostic::new(DiagKind::Syntax, self.loc(l.no, col), "malformed rule")
                            .expecting(["expr:", "table:"]),
                    );
                    return;
                }
            }
        } else {
            match block.fields.last_mut() {
                Some(f) if f.key == "rule table" => f.rows.push(l),
                _ => self.diags.push(
                    Diagnostic::new(DiagKind::Syntax, self.loc(l.no, t0.col), "expected a field")
                        .expecting(fields_of(block.kind).iter().map(|k| format!("{k}:"))),
                ),
            }
            return;
        };
        let allowed = fields_of(block.kind);
        if !allowed.contains(&key.as_str()) {
            self.diags.push(
                Diagnostic::new(
                    DiagKind::Syntax,
                    self.loc(l.no, t0.col),
                    format!("unknown field `{key}` in {} block", block.kind.keyword()),
                )
                .expecting(allowed.iter().map(|k| format!("{k}:"))),
            );
            return;
        }
        let exclusive = |k: &str| match k {
            "rule expr" | "rule table" => Some(["rule expr", "rule table"].as_slice()),
            "invariant" | "reach" | "bad_prefix" => Some(["invariant", "reach", "bad_prefix"].as_slice()),
            _ => None,
        };
        let clash = block.fields.iter().find(|f| {
            (f.key == key && !repeatable(&key))
                || exclusive(&key).is_some_and(|group| group.contains(&f.key.as_str()))
        });
        if let Some(first) = clash {
            let msg = format!("field `{key}` conflicts with `{}` at line {}", first.key, first.loc.line);
            self.err(DiagKind::Syntax, self.loc(l.no, t0.col), msg);
            return;
        }
        block.fields.push(Field {
            key,
            loc: self.loc(l.no, t0.col),
            values: l.toks[rest..].to_vec(),
            rows: Vec::new(),
        });
    }
}

/// Typed access to one block's fields, collecting diagnostics.
struct Fields<'a> {
    block: &'a Block,
    diags: &'a mut Vec<Diagnostic>,
}

impl<'a> Fields<'a> {
    fn get(&self, key: &str) -> Option<&'a Field> {
        self.block.fields.iter().find(|f| f.key == key)
    }

    fn all(&self, key: &str) -> Vec<&'a Field> {
        self.block.fields.iter().filter(|f| f.key == key).collect()
    }

    fn missing(&mut self, key: &str) {
        self.diags.push(
            Diagnostic::new(
                DiagKind::Syntax,
                self.block.loc.clone(),
                format!("{} `{}` lacks field `{key}`", self.block.kind.keyword(), self.block.name),
            )
            .expecting([format!("{key}:")]),
        );
    }

    fn bad(&mut self, loc: &Loc, col: usize, msg: impl Into<String>, expected: &[&str]) {
        let loc = Loc::new(&loc.file, loc.line, col);
        self.diags
            .push(Diagnostic::new(DiagKind::Syntax, loc, msg).expecting(expected.iter().copied()));
    }

    fn names_in(&mut self, f: &Field, toks: &[Tok]) -> Option<Vec<String>> {
        let mut out = Vec::new();
        for t in toks {
            if t.quoted || !is_name(&t.text) {
                self.bad(&f.loc, t.col, format!("`{}` is not a valid name", t.text), &["a name"]);
                return None;
            }
            out.push(t.text.clone());
        }
        Some(out)
    }

    fn list(&mut self, key: &str) -> Option<Vec<String>> {
        match self.get(key) {
            Some(f) => self.names_in(f, &f.values),
            None => Some(Vec::new()),
        }
    }

    fn required_list(&mut self, key: &str) -> Option<Vec<String>> {
        match self.get(key) {
            Some(f) => self.names_in(f, &f.values),
            None => {
                self.missing(key);
                None
            }
        }
    }

    fn one(&mut self, f: &'a Field) -> Option<&'a Tok> {
        match f.values.as_slice() {
            [t] => Some(t),
            [] => {
                self.bad(&f.loc, f.loc.col, format!("`{}` needs a value", f.key), &["one value"]);
                None
            }
            [_, extra, ..] => {
                self.bad(&f.loc, extra.col, format!("`{}` takes one value", f.key), &["end of line"]);
                None
            }
        }
    }

    fn name(&mut self, key: &str, required: bool) -> Option<String> {
        let Some(f) = self.get(key) else {
            if required {
                self.missing(key);
            }
            return None;
        };
        let t = self.one(f)?;
        self.names_in(f, std::slice::from_ref(t)).map(|mut v| v.remove(0))
    }

    fn number(&mut self, key: &str) -> Option<Option<usize>> {
        let Some(f) = self.get(key) else {
            return Some(None);
        };
        let t = self.one(f)?;
        match t.text.parse::<usize>() {
            Ok(n) if !t.quoted => Some(Some(n)),
            _ => {
                self.bad(&f.loc, t.col, format!("`{}` is not a number", t.text), &["a non-negative integer"]);
                None
            }
        }
    }

    fn words(&mut self, key: &str) -> Vec<Word> {
        let Some(f) = self.get(key) else {
            return Vec::new();
        };
        f.values.iter().map(|t| parse_word(&t.text)).collect()
    }

    fn seeds(&mut self, key: &str) -> Option<Vec<Vec<String>>> {
        let mut out = Vec::new();
        for f in self.all(key) {
            out.push(self.names_in(f, &f.values)?);
        }
        Some(out)
    }

    fn inputs(&mut self, seeds: bool) -> Option<InputSpec> {
        let mut spec = InputSpec {
            universe: self.words("universe"),
            policy: self.words("policy"),
            ..InputSpec::default()
        };
        if seeds {
            spec.universe_seed = self.seeds("universe_seed")?;
            spec.policy_seed = self.seeds("policy_seed")?;
        }
        Some(spec)
    }

    /// Splits `lhs -> rhs` at the arrow.
    fn arrow(&mut self, f: &'a Field, toks: &'a [Tok], line: usize) -> Option<(&'a [Tok], &'a [Tok])> {
        match toks.iter().position(|t| t.text == "->" && !t.quoted) {
            Some(i) => Some((&toks[..i], &toks[i + 1..])),
            None => {
                let col = toks.last().map_or(f.loc.col, |t| t.col + t.text.chars().count());
                let loc = Loc::new(&f.loc.file, line, f.loc.col);
                self.bad(&loc, col, "missing `->`", &["->"]);
                None
            }
        }
    }

    fn voter(&mut self) -> Option<Option<VoterPolicy>> {
        let Some(f) = self.get("voter") else {
            return Some(None);
        };
        let v = &f.values;
        let quorum = v.get(1).and_then(|t| t.text.parse::<usize>().ok());
        let expected = ["majority <quorum>", "plurality <quorum> [prefer <words>]"];
        let kind = match (v.first().map(|t| t.text.as_str()), quorum) {
            (Some("majority"), Some(_)) if v.len() == 2 => VoterKind::StrictMajority,
            (Some("plurality"), Some(_)) if v.len() == 2 => VoterKind::PluralityWithTiebreak { preference: Vec::new() },
            (Some("plurality"), Some(_)) if v.len() >= 3 && v[2].text == "prefer" => VoterKind::PluralityWithTiebreak {
                preference: v[3..].iter().map(|t| parse_word(&t.text)).collect(),
            },
            _ => {
                let col = v.first().map_or(f.loc.col, |t| t.col);
                self.bad(&f.loc, col, "malformed voter", &expected);
                return None;
            }
        };
        Some(Some(VoterPolicy {
            kind,
            quorum: quorum.expect("checked above"),
        }))
    }
}

fn origin_of(block: &Block) -> BlockOrigin {
    let mut lines = Vec::new();
    for f in &block.fields {
        lines.push((f.key.clone(), f.loc.clone(), f.values.iter().map(|t| t.text.clone()).collect()));
        for r in &f.rows {
            let loc = Loc::new(&f.loc.file, r.no, r.toks[0].col);
            lines.push((f.key.clone(), loc, r.toks.iter().map(|t| t.text.clone()).collect()));
        }
    }
    BlockOrigin {
        loc: block.loc.clone(),
        lines,
    }
}

/// Lexes and parses one file into blocks; no cross-references are checked.
pub(crate) fn read(text: &str, file: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let lines = tokenize(text, file)?;
    let mut reader = Reader {
        file,
        diags: Vec::new(),
    };
    let blocks = reader.blocks(lines);
    let mut diags = reader.diags;
    let mut doc = ModelDocument::default();
    let mut seen: BTreeMap<(Kind, String), Loc> = BTreeMap::new();
    for b in &blocks {
        let key = (b.kind.namespace(), b.name.clone());
        if let Some(first) = seen.get(&key) {
            diags.push(Diagnostic::new(
                DiagKind::Semantic,
                b.loc.clone(),
                format!("duplicate {} `{}` (first defined at {first})", b.kind.keyword(), b.name),
            ));
            continue;
        }
        seen.insert(key.clone(), b.loc.clone());
        doc.origins.0.insert(key, origin_of(b));
        if !b.clean {
            continue;
        }
        let mut fs = Fields {
            block: b,
            diags: &mut diags,
        };
        let name = b.name.clone();
        match b.kind {
            Kind::Sa => {
                if let Some(sa) = read_sa(&mut fs) {
                    doc.sas.insert(name, sa);
                }
            }
            Kind::Ca | Kind::Pca => {
                if let Some(ca) = read_ca(&mut fs, b.kind == Kind::Pca) {
                    doc.cas.insert(name, ca);
                }
            }
            Kind::Ha => {
                if let Some(h) = read_ha(&mut fs) {
                    doc.has.insert(name, h);
                }
            }
            Kind::Binding => {
                if let Some(x) = read_binding(&mut fs) {
                    doc.bindings.insert(name, x);
                }
            }
            Kind::Ma => {
                if let Some(x) = read_ma(&mut fs) {
                    doc.mas.insert(name, x);
                }
            }
            Kind::Dhr => {
                if let Some(x) = read_dhr(&mut fs) {
                    doc.dhrs.insert(name, x);
                }
            }
            Kind::SerialDhr => {
                let stages = fs.required_list("stages");
                let inputs = fs.inputs(false);
                if let (Some(stages), Some(inputs)) = (stages, inputs) {
                    doc.serials.insert(name, SerialSpec { stages, inputs });
                }
            }
            Kind::Property => {
                if let Some(x) = read_property(&mut fs) {
                    doc.properties.insert(name, x);
                }
            }
            Kind::Signature => {
                if let Some(x) = read_signature(&mut fs) {
                    doc.signatures.insert(name, x);
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(doc)
    } else {
        Err(diags)
    }
}

fn read_sa(fs: &mut Fields) -> Option<SequentialAutomaton> {
    let states = fs.required_list("states");
    let initial = fs.name("initial", true);
    let finals = fs.list("finals");
    let inputs = fs.list("inputs");
    let outputs = fs.list("outputs");
    let partial = match fs.get("partial") {
        None => Some(false),
        Some(f) => match fs.one(f).map(|t| t.text.as_str()) {
            Some("true") => Some(true),
            Some("false") => Some(false),
            Some(_) => {
                fs.bad(&f.loc, f.values[0].col, "malformed flag", &["true", "false"]);
                None
            }
            None => None,
        },
    };
    let mut transitions = BTreeMap::new();
    let mut ok = true;
    for f in fs.all("delta") {
        let v = &f.values;
        let shape_ok = (v.len() == 4 || (v.len() == 6 && v[4].text == "/")) && v[2].text == "->";
        if !shape_ok {
            let col = v.first().map_or(f.loc.col, |t| t.col);
            fs.bad(&f.loc, col, "malformed transition", &["<state> <symbol> -> <state> [/ <output>]"]);
            ok = false;
            continue;
        }
        let picked: Vec<Tok> = [0, 1, 3].iter().chain(if v.len() == 6 { &[5][..] } else { &[][..] }).map(|&i| v[i].clone()).collect();
        let Some(names) = fs.names_in(f, &picked) else {
            ok = false;
            continue;
        };
        let key = (names[0].clone(), names[1].clone());
        if transitions.contains_key(&key) {
            let msg = format!("second transition from `{}` on `{}`", names[0], names[1]);
            fs.diags.push(Diagnostic::new(DiagKind::Semantic, f.loc.clone(), msg));
            ok = false;
            continue;
        }
        transitions.insert(
            key,
            Transition {
                target: names[2].clone(),
                output: names.get(3).cloned(),
            },
        );
    }
    let name = fs.block.name.clone();
    match (states, initial, finals, inputs, outputs, partial) {
        (Some(states), Some(initial), Some(finals), Some(inputs), Some(outputs), Some(partial)) if ok => {
            Some(SequentialAutomaton {
                name,
                states,
                initial,
                finals: finals.into_iter().collect(),
                inputs,
                outputs,
                transitions,
                partial,
            })
        }
        _ => None,
    }
}

fn read_ca(fs: &mut Fields, probabilistic: bool) -> Option<AnyCa> {
    let states = fs.required_list("states")?;
    let width = fs.number("width")?;
    let radius = fs.number("radius")?.unwrap_or(1);
    let Some(width) = width else {
        fs.missing("width");
        return None;
    };
    let boundary = match fs.get("boundary") {
        None => Boundary::Periodic,
        Some(f) => match f.values.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().as_slice() {
            ["periodic"] => Boundary::Periodic,
            ["fixed", q] => match states.iter().position(|s| s == q) {
                Some(i) => Boundary::Fixed(i),
                None => {
                    let msg = format!("boundary state `{q}` is not a cell state");
                    fs.diags.push(Diagnostic::new(DiagKind::Semantic, f.loc.clone(), msg));
                    return None;
                }
            },
            _ => {
                fs.bad(&f.loc, f.loc.col, "malformed boundary", &["periodic", "fixed <state>"]);
                return None;
            }
        },
    };
    let shape = LatticeShape::new(states.clone(), width, radius, boundary);
    let name = fs.block.name.clone();
    if let Some(f) = fs.get("rule expr") {
        let t = fs.one(f)?;
        let Some(rule) = BuiltinRule::from_name(&t.text) else {
            fs.bad(&f.loc, t.col, format!("unknown rule `{}`", t.text), &["xor", "identity", "majority"]);
            return None;
        };
        let ca = CellularAutomaton::builtin(name, shape, rule);
        return Some(if probabilistic {
            ProbabilisticCellularAutomaton::from_deterministic(&ca).into()
        } else {
            ca.into()
        });
    }
    let Some(f) = fs.get("rule table") else {
        fs.missing("rule");
        return None;
    };
    if !f.values.is_empty() {
        fs.bad(&f.loc, f.values[0].col, "table rows go on the following lines", &["end of line"]);
        return None;
    }
    let count = (states.len() as f64).powi(shape.arity() as i32);
    if states.is_empty() || count > MAX_TABLE as f64 {
        let msg = format!("rule table would have {count} rows (limit {MAX_TABLE})");
        fs.diags.push(Diagnostic::new(DiagKind::Semantic, f.loc.clone(), msg));
        return None;
    }
    let mut det: Vec<Option<usize>> = vec![None; count as usize];
    let mut prob: Vec<Option<Distribution>> = vec![None; count as usize];
    let mut ok = true;
    for row in &f.rows {
        let rloc = Loc::new(&f.loc.file, row.no, row.toks[0].col);
        let Some((lhs, rhs)) = fs.arrow(f, &row.toks, row.no) else {
            ok = false;
            continue;
        };
        let semantic = |fs: &mut Fields, col: usize, msg: String| {
            fs.diags.push(Diagnostic::new(
                DiagKind::Semantic,
                Loc::new(&rloc.file, rloc.line, col),
                msg,
            ));
        };
        if lhs.len() != shape.arity() {
            semantic(fs, rloc.col, format!("neighborhood needs {} cells, found {}", shape.arity(), lhs.len()));
            ok = false;
            continue;
        }
        let mut nb = Vec::new();
        for t in lhs {
            match shape.state_index(&t.text) {
                Some(i) => nb.push(i),
                None => {
                    semantic(fs, t.col, format!("`{}` is not a cell state", t.text));
                    ok = false;
                }
            }
        }
        if nb.len() != lhs.len() {
            continue;
        }
        let code = shape.encode(&nb);
        if det[code].is_some() || prob[code].is_some() {
            semantic(fs, rloc.col, "second row for this neighborhood".into());
            ok = false;
            continue;
        }
        if probabilistic {
            let mut dist = Vec::new();
            for t in rhs {
                let parsed = t.text.rsplit_once('@').and_then(|(q, p)| {
                    Some((shape.state_index(q)?, p.parse::<f64>().ok().filter(|p| p.is_finite())?))
                });
                match parsed {
                    Some(e) => dist.push(e),
                    None => {
                        fs.bad(&rloc, t.col, format!("malformed outcome `{}`", t.text), &["<state>@<probability>"]);
                        ok = false;
                    }
                }
            }
            if rhs.is_empty() {
                fs.bad(&rloc, rloc.col, "empty distribution", &["<state>@<probability>"]);
                ok = false;
            }
            prob[code] = Some(dist);
        } else {
            match rhs {
                [t] => match shape.state_index(&t.text) {
                    Some(q) => det[code] = Some(q),
                    None => {
                        semantic(fs, t.col, format!("`{}` is not a cell state", t.text));
                        ok = false;
                    }
                },
                _ => {
                    fs.bad(&rloc, rloc.col, "a row maps to one state", &["<neighborhood> -> <state>"]);
                    ok = false;
                }
            }
        }
    }
    if !ok {
        return None;
    }
    Some(if probabilistic {
        ProbabilisticCellularAutomaton::new(name, shape, prob).into()
    } else {
        CellularAutomaton::new(name, shape, LocalRule::Table(det)).into()
    })
}

fn read_ha(fs: &mut Fields) -> Option<HaSpec> {
    let sas = fs.required_list("sas");
    let root = fs.name("root", true);
    let mut gamma: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    let mut ok = true;
    for f in fs.all("gamma") {
        let parts = fs.arrow(f, &f.values, f.loc.line);
        let Some((lhs, rhs)) = parts else {
            ok = false;
            continue;
        };
        if lhs.len() != 2 || rhs.is_empty() {
            fs.bad(&f.loc, f.loc.col, "malformed refinement", &["<sa> <state> -> <children>"]);
            ok = false;
            continue;
        }
        let (Some(l), Some(r)) = (fs.names_in(f, lhs), fs.names_in(f, rhs)) else {
            ok = false;
            continue;
        };
        gamma.entry((l[0].clone(), l[1].clone())).or_default().extend(r);
    }
    ok.then_some(HaSpec {
        sas: sas?,
        root: root?,
        gamma,
    })
}

fn read_binding(fs: &mut Fields) -> Option<BindingSpec> {
    let mode = match fs.get("mode") {
        None => {
            fs.missing("mode");
            None
        }
        Some(f) => match fs.one(f).map(|t| (t.text.as_str(), t.col)) {
            Some(("sa_from_ca", _)) => Some(BindingMode::SaFromCa),
            Some(("ca_from_sa", _)) => Some(BindingMode::CaFromSa),
            Some((_, col)) => {
                fs.bad(&f.loc, col, "unknown mode", &["sa_from_ca", "ca_from_sa"]);
                None
            }
            None => None,
        },
    };
    let ca = fs.name("ca", true);
    let mut map = BTreeMap::new();
    let mut ok = true;
    for f in fs.all("map") {
        let v: Vec<&str> = f.values.iter().map(|t| t.text.as_str()).collect();
        let unit = match v.as_slice() {
            [q, "->", "sa", x] => Some((q, UnitSpec::Sa((*x).into()))),
            [q, "->", "ha", x] => Some((q, UnitSpec::Ha((*x).into()))),
            [q, "->", "nested", x] => Some((q, UnitSpec::Nested((*x).into()))),
            _ => None,
        };
        let names_ok = f.values.len() == 4
            && fs.names_in(f, &[f.values[0].clone(), f.values[3].clone()]).is_some();
        match unit {
            Some((q, u)) if names_ok => {
                if map.insert((*q).to_owned(), u).is_some() {
                    let msg = format!("cell state `{q}` is mapped twice");
                    fs.diags.push(Diagnostic::new(DiagKind::Semantic, f.loc.clone(), msg));
                    ok = false;
                }
            }
            Some(_) => ok = false,
            None => {
                let col = f.values.first().map_or(f.loc.col, |t| t.col);
                fs.bad(&f.loc, col, "malformed cell map", &["<state> -> sa|ha|nested <name>"]);
                ok = false;
            }
        }
    }
    let mut readout = BTreeMap::new();
    for f in fs.all("readout") {
        let Some((lhs, rhs)) = fs.arrow(f, &f.values, f.loc.line) else {
            ok = false;
            continue;
        };
        match (fs.names_in(f, lhs), fs.names_in(f, rhs)) {
            (Some(l), Some(r)) if r.len() == 1 && !l.is_empty() => {
                if readout.insert(l, r[0].clone()).is_some() {
                    let msg = "second readout row for this lattice";
                    fs.diags.push(Diagnostic::new(DiagKind::Semantic, f.loc.clone(), msg));
                    ok = false;
                }
            }
            _ => {
                fs.bad(&f.loc, f.loc.col, "malformed readout row", &["<cell states> -> <symbol>"]);
                ok = false;
            }
        }
    }
    let readout_default = fs.name("readout_default", false);
    let readout_cell = fs.number("readout_cell");
    let outer = fs.name("outer", false);
    let t_max = fs.number("t_max");
    let init = match fs.get("init") {
        Some(_) => fs.list("init").map(Some),
        None => Some(None),
    };
    let voter = fs.voter();
    if !ok {
        return None;
    }
    Some(BindingSpec {
        mode: mode?,
        ca: ca?,
        map,
        readout,
        readout_default,
        readout_cell: readout_cell?,
        outer,
        t_max: t_max?,
        init: init?,
        voter: voter?,
    })
}

fn read_ma(fs: &mut Fields) -> Option<MaSpec> {
    let root_binding = fs.name("root_binding", true);
    let max_depth = fs.number("max_depth");
    let init = match fs.get("init") {
        Some(_) => fs.list("init").map(Some),
        None => Some(None),
    };
    let inputs = fs.inputs(true);
    Some(MaSpec {
        root_binding: root_binding?,
        max_depth: max_depth?,
        init: init?,
        inputs: inputs?,
    })
}

fn read_dhr(fs: &mut Fields) -> Option<DhrSpec> {
    let executors = fs.required_list("executors");
    let scheduler = fs.name("scheduler", true);
    let voter = fs.voter();
    let init = fs.required_list("init");
    let mut faults = BTreeMap::new();
    let mut ok = true;
    for f in fs.all("fault") {
        let v: Vec<&str> = f.values.iter().map(|t| t.text.as_str()).collect();
        match v.as_slice() {
            [slot, "->", sa] if is_name(sa) => match slot.parse::<usize>() {
                Ok(s) => {
                    if faults.insert(s, (*sa).to_owned()).is_some() {
                        let msg = format!("slot {s} has two faults");
                        fs.diags.push(Diagnostic::new(DiagKind::Semantic, f.loc.clone(), msg));
                        ok = false;
                    }
                }
                Err(_) => {
                    fs.bad(&f.loc, f.values[0].col, "slot must be a number", &["<slot> -> <sa>"]);
                    ok = false;
                }
            },
            _ => {
                fs.bad(&f.loc, f.loc.col, "malformed fault", &["<slot> -> <sa>"]);
                ok = false;
            }
        }
    }
    let inputs = fs.inputs(false);
    if !ok {
        return None;
    }
    Some(DhrSpec {
        executors: executors?,
        scheduler: scheduler?,
        voter: voter?,
        init: init?,
        faults,
        inputs: inputs?,
    })
}

fn read_property(fs: &mut Fields) -> Option<PropertySpec> {
    let kind = if let Some(f) = fs.get("bad_prefix") {
        let t = fs.one(f)?;
        PropertyKind::BadPrefix(fs.names_in(f, std::slice::from_ref(t))?.remove(0))
    } else if let Some(f) = fs.get("invariant").or_else(|| fs.get("reach")) {
        let text: Vec<&str> = f.values.iter().map(|t| t.text.as_str()).collect();
        let text = text.join(" ");
        match Predicate::parse(&text) {
            Ok(p) if f.key == "invariant" => PropertyKind::Invariant(p),
            Ok(p) => PropertyKind::Reach(p),
            Err(e) => {
                let col = f.values.first().map_or(f.loc.col, |t| t.col);
                fs.bad(&f.loc, col, e.to_string(), &[]);
                return None;
            }
        }
    } else {
        fs.diags.push(
            Diagnostic::new(
                DiagKind::Syntax,
                fs.block.loc.clone(),
                format!("property `{}` states nothing", fs.block.name),
            )
            .expecting(["invariant:", "reach:", "bad_prefix:"]),
        );
        return None;
    };
    let horizon = fs.number("horizon")?;
    let method = match fs.get("method") {
        None => None,
        Some(f) => match fs.one(f)?.text.as_str() {
            "exact" => Some(Method::Exact),
            "monte_carlo" => Some(Method::MonteCarlo),
            _ => {
                fs.bad(&f.loc, f.values[0].col, "unknown method", &["exact", "monte_carlo"]);
                return None;
            }
        },
    };
    Some(PropertySpec { kind, horizon, method })
}

fn read_signature(fs: &mut Fields) -> Option<SignatureSpec> {
    let pattern = fs.name("pattern", true);
    let severity = match fs.get("severity") {
        None => {
            fs.missing("severity");
            None
        }
        Some(f) => {
            let t = fs.one(f)?;
            match t.text.parse() {
                Ok(s) => Some(s),
                Err(_) => {
                    fs.bad(&f.loc, t.col, format!("unknown severity `{}`", t.text), &["low", "medium", "high", "critical"]);
                    None
                }
            }
        }
    };
    let description = match fs.get("description") {
        None => String::new(),
        Some(f) => f.values.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" "),
    };
    Some(SignatureSpec {
        pattern: pattern?,
        severity: severity?,
        description,
    })
}
