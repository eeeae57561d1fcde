use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{
    BindingSpec, DiagKind, Diagnostic, FormatError, InputSpec, Kind, Loc, Model, ModelDocument,
    PropertyKind, PropertySpec, UnitSpec,
};
use crate::automata::{
    AnyCa, HierarchicalAutomaton, Invariant, Lattice, LatticeShape, Report, Subject, Validate,
    Violation, DEFAULT_RUN_CAP, DEFAULT_SUCCESSOR_CAP,
};
use crate::compose::{
    Binding, BindingMode, MacroInput, MimicAutomaton, MimicConfiguration, Readout, Unit,
    DEFAULT_MAX_DEPTH,
};
use crate::detect::{DetectError, Signature};
use crate::dhr::{build_dhr, compose_serial, DhrStructure, SerialDhr};

type Diags = Vec<Diagnostic>;

impl ModelDocument {
    fn line(&self, kind: Kind, name: &str, keys: &[&str], pred: impl Fn(&[String]) -> bool) -> Option<Loc> {
        self.origin(kind, name)
            .lines
            .into_iter()
            .find(|(k, _, t)| (keys.is_empty() || keys.contains(&k.as_str())) && pred(t))
            .map(|(_, l, _)| l)
    }

    /// The line of field `key`, or the block header.
    fn at(&self, kind: Kind, name: &str, key: &str) -> Loc {
        self.line(kind, name, &[key], |_| true)
            .unwrap_or_else(|| self.origin(kind, name).loc)
    }

    /// The first line of one of `keys` mentioning `token`.
    fn mention(&self, kind: Kind, name: &str, keys: &[&str], token: &str) -> Loc {
        self.line(kind, name, keys, |t| t.iter().any(|s| s == token))
            .unwrap_or_else(|| self.origin(kind, name).loc)
    }

    fn locate(&self, kind: Kind, name: &str, v: &Violation) -> Loc {
        let has = |x: &str| {
            let x = x.to_owned();
            move |t: &[String]| t.contains(&x)
        };
        let hit = match &v.subject {
            Subject::Transition { state, symbol } => self.line(kind, name, &["delta"], |t| {
                t.len() >= 2 && t[0] == *state && t[1] == *symbol
            }),
            Subject::State(s) => match v.invariant {
                Invariant::UnknownInitial => self.line(kind, name, &["initial"], has(s)),
                Invariant::UnknownFinal => self.line(kind, name, &["finals"], has(s)),
                _ => self.line(kind, name, &[], has(s)),
            },
            Subject::Symbol(s) => self.line(kind, name, &["inputs", "outputs", "delta"], has(s)),
            Subject::Neighborhood(n) => self
                .line(kind, name, &["rule table"], |t| t.len() > n.len() && t[..n.len()] == n[..])
                .or_else(|| self.line(kind, name, &["rule table", "rule expr"], |_| true)),
            Subject::Refinement { sa, state } => self.line(kind, name, &["gamma"], |t| {
                t.len() >= 2 && t[0] == *sa && t[1] == *state
            }),
            Subject::Member(m) => self.line(kind, name, &[], has(m)),
            Subject::Automaton => None,
        };
        hit.unwrap_or_else(|| self.origin(kind, name).loc)
    }

    fn report(&self, kind: Kind, name: &str, report: &Report, out: &mut Diags) {
        for v in report.iter() {
            let dk = match v.invariant {
                Invariant::UnknownMember | Invariant::UnknownRoot => DiagKind::Reference,
                _ => DiagKind::Semantic,
            };
            out.push(Diagnostic::new(dk, self.locate(kind, name, v), v.to_string()));
        }
    }

    fn dangling(&self, kind: Kind, name: &str, keys: &[&str], what: &str, target: &str) -> Diagnostic {
        Diagnostic::new(
            DiagKind::Reference,
            self.mention(kind, name, keys, target),
            format!("no {what} named `{target}`"),
        )
    }

    fn lattice(&self, kind: Kind, name: &str, key: &str, shape: &LatticeShape, cells: &[String], out: &mut Diags) -> Option<Lattice> {
        let l = shape.lattice_from_names(cells);
        if l.is_none() {
            out.push(Diagnostic::new(
                DiagKind::Semantic,
                self.at(kind, name, key),
                format!(
                    "`{}` is not a lattice of width {} over {{{}}}",
                    cells.join(" "),
                    shape.width,
                    shape.cell_states.join(", ")
                ),
            ));
        }
        l
    }

    /// Every located problem in the document; empty means valid.
    pub(crate) fn validate(&self) -> Diags {
        let mut out = Vec::new();
        for (n, sa) in &self.sas {
            self.report(Kind::Sa, n, &sa.validate(), &mut out);
        }
        for (n, ca) in &self.cas {
            self.report(Kind::Ca, n, &ca.validate(), &mut out);
        }
        for n in self.has.keys() {
            if let Err(mut ds) = self.build_ha(n) {
                out.append(&mut ds);
            }
        }
        for n in self.bindings.keys() {
            if let Err(mut ds) = self.build_binding(n) {
                out.append(&mut ds);
            }
        }
        for n in self.model_names() {
            if let Err(mut ds) = self.build_model(&n) {
                out.append(&mut ds);
            }
        }
        for (n, p) in &self.properties {
            if let PropertyKind::BadPrefix(sa) = &p.kind {
                if !self.sas.contains_key(sa) {
                    out.push(self.dangling(Kind::Property, n, &["bad_prefix"], "sa", sa));
                }
            }
        }
        for (n, s) in &self.signatures {
            match self.sas.get(&s.pattern) {
                None => out.push(self.dangling(Kind::Signature, n, &["pattern"], "sa", &s.pattern)),
                Some(p) if p.finals.is_empty() => out.push(Diagnostic::new(
                    DiagKind::Semantic,
                    self.at(Kind::Signature, n, "pattern"),
                    format!("pattern `{}` has no final state, so `{n}` can never match", s.pattern),
                )),
                Some(_) => {}
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn build_ha(&self, name: &str) -> Result<HierarchicalAutomaton, Diags> {
        let spec = &self.has[name];
        let mut out = Vec::new();
        let mut sas = Vec::new();
        for s in &spec.sas {
            match self.sas.get(s) {
                Some(sa) => sas.push(sa.clone()),
                None => out.push(self.dangling(Kind::Ha, name, &["sas"], "sa", s)),
            }
        }
        if !out.is_empty() {
            return Err(out);
        }
        let mut ha = HierarchicalAutomaton::new(name, sas, spec.root.clone());
        ha.gamma = spec.gamma.clone();
        // Member automata report their own problems in their own blocks.
        let own = Report {
            violations: ha.validate().violations.into_iter().filter(|v| v.owner == name).collect(),
        };
        self.report(Kind::Ha, name, &own, &mut out);
        if out.is_empty() {
            Ok(ha)
        } else {
            Err(out)
        }
    }

    pub fn build_binding(&self, name: &str) -> Result<Binding, Diags> {
        let spec: &BindingSpec = &self.bindings[name];
        let k = Kind::Binding;
        let Some(ca) = self.cas.get(&spec.ca) else {
            return Err(vec![self.dangling(k, name, &["ca"], "ca or pca", &spec.ca)]);
        };
        let shape = ca.shape();
        let mut out = Vec::new();
        let mut cell_map = BTreeMap::new();
        for (q, unit) in &spec.map {
            let Some(i) = shape.state_index(q) else {
                out.push(Diagnostic::new(
                    DiagKind::Semantic,
                    self.mention(k, name, &["map"], q),
                    format!("`{q}` is not a cell state of `{}`", spec.ca),
                ));
                continue;
            };
            let u = match unit {
                UnitSpec::Sa(x) if self.sas.contains_key(x) => Unit::PlainSa(x.clone()),
                UnitSpec::Ha(x) if self.has.contains_key(x) => Unit::HaUnit {
                    ha: x.clone(),
                    path: Vec::new(),
                },
                UnitSpec::Nested(x) if self.bindings.contains_key(x) => Unit::Nested(x.clone()),
                UnitSpec::Sa(x) => {
                    out.push(self.dangling(k, name, &["map"], "sa", x));
                    continue;
                }
                UnitSpec::Ha(x) => {
                    out.push(self.dangling(k, name, &["map"], "ha", x));
                    continue;
                }
                UnitSpec::Nested(x) => {
                    out.push(self.dangling(k, name, &["map"], "binding", x));
                    continue;
                }
            };
            cell_map.insert(i, u);
        }
        let readout = match spec.readout_cell {
            Some(_) if !spec.readout.is_empty() || spec.readout_default.is_some() => {
                out.push(Diagnostic::new(
                    DiagKind::Semantic,
                    self.at(k, name, "readout_cell"),
                    "readout_cell excludes readout rows and readout_default",
                ));
                None
            }
            Some(i) => Some(Readout::Cell(i)),
            None if spec.readout.is_empty() && spec.readout_default.is_none() => None,
            None => {
                let mut entries = BTreeMap::new();
                for (cells, sym) in &spec.readout {
                    match shape.lattice_from_names(cells) {
                        Some(l) => {
                            entries.insert(l, sym.clone());
                        }
                        None => out.push(Diagnostic::new(
                            DiagKind::Semantic,
                            self.line(k, name, &["readout"], |t| t.len() > cells.len() && t[..cells.len()] == cells[..])
                                .unwrap_or_else(|| self.at(k, name, "readout")),
                            format!("`{}` is not a lattice of `{}`", cells.join(" "), spec.ca),
                        )),
                    }
                }
                Some(Readout::Table {
                    entries,
                    default: spec.readout_default.clone(),
                })
            }
        };
        if let Some(o) = &spec.outer {
            if !self.sas.contains_key(o) {
                out.push(self.dangling(k, name, &["outer"], "sa", o));
            }
        }
        let initial = match &spec.init {
            Some(cells) => self.lattice(k, name, "init", shape, cells, &mut out),
            None => None,
        };
        if !out.is_empty() {
            return Err(out);
        }
        Ok(Binding {
            name: name.to_owned(),
            mode: spec.mode,
            ca: spec.ca.clone(),
            cell_map,
            readout,
            outer_sa: spec.outer.clone(),
            t_max: spec.t_max.unwrap_or(DEFAULT_RUN_CAP),
            initial,
            voter: spec.voter.clone(),
        })
    }

    fn build_ma(&self, name: &str) -> Result<(MimicAutomaton, MimicConfiguration, Vec<MacroInput>, Vec<MacroInput>), Diags> {
        let spec = &self.mas[name];
        let k = Kind::Ma;
        if !self.bindings.contains_key(&spec.root_binding) {
            return Err(vec![self.dangling(k, name, &["root_binding"], "binding", &spec.root_binding)]);
        }
        let mut ma = MimicAutomaton::new(name, spec.root_binding.clone());
        ma.max_depth = spec.max_depth.unwrap_or(DEFAULT_MAX_DEPTH);
        let mut out = Vec::new();
        let mut seen = BTreeSet::from([spec.root_binding.clone()]);
        let mut queue = VecDeque::from([spec.root_binding.clone()]);
        let (mut sas, mut has, mut cas) = (BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        while let Some(b) = queue.pop_front() {
            let binding = match self.build_binding(&b) {
                Ok(x) => x,
                Err(mut ds) => {
                    out.append(&mut ds);
                    continue;
                }
            };
            cas.insert(binding.ca.clone());
            sas.extend(binding.outer_sa.clone());
            for u in binding.cell_map.values() {
                match u {
                    Unit::PlainSa(s) => {
                        sas.insert(s.clone());
                    }
                    Unit::HaUnit { ha, .. } => {
                        has.insert(ha.clone());
                    }
                    Unit::Nested(n) => {
                        if seen.insert(n.clone()) {
                            queue.push_back(n.clone());
                        }
                    }
                }
            }
            ma.bindings.push(binding);
        }
        for h in &has {
            match self.build_ha(h) {
                Ok(x) => ma.ha_set.push(x),
                Err(mut ds) => out.append(&mut ds),
            }
        }
        ma.sa_set = sas.iter().map(|s| self.sas[s].clone()).collect();
        ma.ca_set = cas.iter().map(|c| self.cas[c].clone()).collect();
        if !out.is_empty() {
            return Err(out);
        }
        for v in ma.check_components().composition.iter() {
            let (kind, owner) = if self.bindings.contains_key(&v.owner) {
                (Kind::Binding, v.owner.as_str())
            } else {
                (k, name)
            };
            let dk = match v.invariant {
                Invariant::UnknownMember | Invariant::UnknownRoot => DiagKind::Reference,
                _ => DiagKind::Semantic,
            };
            out.push(Diagnostic::new(dk, self.locate(kind, owner, v), v.to_string()));
        }
        if !out.is_empty() {
            return Err(out);
        }
        let root = ma.root().expect("root checked").clone();
        let shape = self.cas[&root.ca].shape().clone();
        let start = match &spec.init {
            Some(cells) => {
                let Some(l) = self.lattice(k, name, "init", &shape, cells, &mut out) else {
                    return Err(out);
                };
                ma.initial(l)
            }
            None => ma.default_initial(),
        };
        let start = start.map_err(|e| {
            let hint = if spec.init.is_none() { " (give `init:` here or in the root binding)" } else { "" };
            vec![Diagnostic::new(DiagKind::Semantic, self.origin(k, name).loc, format!("{e}{hint}"))]
        })?;
        let (universe, policy) = match root.mode {
            BindingMode::SaFromCa => {
                if !spec.inputs.universe_seed.is_empty() || !spec.inputs.policy_seed.is_empty() {
                    out.push(Diagnostic::new(
                        DiagKind::Semantic,
                        self.line(k, name, &["universe_seed", "policy_seed"], |_| true)
                            .unwrap_or_else(|| self.origin(k, name).loc),
                        "seeds only drive lattice-driven (ca_from_sa) roots",
                    ));
                    return Err(out);
                }
                let mut alphabet = BTreeSet::new();
                for u in root.cell_map.values() {
                    match u {
                        Unit::PlainSa(s) => alphabet.extend(ma.sa(s).map(|a| a.inputs.clone()).unwrap_or_default()),
                        Unit::HaUnit { ha, .. } => {
                            if let Ok(h) = ma.ha(ha) {
                                alphabet.extend(h.input_alphabet().into_iter().map(str::to_owned));
                            }
                        }
                        Unit::Nested(_) => {}
                    }
                }
                blocks(&spec.inputs, alphabet)
            }
            BindingMode::CaFromSa => {
                if !spec.inputs.universe.is_empty() || !spec.inputs.policy.is_empty() {
                    out.push(Diagnostic::new(
                        DiagKind::Semantic,
                        self.line(k, name, &["universe", "policy"], |_| true)
                            .unwrap_or_else(|| self.origin(k, name).loc),
                        "a lattice-driven root takes `universe_seed:` and `policy_seed:` lines",
                    ));
                    return Err(out);
                }
                let mut read = |key: &str, rows: &[Vec<String>]| -> Vec<MacroInput> {
                    rows.iter()
                        .filter_map(|r| self.lattice(k, name, key, &shape, r, &mut out))
                        .map(MacroInput::Seed)
                        .collect()
                };
                let mut universe = read("universe_seed", &spec.inputs.universe_seed);
                let policy = read("policy_seed", &spec.inputs.policy_seed);
                if !out.is_empty() {
                    return Err(out);
                }
                if universe.is_empty() {
                    let count = (shape.cell_states.len() as f64).powi(shape.width as i32);
                    if count > DEFAULT_SUCCESSOR_CAP as f64 {
                        return Err(vec![Diagnostic::new(
                            DiagKind::Semantic,
                            self.origin(k, name).loc,
                            format!("{count} seed lattices are too many to explore by default; list `universe_seed:` lines"),
                        )]);
                    }
                    universe = shape.all_lattices().map(MacroInput::Seed).collect();
                }
                let policy = if policy.is_empty() { universe.clone() } else { policy };
                (universe, policy)
            }
        };
        Ok((ma, start, universe, policy))
    }

    fn build_dhr_structure(&self, name: &str) -> Result<DhrStructure, Diags> {
        let spec = &self.dhrs[name];
        let k = Kind::Dhr;
        let mut out = Vec::new();
        let mut executors = Vec::new();
        for e in &spec.executors {
            match self.sas.get(e) {
                Some(sa) => executors.push(sa.clone()),
                None => out.push(self.dangling(k, name, &["executors"], "sa", e)),
            }
        }
        let scheduler: Option<&AnyCa> = self.cas.get(&spec.scheduler);
        if scheduler.is_none() {
            out.push(self.dangling(k, name, &["scheduler"], "ca or pca", &spec.scheduler));
        }
        for f in spec.faults.values() {
            if !self.sas.contains_key(f) {
                out.push(self.dangling(k, name, &["fault"], "sa", f));
            }
        }
        let (Some(scheduler), true) = (scheduler, out.is_empty()) else {
            return Err(out);
        };
        let Some(lattice) = self.lattice(k, name, "init", scheduler.shape(), &spec.init, &mut out) else {
            return Err(out);
        };
        let mut d = DhrStructure::new(name, executors, scheduler.clone(), lattice);
        if let Some(v) = &spec.voter {
            d = d.with_voter(v.clone());
        }
        let semantic = |loc: Loc, e: &dyn std::fmt::Display| vec![Diagnostic::new(DiagKind::Semantic, loc, e.to_string())];
        d.check().map_err(|e| semantic(self.origin(k, name).loc, &e))?;
        for (slot, f) in &spec.faults {
            let loc = self
                .line(k, name, &["fault"], |t| t.first() == Some(&slot.to_string()))
                .unwrap_or_else(|| self.origin(k, name).loc);
            d = d.inject_fault(*slot, self.sas[f].clone()).map_err(|e| semantic(loc, &e))?;
        }
        Ok(d)
    }

    fn build_model(&self, name: &str) -> Result<Model, Diags> {
        if self.mas.contains_key(name) {
            let (ma, initial, universe, policy) = self.build_ma(name)?;
            return Ok(Model {
                name: name.to_owned(),
                ma,
                initial,
                universe,
                policy,
                dhr: None,
                serial: None,
            });
        }
        let (ma, inputs, dhr, serial, alphabet) = if self.dhrs.contains_key(name) {
            let d = self.build_dhr_structure(name)?;
            let ma = build_dhr(&d)
                .map_err(|e| vec![Diagnostic::new(DiagKind::Semantic, self.origin(Kind::Dhr, name).loc, e.to_string())])?;
            let alphabet: BTreeSet<String> = d.input_alphabet().into_iter().map(str::to_owned).collect();
            (ma, &self.dhrs[name].inputs, Some(d), None, alphabet)
        } else {
            let spec = &self.serials[name];
            let k = Kind::SerialDhr;
            let mut out = Vec::new();
            let mut stages = Vec::new();
            for s in &spec.stages {
                if !self.dhrs.contains_key(s) {
                    out.push(self.dangling(k, name, &["stages"], "dhr", s));
                    continue;
                }
                match self.build_dhr_structure(s) {
                    Ok(d) => stages.push(d),
                    Err(mut ds) => out.append(&mut ds),
                }
            }
            if !out.is_empty() {
                return Err(out);
            }
            let s = SerialDhr::new(name, stages);
            let ma = compose_serial(&s)
                .map_err(|e| vec![Diagnostic::new(DiagKind::Semantic, self.at(k, name, "stages"), e.to_string())])?;
            let alphabet = s.stages[0].input_alphabet().into_iter().map(str::to_owned).collect();
            (ma, &spec.inputs, None, Some(s), alphabet)
        };
        let initial = ma.default_initial().map_err(|e| {
            vec![Diagnostic::new(DiagKind::Semantic, Loc::default(), e.to_string())]
        })?;
        let (universe, policy) = blocks(inputs, alphabet);
        Ok(Model {
            name: name.to_owned(),
            ma,
            initial,
            universe,
            policy,
            dhr,
            serial,
        })
    }

    /// The runnable machine named `name`: an `ma`, `dhr` or `serial_dhr`
    /// block.
    pub fn model(&self, name: &str) -> Result<Model, FormatError> {
        if !self.model_names().iter().any(|n| n == name) {
            return Err(FormatError::UnknownModel(name.to_owned()));
        }
        self.build_model(name).map_err(FormatError::Diagnostics)
    }

    pub fn property(&self, name: &str) -> Result<&PropertySpec, FormatError> {
        self.properties
            .get(name)
            .ok_or_else(|| FormatError::UnknownProperty(name.to_owned()))
    }

    /// All `signature` blocks with their pattern automata.
    pub fn signatures(&self) -> Result<Vec<Signature>, DetectError> {
        let mut out = Vec::new();
        for (id, s) in &self.signatures {
            let Some(pattern) = self.sas.get(&s.pattern) else {
                return Err(DetectError::Parse(vec![self.dangling(
                    Kind::Signature,
                    id,
                    &["pattern"],
                    "sa",
                    &s.pattern,
                )]));
            };
            let sig = Signature {
                id: id.clone(),
                description: s.description.clone(),
                pattern: pattern.clone(),
                severity: s.severity,
            };
            sig.check()?;
            out.push(sig);
        }
        Ok(out)
    }
}

/// Block universe and policy; an empty universe means every single
/// symbol of `alphabet`, an empty policy means the universe.
fn blocks(inputs: &InputSpec, alphabet: BTreeSet<String>) -> (Vec<MacroInput>, Vec<MacroInput>) {
    let universe: Vec<MacroInput> = if inputs.universe.is_empty() {
        alphabet.into_iter().map(|s| MacroInput::Block(vec![s])).collect()
    } else {
        inputs.universe.iter().cloned().map(MacroInput::Block).collect()
    };
    let policy = if inputs.policy.is_empty() {
        universe.clone()
    } else {
        inputs.policy.iter().cloned().map(MacroInput::Block).collect()
    };
    (universe, policy)
}
