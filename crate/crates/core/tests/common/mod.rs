//! Random machine generation and a naive reference interpreter for
//! composite machines, shared by the integration tests.
#![allow(dead_code)]

pub mod docs;

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use mimic_core::automata::{
    Boundary, BuiltinRule, CellularAutomaton, Lattice, LatticeShape, SequentialAutomaton,
};
use mimic_core::compose::{
    Binding, BindingState, MacroInput, MimicAutomaton, Observed, Readout, Unit, UnitState,
};

pub const SYMS: [&str; 2] = ["a", "b"];
pub const OUTS: [&str; 2] = ["x", "y"];

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn model_path(file: &str) -> PathBuf {
    models_dir().join(file)
}

/// Every `.ma` file of the example corpus, sorted.
pub fn corpus() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(models_dir())
        .expect("models directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ma"))
        .collect();
    files.sort();
    files
}

/// Sequential automaton with states `p0..`, initial `p0`.
#[derive(Debug, Clone)]
pub struct RefSa {
    pub states: usize,
    pub inputs: Vec<String>,
    pub delta: HashMap<(usize, String), (usize, Option<String>)>,
    /// Pure acceptor: empty output alphabet, every transition silent.
    pub acceptor: bool,
}

impl RefSa {
    pub fn to_sa(&self, name: &str) -> SequentialAutomaton {
        let states: Vec<String> = (0..self.states).map(|i| format!("p{i}")).collect();
        let outputs = if self.acceptor { Vec::new() } else { OUTS.map(String::from).to_vec() };
        let mut sa = SequentialAutomaton::new(name, states, "p0".to_owned(), self.inputs.clone(), outputs);
        let mut partial = false;
        for s in 0..self.states {
            for x in &self.inputs {
                match self.delta.get(&(s, x.clone())) {
                    Some((t, o)) => sa = sa.with_transition(format!("p{s}"), x.clone(), format!("p{t}"), o.as_deref()),
                    None => partial = true,
                }
            }
        }
        sa.with_partial(partial)
    }
}

#[derive(Debug, Clone)]
pub enum RefRule {
    Builtin(BuiltinRule),
    Table(HashMap<Vec<usize>, usize>),
}

#[derive(Debug, Clone)]
pub struct RefCa {
    pub states: usize,
    pub width: usize,
    pub radius: usize,
    pub fixed: Option<usize>,
    pub rule: RefRule,
}

impl RefCa {
    fn neighborhood(&self, cells: &[usize], i: usize) -> Vec<usize> {
        let n = cells.len() as i64;
        let r = self.radius as i64;
        (i as i64 - r..=i as i64 + r)
            .map(|j| {
                if j >= 0 && j < n {
                    cells[j as usize]
                } else if let Some(q) = self.fixed {
                    q
                } else {
                    cells[(((j % n) + n) % n) as usize]
                }
            })
            .collect()
    }

    fn apply(&self, nb: &[usize]) -> usize {
        let c = self.radius;
        match &self.rule {
            RefRule::Table(t) => t[nb],
            RefRule::Builtin(BuiltinRule::Identity) => nb[c],
            RefRule::Builtin(BuiltinRule::Xor) => {
                let mut s = 0;
                for (k, &v) in nb.iter().enumerate() {
                    if k != c {
                        s += v;
                    }
                }
                s % self.states
            }
            RefRule::Builtin(BuiltinRule::Majority) => {
                let count = |q: usize| nb.iter().filter(|&&v| v == q).count();
                let best = (0..self.states).map(count).max().unwrap();
                if count(nb[c]) == best {
                    nb[c]
                } else {
                    (0..self.states).find(|&q| count(q) == best).unwrap()
                }
            }
        }
    }

    pub fn step(&self, cells: &[usize]) -> Vec<usize> {
        (0..cells.len()).map(|i| self.apply(&self.neighborhood(cells, i))).collect()
    }

    pub fn shape(&self) -> LatticeShape {
        let names: Vec<String> = (0..self.states).map(|q| q.to_string()).collect();
        let boundary = self.fixed.map_or(Boundary::Periodic, Boundary::Fixed);
        LatticeShape::new(names, self.width, self.radius, boundary)
    }

    pub fn to_ca(&self, name: &str) -> CellularAutomaton {
        match &self.rule {
            RefRule::Builtin(b) => CellularAutomaton::builtin(name, self.shape(), *b),
            RefRule::Table(t) => CellularAutomaton::from_fn(name, self.shape(), |nb| t[nb]),
        }
    }

    pub fn all_lattices(&self) -> Vec<Vec<usize>> {
        all_words(self.states, self.width)
    }
}

/// Every sequence of `len` values below `base`.
pub fn all_words(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..base).map(move |q| {
                    let mut v = w.clone();
                    v.push(q);
                    v
                })
            })
            .collect();
    }
    out
}

/// Every sequence of length `0..=max_len` over `0..base`.
pub fn all_schedules(base: usize, max_len: usize) -> Vec<Vec<usize>> {
    (0..=max_len).flat_map(|l| all_words(base, l)).collect()
}

#[derive(Debug, Clone)]
pub enum RefUnit {
    Sa(usize),
    Nested(usize),
}

#[derive(Debug, Clone)]
pub struct RefBinding {
    pub lattice_driven: bool,
    pub ca: usize,
    pub map: Vec<RefUnit>,
    pub init: Vec<usize>,
    pub readout: HashMap<Vec<usize>, String>,
    pub outer: usize,
    pub t_max: usize,
}

/// A generated machine; binding 0 is the root.
#[derive(Debug, Clone)]
pub struct RefMa {
    pub sas: Vec<RefSa>,
    pub cas: Vec<RefCa>,
    pub bindings: Vec<RefBinding>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefUnitState {
    Sa(usize),
    Nested(Box<RefState>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefState {
    pub lattice: Vec<usize>,
    pub units: Vec<RefUnitState>,
    pub outer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefOut {
    Cells(Vec<Vec<String>>),
    Word(Vec<String>),
}

impl RefOut {
    fn flat(self) -> Vec<String> {
        match self {
            RefOut::Cells(c) => c.concat(),
            RefOut::Word(w) => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefInput {
    Block(Vec<String>),
    Seed(Vec<usize>),
}

impl RefMa {
    pub fn unit_init(&self, b: usize, q: usize) -> RefUnitState {
        match self.bindings[b].map[q] {
            RefUnit::Sa(_) => RefUnitState::Sa(0),
            RefUnit::Nested(n) => RefUnitState::Nested(Box::new(self.init(n))),
        }
    }

    pub fn init(&self, b: usize) -> RefState {
        let bd = &self.bindings[b];
        RefState {
            lattice: bd.init.clone(),
            units: bd.init.iter().map(|&q| self.unit_init(b, q)).collect(),
            outer: bd.lattice_driven.then_some(0),
        }
    }

    /// Runs one sequential automaton over a block. A foreign symbol is an
    /// error; a missing transition stops the run where it is.
    fn run_sa(&self, k: usize, mut p: usize, block: &[String]) -> Result<(usize, Vec<String>), ()> {
        let sa = &self.sas[k];
        if block.iter().any(|x| !sa.inputs.contains(x)) {
            return Err(());
        }
        let mut out = Vec::new();
        for x in block {
            match sa.delta.get(&(p, x.clone())) {
                Some((t, o)) => {
                    p = *t;
                    out.extend(o.clone());
                }
                None => break,
            }
        }
        Ok((p, out))
    }

    pub fn tick(&self, b: usize, st: &RefState, input: &RefInput) -> Result<(RefState, RefOut), ()> {
        let bd = &self.bindings[b];
        let ca = &self.cas[bd.ca];
        match (bd.lattice_driven, input) {
            (false, RefInput::Block(block)) => {
                let mut units = Vec::new();
                let mut outs = Vec::new();
                for (i, unit) in st.units.iter().enumerate() {
                    match (&bd.map[st.lattice[i]], unit) {
                        (RefUnit::Sa(k), RefUnitState::Sa(p)) => {
                            let (p, o) = self.run_sa(*k, *p, block)?;
                            units.push(RefUnitState::Sa(p));
                            outs.push(o);
                        }
                        (RefUnit::Nested(n), RefUnitState::Nested(inner)) => {
                            let input = if self.bindings[*n].lattice_driven {
                                RefInput::Seed(inner.lattice.clone())
                            } else {
                                RefInput::Block(block.clone())
                            };
                            let (s, o) = self.tick(*n, inner, &input)?;
                            units.push(RefUnitState::Nested(Box::new(s)));
                            outs.push(o.flat());
                        }
                        _ => panic!("unit does not match its cell state"),
                    }
                }
                let next = ca.step(&st.lattice);
                for i in 0..next.len() {
                    if next[i] != st.lattice[i] {
                        units[i] = self.unit_init(b, next[i]);
                    }
                }
                Ok((RefState { lattice: next, units, outer: None }, RefOut::Cells(outs)))
            }
            (true, RefInput::Seed(seed)) => {
                let mut cur = seed.clone();
                let mut steps = 0;
                while steps < bd.t_max {
                    let next = ca.step(&cur);
                    if next == cur {
                        break;
                    }
                    cur = next;
                    steps += 1;
                }
                let sym = &bd.readout[&cur];
                let outer = &self.sas[bd.outer];
                if !outer.inputs.contains(sym) {
                    return Err(());
                }
                let (p, o) = outer.delta.get(&(st.outer.unwrap(), sym.clone())).cloned().ok_or(())?;
                let mut units = st.units.clone();
                for i in 0..cur.len() {
                    if cur[i] != st.lattice[i] {
                        units[i] = self.unit_init(b, cur[i]);
                    }
                }
                Ok((RefState { lattice: cur, units, outer: Some(p) }, RefOut::Word(o.into_iter().collect())))
            }
            _ => Err(()),
        }
    }

    /// Runs the root from its initial state.
    pub fn run(&self, schedule: &[RefInput]) -> Result<(RefState, Vec<RefOut>), ()> {
        let mut st = self.init(0);
        let mut outs = Vec::new();
        for input in schedule {
            let (next, o) = self.tick(0, &st, input)?;
            st = next;
            outs.push(o);
        }
        Ok((st, outs))
    }

    pub fn to_ma(&self) -> MimicAutomaton {
        let mut ma = MimicAutomaton::new("generated", "b0");
        for (i, sa) in self.sas.iter().enumerate() {
            ma = ma.with_sa(sa.to_sa(&format!("s{i}")));
        }
        for (i, ca) in self.cas.iter().enumerate() {
            ma = ma.with_ca(ca.to_ca(&format!("c{i}")));
        }
        for (i, b) in self.bindings.iter().enumerate() {
            let name = format!("b{i}");
            let ca = format!("c{}", b.ca);
            let mut binding = if b.lattice_driven {
                let entries: BTreeMap<Lattice, String> = b
                    .readout
                    .iter()
                    .map(|(l, s)| (Lattice::new(l.clone()), s.clone()))
                    .collect();
                Binding::ca_from_sa(&name, ca, format!("s{}", b.outer), Readout::Table { entries, default: None }, b.t_max)
            } else {
                Binding::sa_from_ca(&name, ca)
            };
            for (q, u) in b.map.iter().enumerate() {
                binding = binding.host(
                    q,
                    match u {
                        RefUnit::Sa(k) => Unit::PlainSa(format!("s{k}")),
                        RefUnit::Nested(n) => Unit::Nested(format!("b{n}")),
                    },
                );
            }
            ma = ma.with_binding(binding.with_initial(Lattice::new(b.init.clone())));
        }
        ma
    }

    /// Reads a library binding state back into reference terms.
    pub fn lift(&self, st: &BindingState) -> RefState {
        let idx = |s: &str| s.strip_prefix('p').and_then(|n| n.parse().ok()).expect("state name");
        RefState {
            lattice: st.lattice.cells().to_vec(),
            units: st
                .units
                .iter()
                .map(|u| match u {
                    UnitState::Sa(s) => RefUnitState::Sa(idx(s)),
                    UnitState::Nested(b) => RefUnitState::Nested(Box::new(self.lift(b))),
                    UnitState::Ha(_) => panic!("generated machines host no hierarchies"),
                })
                .collect(),
            outer: st.outer.as_deref().map(idx),
        }
    }

    pub fn root_lattice_driven(&self) -> bool {
        self.bindings[0].lattice_driven
    }
}

pub fn observed(o: &Observed) -> RefOut {
    match o {
        Observed::Cells(c) => RefOut::Cells(c.clone()),
        Observed::Word(w) => RefOut::Word(w.clone()),
        Observed::Abstain => panic!("generated machines have no voters"),
    }
}

pub fn to_macro(i: &RefInput) -> MacroInput {
    match i {
        RefInput::Block(w) => MacroInput::Block(w.clone()),
        RefInput::Seed(l) => MacroInput::Seed(Lattice::new(l.clone())),
    }
}

pub fn gen_sa<R: Rng>(rng: &mut R) -> RefSa {
    let states = rng.gen_range(1..=4);
    let inputs: Vec<String> = if rng.gen_bool(0.1) {
        vec!["a".into()]
    } else {
        SYMS.map(String::from).to_vec()
    };
    let acceptor = rng.gen_bool(0.15);
    let mut delta = HashMap::new();
    for s in 0..states {
        for x in &inputs {
            if rng.gen_bool(0.9) {
                let out = (!acceptor).then(|| OUTS.choose(rng).unwrap().to_string());
                delta.insert((s, x.clone()), (rng.gen_range(0..states), out));
            }
        }
    }
    RefSa { states, inputs, delta, acceptor }
}

pub fn gen_ca<R: Rng>(rng: &mut R) -> RefCa {
    let states = rng.gen_range(1..=3);
    let width = rng.gen_range(1..=4);
    let radius = if rng.gen_bool(0.85) { 1 } else { 2 };
    let fixed = rng.gen_bool(0.3).then(|| rng.gen_range(0..states));
    let rule = if rng.gen_bool(0.3) {
        RefRule::Builtin(*BuiltinRule::ALL.choose(rng).unwrap())
    } else {
        RefRule::Table(
            all_words(states, 2 * radius + 1)
                .into_iter()
                .map(|nb| (nb, rng.gen_range(0..states)))
                .collect(),
        )
    };
    RefCa { states, width, radius, fixed, rule }
}

fn gen_binding<R: Rng>(rng: &mut R, ma: &mut RefMa, depth: usize) -> usize {
    let me = ma.bindings.len();
    ma.bindings.push(RefBinding {
        lattice_driven: false,
        ca: 0,
        map: Vec::new(),
        init: Vec::new(),
        readout: HashMap::new(),
        outer: 0,
        t_max: 0,
    });
    let lattice_driven = rng.gen_bool(if depth == 1 { 0.25 } else { 0.5 });
    let ca = gen_ca(rng);
    let mut map = Vec::new();
    for _ in 0..ca.states {
        if depth < 2 && rng.gen_bool(0.3) {
            map.push(RefUnit::Nested(gen_binding(rng, ma, depth + 1)));
        } else {
            map.push(RefUnit::Sa(rng.gen_range(0..ma.sas.len())));
        }
    }
    let init = (0..ca.width).map(|_| rng.gen_range(0..ca.states)).collect();
    let outer = rng.gen_range(0..ma.sas.len());
    let readout = if lattice_driven {
        let accepted = ma.sas[outer].inputs.clone();
        ca.all_lattices()
            .into_iter()
            .map(|l| (l, accepted.choose(rng).unwrap().clone()))
            .collect()
    } else {
        HashMap::new()
    };
    ma.cas.push(ca);
    ma.bindings[me] = RefBinding {
        lattice_driven,
        ca: ma.cas.len() - 1,
        map,
        init,
        readout,
        outer,
        t_max: rng.gen_range(1..=4),
    };
    me
}

/// A machine of width at most 4, at most 3 cell states, sequential
/// automata of at most 4 states and nesting depth at most 2, with a
/// two-element input universe for its root.
pub fn gen_machine<R: Rng>(rng: &mut R) -> (RefMa, Vec<RefInput>) {
    let mut ma = RefMa {
        sas: (0..rng.gen_range(1..=3)).map(|_| gen_sa(rng)).collect(),
        cas: Vec::new(),
        bindings: Vec::new(),
    };
    gen_binding(rng, &mut ma, 1);
    let root_ca = &ma.cas[ma.bindings[0].ca];
    let universe = (0..2)
        .map(|_| {
            if ma.bindings[0].lattice_driven {
                RefInput::Seed((0..root_ca.width).map(|_| rng.gen_range(0..root_ca.states)).collect())
            } else {
                let len = rng.gen_range(1..=2);
                RefInput::Block((0..len).map(|_| SYMS.choose(rng).unwrap().to_string()).collect())
            }
        })
        .collect();
    (ma, universe)
}

/// Cell-level atoms with a reference evaluation.
#[derive(Debug, Clone)]
pub enum RefAtom {
    Cell(usize, usize),
    Has(usize),
    UnitIn(usize, usize),
}

impl RefAtom {
    pub fn text(&self) -> String {
        match self {
            RefAtom::Cell(i, q) => format!("cell{i}({q})"),
            RefAtom::Has(q) => format!("lattice_has({q})"),
            RefAtom::UnitIn(i, p) => format!("cell{i}_state(p{p})"),
        }
    }

    pub fn eval(&self, st: &RefState) -> bool {
        match *self {
            RefAtom::Cell(i, q) => st.lattice[i] == q,
            RefAtom::Has(q) => st.lattice.contains(&q),
            RefAtom::UnitIn(i, p) => match &st.units[i] {
                RefUnitState::Sa(x) => *x == p,
                RefUnitState::Nested(b) => b.outer == Some(p),
            },
        }
    }
}

/// A random atom that names something in the root of `ma`.
pub fn gen_atom<R: Rng>(rng: &mut R, ma: &RefMa) -> RefAtom {
    let ca = &ma.cas[ma.bindings[0].ca];
    let max_states = ma.sas.iter().map(|s| s.states).max().unwrap();
    match rng.gen_range(0..3) {
        0 => RefAtom::Cell(rng.gen_range(0..ca.width), rng.gen_range(0..ca.states)),
        1 => RefAtom::Has(rng.gen_range(0..ca.states)),
        _ => RefAtom::UnitIn(rng.gen_range(0..ca.width), rng.gen_range(0..max_states)),
    }
}
