//! Dynamical heterogeneous redundant (DHR) structures as composite
//! machines.
//!
//! Each cell of the scheduler lattice is a redundant slot; its cell state
//! selects which heterogeneous executor runs there. All slots receive the
//! same input block, the lattice stays fixed while they run, and a voter
//! arbitrates their output words. The scheduler then takes one step,
//! which may swap executors in some slots.

pub mod fixtures;
mod serial;
pub mod vote;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{
    AnyCa, CellularAutomaton, Lattice, LatticeShape, LocalRule, ProbabilisticCellularAutomaton,
    Report, SequentialAutomaton, Validate,
};
use crate::compose::{
    Binding, Chance, MacroInput, MaError, MimicAutomaton, MimicConfiguration, Observed, Sampler,
    TickRecord, Unit,
};
use crate::word::Word;

pub use serial::{compose_serial, SerialDhr};
pub use vote::{Vote, VoterKind, VoterPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DhrError {
    #[error("`{name}`: executors disagree on the {which} alphabet")]
    Alphabet { name: String, which: &'static str },
    #[error("`{name}`: {executors} executors for {states} scheduler cell states")]
    ExecutorCount {
        name: String,
        executors: usize,
        states: usize,
    },
    #[error("`{name}`: slot {slot} out of range for width {width}")]
    SlotOutOfRange {
        name: String,
        slot: usize,
        width: usize,
    },
    #[error("`{name}`: {detail}")]
    Shape { name: String, detail: String },
    #[error("two different automata are both named `{0}`")]
    NameClash(String),
    #[error("a serial composition needs at least two stages, got {0}")]
    TooFewStages(usize),
    #[error("stage `{from}` emits `{symbol}`, which stage `{to}` does not accept")]
    Chaining {
        from: String,
        to: String,
        symbol: String,
    },
    #[error("invalid component: {0:?}")]
    Invalid(Report),
    #[error("machine has no voter; not a DHR model")]
    NoVoter,
    #[error(transparent)]
    Ma(#[from] MaError),
}

/// A redundant structure: `width` slots, each running the executor its
/// scheduler cell state selects.
#[derive(Debug, Clone, PartialEq)]
pub struct DhrStructure {
    pub name: String,
    /// Indexed by scheduler cell state.
    pub executors: Vec<SequentialAutomaton>,
    pub scheduler: AnyCa,
    pub width: usize,
    pub voter: VoterPolicy,
    pub initial_lattice: Lattice,
    /// Per-slot executor overrides, see [`DhrStructure::inject_fault`].
    pub faults: Vec<(usize, SequentialAutomaton)>,
}

impl DhrStructure {
    /// Majority voting with the default quorum; the width comes from the
    /// scheduler.
    pub fn new(
        name: impl Into<String>,
        executors: Vec<SequentialAutomaton>,
        scheduler: impl Into<AnyCa>,
        initial_lattice: Lattice,
    ) -> Self {
        let scheduler = scheduler.into();
        let width = scheduler.shape().width;
        DhrStructure {
            name: name.into(),
            executors,
            scheduler,
            width,
            voter: VoterPolicy::majority(width),
            initial_lattice,
            faults: Vec::new(),
        }
    }

    pub fn with_voter(mut self, voter: VoterPolicy) -> Self {
        self.voter = voter;
        self
    }

    pub fn input_alphabet(&self) -> BTreeSet<&str> {
        self.executors
            .first()
            .map(|e| e.inputs.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn output_alphabet(&self) -> BTreeSet<&str> {
        self.executors
            .first()
            .map(|e| e.outputs.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn check(&self) -> Result<(), DhrError> {
        let name = &self.name;
        let mut report = Report::default();
        for e in self.executors.iter().chain(self.faults.iter().map(|(_, f)| f)) {
            report.extend(e.validate());
        }
        report.extend(self.scheduler.validate());
        if !report.is_valid() {
            return Err(DhrError::Invalid(report));
        }
        let states = self.scheduler.shape().cell_states.len();
        if self.executors.len() != states {
            return Err(DhrError::ExecutorCount {
                name: name.clone(),
                executors: self.executors.len(),
                states,
            });
        }
        let ins = self.input_alphabet();
        let outs = self.output_alphabet();
        for e in self.executors.iter().chain(self.faults.iter().map(|(_, f)| f)) {
            if e.inputs.iter().map(String::as_str).collect::<BTreeSet<_>>() != ins {
                return Err(DhrError::Alphabet { name: name.clone(), which: "input" });
            }
            if e.outputs.iter().map(String::as_str).collect::<BTreeSet<_>>() != outs {
                return Err(DhrError::Alphabet { name: name.clone(), which: "output" });
            }
        }
        if self.width != self.scheduler.shape().width {
            return Err(DhrError::Shape {
                name: name.clone(),
                detail: format!("width {} but scheduler width {}", self.width, self.scheduler.shape().width),
            });
        }
        if !self.voter.is_valid_for(self.width) {
            return Err(DhrError::Shape {
                name: name.clone(),
                detail: format!("quorum {} outside 1..={}", self.voter.quorum, self.width),
            });
        }
        self.scheduler
            .shape()
            .check_lattice(&self.initial_lattice)
            .map_err(|e| DhrError::Shape { name: name.clone(), detail: e.to_string() })?;
        for (slot, _) in &self.faults {
            if *slot >= self.width {
                return Err(DhrError::SlotOutOfRange { name: name.clone(), slot: *slot, width: self.width });
            }
        }
        Ok(())
    }

    /// Routes slot `slot` to `faulty` whatever variant the scheduler puts
    /// there. Replaces an earlier fault on the same slot.
    pub fn inject_fault(&self, slot: usize, faulty: SequentialAutomaton) -> Result<Self, DhrError> {
        if slot >= self.width {
            return Err(DhrError::SlotOutOfRange {
                name: self.name.clone(),
                slot,
                width: self.width,
            });
        }
        let mut next = self.clone();
        next.faults.retain(|(s, _)| *s != slot);
        next.faults.push((slot, faulty));
        next.faults.sort_by_key(|(s, _)| *s);
        next.check()?;
        Ok(next)
    }
}

/// Scheduler over `Q × {healthy, fault_1, …}`: the base rule acts on the
/// projection to `Q` and every cell keeps its own flag.
fn widen(scheduler: &AnyCa, flags: usize) -> AnyCa {
    let base = scheduler.shape();
    let n = base.cell_states.len();
    let mut states = base.cell_states.clone();
    for k in 1..=flags {
        states.extend(base.cell_states.iter().map(|q| format!("{q}+fault{k}")));
    }
    let shape = LatticeShape {
        cell_states: states,
        ..base.clone()
    };
    let center = base.radius;
    match scheduler {
        AnyCa::Deterministic(ca) => {
            let table = (0..shape.neighborhood_count())
                .map(|code| {
                    let nb = shape.decode(code);
                    let proj: Vec<usize> = nb.iter().map(|c| c % n).collect();
                    let flag = nb[center] / n;
                    ca.local(base.encode(&proj)).map(|s| flag * n + s)
                })
                .collect();
            CellularAutomaton::new(ca.name.clone(), shape, LocalRule::Table(table)).into()
        }
        AnyCa::Probabilistic(pca) => {
            let rule = (0..shape.neighborhood_count())
                .map(|code| {
                    let nb = shape.decode(code);
                    let proj: Vec<usize> = nb.iter().map(|c| c % n).collect();
                    let flag = nb[center] / n;
                    pca.rule[base.encode(&proj)]
                        .as_ref()
                        .map(|d| d.iter().map(|&(s, p)| (flag * n + s, p)).collect())
                })
                .collect();
            ProbabilisticCellularAutomaton::new(pca.name.clone(), shape, rule).into()
        }
    }
}

fn add_sa(ma: &mut MimicAutomaton, sa: &SequentialAutomaton) -> Result<(), DhrError> {
    match ma.sa_set.iter().find(|s| s.name == sa.name) {
        Some(existing) if existing == sa => Ok(()),
        Some(_) => Err(DhrError::NameClash(sa.name.clone())),
        None => {
            ma.sa_set.push(sa.clone());
            Ok(())
        }
    }
}

/// The composite machine of a DHR structure: one `sa_from_ca` binding
/// named after the structure whose cells host the executors, with the
/// scheduler as its lattice.
pub fn build_dhr(d: &DhrStructure) -> Result<MimicAutomaton, DhrError> {
    d.check()?;
    let n = d.executors.len();
    let flags = d.faults.len();
    let scheduler = if flags == 0 { d.scheduler.clone() } else { widen(&d.scheduler, flags) };
    let mut binding = Binding::sa_from_ca(d.name.clone(), scheduler.name()).with_voter(d.voter.clone());
    let mut lattice = d.initial_lattice.clone();
    let mut ma = MimicAutomaton::new(d.name.clone(), d.name.clone());
    for (q, e) in d.executors.iter().enumerate() {
        add_sa(&mut ma, e)?;
        binding = binding.host(q, Unit::PlainSa(e.name.clone()));
    }
    for (k, (slot, faulty)) in d.faults.iter().enumerate() {
        add_sa(&mut ma, faulty)?;
        for q in 0..n {
            binding = binding.host((k + 1) * n + q, Unit::PlainSa(faulty.name.clone()));
        }
        lattice.0[*slot] += (k + 1) * n;
    }
    ma.bindings.push(binding.with_initial(lattice));
    ma.ca_set.push(scheduler);
    ma.metadata.insert("cells".into(), "execution bodies, one per redundant slot".into());
    ma.metadata.insert("lattice rule".into(), "scheduling algorithm".into());
    ma.metadata.insert("cell states".into(), "selected heterogeneous variant".into());
    ma.metadata.insert("voter".into(), "output arbiter over slot outputs".into());
    if flags > 0 {
        let slots: Vec<String> = d.faults.iter().map(|(s, f)| format!("{s}:{}", f.name)).collect();
        ma.metadata.insert("faults".into(), slots.join(" "));
    }
    Ok(ma)
}

/// One stage of one DHR tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DhrStepReport {
    pub stage: String,
    pub input_block: Word,
    pub per_slot_outputs: Vec<Word>,
    /// `None` when the voter abstained.
    pub voted_output: Option<Word>,
    pub dissenters: BTreeSet<usize>,
    pub lattice_before: Lattice,
    pub lattice_after: Lattice,
}

impl DhrStepReport {
    fn from_record(r: &TickRecord) -> Result<Self, DhrError> {
        let vote = r.vote.as_ref().ok_or(DhrError::NoVoter)?;
        let input_block = match &r.input {
            MacroInput::Block(w) => w.clone(),
            MacroInput::Seed(_) => return Err(DhrError::NoVoter),
        };
        Ok(DhrStepReport {
            stage: r.binding.clone(),
            input_block,
            per_slot_outputs: r.cells.iter().map(|c| c.output_word()).collect(),
            voted_output: vote.word().cloned(),
            dissenters: vote.dissenters(),
            lattice_before: r.lattice_before.clone(),
            lattice_after: r.lattice_after.clone(),
        })
    }
}

/// Everything one input block did, over all serial stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DhrTick {
    pub stages: Vec<DhrStepReport>,
    /// Vote of the last stage, `None` if any stage abstained.
    pub output: Option<Word>,
    pub aborted: bool,
}

/// One macro step of a machine built by [`build_dhr`] or
/// [`compose_serial`].
pub fn dhr_step(
    ma: &MimicAutomaton,
    cfg: &MimicConfiguration,
    block: &Word,
    chance: &mut dyn Chance,
) -> Result<(MimicConfiguration, DhrTick), DhrError> {
    let (next, tick) = ma.step(cfg, &MacroInput::Block(block.clone()), chance)?;
    let stages = tick
        .stages
        .iter()
        .map(DhrStepReport::from_record)
        .collect::<Result<Vec<_>, _>>()?;
    let output = match tick.output() {
        Observed::Word(w) if tick.abstained_at.is_none() => Some(w.clone()),
        _ => None,
    };
    let aborted = tick.abstained_at.is_some() && ma.serial.is_some();
    Ok((next, DhrTick { stages, output, aborted }))
}

/// Folds [`dhr_step`] from the declared initial lattice; `seed` drives
/// probabilistic schedulers. A serial run stops after a stage abstains.
pub fn dhr_run(ma: &MimicAutomaton, schedule: &[Word], seed: u64) -> Result<Vec<DhrTick>, DhrError> {
    let mut cfg = ma.default_initial()?;
    let mut chance = Sampler::seeded(seed);
    let mut out = Vec::with_capacity(schedule.len());
    for block in schedule {
        let (next, tick) = dhr_step(ma, &cfg, block, &mut chance)?;
        cfg = next;
        let stop = tick.aborted;
        out.push(tick);
        if stop {
            break;
        }
    }
    Ok(out)
}
