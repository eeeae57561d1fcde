//! Macro-step semantics.

use super::chance::Chance;
use super::*;
use crate::automata::{CaRun, Termination};

impl MimicAutomaton {
    /// Initial configuration with the root lattice `lattice0`. Serial
    /// stages after the first start from their bindings' own initial
    /// lattices.
    pub fn initial(&self, lattice0: Lattice) -> Result<MimicConfiguration, MaError> {
        let root = self.root()?;
        let root_state = self.binding_initial(root, lattice0, 1)?;
        let mut stages = Vec::new();
        for name in self.stage_order()?.iter().skip(1) {
            let b = self.binding(name)?;
            let l = b.initial.clone().ok_or_else(|| MaError::MissingInitial {
                binding: name.clone(),
            })?;
            stages.push(self.binding_initial(b, l, 1)?);
        }
        Ok(MimicConfiguration {
            root: root_state,
            stages,
            macro_clock: 0,
        })
    }

    /// Initial configuration from the root binding's declared lattice.
    pub fn default_initial(&self) -> Result<MimicConfiguration, MaError> {
        let root = self.root()?;
        let l = root.initial.clone().ok_or_else(|| MaError::MissingInitial {
            binding: root.name.clone(),
        })?;
        self.initial(l)
    }

    fn binding_initial(
        &self,
        b: &Binding,
        lattice: Lattice,
        depth: usize,
    ) -> Result<BindingState, MaError> {
        if depth > self.max_depth {
            return Err(MaError::Nesting {
                max_depth: self.max_depth,
            });
        }
        self.ca(&b.ca)?.shape().check_lattice(&lattice)?;
        let units = lattice
            .cells()
            .iter()
            .map(|&q| self.unit_initial(b, q, depth))
            .collect::<Result<_, _>>()?;
        let outer = match &b.outer_sa {
            Some(o) if b.mode == BindingMode::CaFromSa => Some(self.sa(o)?.initial.clone()),
            _ => None,
        };
        Ok(BindingState {
            lattice,
            units,
            outer,
        })
    }

    fn unit_initial(&self, b: &Binding, q: usize, depth: usize) -> Result<UnitState, MaError> {
        let unit = b.cell_map.get(&q).ok_or_else(|| MaError::Unknown {
            kind: "hosted unit for cell state",
            name: format!("{}[{q}]", b.name),
        })?;
        Ok(match unit {
            Unit::PlainSa(s) => UnitState::Sa(self.sa(s)?.initial.clone()),
            Unit::HaUnit { ha, .. } => UnitState::Ha(self.ha(ha)?.initial()),
            Unit::Nested(n) => {
                let inner = self.binding(n)?;
                let l = inner.initial.clone().ok_or_else(|| MaError::MissingInitial {
                    binding: n.clone(),
                })?;
                UnitState::Nested(Box::new(self.binding_initial(inner, l, depth + 1)?))
            }
        })
    }

    /// One macro tick of the whole machine.
    pub fn step(
        &self,
        cfg: &MimicConfiguration,
        input: &MacroInput,
        chance: &mut dyn Chance,
    ) -> Result<(MimicConfiguration, MacroTick), MaError> {
        let order = self.stage_order()?;
        let root = self.root()?;
        let (root_state, record) = self.tick(root, &cfg.root, input, 1, chance)?;
        let mut next = MimicConfiguration {
            root: root_state,
            stages: cfg.stages.clone(),
            macro_clock: cfg.macro_clock + 1,
        };
        let mut tick = MacroTick {
            clock_before: cfg.macro_clock,
            stages: vec![record],
            abstained_at: None,
        };
        if self.serial.is_some() {
            for (j, name) in order.iter().enumerate().skip(1) {
                let feed = tick.stages[j - 1].output.clone();
                if feed == Observed::Abstain {
                    tick.abstained_at = Some(j - 1);
                    break;
                }
                let b = self.binding(name)?;
                let (state, record) = self.tick(
                    b,
                    &cfg.stages[j - 1],
                    &MacroInput::Block(feed.as_word()),
                    1,
                    chance,
                )?;
                next.stages[j - 1] = state;
                tick.stages.push(record);
            }
            if tick.abstained_at.is_none() && *tick.output() == Observed::Abstain {
                tick.abstained_at = Some(tick.stages.len() - 1);
            }
        }
        Ok((next, tick))
    }

    /// Folds [`step`](Self::step) over a schedule. A serial machine stops
    /// after the first tick in which a stage abstained.
    pub fn run(
        &self,
        cfg: &MimicConfiguration,
        schedule: &[MacroInput],
        chance: &mut dyn Chance,
    ) -> Result<(MimicConfiguration, MacroTrace), MaError> {
        let mut current = cfg.clone();
        let mut trace = MacroTrace::default();
        for input in schedule {
            let (next, tick) = self.step(&current, input, chance)?;
            current = next;
            let stop = tick.abstained_at.is_some();
            trace.ticks.push(tick);
            if stop {
                trace.aborted = true;
                break;
            }
        }
        Ok((current, trace))
    }

    /// [`run`](Self::run) over input blocks for a deterministic machine.
    pub fn run_blocks(
        &self,
        cfg: &MimicConfiguration,
        blocks: &[Word],
    ) -> Result<(MimicConfiguration, MacroTrace), MaError> {
        let schedule: Vec<_> = blocks.iter().cloned().map(MacroInput::Block).collect();
        self.run(cfg, &schedule, &mut super::Deterministic)
    }

    fn tick(
        &self,
        b: &Binding,
        state: &BindingState,
        input: &MacroInput,
        depth: usize,
        chance: &mut dyn Chance,
    ) -> Result<(BindingState, TickRecord), MaError> {
        match (b.mode, input) {
            (BindingMode::SaFromCa, MacroInput::Block(block)) => {
                self.tick_sa_from_ca(b, state, block, depth, chance)
            }
            (BindingMode::CaFromSa, MacroInput::Seed(seed)) => {
                self.tick_ca_from_sa(b, state, seed, depth, chance)
            }
            (BindingMode::SaFromCa, _) => Err(MaError::ModeMismatch {
                binding: b.name.clone(),
                expected: "an input block",
            }),
            (BindingMode::CaFromSa, _) => Err(MaError::ModeMismatch {
                binding: b.name.clone(),
                expected: "a seed lattice",
            }),
        }
    }

    fn tick_sa_from_ca(
        &self,
        b: &Binding,
        state: &BindingState,
        block: &Word,
        depth: usize,
        chance: &mut dyn Chance,
    ) -> Result<(BindingState, TickRecord), MaError> {
        let lattice = &state.lattice;
        let mut units = Vec::with_capacity(state.units.len());
        let mut cells = Vec::with_capacity(state.units.len());
        for (cell, unit) in state.units.iter().enumerate() {
            let rejected = |e: AutomatonError| match e {
                AutomatonError::RejectedInput {
                    symbol, position, ..
                } => MaError::InputRejected {
                    binding: b.name.clone(),
                    cell,
                    symbol,
                    position,
                },
                e => e.into(),
            };
            let (next, outcome) = match (unit, b.cell_map.get(&lattice.cells()[cell])) {
                (UnitState::Sa(s), Some(Unit::PlainSa(name))) => {
                    let r = self.sa(name)?.run_from(s, block).map_err(rejected)?;
                    (UnitState::Sa(r.final_state.clone()), UnitOutcome::Run(r))
                }
                (UnitState::Ha(c), Some(Unit::HaUnit { ha, .. })) => {
                    let (c, r) = self.ha(ha)?.run_from(c, block).map_err(rejected)?;
                    (UnitState::Ha(c), UnitOutcome::Run(r))
                }
                (UnitState::Nested(inner), Some(Unit::Nested(name))) => {
                    let nb = self.binding(name)?;
                    let input = match nb.mode {
                        BindingMode::SaFromCa => MacroInput::Block(block.clone()),
                        BindingMode::CaFromSa => MacroInput::Seed(inner.lattice.clone()),
                    };
                    let (s, r) = self.tick(nb, inner, &input, depth + 1, chance)?;
                    (UnitState::Nested(Box::new(s)), UnitOutcome::Nested(Box::new(r)))
                }
                _ => {
                    return Err(MaError::Unknown {
                        kind: "unit state for cell",
                        name: format!("{}[{cell}]", b.name),
                    })
                }
            };
            units.push(next);
            cells.push(CellRun {
                host_lattice: lattice.clone(),
                outcome,
            });
        }

        let after = match self.ca(&b.ca)? {
            AnyCa::Deterministic(ca) => ca.step(lattice)?,
            AnyCa::Probabilistic(pca) => chance.pca_step(pca, lattice)?,
        };
        self.reinitialize(b, lattice, &after, &mut units, depth)?;

        let outputs: Vec<Word> = cells.iter().map(CellRun::output_word).collect();
        let (vote, output) = match &b.voter {
            Some(v) => {
                let vote = v.vote(&outputs);
                (Some(vote.clone()), Observed::from_vote(vote))
            }
            None => (None, Observed::Cells(outputs)),
        };
        let record = TickRecord {
            binding: b.name.clone(),
            input: MacroInput::Block(block.clone()),
            lattice_before: lattice.clone(),
            lattice_after: after.clone(),
            cells,
            inner: None,
            vote,
            output,
            phi_applications: 1,
            delta_applications: 0,
        };
        Ok((
            BindingState {
                lattice: after,
                units,
                outer: None,
            },
            record,
        ))
    }

    fn tick_ca_from_sa(
        &self,
        b: &Binding,
        state: &BindingState,
        seed: &Lattice,
        depth: usize,
        chance: &mut dyn Chance,
    ) -> Result<(BindingState, TickRecord), MaError> {
        let ca = self.ca(&b.ca)?;
        let shape = ca.shape();
        shape.check_lattice(seed)?;
        let run = match ca {
            AnyCa::Deterministic(ca) => ca.run(seed, b.t_max)?,
            AnyCa::Probabilistic(pca) => {
                let mut trace = vec![seed.clone()];
                let mut terminated_by = Termination::StepCap;
                while trace.len() <= b.t_max {
                    let current = trace.last().expect("trace starts with the seed");
                    let next = chance.pca_step(pca, current)?;
                    if next == *current {
                        terminated_by = Termination::Fixpoint;
                        break;
                    }
                    trace.push(next);
                }
                CaRun {
                    trace,
                    terminated_by,
                }
            }
        };
        let last = run.final_lattice().clone();
        let symbol = b
            .readout
            .as_ref()
            .and_then(|r| r.read(&last, &shape.cell_states))
            .ok_or_else(|| MaError::Readout {
                binding: b.name.clone(),
                lattice: last.render(&shape.cell_states),
            })?;
        let outer_name = b.outer_sa.as_deref().ok_or_else(|| MaError::Unknown {
            kind: "outer automaton of",
            name: b.name.clone(),
        })?;
        let outer = self.sa(outer_name)?;
        let before = state
            .outer
            .clone()
            .unwrap_or_else(|| outer.initial.clone());
        let (after, emitted) = outer.step(&before, &symbol)?;

        let mut units = state.units.clone();
        self.reinitialize(b, &state.lattice, &last, &mut units, depth)?;

        let record = TickRecord {
            binding: b.name.clone(),
            input: MacroInput::Seed(seed.clone()),
            lattice_before: state.lattice.clone(),
            lattice_after: last.clone(),
            cells: Vec::new(),
            phi_applications: run.trace.len() - 1,
            inner: Some(InnerRun {
                trace: run.trace,
                symbol,
                outer_before: before,
                outer_after: after.clone(),
            }),
            vote: None,
            output: Observed::Word(emitted.into_iter().collect()),
            delta_applications: 1,
        };
        Ok((
            BindingState {
                lattice: last,
                units,
                outer: Some(after),
            },
            record,
        ))
    }

    /// Rebuilds the units of cells whose state changed; the others keep
    /// their run-time state.
    fn reinitialize(
        &self,
        b: &Binding,
        before: &Lattice,
        after: &Lattice,
        units: &mut [UnitState],
        depth: usize,
    ) -> Result<(), MaError> {
        for (i, (old, new)) in before.cells().iter().zip(after.cells()).enumerate() {
            if old != new {
                units[i] = self.unit_initial(b, *new, depth)?;
            }
        }
        Ok(())
    }
}
