use std::collections::BTreeMap;

use super::{add_sa, build_dhr, DhrError, DhrStructure};
use crate::automata::{HierarchicalAutomaton, SequentialAutomaton};
use crate::compose::{MimicAutomaton, SerialPlan};

pub const ADVANCE: &str = "advance";

/// DHR structures in series: each stage's voted output word is the next
/// stage's input block.
#[derive(Debug, Clone, PartialEq)]
pub struct SerialDhr {
    pub name: String,
    pub stages: Vec<DhrStructure>,
}

impl SerialDhr {
    pub fn new(name: impl Into<String>, stages: Vec<DhrStructure>) -> Self {
        SerialDhr {
            name: name.into(),
            stages,
        }
    }

    pub fn check(&self) -> Result<(), DhrError> {
        if self.stages.len() < 2 {
            return Err(DhrError::TooFewStages(self.stages.len()));
        }
        for s in &self.stages {
            s.check()?;
        }
        for pair in self.stages.windows(2) {
            let accepts = pair[1].input_alphabet();
            if let Some(sym) = pair[0].output_alphabet().into_iter().find(|s| !accepts.contains(s)) {
                return Err(DhrError::Chaining {
                    from: pair[0].name.clone(),
                    to: pair[1].name.clone(),
                    symbol: sym.to_owned(),
                });
            }
        }
        Ok(())
    }
}

/// One composite machine for the whole chain.
///
/// The hierarchy has three levels: a sequencer with one state per stage
/// that moves on `advance`; under each stage state, the stage itself; under
/// the stage, its executors. The serial plan attached to the machine runs
/// the stage bindings in sequencer order within each macro tick.
pub fn compose_serial(s: &SerialDhr) -> Result<MimicAutomaton, DhrError> {
    s.check()?;
    let mut ma = MimicAutomaton::new(s.name.clone(), s.stages[0].name.clone());
    let names: Vec<&str> = s.stages.iter().map(|d| d.name.as_str()).collect();

    let mut sequencer = SequentialAutomaton::new("sequencer", names.clone(), names[0], [ADVANCE], [])
        .with_final(*names.last().expect("at least two stages"));
    for pair in names.windows(2) {
        sequencer = sequencer.with_transition(pair[0], ADVANCE, pair[1], None);
    }
    sequencer = sequencer.with_transition(names[names.len() - 1], ADVANCE, names[names.len() - 1], None);

    let mut levels = vec![sequencer];
    let mut gamma = Vec::new();
    let mut stage_of = BTreeMap::new();
    for d in &s.stages {
        let mut part = build_dhr(d)?;
        for sa in &part.sa_set {
            add_sa(&mut ma, sa)?;
        }
        for ca in part.ca_set.drain(..) {
            let renamed = format!("{}/{}", d.name, ca.name());
            let mut ca = ca;
            match &mut ca {
                crate::automata::AnyCa::Deterministic(c) => c.name = renamed.clone(),
                crate::automata::AnyCa::Probabilistic(p) => p.name = renamed.clone(),
            }
            for b in &mut part.bindings {
                b.ca = renamed.clone();
            }
            ma.ca_set.push(ca);
        }
        ma.bindings.extend(part.bindings);
        stage_of.insert(d.name.clone(), d.name.clone());

        let stage_sa = SequentialAutomaton::new(format!("{}/stage", d.name), ["active"], "active", [ADVANCE], [])
            .with_transition("active", ADVANCE, "active", None);
        let mut executors = Vec::new();
        let mut seen = Vec::new();
        for e in d.executors.iter().chain(d.faults.iter().map(|(_, f)| f)) {
            if seen.contains(&e.name) {
                continue;
            }
            seen.push(e.name.clone());
            let mut copy = e.clone();
            copy.name = format!("{}/{}", d.name, e.name);
            executors.push(copy.name.clone());
            levels.push(copy);
        }
        gamma.push(("sequencer".to_owned(), d.name.clone(), vec![stage_sa.name.clone()]));
        gamma.push((stage_sa.name.clone(), "active".to_owned(), executors));
        levels.push(stage_sa);
    }
    let mut ha = HierarchicalAutomaton::new(format!("{}/serial", s.name), levels, "sequencer");
    for (sa, state, children) in gamma {
        ha = ha.with_refinement(sa, state, children);
    }
    ma.serial = Some(SerialPlan {
        ha: ha.name.clone(),
        advance: ADVANCE.to_owned(),
        stage_of,
    });
    ma.ha_set.push(ha);
    ma.metadata.insert("stages".into(), names.join(" "));
    ma.metadata.insert(
        "hierarchy".into(),
        "sequencer, then stages, then executors; stages run in sequencer order".into(),
    );
    Ok(ma)
}
