//! Small composite machines shared by tests and documentation.

use std::collections::BTreeMap;

use super::{Binding, MimicAutomaton, Readout, Unit};
use crate::automata::fixtures::{identity_ca, inverted_parity, parity, xor_ca};
use crate::automata::{AnyCa, Lattice};

/// One identity cell hosting the parity automaton in both cell states.
pub fn parity_ma() -> MimicAutomaton {
    let mut ma = parity_over(identity_ca(1), Lattice::new(vec![0]));
    ma.name = "parity_ma".into();
    ma
}

/// Parity hosted in every cell state of a binary lattice automaton.
pub fn parity_over(ca: impl Into<AnyCa>, initial: Lattice) -> MimicAutomaton {
    let ca = ca.into();
    let mut binding = Binding::sa_from_ca("b", ca.name()).with_initial(initial);
    for q in 0..ca.shape().cell_states.len() {
        binding = binding.host(q, Unit::PlainSa("parity".into()));
    }
    MimicAutomaton::new(format!("parity_over_{}", ca.name()), "b")
        .with_sa(parity())
        .with_ca(ca)
        .with_binding(binding)
}

/// A ring of `width` XOR cells; state 0 hosts parity, state 1 its
/// complement.
pub fn xor_variants_ma(width: usize) -> MimicAutomaton {
    MimicAutomaton::new("xor_variants", "b")
        .with_sa(parity())
        .with_sa(inverted_parity())
        .with_ca(xor_ca(width))
        .with_binding(
            Binding::sa_from_ca("b", "xor")
                .host(0, Unit::PlainSa("parity".into()))
                .host(1, Unit::PlainSa("inverted_parity".into())),
        )
}

/// A one-cell identity run read out as its cell bit and fed to parity.
pub fn readout_ma() -> MimicAutomaton {
    let entries = BTreeMap::from([
        (Lattice::new(vec![0]), "0".to_owned()),
        (Lattice::new(vec![1]), "1".to_owned()),
    ]);
    MimicAutomaton::new("readout_ma", "outer")
        .with_sa(parity())
        .with_ca(identity_ca(1))
        .with_binding(
            Binding::ca_from_sa(
                "outer",
                "identity",
                "parity",
                Readout::Table {
                    entries,
                    default: None,
                },
                10,
            )
            .host(0, Unit::PlainSa("parity".into()))
            .host(1, Unit::PlainSa("parity".into()))
            .with_initial(Lattice::new(vec![0])),
        )
}
