//! Small DHR structures shared by tests and documentation.

use crate::automata::fixtures::parity;
use crate::automata::{
    Boundary, BuiltinRule, CellularAutomaton, Lattice, LatticeShape, SequentialAutomaton,
};

use super::DhrStructure;

/// Scheduler over `width` slots and `variants` cell states that never
/// changes the lattice.
pub fn static_scheduler(width: usize, variants: usize) -> CellularAutomaton {
    let states: Vec<String> = (0..variants).map(|q| q.to_string()).collect();
    CellularAutomaton::builtin(
        "static",
        LatticeShape::new(states, width, 1, Boundary::Periodic),
        BuiltinRule::Identity,
    )
}

/// Parity with renamed states; behaves exactly like [`parity`].
pub fn parity_variant() -> SequentialAutomaton {
    SequentialAutomaton::new("parity_b", ["p", "q"], "p", ["0", "1"], ["0", "1"])
        .with_final("p")
        .with_transition("p", "0", "p", Some("0"))
        .with_transition("p", "1", "q", Some("1"))
        .with_transition("q", "0", "q", Some("1"))
        .with_transition("q", "1", "p", Some("0"))
}

/// Copies its input to its output.
pub fn echo(name: &str) -> SequentialAutomaton {
    SequentialAutomaton::new(name, ["s"], "s", ["0", "1"], ["0", "1"])
        .with_final("s")
        .with_transition("s", "0", "s", Some("0"))
        .with_transition("s", "1", "s", Some("1"))
}

/// Copies its input with a redundant second state.
pub fn echo_two_state(name: &str) -> SequentialAutomaton {
    SequentialAutomaton::new(name, ["s", "t"], "s", ["0", "1"], ["0", "1"])
        .with_final("s")
        .with_final("t")
        .with_transition("s", "0", "t", Some("0"))
        .with_transition("s", "1", "s", Some("1"))
        .with_transition("t", "0", "s", Some("0"))
        .with_transition("t", "1", "t", Some("1"))
}

/// Emits `A` on every symbol and flips to emitting `B` after seeing `1`
/// when `bad` is set.
pub fn tagger(name: &str, bad: bool) -> SequentialAutomaton {
    let mut sa = SequentialAutomaton::new(name, ["ok", "hit"], "ok", ["0", "1"], ["A", "B"])
        .with_final("ok")
        .with_transition("ok", "0", "ok", Some("A"))
        .with_transition("hit", "0", "hit", Some(if bad { "B" } else { "A" }))
        .with_transition("hit", "1", "hit", Some(if bad { "B" } else { "A" }));
    sa = if bad {
        sa.with_transition("ok", "1", "hit", Some("B"))
    } else {
        sa.with_transition("ok", "1", "ok", Some("A"))
    };
    sa
}

/// `width` slots of parity under a static scheduler; three variants so
/// that faults can be placed anywhere.
pub fn triple_parity(width: usize) -> DhrStructure {
    DhrStructure::new(
        "triple_parity",
        vec![parity(), parity(), parity()],
        static_scheduler(width, 3),
        Lattice::new((0..width).map(|i| i % 3).collect()),
    )
}

/// Three healthy taggers, which only ever vote `A` words.
pub fn tagger_dhr() -> DhrStructure {
    DhrStructure::new(
        "taggers",
        vec![tagger("tag_a", false), tagger("tag_b", false)],
        static_scheduler(3, 2),
        Lattice::new(vec![0, 1, 0]),
    )
}
