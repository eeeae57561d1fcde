//! Small reference automata shared by tests, examples and documentation.

use super::ca::{
    Boundary, BuiltinRule, CellularAutomaton, LatticeShape, ProbabilisticCellularAutomaton,
};
use super::ha::HierarchicalAutomaton;
use super::sa::SequentialAutomaton;

/// Tracks the parity of `1`s read; emits the parity bit after each symbol.
/// `even` is initial and final.
pub fn parity() -> SequentialAutomaton {
    SequentialAutomaton::new("parity", ["even", "odd"], "even", ["0", "1"], ["0", "1"])
        .with_final("even")
        .with_transition("even", "0", "even", Some("0"))
        .with_transition("even", "1", "odd", Some("1"))
        .with_transition("odd", "0", "odd", Some("1"))
        .with_transition("odd", "1", "even", Some("0"))
}

/// Like [`parity`] but emitting the complemented bit.
pub fn inverted_parity() -> SequentialAutomaton {
    let mut sa = parity();
    sa.name = "inverted_parity".into();
    for t in sa.transitions.values_mut() {
        t.output = t.output.as_deref().map(|o| if o == "0" { "1" } else { "0" }.to_owned());
    }
    sa
}

/// Two states over `{0, 1}` with output `{0, 1}`; the emitted bit is fixed.
pub fn constant(name: &str, bit: &str) -> SequentialAutomaton {
    SequentialAutomaton::new(name, ["s"], "s", ["0", "1"], ["0", "1"])
        .with_final("s")
        .with_transition("s", "0", "s", Some(bit))
        .with_transition("s", "1", "s", Some(bit))
}

/// Binary radius-1 periodic lattice geometry.
pub fn binary(width: usize) -> LatticeShape {
    LatticeShape::new(["0", "1"], width, 1, Boundary::Periodic)
}

/// `left xor right` on a periodic binary ring.
pub fn xor_ca(width: usize) -> CellularAutomaton {
    CellularAutomaton::builtin("xor", binary(width), BuiltinRule::Xor)
}

pub fn identity_ca(width: usize) -> CellularAutomaton {
    CellularAutomaton::builtin("identity", binary(width), BuiltinRule::Identity)
}

/// Every cell becomes 0 or 1 with probability one half, regardless of
/// its neighborhood.
pub fn uniform_flip(width: usize) -> ProbabilisticCellularAutomaton {
    ProbabilisticCellularAutomaton::from_fn("uniform_flip", binary(width), |_| {
        vec![(0, 0.5), (1, 0.5)]
    })
}

/// One cell that leaves 0 with probability one half and then stays at 1.
pub fn flip_once() -> ProbabilisticCellularAutomaton {
    ProbabilisticCellularAutomaton::from_fn("flip_once", binary(1), |n| {
        if n[1] == 1 {
            vec![(1, 1.0)]
        } else {
            vec![(0, 0.5), (1, 0.5)]
        }
    })
}

/// `top` (states s0, s1 over `go`) with `s0` refined into `child`
/// (states c0, c1 over `a`). Only the child understands `a`.
pub fn two_level_ha() -> HierarchicalAutomaton {
    let top = SequentialAutomaton::new("top", ["s0", "s1"], "s0", ["go"], ["x"])
        .with_final("s0")
        .with_transition("s0", "go", "s1", Some("x"))
        .with_transition("s1", "go", "s0", Some("x"));
    let child = SequentialAutomaton::new("child", ["c0", "c1"], "c0", ["a"], ["y"])
        .with_transition("c0", "a", "c1", Some("y"))
        .with_transition("c1", "a", "c0", Some("y"));
    HierarchicalAutomaton::new("two_level", vec![top, child], "top")
        .with_refinement("top", "s0", ["child"])
}
