//! Mimic automata: sequential, cellular and hierarchical automata composed
//! into one machine, plus redundant-executor modeling, explicit-state and
//! probabilistic checking, and signature-based behavior detection.

pub mod automata;
pub mod check;
pub mod compose;
pub mod detect;
pub mod dhr;
pub mod format;
pub mod word;
