//! Output arbitration over redundant executors.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VoterKind {
    /// The unique most frequent word wins if it reaches the quorum.
    StrictMajority,
    /// The most frequent word wins if it reaches the quorum; ties go to the
    /// earliest word in `preference`, then to unlisted words in
    /// lexicographic order.
    PluralityWithTiebreak { preference: Vec<Word> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VoterPolicy {
    pub kind: VoterKind,
    pub quorum: usize,
}

/// The outcome of one vote.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Agreed { word: Word, dissenters: BTreeSet<usize> },
    Abstain,
}

impl Vote {
    pub fn word(&self) -> Option<&Word> {
        match self {
            Vote::Agreed { word, .. } => Some(word),
            Vote::Abstain => None,
        }
    }

    pub fn dissenters(&self) -> BTreeSet<usize> {
        match self {
            Vote::Agreed { dissenters, .. } => dissenters.clone(),
            Vote::Abstain => BTreeSet::new(),
        }
    }
}

impl VoterPolicy {
    /// Strict majority with the default quorum `width / 2 + 1`.
    pub fn majority(width: usize) -> Self {
        VoterPolicy {
            kind: VoterKind::StrictMajority,
            quorum: width / 2 + 1,
        }
    }

    pub fn with_quorum(mut self, quorum: usize) -> Self {
        self.quorum = quorum;
        self
    }

    pub fn is_valid_for(&self, width: usize) -> bool {
        self.quorum >= 1 && self.quorum <= width
    }

    pub fn vote(&self, outputs: &[Word]) -> Vote {
        let mut counts: BTreeMap<&Word, usize> = BTreeMap::new();
        for w in outputs {
            *counts.entry(w).or_default() += 1;
        }
        let Some(best) = counts.values().copied().max() else {
            return Vote::Abstain;
        };
        if best < self.quorum {
            return Vote::Abstain;
        }
        let leaders: Vec<&Word> = counts
            .iter()
            .filter(|&(_, &c)| c == best)
            .map(|(w, _)| *w)
            .collect();
        let winner = match &self.kind {
            VoterKind::StrictMajority if leaders.len() == 1 => leaders[0],
            VoterKind::StrictMajority => return Vote::Abstain,
            VoterKind::PluralityWithTiebreak { preference } => preference
                .iter()
                .find(|p| leaders.contains(p))
                .unwrap_or(leaders[0]),
        };
        let dissenters = outputs
            .iter()
            .enumerate()
            .filter(|(_, w)| *w != winner)
            .map(|(i, _)| i)
            .collect();
        Vote::Agreed {
            word: winner.clone(),
            dissenters,
        }
    }
}
