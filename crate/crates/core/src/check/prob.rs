use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;

use super::{CheckError, CheckResult, Method, Predicate, StateView, Stats, Verdict};
use crate::compose::{enumerate, ConfigKey, MacroInput, MimicAutomaton, MimicConfiguration, Sampler};

/// State of a DTMC: a configuration and the position in the input policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DtmcState {
    pub view: StateView,
    pub phase: usize,
}

/// Discrete-time Markov chain over configurations; state 0 is initial.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc {
    pub states: Vec<DtmcState>,
    pub initial: usize,
    /// Successor distribution of every state, sorted by successor id.
    pub rows: Vec<Vec<(usize, f64)>>,
}

/// How far ahead reachability looks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Unbounded,
    Steps(usize),
}

impl Dtmc {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest deviation of a row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Reachability probabilities of every state by value iteration.
    ///
    /// Bounded horizons take exactly that many iterations. Unbounded ones
    /// fix states that cannot reach the target at 0 and iterate until the
    /// largest change drops below `tol`.
    pub fn reach_values(
        &self,
        target: &[bool],
        horizon: Horizon,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, usize), CheckError> {
        let n = self.len();
        let mut x: Vec<f64> = target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        let live = match horizon {
            Horizon::Steps(_) => vec![true; n],
            Horizon::Unbounded => self.can_reach(target),
        };
        let limit = match horizon {
            Horizon::Steps(k) => k,
            Horizon::Unbounded => max_iter,
        };
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < limit {
            let next: Vec<f64> = (0..n)
                .map(|s| {
                    if target[s] {
                        1.0
                    } else if !live[s] {
                        0.0
                    } else {
                        self.rows[s].iter().map(|&(t, p)| p * x[t]).sum::<f64>().min(1.0)
                    }
                })
                .collect();
            residual = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            x = next;
            iterations += 1;
            if horizon == Horizon::Unbounded && residual < tol {
                return Ok((x, iterations));
            }
        }
        match horizon {
            Horizon::Steps(_) => Ok((x, iterations)),
            Horizon::Unbounded if n == 0 || residual < tol => Ok((x, iterations)),
            Horizon::Unbounded => Err(CheckError::Convergence {
                iterations,
                residual,
            }),
        }
    }

    fn can_reach(&self, target: &[bool]) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, p) in row {
                if p > 0.0 {
                    preds[t].push(s);
                }
            }
        }
        let mut live = target.to_vec();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&s| target[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !live[s] {
                    live[s] = true;
                    queue.push_back(s);
                }
            }
        }
        live
    }
}

/// Expands every probabilistic outcome of every macro tick exactly. The
/// input of tick `k` is `policy[k % policy.len()]`; at most `cap`
/// successors per lattice step and `bound` states overall.
pub fn build_dtmc(
    ma: &MimicAutomaton,
    cfg: &MimicConfiguration,
    policy: &[MacroInput],
    bound: usize,
    cap: usize,
) -> Result<Dtmc, CheckError> {
    if policy.is_empty() {
        return Err(CheckError::EmptyPolicy);
    }
    let first = DtmcState {
        view: StateView::of(cfg),
        phase: 0,
    };
    let mut dtmc = Dtmc {
        states: vec![first.clone()],
        initial: 0,
        rows: vec![Vec::new()],
    };
    let mut index = HashMap::from([(first, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let state = dtmc.states[s].clone();
        if state.view.halted {
            dtmc.rows[s] = vec![(s, 1.0)];
            continue;
        }
        let current = state.view.config.with_clock(state.phase as u64);
        let input = &policy[state.phase];
        let outcomes = enumerate(cap, |chance| {
            let (next, tick) = ma.step(&current, input, chance)?;
            Ok::<(ConfigKey, bool), _>((next.key(), tick.abstained_at.is_some()))
        })?;
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for ((key, halted), p) in outcomes {
            let succ = DtmcState {
                view: StateView {
                    config: key,
                    halted,
                    monitor: None,
                },
                phase: (state.phase + 1) % policy.len(),
            };
            let id = match index.get(&succ) {
                Some(&id) => id,
                None => {
                    if dtmc.states.len() >= bound {
                        return Err(CheckError::Explosion {
                            bound,
                            frontier: queue.len() + 1,
                        });
                    }
                    let id = dtmc.states.len();
                    index.insert(succ.clone(), id);
                    dtmc.states.push(succ);
                    dtmc.rows.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            *row.entry(id).or_insert(0.0) += p;
        }
        dtmc.rows[s] = row.into_iter().collect();
    }
    Ok(dtmc)
}

/// Probability of reaching `target` from the initial state, by value
/// iteration on the DTMC.
pub fn reach_probability_exact(
    ma: &MimicAutomaton,
    dtmc: &Dtmc,
    target: &Predicate,
    horizon: Horizon,
    tol: f64,
    max_iter: usize,
) -> Result<CheckResult, CheckError> {
    target.check_against(ma)?;
    let mask: Vec<bool> = dtmc.states.iter().map(|s| target.eval(ma, &s.view)).collect();
    let (x, iterations) = dtmc.reach_values(&mask, horizon, tol, max_iter)?;
    Ok(CheckResult {
        verdict: Verdict::Probability {
            p: x[dtmc.initial],
            method: Method::Exact,
            error_bound: match horizon {
                Horizon::Unbounded => tol,
                Horizon::Steps(_) => 0.0,
            },
        },
        counterexample: None,
        stats: Stats {
            states: dtmc.len(),
            transitions: dtmc.rows.iter().map(Vec::len).sum(),
            iterations,
            trials: 0,
        },
    })
}

/// Fraction of `trials` sampled runs of at most `horizon` ticks that hit
/// `target`, with a 95% normal-approximation half-width. Trial `i` uses
/// stream `i` of the ChaCha8 generator seeded with `seed`, so the result
/// does not depend on the number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn reach_probability_mc(
    ma: &MimicAutomaton,
    cfg: &MimicConfiguration,
    policy: &[MacroInput],
    target: &Predicate,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckResult, CheckError> {
    if policy.is_empty() {
        return Err(CheckError::EmptyPolicy);
    }
    target.check_against(ma)?;
    let trials = trials.max(1);
    let at_start = target.holds_in(ma, cfg);
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<usize, CheckError> {
            if at_start {
                return Ok(1);
            }
            let mut chance = Sampler::stream(seed, i as u64);
            let mut current = cfg.clone();
            for k in 0..horizon {
                let (next, tick) = ma.step(&current, &policy[k % policy.len()], &mut chance)?;
                current = next;
                if target.holds_in(ma, &current) {
                    return Ok(1);
                }
                if tick.abstained_at.is_some() {
                    break;
                }
            }
            Ok(0)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = hits as f64 / trials as f64;
    Ok(CheckResult {
        verdict: Verdict::Probability {
            p,
            method: Method::MonteCarlo,
            error_bound: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        },
        counterexample: None,
        stats: Stats {
            trials,
            ..Stats::default()
        },
    })
}
