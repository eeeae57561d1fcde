use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MaError;
use crate::automata::{Lattice, ProbabilisticCellularAutomaton};

/// Source of probabilistic lattice updates.
pub trait Chance {
    fn pca_step(
        &mut self,
        pca: &ProbabilisticCellularAutomaton,
        lattice: &Lattice,
    ) -> Result<Lattice, MaError>;
}

/// Refuses probabilistic steps; for machines without a PCA.
#[derive(Debug, Clone, Copy, Default)]
pub struct Deterministic;

impl Chance for Deterministic {
    fn pca_step(
        &mut self,
        pca: &ProbabilisticCellularAutomaton,
        _lattice: &Lattice,
    ) -> Result<Lattice, MaError> {
        Err(MaError::Nondeterministic {
            name: pca.name.clone(),
        })
    }
}

/// Samples with any random generator; [`Sampler::seeded`] gives the
/// documented ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct Sampler<R = ChaCha8Rng>(pub R);

impl Sampler<ChaCha8Rng> {
    pub fn seeded(seed: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream `stream` under one master seed.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler(rng)
    }
}

impl<R: Rng> Chance for Sampler<R> {
    fn pca_step(
        &mut self,
        pca: &ProbabilisticCellularAutomaton,
        lattice: &Lattice,
    ) -> Result<Lattice, MaError> {
        Ok(pca.step(lattice, &mut self.0)?)
    }
}

/// Replays a fixed list of outcome indices, one per probabilistic step,
/// and records the branching seen along the way.
struct Script {
    choices: Vec<usize>,
    arity: Vec<usize>,
    position: usize,
    probability: f64,
    cap: usize,
}

impl Chance for Script {
    fn pca_step(
        &mut self,
        pca: &ProbabilisticCellularAutomaton,
        lattice: &Lattice,
    ) -> Result<Lattice, MaError> {
        let dist = pca.step_distribution(lattice, self.cap)?;
        if self.position == self.choices.len() {
            self.choices.push(0);
        }
        let pick = self.choices[self.position];
        self.arity.truncate(self.position);
        self.arity.push(dist.len());
        self.position += 1;
        let (next, p) = dist.into_iter().nth(pick).expect("choice within arity");
        self.probability *= p;
        Ok(next)
    }
}

/// Runs `f` once per combination of probabilistic outcomes and returns
/// every result with its probability. Each PCA step is expanded exactly,
/// with at most `cap` successors.
pub(crate) fn enumerate<T>(
    cap: usize,
    mut f: impl FnMut(&mut dyn Chance) -> Result<T, MaError>,
) -> Result<Vec<(T, f64)>, MaError> {
    let mut out = Vec::new();
    let mut choices = Vec::new();
    loop {
        let mut script = Script {
            choices,
            arity: Vec::new(),
            position: 0,
            probability: 1.0,
            cap,
        };
        let value = f(&mut script)?;
        out.push((value, script.probability));
        let Script {
            choices: mut c,
            arity,
            position,
            ..
        } = script;
        c.truncate(position);
        loop {
            let Some(&last) = c.last() else {
                return Ok(out);
            };
            let i = c.len() - 1;
            if last + 1 < arity[i] {
                c[i] += 1;
                break;
            }
            c.pop();
        }
        choices = c;
    }
}
