//! Where measurement outcomes come from: Born-rule sampling with a seeded
//! generator, or a forced script for deterministic branch selection.

use std::collections::VecDeque;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::statevector::SimError;

/// Probabilities below this are treated as impossible branches.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

pub trait OutcomeSource {
    /// Chooses an outcome index given the probability of every branch.
    fn choose(&mut self, probs: &[f64]) -> Result<usize, SimError>;
}

fn sample(rng: &mut dyn RngCore, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p <= MIN_BRANCH_PROBABILITY {
            continue;
        }
        acc += p;
        last = k;
        if u < acc {
            return k;
        }
    }
    last
}

/// Born-rule sampling.
pub struct Sampler<R: RngCore> {
    rng: R,
}

impl Sampler<ChaCha8Rng> {
    pub fn seeded(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl<R: RngCore> Sampler<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

impl<R: RngCore> OutcomeSource for Sampler<R> {
    fn choose(&mut self, probs: &[f64]) -> Result<usize, SimError> {
        Ok(sample(&mut self.rng, probs))
    }
}

/// Plays back a fixed list of outcome indices, then optionally falls back
/// to seeded sampling.
#[derive(Debug, Clone)]
pub struct Forced {
    queue: VecDeque<usize>,
    fallback: Option<ChaCha8Rng>,
    consumed: usize,
}

impl Forced {
    pub fn new(outcomes: impl IntoIterator<Item = usize>) -> Self {
        Self { queue: outcomes.into_iter().collect(), fallback: None, consumed: 0 }
    }

    pub fn then_sample(outcomes: impl IntoIterator<Item = usize>, seed: u64) -> Self {
        Self { fallback: Some(ChaCha8Rng::seed_from_u64(seed)), ..Self::new(outcomes) }
    }

    /// Forced `±1` outcomes, written as signs.
    pub fn signs(signs: &[i8]) -> Self {
        Self::new(signs.iter().map(|&s| usize::from(s < 0)))
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }
}

impl OutcomeSource for Forced {
    fn choose(&mut self, probs: &[f64]) -> Result<usize, SimError> {
        let Some(k) = self.queue.pop_front() else {
            return match self.fallback.as_mut() {
                Some(rng) => Ok(sample(rng, probs)),
                None => Err(SimError::ForcedExhausted(self.consumed)),
            };
        };
        self.consumed += 1;
        match probs.get(k) {
            None => Err(SimError::BadOutcome { outcome: k, count: probs.len() }),
            Some(&p) if p <= MIN_BRANCH_PROBABILITY => {
                Err(SimError::ImpossibleOutcome { outcome: k, probability: p })
            }
            Some(_) => Ok(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_sampler_is_reproducible() {
        let probs = [0.25; 4];
        let mut a = Sampler::seeded(7);
        let mut b = Sampler::seeded(7);
        let xs: Vec<_> = (0..64).map(|_| a.choose(&probs).unwrap()).collect();
        let ys: Vec<_> = (0..64).map(|_| b.choose(&probs).unwrap()).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().any(|&k| k != xs[0]));
    }

    #[test]
    fn sampler_never_picks_zero_branches() {
        let mut s = Sampler::seeded(1);
        for _ in 0..1000 {
            assert_eq!(s.choose(&[0.0, 1.0, 0.0]).unwrap(), 1);
        }
    }

    #[test]
    fn forced_rejects_impossible_and_exhaustion() {
        let mut f = Forced::new([1, 0]);
        assert!(matches!(f.choose(&[1.0, 0.0]), Err(SimError::ImpossibleOutcome { outcome: 1, .. })));
        assert_eq!(f.choose(&[1.0, 0.0]).unwrap(), 0);
        assert!(matches!(f.choose(&[1.0, 0.0]), Err(SimError::ForcedExhausted(2))));
        let mut g = Forced::then_sample([], 3);
        assert_eq!(g.choose(&[0.0, 1.0]).unwrap(), 1);
    }
}
