//! Monte Carlo statistics of gadget round counts.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gadgets::{indirect_gate_1q, indirect_gate_2q, indirect_gate_bu, AncillaMode, CorrectionMode, GadgetError};
use crate::linalg::random_unitary;
use crate::outcome::Sampler;
use crate::statevector::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatsGadget {
    /// Literal 1-qubit gadget with a Haar-random `U`.
    Literal1q,
    /// 2-qubit gadget with a Haar-random `U`.
    Generic2q,
    /// `B_{U†}` gadget.
    Bu,
}

impl StatsGadget {
    /// Mean rounds of the geometric model: success probability 1/4 per
    /// round for one qubit, 1/16 for two, and always one for `B_{U†}`.
    pub fn expected_mean(self) -> f64 {
        match self {
            StatsGadget::Literal1q => 4.0,
            StatsGadget::Generic2q => 16.0,
            StatsGadget::Bu => 1.0,
        }
    }
}

impl fmt::Display for StatsGadget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatsGadget::Literal1q => "1q-literal",
            StatsGadget::Generic2q => "2q-generic",
            StatsGadget::Bu => "bu",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub gadget: StatsGadget,
    pub trials: usize,
    pub seed: u64,
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    pub min: usize,
    pub max: usize,
    pub expected: f64,
}

impl RoundStats {
    /// True when the sample mean is within `k` standard errors of the model.
    pub fn within(&self, k: f64) -> bool {
        (self.mean - self.expected).abs() <= k * self.std_error.max(1e-12)
    }
}

/// Runs `trials` gadgets, each with its own random unitary and input, and
/// summarizes how many rounds they took.
pub fn round_statistics(gadget: StatsGadget, trials: usize, seed: u64) -> Result<RoundStats, GadgetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::with_capacity(trials);
    for _ in 0..trials {
        let r = match gadget {
            StatsGadget::Literal1q => {
                let u = random_unitary(2, &mut rng);
                let psi = StateVector::random(1, &mut rng);
                indirect_gate_1q(&psi, 0, &u, AncillaMode::Literal, &mut Sampler::new(&mut rng))?.rounds
            }
            StatsGadget::Generic2q => {
                let u = random_unitary(4, &mut rng);
                let psi = StateVector::random(2, &mut rng);
                indirect_gate_2q(&psi, (0, 1), &u, None, &mut Sampler::new(&mut rng))?.rounds
            }
            StatsGadget::Bu => {
                let u = random_unitary(2, &mut rng);
                let psi = StateVector::random(1, &mut rng);
                indirect_gate_bu(&psi, 0, &u, CorrectionMode::Frame, &mut Sampler::new(&mut rng))?.rounds
            }
        };
        rounds.push(r);
    }
    let n = rounds.len().max(1) as f64;
    let mean = rounds.iter().sum::<usize>() as f64 / n;
    let var = if rounds.len() > 1 {
        rounds.iter().map(|&r| (r as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(RoundStats {
        gadget,
        trials,
        seed,
        mean,
        std_error: (var / n).sqrt(),
        min: rounds.iter().copied().min().unwrap_or(0),
        max: rounds.iter().copied().max().unwrap_or(0),
        expected: gadget.expected_mean(),
    })
}
