//! Checks a program against its source circuit on random inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::circuit::GateCircuit;
use super::program::MeasurementProgram;
use super::simulate::simulate;
use super::ProgramError;
use crate::outcome::Sampler;
use crate::statevector::StateVector;

/// A trial passes when its fidelity exceeds `1 − FIDELITY_TOLERANCE`.
pub const FIDELITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub seed: u64,
    pub min_fidelity: f64,
    pub failures: Vec<TrialFailure>,
    pub mean_rounds: f64,
    pub max_rounds: usize,
    pub mean_steps: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Trial `t` draws its input and its outcomes from a generator seeded with
/// `seed + t`.
pub fn verify_equivalence(
    circuit: &GateCircuit,
    program: &MeasurementProgram,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport, ProgramError> {
    let mut report = VerifyReport {
        trials,
        seed,
        min_fidelity: 1.0,
        failures: Vec::new(),
        mean_rounds: 0.0,
        max_rounds: 0,
        mean_steps: 0.0,
    };
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let input = StateVector::random(circuit.n_qubits, &mut rng);
        let want = circuit.apply(&input)?;
        let out = simulate(program, &input, &mut Sampler::new(rng))?;
        let f = out.state.fidelity(&want)?;
        report.min_fidelity = report.min_fidelity.min(f);
        if f <= 1.0 - FIDELITY_TOLERANCE {
            report.failures.push(TrialFailure { trial: t, fidelity: f });
        }
        report.mean_rounds += out.stats.rounds_total as f64;
        report.mean_steps += out.stats.steps as f64;
        report.max_rounds = report.max_rounds.max(out.stats.rounds_total);
    }
    if trials > 0 {
        report.mean_rounds /= trials as f64;
        report.mean_steps /= trials as f64;
    }
    Ok(report)
}
