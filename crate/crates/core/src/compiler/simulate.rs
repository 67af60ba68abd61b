//! Statevector execution of measurement programs.

use serde::{Deserialize, Serialize};

use super::program::{Condition, FrameBit, Instr, MeasurementProgram};
use super::ProgramError;
use crate::outcome::OutcomeSource;
use crate::pauli::{conjugate, Pauli, PauliString};
use crate::statevector::StateVector;

/// Iterations after which a loop is declared runaway.
pub const LOOP_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub slot: usize,
    pub targets: Vec<usize>,
    /// `±1` after relabeling.
    pub outcome: i8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    /// Measurements executed.
    pub steps: usize,
    pub two_qubit_steps: usize,
    /// Physical qubits beyond the logical ones.
    pub ancillas_used: usize,
    /// One per gadget plus one per loop iteration.
    pub rounds_total: usize,
    pub loop_iterations: usize,
}

/// Executes instructions on a physical register while tracking the frame.
#[derive(Clone, Debug)]
pub struct Machine {
    state: StateVector,
    frame: Vec<(bool, bool)>,
    slots: Vec<i8>,
    bits: Vec<Option<u8>>,
    log: Vec<LogEntry>,
    stats: SimStats,
}

impl Machine {
    pub fn new(state: StateVector) -> Self {
        let n = state.n_qubits();
        Self { state, frame: vec![(false, false); n], slots: Vec::new(), bits: Vec::new(), log: Vec::new(), stats: SimStats::default() }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// Frame as a Pauli string over the whole register.
    pub fn frame(&self) -> PauliString {
        let (mut x, mut z) = (0u64, 0u64);
        for (q, &(bx, bz)) in self.frame.iter().enumerate() {
            x |= u64::from(bx) << q;
            z |= u64::from(bz) << q;
        }
        PauliString::new(self.frame.len(), 0, x, z).expect("register fits a mask")
    }

    pub fn frame_on(&self, q: usize) -> Pauli {
        let (x, z) = self.frame[q];
        Pauli::from_bits(x, z)
    }

    pub fn slot(&self, slot: usize) -> Option<i8> {
        self.slots.get(slot).copied().filter(|&v| v != 0)
    }

    pub fn bits(&self) -> &[Option<u8>] {
        &self.bits
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn stats(&self) -> &SimStats {
        &self.stats
    }

    fn is_set(&self, slot: usize) -> bool {
        self.slots.get(slot) == Some(&-1)
    }

    fn holds(&self, c: &Condition) -> bool {
        match *c {
            Condition::BitIs { qubit, bit, value } => {
                let (x, z) = self.frame[qubit];
                (if bit == FrameBit::X { x } else { z }) == value
            }
            Condition::NotIdentity { qubit } => self.frame[qubit] != (false, false),
        }
    }

    pub fn run(&mut self, instrs: &[Instr], src: &mut dyn OutcomeSource) -> Result<(), ProgramError> {
        for i in instrs {
            self.exec(i, src)?;
        }
        Ok(())
    }

    fn exec(&mut self, instr: &Instr, src: &mut dyn OutcomeSource) -> Result<(), ProgramError> {
        match instr {
            Instr::Measure { slot, observable, targets, relabel, .. } => {
                let m = self.state.measure_observable(observable, targets, src)?;
                self.state = m.state;
                let outcome = if *relabel { -m.label as i8 } else { m.label as i8 };
                if self.slots.len() <= *slot {
                    self.slots.resize(slot + 1, 0);
                }
                self.slots[*slot] = outcome;
                self.stats.steps += 1;
                if targets.len() == 2 {
                    self.stats.two_qubit_steps += 1;
                }
                self.log.push(LogEntry { slot: *slot, targets: targets.clone(), outcome });
            }
            Instr::XorIf { slot, qubit, pauli } => {
                if self.is_set(*slot) {
                    let (x, z) = pauli.bits();
                    let f = &mut self.frame[*qubit];
                    f.0 ^= x;
                    f.1 ^= z;
                }
            }
            Instr::Transfer { from, to } => {
                self.frame[*to] = self.frame[*from];
                self.frame[*from] = (false, false);
            }
            Instr::Conjugate { gate } => {
                let p = conjugate(gate, &self.frame())?;
                for (q, f) in self.frame.iter_mut().enumerate() {
                    *f = (p.x_mask() >> q & 1 == 1, p.z_mask() >> q & 1 == 1);
                }
            }
            Instr::RepeatWhile { condition, body } => {
                let mut n = 0;
                while self.holds(condition) {
                    if n == LOOP_CAP {
                        return Err(ProgramError::Runaway(n));
                    }
                    self.run(body, src)?;
                    n += 1;
                }
                self.stats.loop_iterations += n;
                self.stats.rounds_total += n;
            }
            Instr::Report { logical, slot, qubits } => {
                let bit = u8::from(self.is_set(*slot)) ^ u8::from(self.frame[qubits[0]].0) ^ u8::from(self.frame[qubits[1]].0);
                if self.bits.len() <= *logical {
                    self.bits.resize(logical + 1, None);
                }
                self.bits[*logical] = Some(bit);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    /// Logical output state with the frame undone.
    pub state: StateVector,
    /// Frame on the outputs before it was undone, in logical order.
    pub frame: PauliString,
    pub log: Vec<LogEntry>,
    pub stats: SimStats,
    /// Readout bits by logical qubit, if the program reads out.
    pub bits: Vec<Option<u8>>,
}

/// Runs `program` on `input` (one qubit per logical input) with the other
/// physical qubits starting in `|0⟩`.
pub fn simulate(program: &MeasurementProgram, input: &StateVector, src: &mut dyn OutcomeSource) -> Result<SimOutput, ProgramError> {
    let n = program.n_logical;
    if input.n_qubits() != n {
        return Err(ProgramError::InputSize { expected: n, got: input.n_qubits() });
    }
    let extra = program.n_physical - n;
    let mut reg = if extra == 0 { input.clone() } else { input.tensor(&StateVector::zero(extra)?)? };
    let order: Vec<usize> = {
        // physical qubit k holds input[inputs⁻¹(k)] or a fresh |0⟩
        let mut order = vec![usize::MAX; program.n_physical];
        for (i, &q) in program.inputs.iter().enumerate() {
            order[q] = i;
        }
        let mut next = n;
        for o in order.iter_mut().filter(|o| **o == usize::MAX) {
            *o = next;
            next += 1;
        }
        order
    };
    reg = reg.permute(&order)?;
    let mut m = Machine::new(reg);
    m.run(&program.instrs, src)?;
    let out = m.state.extract(&program.outputs)?;
    let frame = m.frame().restrict(&program.outputs)?;
    let state = out.apply_pauli(&frame)?;
    let mut stats = m.stats.clone();
    stats.ancillas_used = extra;
    stats.rounds_total += program.gadgets;
    let mut bits = m.bits.clone();
    bits.resize(n, None);
    Ok(SimOutput { state, frame, log: m.log, stats, bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile, prepare_zero_and_plus, GateCircuit, Mode, PrepSchedule, SetId, UniversalSet};
    use crate::outcome::{Forced, Sampler};
    use crate::statevector::equal_up_to_global_phase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(text: &str, id: SetId, theta: Option<f64>, mode: Mode, seeds: u64) {
        let c: GateCircuit = text.parse().unwrap();
        let set = UniversalSet::new(id, theta).unwrap();
        let p = compile(&c, &set, mode).unwrap();
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = StateVector::random(c.n_qubits, &mut rng);
            let want = c.apply(&psi).unwrap();
            let got = simulate(&p, &psi, &mut Sampler::new(rng)).unwrap();
            assert!(equal_up_to_global_phase(&got.state, &want, 1e-9).unwrap(), "{text} seed {seed}");
        }
    }

    #[test]
    fn single_qubit_cliffords() {
        check("H 0", SetId::S3, None, Mode::Frame, 10);
        check("P 0\nH 0\nP 0", SetId::S1, Some(0.3), Mode::Frame, 10);
        check("P 0", SetId::S3, None, Mode::Frame, 10);
    }

    #[test]
    fn native_rotations() {
        check("RZ 0 pi/4\nH 0\nRZ 0 -pi/4", SetId::S3, None, Mode::Frame, 10);
        check("RX 0 0.7\nRX 0 -1.4", SetId::S1, Some(0.7), Mode::Frame, 10);
        check("RZ 0 -0.7\nRZ 0 1.4", SetId::S2, Some(0.7), Mode::Frame, 10);
        check("RZ 0 0.5\nRX 0 -0.5", SetId::S0, Some(0.5), Mode::Frame, 10);
    }

    #[test]
    fn cnot_both_directions() {
        check("H 0\nCNOT 0 1\nCNOT 1 0\nP 1", SetId::S3, None, Mode::Frame, 10);
    }

    #[test]
    fn literal_mode_leaves_identity_frame() {
        let c: GateCircuit = "H 0\nCNOT 0 1".parse().unwrap();
        let p = compile(&c, &UniversalSet::new(SetId::S3, None).unwrap(), Mode::Literal).unwrap();
        for seed in 0..5 {
            let psi = StateVector::random(2, &mut ChaCha8Rng::seed_from_u64(seed));
            let out = simulate(&p, &psi, &mut Sampler::seeded(seed)).unwrap();
            assert!(out.frame.is_identity());
            assert!(equal_up_to_global_phase(&out.state, &c.apply(&psi).unwrap(), 1e-9).unwrap());
        }
    }

    #[test]
    fn forced_outcomes_show_up_in_the_log() {
        let c: GateCircuit = "H 0".parse().unwrap();
        let p = compile(&c, &UniversalSet::new(SetId::S3, None).unwrap(), Mode::Frame).unwrap();
        let psi = StateVector::basis(1, "0").unwrap();
        let out = simulate(&p, &psi, &mut Forced::then_sample([1, 0], 9)).unwrap();
        assert_eq!(out.log.len(), 4);
        assert_eq!(out.log[0].outcome, -1);
        assert_eq!(out.stats.rounds_total, 1);
        assert_eq!(out.stats.ancillas_used, 2);
    }

    #[test]
    fn parity_schedule_even_branch() {
        let instrs = prepare_zero_and_plus(&PrepSchedule::Parity([0, 1, 2]), 0);
        let plus3 = StateVector::from_amplitudes(vec![num_complex::Complex64::new(1.0 / 8f64.sqrt(), 0.0); 8]).unwrap();
        let mut m = Machine::new(plus3);
        m.run(&instrs, &mut Forced::new([0, 0, 0])).unwrap();
        let a = m.state().amplitudes();
        for (k, v) in a.iter().enumerate() {
            assert_eq!(v.norm() > 1e-9, k == 0 || k == 7, "index {k}");
        }
    }

    #[test]
    fn default_prep_gives_zero_and_plus_in_frame() {
        let instrs = prepare_zero_and_plus(&PrepSchedule::Default { zeros: vec![0], pluses: vec![1] }, 0);
        for seed in 0..8 {
            let psi = StateVector::random(2, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut m = Machine::new(psi);
            m.run(&instrs, &mut Sampler::seeded(seed)).unwrap();
            let fixed = m.state().apply_pauli(&m.frame()).unwrap();
            let want = StateVector::basis(1, "0").unwrap().tensor(&StateVector::from_amplitudes(vec![num_complex::Complex64::new(0.5f64.sqrt(), 0.0); 2]).unwrap()).unwrap();
            assert!(equal_up_to_global_phase(&fixed, &want, 1e-9).unwrap());
        }
    }
}
