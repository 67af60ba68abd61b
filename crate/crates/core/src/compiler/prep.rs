//! Preparation and readout fragments built from the set's single-qubit
//! operators and `ZZ`.

use super::program::{Instr, Purpose};
use crate::observable::{Axis, Observable};
use crate::pauli::Pauli;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrepSchedule {
    /// One `Z` measurement per `zeros` qubit and one `X` measurement per
    /// `pluses` qubit, each followed by the frame fix for a `−1` outcome.
    Default { zeros: Vec<usize>, pluses: Vec<usize> },
    /// `ZZ` on every pair of three qubits. The all-`+1` branch lands in
    /// `span{|000⟩, |111⟩}`; other branches are bit-flipped versions of it.
    Parity([usize; 3]),
}

fn measure(slot: usize, axis: Axis, targets: Vec<usize>, purpose: Purpose) -> Instr {
    let observable = if targets.len() == 1 { Observable::single(axis) } else { Observable::pair(axis, axis) };
    Instr::Measure { slot, observable, targets, relabel: false, purpose }
}

/// Instructions preparing the schedule, using slots from `first_slot` on.
pub fn prepare_zero_and_plus(schedule: &PrepSchedule, first_slot: usize) -> Vec<Instr> {
    let mut slot = first_slot;
    let mut out = Vec::new();
    match schedule {
        PrepSchedule::Default { zeros, pluses } => {
            for (qs, axis, fix) in [(zeros, Axis::Z, Pauli::X), (pluses, Axis::X, Pauli::Z)] {
                for &q in qs {
                    out.push(measure(slot, axis, vec![q], Purpose::AncillaPrep));
                    out.push(Instr::XorIf { slot, qubit: q, pauli: fix });
                    slot += 1;
                }
            }
        }
        PrepSchedule::Parity([a, b, c]) => {
            for pair in [[*a, *b], [*a, *c], [*b, *c]] {
                let mut t = pair.to_vec();
                t.sort_unstable();
                out.push(measure(slot, Axis::Z, t, Purpose::AncillaPrep));
                slot += 1;
            }
        }
    }
    out
}

/// Z-basis readout of the qubit at `q` into logical bit `logical`, using a
/// scratch qubit `r` and slots `first_slot` and `first_slot + 1`.
///
/// `r` is reset to `|0⟩` in the frame, then `ZZ(q, r)` gives the physical
/// parity; frame X bits on `q` and `r` flip the reported value.
pub fn readout(logical: usize, q: usize, r: usize, first_slot: usize) -> Vec<Instr> {
    let mut t = vec![q, r];
    t.sort_unstable();
    vec![
        measure(first_slot, Axis::Z, vec![r], Purpose::Readout),
        Instr::XorIf { slot: first_slot, qubit: r, pauli: Pauli::X },
        measure(first_slot + 1, Axis::Z, t, Purpose::Readout),
        Instr::Report { logical, slot: first_slot + 1, qubits: [q, r] },
    ]
}
