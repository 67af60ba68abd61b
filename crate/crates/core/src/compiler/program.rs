//! Measurement-only programs.
//!
//! A program is a list of instructions over a fixed set of physical qubits.
//! Only `Measure` touches the quantum state; everything else updates the
//! classical Pauli frame from recorded outcomes. A slot holds the latest
//! `±1` outcome of the measurement with that id; loops overwrite their
//! slots on every pass.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::sets::UniversalSet;
use crate::observable::Observable;
use crate::pauli::{CliffordGate, Pauli};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Purpose {
    AncillaPrep,
    Teleport,
    CorrectionAbsorb,
    Readout,
}

impl Purpose {
    pub fn tag(self) -> &'static str {
        match self {
            Purpose::AncillaPrep => "ancilla-prep",
            Purpose::Teleport => "teleport",
            Purpose::CorrectionAbsorb => "correction-absorb",
            Purpose::Readout => "readout",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameBit {
    X,
    Z,
}

/// Loop condition over the frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// The given frame bit of `qubit` equals `value`.
    BitIs { qubit: usize, bit: FrameBit, value: bool },
    /// The frame on `qubit` is not the identity.
    NotIdentity { qubit: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Instr {
    /// Measures the canonical `observable` on `targets`. With `relabel` set
    /// the requested observable was `-observable`, so the stored outcome is
    /// negated.
    Measure { slot: usize, observable: Observable, targets: Vec<usize>, relabel: bool, purpose: Purpose },
    /// Multiplies `pauli` into the frame of `qubit` if slot `slot` holds −1.
    XorIf { slot: usize, qubit: usize, pauli: Pauli },
    /// Moves the frame of `from` onto `to`, overwriting it.
    Transfer { from: usize, to: usize },
    /// Conjugates the frame by a Clifford gate on physical qubits.
    Conjugate { gate: CliffordGate },
    /// Repeats `body` while `condition` holds.
    RepeatWhile { condition: Condition, body: Vec<Instr> },
    /// Reports logical bit `logical` as `[slot = −1] ⊕ x(qubits[0]) ⊕ x(qubits[1])`.
    Report { logical: usize, slot: usize, qubits: [usize; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Corrections are repeated until the frame of every output is identity.
    Literal,
    /// Corrections are tracked in the Pauli frame.
    Frame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementProgram {
    pub set: UniversalSet,
    pub mode: Mode,
    pub n_logical: usize,
    pub n_physical: usize,
    /// Physical qubit holding each logical input.
    pub inputs: Vec<usize>,
    /// Physical qubit holding each logical output.
    pub outputs: Vec<usize>,
    pub instrs: Vec<Instr>,
    /// Number of distinct measurement slots.
    pub n_slots: usize,
    /// Gadgets emitted, each one round outside of loops.
    pub gadgets: usize,
}

fn walk<'a>(instrs: &'a [Instr], f: &mut impl FnMut(&'a Instr)) {
    for i in instrs {
        f(i);
        if let Instr::RepeatWhile { body, .. } = i {
            walk(body, f);
        }
    }
}

fn walk_mut(instrs: &mut [Instr], f: &mut impl FnMut(&mut Instr) -> bool) -> bool {
    for i in instrs {
        if f(i) {
            return true;
        }
        if let Instr::RepeatWhile { body, .. } = i {
            if walk_mut(body, f) {
                return true;
            }
        }
    }
    false
}

impl MeasurementProgram {
    /// Every `Measure` instruction, loops included, in program order.
    pub fn measurements(&self) -> Vec<(&Observable, &[usize], Purpose)> {
        let mut out = Vec::new();
        walk(&self.instrs, &mut |i| {
            if let Instr::Measure { observable, targets, purpose, .. } = i {
                out.push((observable, targets.as_slice(), *purpose));
            }
        });
        out
    }

    /// Largest number of qubits any single step touches.
    pub fn max_arity(&self) -> usize {
        self.measurements().iter().map(|(_, t, _)| t.len()).max().unwrap_or(0)
    }

    /// Instructions that would act unitarily on the quantum state. The
    /// instruction set has none, so this is zero by construction.
    pub fn unitary_steps(&self) -> usize {
        0
    }

    /// Observables not in the set (up to sign and order).
    pub fn foreign_observables(&self) -> Vec<Observable> {
        self.measurements()
            .into_iter()
            .filter(|(o, _, _)| !self.set.contains(o))
            .map(|(o, _, _)| o.clone())
            .collect()
    }

    pub fn static_measurement_count(&self) -> usize {
        self.measurements().len()
    }

    pub fn loop_count(&self) -> usize {
        let mut n = 0;
        walk(&self.instrs, &mut |i| {
            if matches!(i, Instr::RepeatWhile { .. }) {
                n += 1;
            }
        });
        n
    }

    /// Flips the relabel flag of the first teleport-purpose measurement, the
    /// negative control for verification. Returns false if there is none.
    pub fn inject_fault(&mut self) -> bool {
        walk_mut(&mut self.instrs, &mut |i| match i {
            Instr::Measure { relabel, purpose: Purpose::Teleport, .. } => {
                *relabel = !*relabel;
                true
            }
            _ => false,
        })
    }
}

fn qubit_list(t: &[usize]) -> String {
    t.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

fn write_instrs(out: &mut String, instrs: &[Instr], depth: usize) {
    let pad = "  ".repeat(depth);
    for i in instrs {
        match i {
            Instr::Measure { slot, observable, targets, relabel, purpose } => {
                let flag = if *relabel { " relabel" } else { "" };
                let _ = writeln!(out, "{pad}m{slot} {} {observable} {}{flag}", purpose.tag(), qubit_list(targets));
            }
            Instr::XorIf { slot, qubit, pauli } => {
                let _ = writeln!(out, "{pad}frame {}@{qubit} if m{slot}", pauli.letter());
            }
            Instr::Transfer { from, to } => {
                let _ = writeln!(out, "{pad}frame move {from}->{to}");
            }
            Instr::Conjugate { gate } => {
                let _ = writeln!(out, "{pad}frame conj {gate}");
            }
            Instr::RepeatWhile { condition, body } => {
                let cond = match condition {
                    Condition::BitIs { qubit, bit, value } => {
                        let b = if *bit == FrameBit::X { 'x' } else { 'z' };
                        format!("{b}({qubit})=={}", u8::from(*value))
                    }
                    Condition::NotIdentity { qubit } => format!("frame({qubit})!=I"),
                };
                let _ = writeln!(out, "{pad}repeat-while {cond} {{");
                write_instrs(out, body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
            Instr::Report { logical, slot, qubits } => {
                let _ = writeln!(out, "{pad}report bit{logical} = m{slot} ^ x({}) ^ x({})", qubits[0], qubits[1]);
            }
        }
    }
}

impl fmt::Display for MeasurementProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Literal => "literal",
            Mode::Frame => "frame",
        };
        let theta = self.set.theta.map(|t| format!(" theta={t}")).unwrap_or_default();
        writeln!(
            f,
            "# set={}{theta} mode={mode} logical={} physical={}",
            self.set.id, self.n_logical, self.n_physical
        )?;
        writeln!(f, "inputs {}", qubit_list(&self.inputs))?;
        let mut body = String::new();
        write_instrs(&mut body, &self.instrs, 0);
        f.write_str(&body)?;
        writeln!(f, "outputs {}", qubit_list(&self.outputs))
    }
}
