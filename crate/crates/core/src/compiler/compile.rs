//! Gate circuit to measurement program.
//!
//! Logical qubit `i` starts on physical qubit `i`. Each gate is replaced by a
//! gadget that moves the logical qubit onto fresh physical qubits; freed
//! qubits go back on a free list and are reused lowest index first, so a
//! program never needs more than `n + 4` physical qubits (one more with
//! readout).
//!
//! Frame conventions: the physical state of the outputs is `F·ψ` where `F`
//! is the tracked Pauli frame. Each pair preparation and each Bell-type
//! measurement contributes a Pauli to the frame. A `−1` on an `XX`-type
//! observable adds `Z`, a `−1` on a `ZZ`-type observable adds `X`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::circuit::{CircuitGate, GateCircuit};
use super::prep;
use super::program::{Condition, FrameBit, Instr, MeasurementProgram, Mode, Purpose};
use super::sets::{RotAxis, UniversalSet};
use super::CompileError;
use crate::ancilla::SCHEDULE;
use crate::gadgets::bu_observables;
use crate::linalg::Matrix;
use crate::observable::{canonicalize, Axis, Observable};
use crate::pauli::{CliffordGate, Pauli};
use crate::statevector::{GateKind, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub mode: Mode,
    /// Append a Z-basis readout of every logical qubit.
    pub readout: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { mode: Mode::Frame, readout: false }
    }
}

pub fn compile(circuit: &GateCircuit, set: &UniversalSet, mode: Mode) -> Result<MeasurementProgram, CompileError> {
    compile_with(circuit, set, CompileOptions { mode, readout: false })
}

/// The gadget chosen for one single-qubit step.
#[derive(Clone, Debug)]
enum Step {
    Clifford(CliffordGate, Matrix),
    /// The native rotation, realized forwards (`true`) or inverted.
    Native(bool),
}

pub(super) struct Builder {
    free: Vec<usize>,
    high_water: usize,
    next_slot: usize,
    gadgets: usize,
}

impl Builder {
    pub(super) fn new(n_busy: usize) -> Self {
        Self { free: Vec::new(), high_water: n_busy, next_slot: 0, gadgets: 0 }
    }

    pub(super) fn alloc(&mut self) -> usize {
        if self.free.is_empty() {
            self.high_water += 1;
            return self.high_water - 1;
        }
        let (i, _) = self.free.iter().enumerate().min_by_key(|(_, q)| **q).expect("nonempty");
        self.free.swap_remove(i)
    }

    fn release(&mut self, q: usize) {
        debug_assert!(!self.free.contains(&q));
        self.free.push(q);
    }

    pub(super) fn measure(&mut self, out: &mut Vec<Instr>, obs: &Observable, targets: &[usize], purpose: Purpose) -> usize {
        let (observable, targets, relabel) = canonicalize(obs, targets);
        let slot = self.next_slot;
        self.next_slot += 1;
        out.push(Instr::Measure { slot, observable, targets, relabel, purpose });
        slot
    }

    fn xx_zz(&mut self, out: &mut Vec<Instr>, a: usize, b: usize, purpose: Purpose) -> (usize, usize) {
        let xx = self.measure(out, &Observable::pair(Axis::X, Axis::X), &[a, b], purpose);
        let zz = self.measure(out, &Observable::pair(Axis::Z, Axis::Z), &[a, b], purpose);
        (xx, zz)
    }

    fn bell_frame(out: &mut Vec<Instr>, (xx, zz): (usize, usize), q: usize) {
        out.push(Instr::XorIf { slot: xx, qubit: q, pauli: Pauli::Z });
        out.push(Instr::XorIf { slot: zz, qubit: q, pauli: Pauli::X });
    }

    /// Teleports `a` onto `c` through helper `b`.
    fn teleport(&mut self, out: &mut Vec<Instr>, a: usize, b: usize, c: usize, purpose: Purpose) {
        let pair = self.xx_zz(out, b, c, purpose);
        let bell = self.xx_zz(out, a, b, purpose);
        out.push(Instr::Transfer { from: a, to: c });
        Self::bell_frame(out, bell, c);
        Self::bell_frame(out, pair, c);
    }

    /// `a → c → a`; leaves the logical state on `a` with a fresh random frame.
    fn double_teleport(&mut self, a: usize, b: usize, c: usize) -> Vec<Instr> {
        let mut body = Vec::new();
        self.teleport(&mut body, a, b, c, Purpose::CorrectionAbsorb);
        self.teleport(&mut body, c, b, a, Purpose::CorrectionAbsorb);
        body
    }

    fn repeat_until(&mut self, out: &mut Vec<Instr>, q: usize, condition: Condition) {
        let b = self.alloc();
        let c = self.alloc();
        let body = self.double_teleport(q, b, c);
        out.push(Instr::RepeatWhile { condition, body });
        self.release(b);
        self.release(c);
    }

    /// The `B_{V†}` gadget on the qubit at `a`; returns the new location.
    /// A Clifford `V` is given as a gate whose target is rewritten to it.
    fn bu_gadget(&mut self, out: &mut Vec<Instr>, a: usize, v: &Matrix, clifford: Option<CliffordGate>) -> usize {
        let b = self.alloc();
        let c = self.alloc();
        let pair = self.xx_zz(out, b, c, Purpose::AncillaPrep);
        let (o1, o2) = bu_observables(v).expect("gadget matrices are unitary");
        let s1 = self.measure(out, &o1, &[a, b], Purpose::Teleport);
        let s2 = self.measure(out, &o2, &[a, b], Purpose::Teleport);
        out.push(Instr::Transfer { from: a, to: c });
        if let Some(g) = clifford {
            out.push(Instr::Conjugate { gate: retarget(&g, c) });
        }
        Self::bell_frame(out, (s1, s2), c);
        Self::bell_frame(out, pair, c);
        self.release(a);
        self.release(b);
        self.gadgets += 1;
        c
    }

    fn cnot_gadget(&mut self, out: &mut Vec<Instr>, d1: usize, d2: usize) -> (usize, usize) {
        let a: Vec<usize> = (0..4).map(|_| self.alloc()).collect();
        let s: Vec<usize> = SCHEDULE
            .iter()
            .map(|step| {
                let obs = Observable::from_pauli(&step.pauli()).expect("schedule observables are Hermitian");
                let t: Vec<usize> = step.target_slice().iter().map(|&i| a[i]).collect();
                self.measure(out, &obs, &t, Purpose::AncillaPrep)
            })
            .collect();
        let b1 = self.xx_zz(out, d1, a[0], Purpose::Teleport);
        let b2 = self.xx_zz(out, d2, a[1], Purpose::Teleport);
        out.push(Instr::Transfer { from: d1, to: a[2] });
        out.push(Instr::Transfer { from: d2, to: a[3] });
        Self::bell_frame(out, b1, a[2]);
        Self::bell_frame(out, b2, a[3]);
        let xor = |slot: usize, qubit: usize, pauli: Pauli| Instr::XorIf { slot: s[slot], qubit, pauli };
        out.extend([
            xor(5, a[2], Pauli::X),
            xor(0, a[2], Pauli::Z),
            xor(2, a[2], Pauli::Z),
            xor(1, a[3], Pauli::X),
            xor(3, a[3], Pauli::X),
            xor(2, a[3], Pauli::Z),
            xor(4, a[3], Pauli::Z),
        ]);
        out.push(Instr::Conjugate { gate: CliffordGate::Cnot { control: a[2], target: a[3] } });
        for q in [d1, d2, a[0], a[1]] {
            self.release(q);
        }
        self.gadgets += 1;
        (a[2], a[3])
    }

    fn step(&mut self, out: &mut Vec<Instr>, set: &UniversalSet, mode: Mode, a: usize, step: &Step) -> usize {
        let c = match step {
            Step::Clifford(g, m) => self.bu_gadget(out, a, m, Some(*g)),
            Step::Native(forward) => {
                let native = set.native_rotation();
                let bit = match native.axis {
                    RotAxis::Z => FrameBit::X,
                    RotAxis::X => FrameBit::Z,
                };
                // the gadget inverts V exactly when this frame bit is set
                self.repeat_until(out, a, Condition::BitIs { qubit: a, bit, value: *forward });
                self.bu_gadget(out, a, &native.matrix(), None)
            }
        };
        if mode == Mode::Literal {
            self.repeat_until(out, c, Condition::NotIdentity { qubit: c });
        }
        c
    }
}

fn retarget(g: &CliffordGate, q: usize) -> CliffordGate {
    match g {
        CliffordGate::H(_) => CliffordGate::H(q),
        CliffordGate::P(_) => CliffordGate::P(q),
        other => *other,
    }
}

fn near(x: f64, y: f64) -> bool {
    let r = (x - y).rem_euclid(2.0 * PI);
    r < 1e-9 || 2.0 * PI - r < 1e-9
}

/// Single-qubit gadget steps for a Z or X rotation by `phi`, or a reason why
/// the set cannot express it.
fn rotation_steps(set: &UniversalSet, axis: RotAxis, phi: f64) -> Result<Vec<Step>, String> {
    let h = Step::Clifford(CliffordGate::H(0), GateKind::H.matrix());
    let native = set.native_rotation();
    let core = if let Some(c) = set.native_multiple(phi) {
        vec![Step::Native(c > 0); c.unsigned_abs() as usize]
    } else if let Some(m) = (0..4).find(|&m| near(m as f64 * FRAC_PI_2, phi)).filter(|_| set.has_phase_gadget()) {
        // RZ(mπ/2) = P^m up to global phase
        let p = Step::Clifford(CliffordGate::P(0), GateKind::P.matrix());
        let steps = vec![p; m];
        return Ok(if axis == RotAxis::X { wrap(h, steps) } else { steps });
    } else {
        return Err(format!("angle {phi} is not an integer multiple (|c| ≤ 8) of the native {native}"));
    };
    Ok(if axis == native.axis { core } else { wrap(h, core) })
}

fn wrap(h: Step, inner: Vec<Step>) -> Vec<Step> {
    if inner.is_empty() {
        return inner;
    }
    let mut v = vec![h.clone()];
    v.extend(inner);
    v.push(h);
    v
}

fn gate_steps(set: &UniversalSet, gate: &CircuitGate) -> Result<Vec<Step>, String> {
    match *gate {
        CircuitGate::H(_) => Ok(vec![Step::Clifford(CliffordGate::H(0), GateKind::H.matrix())]),
        CircuitGate::P(_) if set.has_phase_gadget() => {
            Ok(vec![Step::Clifford(CliffordGate::P(0), GateKind::P.matrix())])
        }
        CircuitGate::P(_) => rotation_steps(set, RotAxis::Z, FRAC_PI_2),
        CircuitGate::Rz(_, t) => rotation_steps(set, RotAxis::Z, t),
        CircuitGate::Rx(_, t) => rotation_steps(set, RotAxis::X, t),
        CircuitGate::Cnot(..) => unreachable!("two-qubit gates are handled by the caller"),
    }
}

pub fn compile_with(
    circuit: &GateCircuit,
    set: &UniversalSet,
    options: CompileOptions,
) -> Result<MeasurementProgram, CompileError> {
    let n = circuit.n_qubits;
    GateCircuit::new(n, circuit.gates.clone()).map_err(CompileError::Circuit)?;
    let mut b = Builder::new(n);
    let mut loc: Vec<usize> = (0..n).collect();
    let mut instrs = Vec::new();
    for (index, gate) in circuit.gates.iter().enumerate() {
        if let CircuitGate::Cnot(c, t) = *gate {
            let (x, y) = b.cnot_gadget(&mut instrs, loc[c], loc[t]);
            loc[c] = x;
            loc[t] = y;
            if options.mode == Mode::Literal {
                b.repeat_until(&mut instrs, x, Condition::NotIdentity { qubit: x });
                b.repeat_until(&mut instrs, y, Condition::NotIdentity { qubit: y });
            }
            continue;
        }
        let q = gate.qubits()[0];
        let steps = gate_steps(set, gate).map_err(|reason| CompileError::Inexpressible {
            index,
            gate: gate.to_string(),
            set: set.id.to_string(),
            reason,
        })?;
        for s in &steps {
            loc[q] = b.step(&mut instrs, set, options.mode, loc[q], s);
        }
    }
    if options.readout {
        for (logical, &q) in loc.iter().enumerate() {
            let r = b.alloc();
            let first = b.next_slot;
            let frag = prep::readout(logical, q, r, first);
            b.next_slot += 2;
            instrs.extend(frag);
        }
    }
    if b.high_water > MAX_QUBITS {
        return Err(CompileError::TooManyQubits(b.high_water));
    }
    Ok(MeasurementProgram {
        set: set.clone(),
        mode: options.mode,
        n_logical: n,
        n_physical: b.high_water,
        inputs: (0..n).collect(),
        outputs: loc,
        instrs,
        n_slots: b.next_slot,
        gadgets: b.gadgets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::sets::SetId;

    fn s3() -> UniversalSet {
        UniversalSet::new(SetId::S3, None).unwrap()
    }

    #[test]
    fn allocator_prefers_low_indices() {
        let mut b = Builder::new(2);
        assert_eq!((b.alloc(), b.alloc()), (2, 3));
        b.release(3);
        b.release(0);
        assert_eq!(b.alloc(), 0);
        assert_eq!(b.alloc(), 3);
        assert_eq!(b.alloc(), 4);
    }

    #[test]
    fn hadamard_program_shape() {
        let c: GateCircuit = "H 0".parse().unwrap();
        let p = compile(&c, &s3(), Mode::Frame).unwrap();
        assert_eq!(p.n_physical, 3);
        assert_eq!(p.outputs, vec![2]);
        assert_eq!(p.static_measurement_count(), 4);
        assert_eq!(p.loop_count(), 0);
        assert!(p.foreign_observables().is_empty());
        assert!(p.instrs.contains(&Instr::Conjugate { gate: CliffordGate::H(2) }));
    }

    #[test]
    fn phase_under_s3_is_two_inverted_native_gadgets() {
        let c: GateCircuit = "P 0".parse().unwrap();
        let p = compile(&c, &s3(), Mode::Frame).unwrap();
        assert_eq!(p.gadgets, 2);
        assert_eq!(p.loop_count(), 2);
        let conds: Vec<Condition> = p
            .instrs
            .iter()
            .filter_map(|i| match i {
                Instr::RepeatWhile { condition, .. } => Some(*condition),
                _ => None,
            })
            .collect();
        assert!(conds.iter().all(|c| matches!(c, Condition::BitIs { bit: FrameBit::X, value: false, .. })));
    }

    #[test]
    fn cnot_stays_within_four_extra_qubits() {
        let c: GateCircuit = "CNOT 0 1\nCNOT 1 0\nH 1\nCNOT 0 1".parse().unwrap();
        let p = compile(&c, &s3(), Mode::Frame).unwrap();
        assert!(p.n_physical <= 6, "{}", p.n_physical);
        assert_eq!(p.max_arity(), 2);
    }

    #[test]
    fn inexpressible_angle() {
        let c: GateCircuit = "RZ 0 0.1".parse().unwrap();
        match compile(&c, &s3(), Mode::Frame).unwrap_err() {
            CompileError::Inexpressible { index, .. } => assert_eq!(index, 0),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn x_rotations_use_hadamard_conjugation() {
        let c: GateCircuit = "RX 0 pi/4".parse().unwrap();
        let p = compile(&c, &s3(), Mode::Frame).unwrap();
        assert_eq!(p.gadgets, 3);
    }

    #[test]
    fn literal_mode_adds_absorb_loops() {
        let c: GateCircuit = "H 0".parse().unwrap();
        let p = compile(&c, &s3(), Mode::Literal).unwrap();
        assert_eq!(p.loop_count(), 1);
        assert!(p.measurements().iter().any(|m| m.2 == Purpose::CorrectionAbsorb));
    }

    #[test]
    fn empty_circuit_has_no_instructions() {
        let p = compile(&GateCircuit::empty(2), &s3(), Mode::Frame).unwrap();
        assert!(p.instrs.is_empty());
        assert_eq!(p.outputs, vec![0, 1]);
    }
}
