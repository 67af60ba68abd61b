//! Gate circuits over `{CNOT, H, P, RZ(θ), RX(θ)}` and their text format.
//!
//! One gate per line, `GATE q [q2] [theta]`, `#` starts a comment. Angles
//! accept plain floats or multiples of `pi` such as `pi/4`, `-3*pi/8`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevector::{Gate, SimError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CircuitGate {
    H(usize),
    P(usize),
    Cnot(usize, usize),
    Rz(usize, f64),
    Rx(usize, f64),
}

impl CircuitGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CircuitGate::H(q) | CircuitGate::P(q) | CircuitGate::Rz(q, _) | CircuitGate::Rx(q, _) => vec![q],
            CircuitGate::Cnot(c, t) => vec![c, t],
        }
    }

    pub fn to_gate(&self) -> Gate {
        match *self {
            CircuitGate::H(q) => Gate::h(q),
            CircuitGate::P(q) => Gate::p(q),
            CircuitGate::Cnot(c, t) => Gate::cnot(c, t),
            CircuitGate::Rz(q, t) => Gate::rz(q, t),
            CircuitGate::Rx(q, t) => Gate::rx(q, t),
        }
    }
}

impl fmt::Display for CircuitGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitGate::H(q) => write!(f, "H {q}"),
            CircuitGate::P(q) => write!(f, "P {q}"),
            CircuitGate::Cnot(c, t) => write!(f, "CNOT {c} {t}"),
            CircuitGate::Rz(q, t) => write!(f, "RZ {q} {t}"),
            CircuitGate::Rx(q, t) => write!(f, "RX {q} {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCircuit {
    pub n_qubits: usize,
    pub gates: Vec<CircuitGate>,
}

impl GateCircuit {
    /// Checks every gate fits in `n_qubits` and two-qubit gates have
    /// distinct targets.
    pub fn new(n_qubits: usize, gates: Vec<CircuitGate>) -> Result<Self, String> {
        if n_qubits == 0 {
            return Err("a circuit needs at least one qubit".into());
        }
        for g in &gates {
            let qs = g.qubits();
            if let Some(q) = qs.iter().find(|&&q| q >= n_qubits) {
                return Err(format!("{g}: qubit {q} out of range for {n_qubits} qubits"));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(format!("{g}: control and target must differ"));
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits: n_qubits.max(1), gates: Vec::new() }
    }

    /// Applies the circuit unitary directly; this is the oracle the
    /// compiled programs are checked against.
    pub fn apply(&self, input: &StateVector) -> Result<StateVector, SimError> {
        if input.n_qubits() != self.n_qubits {
            return Err(SimError::DimensionMismatch(input.n_qubits(), self.n_qubits));
        }
        self.gates.iter().try_fold(input.clone(), |s, g| s.apply_gate(&g.to_gate()))
    }

    /// Uniformly random circuit drawn from `pool`; each entry is a gate on
    /// qubit 0 (and 1) that gets moved onto random targets.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, len: usize, pool: &[CircuitGate], rng: &mut R) -> Self {
        let gates = (0..len)
            .map(|_| {
                let q = rng.gen_range(0..n_qubits);
                match pool[rng.gen_range(0..pool.len())] {
                    CircuitGate::H(_) => CircuitGate::H(q),
                    CircuitGate::P(_) => CircuitGate::P(q),
                    CircuitGate::Rz(_, t) => CircuitGate::Rz(q, t),
                    CircuitGate::Rx(_, t) => CircuitGate::Rx(q, t),
                    CircuitGate::Cnot(..) if n_qubits > 1 => {
                        let t = (q + rng.gen_range(1..n_qubits)) % n_qubits;
                        CircuitGate::Cnot(q, t)
                    }
                    CircuitGate::Cnot(..) => CircuitGate::H(q),
                }
            })
            .collect();
        Self { n_qubits, gates }
    }
}

impl fmt::Display for GateCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Parses `3.1`, `pi`, `-pi/4`, `3*pi/8`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Option<f64> {
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (body, 1.0),
    };
    let coeff = match num.split_once('*') {
        Some((c, "pi")) => c.parse::<f64>().ok()?,
        None if num == "pi" => 1.0,
        _ => return None,
    };
    Some(sign * coeff * PI / den)
}

/// Circuit text. A `QUBITS n` line fixes the register size; otherwise it is
/// one more than the largest qubit index used.
impl FromStr for GateCircuit {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, ParseError> {
        let mut gates = Vec::new();
        let mut declared = None;
        let mut used = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| ParseError { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let words: Vec<&str> = body.split_whitespace().collect();
            let name = words[0].to_ascii_uppercase();
            let qubit = |k: usize| -> Result<usize, ParseError> {
                let w = words.get(k).ok_or_else(|| err(format!("{name} needs more operands")))?;
                w.parse().map_err(|_| err(format!("bad qubit index {w:?}")))
            };
            let angle = |k: usize| -> Result<f64, ParseError> {
                let w = words.get(k).ok_or_else(|| err(format!("{name} needs an angle")))?;
                parse_angle(w).ok_or_else(|| err(format!("bad angle {w:?}")))
            };
            let arity = match name.as_str() {
                "QUBITS" => 1,
                "H" | "P" => 1,
                "CNOT" | "RZ" | "RX" => 2,
                _ => return Err(err(format!("unknown gate {:?}", words[0]))),
            };
            if words.len() != arity + 1 {
                return Err(err(format!("{name} takes {arity} operand(s), got {}", words.len() - 1)));
            }
            let gate = match name.as_str() {
                "QUBITS" => {
                    let n = qubit(1)?;
                    if n == 0 || declared.is_some() || !gates.is_empty() {
                        return Err(err("QUBITS must come first, once, and be positive".into()));
                    }
                    declared = Some(n);
                    continue;
                }
                "H" => CircuitGate::H(qubit(1)?),
                "P" => CircuitGate::P(qubit(1)?),
                "CNOT" => CircuitGate::Cnot(qubit(1)?, qubit(2)?),
                "RZ" => CircuitGate::Rz(qubit(1)?, angle(2)?),
                _ => CircuitGate::Rx(qubit(1)?, angle(2)?),
            };
            let qs = gate.qubits();
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(err("control and target must differ".into()));
            }
            if let Some(n) = declared {
                if let Some(q) = qs.iter().find(|&&q| q >= n) {
                    return Err(err(format!("qubit {q} out of range for {n} qubits")));
                }
            }
            used = used.max(qs.iter().max().map_or(0, |q| q + 1));
            gates.push(gate);
        }
        let n = declared.unwrap_or(used.max(1));
        Ok(Self { n_qubits: n, gates })
    }
}
