//! Compilation of gate circuits into measurement-only programs.

mod circuit;
mod compile;
mod prep;
mod program;
mod sets;
mod simulate;
mod verify;

use thiserror::Error;

pub use circuit::{parse_angle, CircuitGate, GateCircuit, ParseError};
pub use compile::{compile, compile_with, CompileOptions};
pub use prep::{prepare_zero_and_plus, readout, PrepSchedule};
pub use program::{Condition, FrameBit, Instr, MeasurementProgram, Mode, Purpose};
pub use sets::{set_operators, RotAxis, Rotation, SetError, SetId, UniversalSet};
pub use simulate::{simulate, LogEntry, Machine, SimOutput, SimStats, LOOP_CAP};
pub use verify::{verify_equivalence, TrialFailure, VerifyReport, FIDELITY_TOLERANCE};

use crate::pauli::PauliError;
use crate::statevector::SimError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("gate {index} ({gate}) cannot be compiled with {set}: {reason}")]
    Inexpressible { index: usize, gate: String, set: String, reason: String },
    #[error("invalid circuit: {0}")]
    Circuit(String),
    #[error("program needs {0} physical qubits, more than the simulator's limit")]
    TooManyQubits(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error("input has {got} qubits, program expects {expected}")]
    InputSize { expected: usize, got: usize },
    #[error("loop ran {0} times without meeting its exit condition")]
    Runaway(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}
