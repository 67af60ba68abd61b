//! Teleportation-based gate gadgets run on the dense simulator.
//!
//! Every gadget takes the data register, appends its ancilla qubits after the
//! data, measures, and hands back a register of the original size with the
//! output qubit(s) moved into the data slot(s). The measured qubits are in a
//! known product state by then, so dropping them is exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::observable::{Axis, Observable};
use crate::outcome::OutcomeSource;
use crate::pauli::{Pauli, PauliString};
use crate::statevector::{MeasurementOp, SimError, StateVector, MAX_QUBITS};

/// Literal-mode recursion limit. Reaching it has probability `< 4^-1000`.
pub const ROUND_CAP: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GadgetError {
    #[error("correction did not terminate within {0} rounds")]
    Runaway(usize),
    #[error("ancilla pair ({0}, {1}) is not in |Φ₀⟩")]
    BadAncilla(usize, usize),
    #[error("gadget expects a {expected}-qubit gate, got a {got}-qubit one")]
    WrongArity { expected: usize, got: usize },
    #[error("shift index {0} out of range 0..=3")]
    BadShift(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GadgetKind {
    Teleport,
    Indirect1q,
    Indirect1qShifted,
    Indirect2q,
    IndirectBu,
}

impl GadgetKind {
    /// Ancilla qubits consumed per round.
    pub fn ancilla_arity(self) -> usize {
        match self {
            // teleport runs on a pair the caller already holds
            GadgetKind::Teleport => 0,
            GadgetKind::Indirect1q | GadgetKind::Indirect1qShifted | GadgetKind::IndirectBu => 2,
            GadgetKind::Indirect2q => 4,
        }
    }
}

/// How the literal 1-qubit gadget prepares its ancilla.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AncillaMode {
    /// `(I⊗V)|Φ₀⟩` every round.
    Literal,
    /// `(I⊗Vσ_k)|Φ₀⟩` every round, the shifted-ancilla variant.
    Shifted(usize),
}

/// What to do with the Pauli correction of a `B_{U†}` gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionMode {
    Apply,
    /// Leave the state uncorrected and report the correction as a frame.
    Frame,
}

#[derive(Clone, Debug)]
pub struct GadgetTrace {
    pub kind: GadgetKind,
    /// Outcome indices of each round (one Bell index per measured pair).
    pub outcomes: Vec<Vec<usize>>,
    pub rounds: usize,
    /// Register with the gate applied, same size as the input.
    pub final_state: StateVector,
    /// Pending Pauli on the register in frame mode; identity otherwise.
    pub pauli_frame: PauliString,
}

/// Serializable summary of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub kind: GadgetKind,
    pub outcomes: Vec<Vec<usize>>,
    pub rounds: usize,
    pub frame: String,
}

impl GadgetTrace {
    pub fn record(&self) -> TraceRecord {
        TraceRecord {
            kind: self.kind,
            outcomes: self.outcomes.clone(),
            rounds: self.rounds,
            frame: self.pauli_frame.to_string(),
        }
    }
}

/// `(I⊗Uσ_k)|Φ₀⟩`.
pub fn make_gadget_ancilla(u: &Matrix, k: usize) -> Result<StateVector, GadgetError> {
    if k > 3 {
        return Err(GadgetError::BadShift(k));
    }
    if u.dim() != 2 {
        return Err(GadgetError::WrongArity { expected: 1, got: u.dim().trailing_zeros() as usize });
    }
    let op = Matrix::identity(2).kron(&(u * &linalg::sigma(k)));
    Ok(StateVector::normalized(op.apply(StateVector::bell(0)?.amplitudes()))?)
}

/// `(I⊗I⊗U)|Φ₀⟩₁₃|Φ₀⟩₂₄` on qubits ordered 1, 2, 3, 4.
pub fn make_2q_ancilla(u: &Matrix) -> Result<StateVector, GadgetError> {
    if u.dim() != 4 {
        return Err(GadgetError::WrongArity { expected: 2, got: u.dim().trailing_zeros() as usize });
    }
    let pairs = StateVector::bell(0)?.tensor(&StateVector::bell(0)?)?.permute(&[0, 2, 1, 3])?;
    Ok(pairs.apply_matrix(u, &[2, 3])?)
}

// Drops measured qubits; `keep` lists the surviving qubits in output order.
fn settle(state: &StateVector, keep: &[usize]) -> Result<StateVector, GadgetError> {
    Ok(state.extract(keep)?)
}

fn data_slots(n: usize, replace: &[(usize, usize)]) -> Vec<usize> {
    (0..n)
        .map(|q| replace.iter().find(|(d, _)| *d == q).map_or(q, |&(_, out)| out))
        .collect()
}

fn check_room(n: usize, extra: usize) -> Result<(), GadgetError> {
    if n + extra > MAX_QUBITS {
        return Err(SimError::TooManyQubits(n + extra).into());
    }
    Ok(())
}

/// Teleports qubit `src_q` through the pair `(a, b)`, which must hold
/// `|Φ₀⟩`. The state of `src_q` ends up on `b` after the `σ_j` correction.
/// `final_state` keeps the full register.
pub fn teleport(
    s: &StateVector,
    src_q: usize,
    (a, b): (usize, usize),
    src: &mut dyn OutcomeSource,
) -> Result<GadgetTrace, GadgetError> {
    let n = s.n_qubits();
    let xx = PauliString::from_paulis(&[Pauli::X, Pauli::X]).expect("two letters").embed(n, &[a, b]);
    let zz = PauliString::from_paulis(&[Pauli::Z, Pauli::Z]).expect("two letters").embed(n, &[a, b]);
    for p in [xx, zz] {
        let p = p.map_err(SimError::from)?;
        if (s.expectation_pauli(&p)? - 1.0).abs() > 1e-9 {
            return Err(GadgetError::BadAncilla(a, b));
        }
    }
    let m = s.measure(&MeasurementOp::bell(), &[src_q, a], src)?;
    let j = m.index;
    let out = m.state.apply_matrix(&linalg::sigma(j), &[b])?;
    Ok(GadgetTrace {
        kind: GadgetKind::Teleport,
        outcomes: vec![vec![j]],
        rounds: 1,
        final_state: out,
        pauli_frame: PauliString::identity(n),
    })
}

// One teleport through `(I⊗Vσ_k)|Φ₀⟩`: returns the Bell index and the
// register with the output moved back into slot `q`.
fn gate_round(
    s: &StateVector,
    q: usize,
    v: &Matrix,
    k: usize,
    src: &mut dyn OutcomeSource,
) -> Result<(usize, StateVector), GadgetError> {
    let n = s.n_qubits();
    let big = s.tensor(&make_gadget_ancilla(v, k)?)?;
    let m = big.measure(&MeasurementOp::bell(), &[q, n], src)?;
    Ok((m.index, settle(&m.state, &data_slots(n, &[(q, n + 1)]))?))
}

fn pauli_index_product(a: usize, b: usize) -> usize {
    let (pa, pb) = (Pauli::from_index(a).expect("index"), Pauli::from_index(b).expect("index"));
    let ((xa, za), (xb, zb)) = (pa.bits(), pb.bits());
    Pauli::from_bits(xa ^ xb, za ^ zb).index()
}

/// Indirect 1-qubit gate with the recursive correction: a round through
/// `(I⊗Vσ_k)|Φ₀⟩` leaves `Vσ_kσ_j` applied, so the next pending gate is
/// `V(σ_kσ_j)†V†`, until `σ_kσ_j ∝ I`.
pub fn indirect_gate_1q(
    s: &StateVector,
    q: usize,
    u: &Matrix,
    mode: AncillaMode,
    src: &mut dyn OutcomeSource,
) -> Result<GadgetTrace, GadgetError> {
    if u.dim() != 2 {
        return Err(GadgetError::WrongArity { expected: 1, got: u.dim().trailing_zeros() as usize });
    }
    check_room(s.n_qubits(), 2)?;
    let (k, kind) = match mode {
        AncillaMode::Literal => (0, GadgetKind::Indirect1q),
        AncillaMode::Shifted(k) if k <= 3 => (k, GadgetKind::Indirect1qShifted),
        AncillaMode::Shifted(k) => return Err(GadgetError::BadShift(k)),
    };
    let mut state = s.clone();
    let mut pending = u.clone();
    let mut outcomes = Vec::new();
    while outcomes.len() < ROUND_CAP {
        let (j, next) = gate_round(&state, q, &pending, k, src)?;
        outcomes.push(vec![j]);
        state = next;
        let residual = pauli_index_product(k, j);
        if residual == 0 {
            return Ok(GadgetTrace {
                kind,
                rounds: outcomes.len(),
                outcomes,
                final_state: state,
                pauli_frame: PauliString::identity(s.n_qubits()),
            });
        }
        let sig = linalg::sigma(residual);
        // each conjugation roughly doubles rounding error, so re-project
        pending = linalg::orthonormalize(&(&(&pending * &sig) * &pending.adjoint()));
    }
    Err(GadgetError::Runaway(ROUND_CAP))
}

/// Single-qubit Pauli letter proportional to `m`, if any.
pub fn as_pauli_1q(m: &Matrix) -> Option<Pauli> {
    (0..4).find(|&j| m.approx_eq_up_to_phase(&linalg::sigma(j), 1e-9)).and_then(Pauli::from_index)
}

/// Two-qubit Pauli product proportional to `m`, if any.
pub fn as_pauli_2q(m: &Matrix) -> Option<(Pauli, Pauli)> {
    for a in 0..4 {
        for b in 0..4 {
            if m.approx_eq_up_to_phase(&linalg::sigma(a).kron(&linalg::sigma(b)), 1e-9) {
                return Some((Pauli::from_index(a)?, Pauli::from_index(b)?));
            }
        }
    }
    None
}

/// True if `u` maps every 2-qubit Pauli product to a Pauli product.
pub fn is_clifford_2q(u: &Matrix) -> bool {
    let gens = [(1, 0), (3, 0), (0, 1), (0, 3)];
    gens.iter().all(|&(a, b)| {
        let p = linalg::sigma(a).kron(&linalg::sigma(b));
        as_pauli_2q(&(&(u * &p) * &u.adjoint())).is_some()
    })
}

/// Indirect 2-qubit gate on data qubits `(q1, q2)`.
///
/// The ancilla is `(σ_k⊗σ_l⊗I⊗I)(I⊗I⊗U)|Φ₀⟩₁₃|Φ₀⟩₂₄` for the given
/// `label = (k, l)`; pass `None` to build it with label `(0, 0)`. A round
/// leaves `U(σ_kσ_{j₁} ⊗ σ_lσ_{j₂})` applied. For Clifford `U` the correction
/// that undoes it is a Pauli product, applied directly to end the gadget;
/// otherwise the correction recurses through a fresh unshifted ancilla.
pub fn indirect_gate_2q(
    s: &StateVector,
    (q1, q2): (usize, usize),
    u: &Matrix,
    ancilla: Option<(&StateVector, (usize, usize))>,
    src: &mut dyn OutcomeSource,
) -> Result<GadgetTrace, GadgetError> {
    if u.dim() != 4 {
        return Err(GadgetError::WrongArity { expected: 2, got: u.dim().trailing_zeros() as usize });
    }
    let n = s.n_qubits();
    check_room(n, 4)?;
    let mut state = s.clone();
    let mut pending = u.clone();
    let mut outcomes = Vec::new();
    let mut supplied = ancilla;
    let clifford = is_clifford_2q(u);
    while outcomes.len() < ROUND_CAP {
        let (anc, (k, l)) = match supplied.take() {
            Some((a, label)) => {
                if a.n_qubits() != 4 || label.0 > 3 || label.1 > 3 {
                    return Err(GadgetError::BadShift(label.0.max(label.1)));
                }
                (a.clone(), label)
            }
            None => (make_2q_ancilla(&pending)?, (0, 0)),
        };
        let big = state.tensor(&anc)?;
        let m1 = big.measure(&MeasurementOp::bell(), &[q1, n], src)?;
        let m2 = m1.state.measure(&MeasurementOp::bell(), &[q2, n + 1], src)?;
        let (j1, j2) = (m1.index, m2.index);
        outcomes.push(vec![j1, j2]);
        state = settle(&m2.state, &data_slots(n, &[(q1, n + 2), (q2, n + 3)]))?;
        let (r1, r2) = (pauli_index_product(k, j1), pauli_index_product(l, j2));
        if (r1, r2) == (0, 0) {
            break;
        }
        let residual = linalg::sigma(r1).kron(&linalg::sigma(r2));
        let correction = &(&pending * &residual) * &pending.adjoint();
        if clifford {
            state = state.apply_matrix(&correction, &[q1, q2])?;
            break;
        }
        pending = linalg::orthonormalize(&correction);
    }
    if outcomes.len() >= ROUND_CAP {
        return Err(GadgetError::Runaway(ROUND_CAP));
    }
    Ok(GadgetTrace {
        kind: GadgetKind::Indirect2q,
        rounds: outcomes.len(),
        outcomes,
        final_state: state,
        pauli_frame: PauliString::identity(n),
    })
}

/// Bell index of the joint `(XX, ZZ)` signs: `Φ₀ = (+,+)`, `Φ₁ = (+,−)`,
/// `Φ₂ = (−,−)`, `Φ₃ = (−,+)`.
pub fn bell_index_from_signs(xx: i8, zz: i8) -> usize {
    match (xx > 0, zz > 0) {
        (true, true) => 0,
        (true, false) => 1,
        (false, false) => 2,
        (false, true) => 3,
    }
}

/// The two commuting observables `(U†XU)⊗X` and `(U†ZU)⊗Z` whose joint
/// eigenbasis is `{(U†⊗I)|Φ_j⟩}`; the sign pair maps to `j` exactly as for
/// the plain Bell measurement.
pub fn bu_observables(u: &Matrix) -> Result<(Observable, Observable), GadgetError> {
    if u.dim() != 2 || !u.is_unitary(1e-10) {
        return Err(SimError::NotUnitary.into());
    }
    let conj = |p: Matrix| Axis::from_matrix(&(&(&u.adjoint() * &p) * u));
    Ok((
        Observable::pair(conj(linalg::pauli_x()), Axis::X),
        Observable::pair(conj(linalg::pauli_z()), Axis::Z),
    ))
}

/// `bu_observables` as signed Pauli strings when `U` is Clifford.
pub fn bu_pauli_observables(u: &Matrix) -> Result<Option<(PauliString, PauliString)>, GadgetError> {
    let (a, b) = bu_observables(u)?;
    Ok(a.as_pauli().zip(b.as_pauli()))
}

/// Gadget with the measurement `B_{U†}` along `{(U†⊗I)|Φ_j⟩}`: one round
/// always, leaving `σ_j U` on the data, so the correction is the Pauli `σ_j`.
pub fn indirect_gate_bu(
    s: &StateVector,
    q: usize,
    u: &Matrix,
    mode: CorrectionMode,
    src: &mut dyn OutcomeSource,
) -> Result<GadgetTrace, GadgetError> {
    if u.dim() != 2 {
        return Err(GadgetError::WrongArity { expected: 1, got: u.dim().trailing_zeros() as usize });
    }
    let n = s.n_qubits();
    check_room(n, 2)?;
    let big = s.tensor(&StateVector::bell(0)?)?;
    let m = big.measure(&MeasurementOp::rotated_bell(&u.adjoint())?, &[q, n], src)?;
    let j = m.index;
    let out = settle(&m.state, &data_slots(n, &[(q, n + 1)]))?;
    let sigma = PauliString::single(n, q, Pauli::from_index(j).expect("Bell index")).map_err(SimError::from)?;
    let (final_state, pauli_frame) = match mode {
        CorrectionMode::Apply => (out.apply_pauli(&sigma)?, PauliString::identity(n)),
        CorrectionMode::Frame => (out, sigma),
    };
    Ok(GadgetTrace { kind: GadgetKind::IndirectBu, outcomes: vec![vec![j]], rounds: 1, final_state, pauli_frame })
}
