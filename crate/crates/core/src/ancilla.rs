//! Preparation of the CNOT ancilla `|a_cn⟩` with 1- and 2-qubit measurements.
//!
//! The schedule on qubits 0..3 is
//!
//! | id | observable | qubits |
//! |----|------------|--------|
//! | 0  | X          | 0      |
//! | 1  | Z          | 1      |
//! | 2  | XX         | 2, 3   |
//! | 3  | ZZ         | 2, 3   |
//! | 4  | P± (= XX)  | 1, 2   |
//! | 5  | ZZ         | 0, 2   |
//!
//! Writing `s_i` for "measurement `i` returned −1", the register ends in
//! `(σ_k⊗σ_l⊗I⊗I)|a_cn⟩` with `σ_k = X^{s5} Z^{s0⊕s2}` and
//! `σ_l = X^{s1⊕s3} Z^{s2⊕s4}` (up to phase). Every branch is therefore a
//! usable shifted ancilla and no retry is ever needed.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadgets::{indirect_gate_2q, GadgetError};
use crate::linalg::{self, Matrix, ONE, ZERO};
use crate::outcome::{Forced, OutcomeSource};
use crate::pauli::{Pauli, PauliString};
use crate::stabilizer::{StabilizerError, StabilizerTableau};
use crate::statevector::{equal_up_to_global_phase, GateKind, MeasurementOp, SimError, StateVector};

/// Overlap threshold for accepting a branch label.
pub const LABEL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AncillaError {
    #[error("state is not (σ_k⊗σ_l⊗I⊗I)|a_cn⟩ for any k, l")]
    NotABranch,
    #[error("expected a {expected}-qubit state, got {got}")]
    WrongSize { expected: usize, got: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
}

/// Which simulator runs the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    StateVector,
    Stabilizer,
}

/// Register state before the schedule runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prior {
    /// `|0000⟩`: the Z and second ZZ outcomes are forced to +1, so only 16
    /// branches occur.
    Zero,
    /// `|0⟩|+⟩|0⟩|+⟩`: every one of the 64 sign patterns has probability 1/64.
    ZeroPlus,
}

impl Prior {
    pub fn tableau(self) -> StabilizerTableau {
        let text = match self {
            Prior::Zero => "ZIII\nIZII\nIIZI\nIIIZ",
            Prior::ZeroPlus => "ZIII\nIXII\nIIZI\nIIIX",
        };
        text.parse().expect("valid prior tableau")
    }

    pub fn state(self) -> StateVector {
        self.tableau().to_statevector().expect("4-qubit stabilizer state")
    }
}

/// One factory measurement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactoryStep {
    pub id: usize,
    pub name: &'static str,
    /// Sign-free Pauli observable on `targets`.
    pub observable: &'static str,
    pub targets: [usize; 2],
    pub arity: usize,
}

pub const SCHEDULE: [FactoryStep; 6] = [
    FactoryStep { id: 0, name: "X", observable: "X", targets: [0, 0], arity: 1 },
    FactoryStep { id: 1, name: "Z", observable: "Z", targets: [1, 0], arity: 1 },
    FactoryStep { id: 2, name: "XX", observable: "XX", targets: [2, 3], arity: 2 },
    FactoryStep { id: 3, name: "ZZ", observable: "ZZ", targets: [2, 3], arity: 2 },
    FactoryStep { id: 4, name: "P±", observable: "XX", targets: [1, 2], arity: 2 },
    FactoryStep { id: 5, name: "parity", observable: "ZZ", targets: [0, 2], arity: 2 },
];

impl FactoryStep {
    pub fn target_slice(&self) -> &[usize] {
        &self.targets[..self.arity]
    }

    pub fn pauli(&self) -> PauliString {
        self.observable.parse().expect("schedule observable")
    }
}

#[derive(Clone, Debug)]
pub struct AncillaBranch {
    /// `(measurement id, ±1)` in schedule order.
    pub outcome_record: Vec<(usize, i8)>,
    /// `(k, l)`: the branch is `(σ_k⊗σ_l⊗I⊗I)|a_cn⟩`.
    pub pauli_label: (usize, usize),
    pub state: StateVector,
    /// Final tableau when the stabilizer backend ran.
    pub tableau: Option<StabilizerTableau>,
    /// Born probability of this outcome sequence given the prior.
    pub probability: f64,
}

/// `|a_cn⟩ = ½(|0000⟩+|0101⟩+|1011⟩+|1110⟩)`.
pub fn acn_state() -> StateVector {
    let mut a = vec![ZERO; 16];
    for k in [0b0000, 0b0101, 0b1011, 0b1110] {
        a[k] = C64::new(0.5, 0.0);
    }
    StateVector::from_amplitudes(a).expect("normalized")
}

/// `{XIXX, ZIZI, IXIX, IZZZ}`, all signs `+`.
pub fn acn_stabilizer_reference() -> StabilizerTableau {
    "XIXX\nZIZI\nIXIX\nIZZZ".parse().expect("valid tableau")
}

/// Branch label from the six −1 indicator bits.
pub fn label_from_signs(s: [bool; 6]) -> (usize, usize) {
    let k = Pauli::from_bits(s[5], s[0] ^ s[2]);
    let l = Pauli::from_bits(s[1] ^ s[3], s[2] ^ s[4]);
    (k.index(), l.index())
}

/// `(σ_k⊗σ_l⊗I⊗I)|a_cn⟩`.
pub fn labeled_acn(k: usize, l: usize) -> Result<StateVector, AncillaError> {
    let op = linalg::sigma(k).kron(&linalg::sigma(l));
    Ok(acn_state().apply_matrix(&op, &[0, 1])?)
}

/// The `(k, l)` whose labeled ancilla matches `s` up to global phase.
pub fn classify_branch(s: &StateVector) -> Result<(usize, usize), AncillaError> {
    if s.n_qubits() != 4 {
        return Err(AncillaError::WrongSize { expected: 4, got: s.n_qubits() });
    }
    for k in 0..4 {
        for l in 0..4 {
            if equal_up_to_global_phase(s, &labeled_acn(k, l)?, LABEL_TOLERANCE)? {
                return Ok((k, l));
            }
        }
    }
    Err(AncillaError::NotABranch)
}

fn measurement_for(step: &FactoryStep) -> MeasurementOp {
    if step.id == 4 {
        MeasurementOp::parity_plus_minus()
    } else {
        MeasurementOp::from_observable(
            &crate::observable::Observable::from_pauli(&step.pauli()).expect("schedule observable"),
        )
    }
}

/// Runs the schedule from the given prior.
pub fn prepare_acn_from(
    prior: Prior,
    src: &mut dyn OutcomeSource,
    backend: Backend,
) -> Result<AncillaBranch, AncillaError> {
    let mut record = Vec::with_capacity(SCHEDULE.len());
    let mut bits = [false; 6];
    let mut probability = 1.0;
    let (state, tableau) = match backend {
        Backend::StateVector => {
            let mut state = prior.state();
            for step in &SCHEDULE {
                // P± is applied as the two-projector measurement it is written as
                let m = state.measure(&measurement_for(step), step.target_slice(), src)?;
                let sign = m.label as i8;
                probability *= m.probabilities[m.index];
                bits[step.id] = sign < 0;
                record.push((step.id, sign));
                state = m.state;
            }
            (state, None)
        }
        Backend::Stabilizer => {
            let mut t = prior.tableau();
            for step in &SCHEDULE {
                let m = t.measure_on(&step.pauli(), step.target_slice(), src)?;
                probability *= if m.deterministic { 1.0 } else { 0.5 };
                bits[step.id] = m.label < 0;
                record.push((step.id, m.label));
                t = m.tableau;
            }
            (t.to_statevector()?, Some(t))
        }
    };
    Ok(AncillaBranch { outcome_record: record, pauli_label: label_from_signs(bits), state, tableau, probability })
}

/// Runs the schedule on fresh `|0000⟩`.
pub fn prepare_acn(src: &mut dyn OutcomeSource, backend: Backend) -> Result<AncillaBranch, AncillaError> {
    prepare_acn_from(Prior::Zero, src, backend)
}

/// Runs the CNOT gadget on `psi` with the branch state as its ancilla and
/// checks the output is `CNOT|ψ⟩`. `forced` supplies the two Bell indices.
pub fn shifted_ancilla_ok(branch: &AncillaBranch, psi: &StateVector, forced: [usize; 2]) -> Result<bool, AncillaError> {
    let cnot = GateKind::Cnot.matrix();
    let trace = indirect_gate_2q(
        psi,
        (0, 1),
        &cnot,
        Some((&branch.state, branch.pauli_label)),
        &mut Forced::new(forced),
    )?;
    let want = psi.apply_matrix(&cnot, &[0, 1])?;
    Ok(trace.rounds == 1 && equal_up_to_global_phase(&trace.final_state, &want, 1e-10)?)
}

/// One row of the exhaustive branch table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub signs: Vec<i8>,
    pub label: (usize, usize),
    pub classified: Option<(usize, usize)>,
    /// `|⟨branch|(σ_k⊗σ_l⊗I⊗I)|a_cn⟩|` for the formula label.
    pub overlap: f64,
    pub probability: f64,
}

/// Forces every sign pattern of the schedule from `prior`, skipping
/// patterns with zero probability, in lexicographic order with `+1` first.
pub fn branch_table(prior: Prior) -> Result<Vec<BranchRow>, AncillaError> {
    let mut rows = Vec::new();
    for pattern in 0..1usize << SCHEDULE.len() {
        let forced: Vec<usize> = (0..SCHEDULE.len()).map(|i| pattern >> (SCHEDULE.len() - 1 - i) & 1).collect();
        let branch = match prepare_acn_from(prior, &mut Forced::new(forced), Backend::StateVector) {
            Ok(b) => b,
            Err(AncillaError::Sim(SimError::ImpossibleOutcome { .. })) => continue,
            Err(e) => return Err(e),
        };
        let (k, l) = branch.pauli_label;
        let overlap = branch.state.inner(&labeled_acn(k, l)?)?.norm();
        rows.push(BranchRow {
            signs: branch.outcome_record.iter().map(|&(_, s)| s).collect(),
            label: branch.pauli_label,
            classified: classify_branch(&branch.state).ok(),
            overlap,
            probability: branch.probability,
        });
    }
    Ok(rows)
}

/// Smallest achievable maximum weight over all generating sets of the
/// group, with one set attaining it. Exhaustive over `n`-subsets of the
/// non-identity elements.
pub fn min_max_weight_generating_set(t: &StabilizerTableau) -> (usize, Vec<PauliString>) {
    let n = t.n_qubits();
    let elems: Vec<PauliString> = t.group_elements().into_iter().filter(|p| !p.is_identity()).collect();
    let mut best = (usize::MAX, Vec::new());
    let mut pick = Vec::with_capacity(n);
    subsets(&elems, n, 0, &mut pick, &mut |set| {
        let w = set.iter().map(|p| p.weight()).max().unwrap_or(0);
        if w < best.0 && StabilizerTableau::new(set.to_vec()).is_ok() {
            best = (w, set.to_vec());
        }
    });
    best
}

fn subsets<F: FnMut(&[PauliString])>(
    items: &[PauliString],
    size: usize,
    start: usize,
    pick: &mut Vec<PauliString>,
    f: &mut F,
) {
    if pick.len() == size {
        f(pick);
        return;
    }
    for i in start..items.len() {
        pick.push(items[i].clone());
        subsets(items, size, i + 1, pick, f);
        pick.pop();
    }
}

/// The state after step 1 in the reference branch:
/// `½(|0⟩+|1⟩)⊗|0⟩⊗(|00⟩+|11⟩)`.
pub fn step_one_reference() -> StateVector {
    let plus = StateVector::normalized(vec![ONE, ONE]).expect("nonzero");
    let zero = StateVector::zero(1).expect("one qubit");
    let bell = StateVector::bell(0).expect("Bell state");
    plus.tensor(&zero).and_then(|s| s.tensor(&bell)).expect("four qubits")
}

/// `P₊ = |Φ₀⟩⟨Φ₀| + |Φ₁⟩⟨Φ₁|` as a matrix, for comparison with `(I+XX)/2`.
pub fn plus_projector() -> Matrix {
    MeasurementOp::parity_plus_minus().projector_matrix(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Sampler;

    #[test]
    fn reference_branch_is_exact() {
        let b = prepare_acn(&mut Forced::new([0; 6]), Backend::StateVector).unwrap();
        assert_eq!(b.pauli_label, (0, 0));
        for (k, a) in b.state.amplitudes().iter().enumerate() {
            let want = if [0b0000, 0b0101, 0b1011, 0b1110].contains(&k) { 0.5 } else { 0.0 };
            assert!((a.norm() - want).abs() < 1e-12, "index {k:04b}");
        }
        assert!(equal_up_to_global_phase(&b.state, &acn_state(), 1e-12).unwrap());
    }

    #[test]
    fn step_two_plus_branch() {
        let s = step_one_reference();
        let m = s.measure(&MeasurementOp::parity_plus_minus(), &[1, 2], &mut Forced::new([0])).unwrap();
        assert!((m.probabilities[0] - 0.5).abs() < 1e-12);
        let mut want = vec![ZERO; 16];
        for k in [0b0000, 0b0011, 0b0101, 0b0110, 0b1000, 0b1011, 0b1101, 0b1110] {
            want[k] = C64::new(0.5 * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        }
        assert!(equal_up_to_global_phase(&m.state, &StateVector::from_amplitudes(want).unwrap(), 1e-12).unwrap());
        let even = m.state.measure_pauli(&"ZZ".parse().unwrap(), &[0, 2], &mut Forced::new([0])).unwrap();
        assert!((even.probabilities[0] - 0.5).abs() < 1e-12);
        assert!(equal_up_to_global_phase(&even.state, &acn_state(), 1e-12).unwrap());
    }

    #[test]
    fn classify_known_states() {
        assert_eq!(classify_branch(&acn_state()).unwrap(), (0, 0));
        let x = acn_state().apply_matrix(&linalg::pauli_x(), &[0]).unwrap();
        assert_eq!(classify_branch(&x).unwrap(), (1, 0));
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        assert_eq!(classify_branch(&StateVector::random(4, &mut rng)).unwrap_err(), AncillaError::NotABranch);
    }

    #[test]
    fn minus_branch_still_classifies() {
        let b = prepare_acn(&mut Forced::new([0, 0, 0, 0, 1, 0]), Backend::StateVector).unwrap();
        assert_eq!(classify_branch(&b.state).unwrap(), b.pauli_label);
        assert_eq!(b.pauli_label, (0, 3));
    }

    #[test]
    fn every_branch_matches_its_formula_label() {
        let rows = branch_table(Prior::ZeroPlus).unwrap();
        assert_eq!(rows.len(), 64);
        for r in &rows {
            assert_eq!(r.classified, Some(r.label), "{:?}", r.signs);
            assert!(r.overlap > 1.0 - 1e-10);
            assert!((r.probability - 1.0 / 64.0).abs() < 1e-12);
        }
        assert_eq!(branch_table(Prior::Zero).unwrap().len(), 16);
    }

    #[test]
    fn backends_agree_on_sampled_runs() {
        for seed in 0..20 {
            let a = prepare_acn_from(Prior::ZeroPlus, &mut Sampler::seeded(seed), Backend::StateVector).unwrap();
            let b = prepare_acn_from(Prior::ZeroPlus, &mut Sampler::seeded(seed), Backend::Stabilizer).unwrap();
            assert_eq!(a.outcome_record, b.outcome_record);
            assert_eq!(a.pauli_label, b.pauli_label);
            assert!(equal_up_to_global_phase(&a.state, &b.state, 1e-10).unwrap());
        }
    }

    #[test]
    fn reference_tableau_matches_known_generators() {
        let b = prepare_acn(&mut Forced::new([0; 6]), Backend::Stabilizer).unwrap();
        assert!(b.tableau.unwrap().same_stabilizer_state(&acn_stabilizer_reference()));
        assert!(equal_up_to_global_phase(&acn_stabilizer_reference().to_statevector().unwrap(), &acn_state(), 1e-12).unwrap());
    }

    #[test]
    fn plus_minus_is_xx_projector() {
        let xx: PauliString = "XX".parse().unwrap();
        let half = Matrix::identity(4).add(&xx.to_matrix()).scale(C64::new(0.5, 0.0));
        assert!(plus_projector().approx_eq(&half, 1e-12));
    }

    #[test]
    fn shifted_branches_drive_cnot() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
        let psi = StateVector::random(2, &mut rng);
        let b = prepare_acn(&mut Forced::new([1, 0, 0, 0, 0, 0]), Backend::StateVector).unwrap();
        assert_ne!(b.pauli_label, (0, 0));
        for j1 in 0..4 {
            for j2 in 0..4 {
                assert!(shifted_ancilla_ok(&b, &psi, [j1, j2]).unwrap());
            }
        }
    }

    #[test]
    fn weight_three_is_unavoidable() {
        let (w, set) = min_max_weight_generating_set(&acn_stabilizer_reference());
        assert_eq!(w, 3);
        assert_eq!(set.len(), 4);
    }
}
