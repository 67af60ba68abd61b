//! Dense state-vector simulator.
//!
//! This is the brute-force reference every other backend is checked against.
//! Basis index bit `n-1-q` holds qubit `q`, so qubit 0 is the most
//! significant bit and the leftmost tensor factor.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix, I, ONE, ZERO};
use crate::observable::{Axis, Observable};
use crate::outcome::OutcomeSource;
use crate::pauli::{CliffordGate, PauliError, PauliString};

pub const MAX_QUBITS: usize = 14;
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("state vectors support 1..={MAX_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("bitstring {0:?} does not describe {1} qubits")]
    BadBitstring(String, usize),
    #[error("bad targets {targets:?} for {n} qubits")]
    BadTargets { targets: Vec<usize>, n: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("forced outcome {outcome} has probability {probability:e}")]
    ImpossibleOutcome { outcome: usize, probability: f64 },
    #[error("forced outcome list exhausted after {0} outcomes")]
    ForcedExhausted(usize),
    #[error("outcome {outcome} out of range for a {count}-outcome measurement")]
    BadOutcome { outcome: usize, count: usize },
    #[error("amplitudes have norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("invalid measurement: {0}")]
    BadMeasurement(String),
    #[error("Bell index {0} out of range 0..=3")]
    BadBellIndex(usize),
    #[error("qubits {0:?} are entangled with the rest of the register")]
    NotProduct(Vec<usize>),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Cnot,
    H,
    P,
    Swap,
    Rz(f64),
    Rx(f64),
    /// Arbitrary 1- or 2-qubit unitary.
    Unitary(Matrix),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            GateKind::Unitary(m) if m.dim() == 4 => 2,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> Matrix {
        match self {
            GateKind::H => Matrix::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
            GateKind::P => Matrix::diag(&[
                C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
                C64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            ]),
            GateKind::Cnot => {
                let mut m = Matrix::zeros(4);
                m[(0, 0)] = ONE;
                m[(1, 1)] = ONE;
                m[(2, 3)] = ONE;
                m[(3, 2)] = ONE;
                m
            }
            GateKind::Swap => {
                let mut m = Matrix::zeros(4);
                m[(0, 0)] = ONE;
                m[(1, 2)] = ONE;
                m[(2, 1)] = ONE;
                m[(3, 3)] = ONE;
                m
            }
            GateKind::Rz(t) => Matrix::diag(&[C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0)]),
            GateKind::Rx(t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                Matrix::from_rows(vec![c.into(), -I * s, -I * s, c.into()])
            }
            GateKind::Unitary(m) => m.clone(),
        }
    }
}

/// A gate with its target qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self, SimError> {
        if let GateKind::Unitary(m) = &kind {
            if !(m.dim() == 2 || m.dim() == 4) || !m.is_unitary(1e-12) {
                return Err(SimError::NotUnitary);
            }
        }
        if targets.len() != kind.arity() {
            return Err(SimError::BadTargets { targets, n: kind.arity() });
        }
        Ok(Self { kind, targets })
    }

    pub fn h(q: usize) -> Self {
        Self { kind: GateKind::H, targets: vec![q] }
    }

    pub fn p(q: usize) -> Self {
        Self { kind: GateKind::P, targets: vec![q] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, targets: vec![control, target] }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self { kind: GateKind::Swap, targets: vec![a, b] }
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self { kind: GateKind::Rz(theta), targets: vec![q] }
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Self { kind: GateKind::Rx(theta), targets: vec![q] }
    }

    pub fn unitary(m: Matrix, targets: Vec<usize>) -> Result<Self, SimError> {
        Self::new(GateKind::Unitary(m), targets)
    }

    pub fn matrix(&self) -> Matrix {
        self.kind.matrix()
    }

    /// Same gate moved to other qubits.
    pub fn on(&self, targets: Vec<usize>) -> Self {
        Self { kind: self.kind.clone(), targets }
    }

    pub fn as_clifford(&self) -> Option<CliffordGate> {
        match self.kind {
            GateKind::H => Some(CliffordGate::H(self.targets[0])),
            GateKind::P => Some(CliffordGate::P(self.targets[0])),
            GateKind::Cnot => Some(CliffordGate::Cnot { control: self.targets[0], target: self.targets[1] }),
            GateKind::Swap => Some(CliffordGate::Swap(self.targets[0], self.targets[1])),
            _ => None,
        }
    }
}

/// Projective measurement on 1 or 2 qubits. Each projector is an orthonormal
/// list of vectors in the `2^arity`-dimensional target space; ranks sum to
/// `2^arity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOp {
    arity: usize,
    projectors: Vec<Vec<Vec<C64>>>,
    labels: Vec<i32>,
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl MeasurementOp {
    pub fn new(arity: usize, projectors: Vec<Vec<Vec<C64>>>, labels: Vec<i32>) -> Result<Self, SimError> {
        let bad = |m: &str| Err(SimError::BadMeasurement(m.to_string()));
        if !(1..=2).contains(&arity) {
            return bad("arity must be 1 or 2");
        }
        if labels.len() != projectors.len() {
            return bad("one label per projector");
        }
        let dim = 1 << arity;
        let vectors: Vec<&Vec<C64>> = projectors.iter().flatten().collect();
        if vectors.len() != dim {
            return bad("projector ranks must sum to 2^arity");
        }
        if projectors.iter().any(|p| p.is_empty()) {
            return bad("empty projector");
        }
        for (i, a) in vectors.iter().enumerate() {
            if a.len() != dim {
                return bad("basis vector has wrong dimension");
            }
            if (inner(a, a).norm() - 1.0).abs() > 1e-10 {
                return bad("basis vector is not normalized");
            }
            for b in &vectors[..i] {
                if inner(a, b).norm() > 1e-12 {
                    return bad("basis vectors are not orthogonal");
                }
            }
        }
        Ok(Self { arity, projectors, labels })
    }

    /// Complete measurement along an orthonormal basis, labels `0..`.
    pub fn basis(vectors: Vec<Vec<C64>>) -> Result<Self, SimError> {
        let arity = vectors.first().map(|v| v.len().trailing_zeros() as usize).unwrap_or(0);
        let labels = (0..vectors.len() as i32).collect();
        Self::new(arity, vectors.into_iter().map(|v| vec![v]).collect(), labels)
    }

    /// Bell measurement; label `j` is the index of `|Φ_j⟩`.
    pub fn bell() -> Self {
        Self::basis((0..4).map(bell_vector).collect()).expect("Bell basis")
    }

    /// Measurement along `{(W ⊗ I)|Φ_j⟩}`; label `j`.
    pub fn rotated_bell(w: &Matrix) -> Result<Self, SimError> {
        if w.dim() != 2 || !w.is_unitary(1e-12) {
            return Err(SimError::NotUnitary);
        }
        let wi = w.kron(&Matrix::identity(2));
        Self::basis((0..4).map(|j| wi.apply(&bell_vector(j))).collect())
    }

    /// The two-outcome `P± = |Φ₀⟩⟨Φ₀|+|Φ₁⟩⟨Φ₁|`, `|Φ₂⟩⟨Φ₂|+|Φ₃⟩⟨Φ₃|`, labels `+1, -1`.
    pub fn parity_plus_minus() -> Self {
        Self::new(
            2,
            vec![vec![bell_vector(0), bell_vector(1)], vec![bell_vector(2), bell_vector(3)]],
            vec![1, -1],
        )
        .expect("P± projectors")
    }

    /// The `±1` eigenspaces of a product observable, labels `+1, -1`.
    pub fn from_observable(obs: &Observable) -> Self {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        let eig: Vec<[(f64, Vec<C64>); 2]> = obs.factors().iter().map(axis_eigenvectors).collect();
        let count = 1usize << obs.arity();
        for pick in 0..count {
            let mut v = vec![ONE];
            let mut sign = 1.0;
            for (k, e) in eig.iter().enumerate() {
                let (s, ref vec) = e[(pick >> (obs.arity() - 1 - k)) & 1];
                sign *= s;
                v = kron_vec(&v, vec);
            }
            if sign > 0.0 {
                plus.push(v);
            } else {
                minus.push(v);
            }
        }
        Self::new(obs.arity(), vec![plus, minus], vec![1, -1]).expect("observable eigenbasis")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn n_outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_complete_basis(&self) -> bool {
        self.projectors.iter().all(|p| p.len() == 1)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors.iter().map(Vec::len).collect()
    }

    pub fn projector_matrix(&self, k: usize) -> Matrix {
        let dim = 1 << self.arity;
        self.projectors[k]
            .iter()
            .fold(Matrix::zeros(dim), |m, v| m.add(&Matrix::outer(v, v)))
    }

    /// Same projector set, labels ignored.
    pub fn same_projectors(&self, other: &Self, tol: f64) -> bool {
        if self.arity != other.arity || self.n_outcomes() != other.n_outcomes() {
            return false;
        }
        let mine: Vec<Matrix> = (0..self.n_outcomes()).map(|k| self.projector_matrix(k)).collect();
        (0..other.n_outcomes()).all(|k| {
            let p = other.projector_matrix(k);
            mine.iter().any(|m| m.approx_eq(&p, tol))
        })
    }
}

fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

// (eigenvalue, eigenvector) pairs of n·σ, +1 first.
fn axis_eigenvectors(a: &Axis) -> [(f64, Vec<C64>); 2] {
    // |+n⟩ = (cos θ/2, e^{iφ} sin θ/2)
    let theta = a.z.clamp(-1.0, 1.0).acos();
    let phi = a.y.atan2(a.x);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let plus = vec![C64::new(c, 0.0), C64::from_polar(s, phi)];
    let minus = vec![C64::new(-s, 0.0), C64::from_polar(c, phi)];
    [(1.0, plus), (-1.0, minus)]
}

/// Amplitudes of `|Φ_j⟩` with `Φ₀ = (00+11)/√2`, `Φ₁ = (01+10)/√2`,
/// `Φ₂ = (01−10)/√2`, `Φ₃ = (00−11)/√2`.
pub fn bell_vector(j: usize) -> Vec<C64> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    match j {
        0 => vec![h, ZERO, ZERO, h],
        1 => vec![ZERO, h, h, ZERO],
        2 => vec![ZERO, h, -h, ZERO],
        3 => vec![h, ZERO, ZERO, -h],
        _ => panic!("Bell index {j} out of range"),
    }
}

/// Result of one measurement.
#[derive(Clone, Debug)]
pub struct Measured {
    /// Index of the chosen projector.
    pub index: usize,
    pub label: i32,
    /// Born probability of every branch, before the collapse.
    pub probabilities: Vec<f64>,
    pub state: StateVector,
}

/// `(index, re, im)` triples of the nonzero amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseAmplitudes {
    pub n_qubits: usize,
    pub entries: Vec<(usize, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, SimError> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || n == 0 || n > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self, SimError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(SimError::NotNormalized(0.0));
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis_index(n: usize, index: usize) -> Result<Self, SimError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        let mut amps = vec![ZERO; 1 << n];
        *amps.get_mut(index).ok_or(SimError::BadBitstring(index.to_string(), n))? = ONE;
        Ok(Self { n, amps })
    }

    /// `prepare_basis`: computational basis state, qubit 0 first.
    pub fn basis(n: usize, bits: &str) -> Result<Self, SimError> {
        if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(SimError::BadBitstring(bits.to_string(), n));
        }
        let index = usize::from_str_radix(bits, 2).map_err(|_| SimError::BadBitstring(bits.to_string(), n))?;
        Self::basis_index(n, index)
    }

    pub fn zero(n: usize) -> Result<Self, SimError> {
        Self::basis_index(n, 0)
    }

    /// `prepare_bell`: `|Φ_j⟩`.
    pub fn bell(j: usize) -> Result<Self, SimError> {
        if j > 3 {
            return Err(SimError::BadBellIndex(j));
        }
        Ok(Self { n: 2, amps: bell_vector(j) })
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("nonzero gaussian vector")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, amps: self.amps.iter().map(|a| a * s).collect() }
    }

    /// `self ⊗ other`; `other`'s qubits are appended after ours.
    pub fn tensor(&self, other: &Self) -> Result<Self, SimError> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        Ok(Self { n, amps: kron_vec(&self.amps, &other.amps) })
    }

    fn check_targets(&self, targets: &[usize]) -> Result<(), SimError> {
        let bad = || SimError::BadTargets { targets: targets.to_vec(), n: self.n };
        if targets.is_empty() {
            return Err(bad());
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.n || targets[..i].contains(&t) {
                return Err(bad());
            }
        }
        Ok(())
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    // Applies a (not necessarily unitary) local operator on `targets`.
    fn apply_local(&self, m: &Matrix, targets: &[usize]) -> Result<Vec<C64>, SimError> {
        self.check_targets(targets)?;
        let k = targets.len();
        let d = 1 << k;
        if m.dim() != d {
            return Err(SimError::DimensionMismatch(m.dim(), d));
        }
        let bits: Vec<usize> = targets.iter().map(|&t| self.bit(t)).collect();
        let tmask: usize = bits.iter().sum();
        let offsets: Vec<usize> = (0..d)
            .map(|l| (0..k).filter(|i| l >> (k - 1 - i) & 1 == 1).map(|i| bits[i]).sum())
            .collect();
        let mut out = vec![ZERO; self.amps.len()];
        let mut local = vec![ZERO; d];
        for base in 0..self.amps.len() {
            if base & tmask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                local[l] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                out[base | off] = (0..d).map(|c| m[(r, c)] * local[c]).sum();
            }
        }
        Ok(out)
    }

    /// Applies a unitary on `targets` (first target = most significant).
    pub fn apply_matrix(&self, m: &Matrix, targets: &[usize]) -> Result<Self, SimError> {
        Ok(Self { n: self.n, amps: self.apply_local(m, targets)? })
    }

    pub fn apply_gate(&self, g: &Gate) -> Result<Self, SimError> {
        self.apply_matrix(&g.matrix(), &g.targets)
    }

    pub fn apply_clifford(&self, g: &CliffordGate) -> Result<Self, SimError> {
        self.apply_matrix(&g.matrix(), &g.targets())
    }

    /// Applies a full-register Pauli string, phase included.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<Self, SimError> {
        if p.n_qubits() != self.n {
            return Err(SimError::DimensionMismatch(p.n_qubits(), self.n));
        }
        Ok(Self { n: self.n, amps: pauli_action(&self.amps, p) })
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64, SimError> {
        let pp = self.apply_pauli(p)?;
        Ok(inner(&self.amps, &pp.amps).re)
    }

    pub fn inner(&self, other: &Self) -> Result<C64, SimError> {
        if self.n != other.n {
            return Err(SimError::DimensionMismatch(self.n, other.n));
        }
        Ok(inner(&self.amps, &other.amps))
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64, SimError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn collapse(
        &self,
        branches: Vec<Vec<C64>>,
        src: &mut dyn OutcomeSource,
    ) -> Result<(usize, Vec<f64>, Self), SimError> {
        let probs: Vec<f64> = branches
            .iter()
            .map(|b| b.iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let total: f64 = probs.iter().sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-6 {
            return Err(SimError::NotNormalized(total));
        }
        let k = src.choose(&probs)?;
        let norm = probs[k].sqrt();
        let amps = branches.into_iter().nth(k).expect("chosen branch").into_iter().map(|a| a / norm).collect();
        Ok((k, probs, Self { n: self.n, amps }))
    }

    /// Born probabilities of every outcome of `m` on `targets`.
    pub fn probabilities(&self, m: &MeasurementOp, targets: &[usize]) -> Result<Vec<f64>, SimError> {
        if targets.len() != m.arity() {
            return Err(SimError::BadTargets { targets: targets.to_vec(), n: self.n });
        }
        (0..m.n_outcomes())
            .map(|k| {
                let v = self.apply_local(&m.projector_matrix(k), targets)?;
                Ok(v.iter().map(|a| a.norm_sqr()).sum())
            })
            .collect()
    }

    pub fn measure(
        &self,
        m: &MeasurementOp,
        targets: &[usize],
        src: &mut dyn OutcomeSource,
    ) -> Result<Measured, SimError> {
        if targets.len() != m.arity() {
            return Err(SimError::BadTargets { targets: targets.to_vec(), n: self.n });
        }
        let branches = (0..m.n_outcomes())
            .map(|k| self.apply_local(&m.projector_matrix(k), targets))
            .collect::<Result<Vec<_>, _>>()?;
        let (index, probabilities, state) = self.collapse(branches, src)?;
        Ok(Measured { index, label: m.labels()[index], probabilities, state })
    }

    /// Measures the Pauli observable `p` placed on `targets` with projectors
    /// `(I ± P)/2`. Outcome index 0 is `+1`, index 1 is `-1`.
    pub fn measure_pauli(
        &self,
        p: &PauliString,
        targets: &[usize],
        src: &mut dyn OutcomeSource,
    ) -> Result<Measured, SimError> {
        self.check_targets(targets)?;
        if p.is_identity() || !p.is_hermitian() {
            return Err(SimError::BadMeasurement(format!("{p} is not a ±1 observable")));
        }
        let full = p.embed(self.n, targets)?;
        let pp = self.apply_pauli(&full)?;
        let half = 0.5;
        let plus = self.amps.iter().zip(&pp.amps).map(|(a, b)| (a + b) * half).collect();
        let minus = self.amps.iter().zip(&pp.amps).map(|(a, b)| (a - b) * half).collect();
        let (index, probabilities, state) = self.collapse(vec![plus, minus], src)?;
        Ok(Measured { index, label: if index == 0 { 1 } else { -1 }, probabilities, state })
    }

    /// Measures a product observable on `targets`; outcome index 0 is `+1`.
    pub fn measure_observable(
        &self,
        obs: &Observable,
        targets: &[usize],
        src: &mut dyn OutcomeSource,
    ) -> Result<Measured, SimError> {
        if targets.len() != obs.arity() {
            return Err(SimError::BadTargets { targets: targets.to_vec(), n: self.n });
        }
        let o = self.apply_local(&obs.matrix(), targets)?;
        let plus = self.amps.iter().zip(&o).map(|(a, b)| (a + b) * 0.5).collect();
        let minus = self.amps.iter().zip(&o).map(|(a, b)| (a - b) * 0.5).collect();
        let (index, probabilities, state) = self.collapse(vec![plus, minus], src)?;
        Ok(Measured { index, label: if index == 0 { 1 } else { -1 }, probabilities, state })
    }

    /// Reorders qubits: new qubit `i` is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self, SimError> {
        let mut seen = vec![false; self.n];
        if order.len() != self.n || order.iter().any(|&q| q >= self.n || std::mem::replace(&mut seen[q], true)) {
            return Err(SimError::BadTargets { targets: order.to_vec(), n: self.n });
        }
        let mut amps = vec![ZERO; self.amps.len()];
        for (old, a) in self.amps.iter().enumerate() {
            let mut new = 0;
            for (i, &q) in order.iter().enumerate() {
                if old & self.bit(q) != 0 {
                    new |= 1 << (self.n - 1 - i);
                }
            }
            amps[new] = *a;
        }
        Ok(Self { n: self.n, amps })
    }

    /// Splits off `keep` (in the given order) assuming the register is a
    /// product between `keep` and the rest; returns the pure state of `keep`
    /// up to global phase.
    pub fn extract(&self, keep: &[usize]) -> Result<Self, SimError> {
        self.check_targets(keep)?;
        let rest: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        if rest.is_empty() {
            return self.permute(keep);
        }
        let mut order = keep.to_vec();
        order.extend(&rest);
        let p = self.permute(&order)?;
        let cols = 1 << rest.len();
        let rows = 1 << keep.len();
        let col = |c: usize| -> Vec<C64> { (0..rows).map(|r| p.amps[r * cols + c]).collect() };
        let best = (0..cols)
            .map(|c| (c, col(c).iter().map(|a| a.norm_sqr()).sum::<f64>()))
            .fold((0, 0.0), |b, x| if x.1 > b.1 { x } else { b });
        let v = col(best.0);
        let norm = best.1.sqrt();
        let v: Vec<C64> = v.into_iter().map(|a| a / norm).collect();
        // captured weight is 1 iff every column is parallel to v
        let captured: f64 = (0..cols).map(|c| inner(&v, &col(c)).norm_sqr()).sum();
        if (captured - 1.0).abs() > 1e-9 {
            return Err(SimError::NotProduct(keep.to_vec()));
        }
        Self::normalized(v)
    }

    pub fn to_sparse(&self) -> SparseAmplitudes {
        SparseAmplitudes {
            n_qubits: self.n,
            entries: self
                .amps
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > 1e-15)
                .map(|(k, a)| (k, a.re, a.im))
                .collect(),
        }
    }

    pub fn from_sparse(s: &SparseAmplitudes) -> Result<Self, SimError> {
        if s.n_qubits == 0 || s.n_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(s.n_qubits));
        }
        let mut amps = vec![ZERO; 1 << s.n_qubits];
        for &(k, re, im) in &s.entries {
            *amps.get_mut(k).ok_or(SimError::BadBitstring(k.to_string(), s.n_qubits))? = C64::new(re, im);
        }
        Self::from_amplitudes(amps)
    }
}

/// `P·v` for an unnormalized amplitude vector over `p.n_qubits()` qubits.
pub(crate) fn pauli_action(amps: &[C64], p: &PauliString) -> Vec<C64> {
    let n = p.n_qubits();
    debug_assert_eq!(amps.len(), 1 << n);
    // mask bit q is qubit q; index bit n-1-q is qubit q
    let to_index = |m: u64| (0..n).filter(|q| m >> q & 1 == 1).map(|q| 1usize << (n - 1 - q)).sum::<usize>();
    let flip = to_index(p.x_mask());
    let zmask = to_index(p.z_mask());
    let n_y = (p.x_mask() & p.z_mask()).count_ones() as u8;
    // Y = i·X·Z, so P = i^(phase + #Y) · X^x Z^z
    let global = crate::pauli::phase_factor(p.phase_exp() + n_y);
    let mut out = vec![ZERO; amps.len()];
    for (b, a) in amps.iter().enumerate() {
        let sign = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[b ^ flip] = a * global * sign;
    }
    out
}

/// `|⟨a|b⟩| > 1 − tol`.
pub fn equal_up_to_global_phase(a: &StateVector, b: &StateVector, tol: f64) -> Result<bool, SimError> {
    Ok(a.inner(b)?.norm() > 1.0 - tol)
}

/// Pauli matrix σ_j as a single-qubit gate.
pub fn sigma_gate(j: usize, q: usize) -> Gate {
    Gate { kind: GateKind::Unitary(linalg::sigma(j)), targets: vec![q] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{Forced, Sampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn close(a: &StateVector, b: &StateVector) -> bool {
        a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn prepare_basis_states() {
        assert_eq!(StateVector::basis(1, "0").unwrap().amplitudes(), &[ONE, ZERO]);
        let s = StateVector::basis(2, "11").unwrap();
        assert_eq!(s.amplitudes()[3], ONE);
        let s = StateVector::basis(4, "0000").unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(StateVector::basis(2, "1").is_err());
        assert!(StateVector::basis(2, "1a").is_err());
        assert!(StateVector::zero(15).is_err());
    }

    #[test]
    fn bell_states_have_expected_signs() {
        let h = FRAC_1_SQRT_2;
        assert_eq!(StateVector::bell(0).unwrap().amplitudes(), &[c(h), ZERO, ZERO, c(h)]);
        assert_eq!(StateVector::bell(2).unwrap().amplitudes(), &[ZERO, c(h), c(-h), ZERO]);
        assert_eq!(StateVector::bell(3).unwrap().amplitudes(), &[c(h), ZERO, ZERO, c(-h)]);
        assert_eq!(StateVector::bell(4), Err(SimError::BadBellIndex(4)));
    }

    #[test]
    fn simple_gates() {
        let plus = StateVector::zero(1).unwrap().apply_gate(&Gate::h(0)).unwrap();
        assert!(close(&plus, &StateVector::normalized(vec![ONE, ONE]).unwrap()));
        let s = StateVector::basis(2, "10").unwrap().apply_gate(&Gate::cnot(0, 1)).unwrap();
        assert!(close(&s, &StateVector::basis(2, "11").unwrap()));
        assert!(StateVector::zero(2).unwrap().apply_gate(&Gate::h(2)).is_err());
    }

    #[test]
    fn cnot_on_last_two_qubits_gives_acn() {
        let mut a = vec![ZERO; 16];
        for k in [0b0000, 0b0101, 0b1010, 0b1111] {
            a[k] = c(0.5);
        }
        let s = StateVector::from_amplitudes(a).unwrap().apply_gate(&Gate::cnot(2, 3)).unwrap();
        let mut b = vec![ZERO; 16];
        for k in [0b0000, 0b0101, 0b1011, 0b1110] {
            b[k] = c(0.5);
        }
        assert!(close(&s, &StateVector::from_amplitudes(b).unwrap()));
    }

    #[test]
    fn bell_measurement_teleports_with_pauli_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = StateVector::random(1, &mut rng);
        let start = psi.tensor(&StateVector::bell(0).unwrap()).unwrap();
        for j in 0..4 {
            let m = start.measure(&MeasurementOp::bell(), &[0, 1], &mut Forced::new([j])).unwrap();
            for p in &m.probabilities {
                assert!((p - 0.25).abs() < 1e-12);
            }
            let out = m.state.extract(&[2]).unwrap();
            let expect = psi.apply_gate(&sigma_gate(j, 0)).unwrap();
            assert!(equal_up_to_global_phase(&out, &expect, 1e-12).unwrap());
        }
    }

    #[test]
    fn z_measurement_on_zero() {
        let s = StateVector::zero(1).unwrap();
        let m = s.measure_pauli(&"Z".parse().unwrap(), &[0], &mut Sampler::seeded(0)).unwrap();
        assert_eq!(m.label, 1);
        assert!((m.probabilities[0] - 1.0).abs() < 1e-15);
        assert!(matches!(
            s.measure_pauli(&"Z".parse().unwrap(), &[0], &mut Forced::new([1])),
            Err(SimError::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn xx_on_phi0_is_deterministic() {
        let s = StateVector::bell(0).unwrap();
        let m = s.measure_pauli(&"XX".parse().unwrap(), &[0, 1], &mut Sampler::seeded(0)).unwrap();
        assert_eq!(m.label, 1);
        assert!((m.probabilities[0] - 1.0).abs() < 1e-15);
        assert!(close(&m.state, &s));
    }

    #[test]
    fn z_on_plus_is_fair() {
        let plus = StateVector::normalized(vec![ONE, ONE]).unwrap();
        let m = plus.measure_pauli(&"Z".parse().unwrap(), &[0], &mut Sampler::seeded(0)).unwrap();
        assert!((m.probabilities[0] - 0.5).abs() < 1e-15);
        assert!((m.probabilities[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_and_antihermitian_observables_rejected() {
        let s = StateVector::zero(2).unwrap();
        assert!(s.measure_pauli(&"II".parse().unwrap(), &[0, 1], &mut Sampler::seeded(0)).is_err());
        assert!(s.measure_pauli(&"iZZ".parse().unwrap(), &[0, 1], &mut Sampler::seeded(0)).is_err());
        assert!(s.measure_pauli(&"ZZ".parse().unwrap(), &[0, 0], &mut Sampler::seeded(0)).is_err());
    }

    #[test]
    fn global_phase_equality() {
        let z = StateVector::basis(1, "0").unwrap();
        let o = StateVector::basis(1, "1").unwrap();
        assert!(equal_up_to_global_phase(&z, &z.scale(c(-1.0)), 1e-12).unwrap());
        assert!(!equal_up_to_global_phase(&z, &o, 1e-12).unwrap());
        assert!(equal_up_to_global_phase(&z, &z.scale(C64::from_polar(1.0, 0.4487)), 1e-12).unwrap());
        assert!(equal_up_to_global_phase(&z, &StateVector::zero(2).unwrap(), 1e-12).is_err());
    }

    #[test]
    fn measurement_ops_validate() {
        assert!(MeasurementOp::bell().is_complete_basis());
        let pm = MeasurementOp::parity_plus_minus();
        assert_eq!(pm.ranks(), vec![2, 2]);
        assert!(!pm.is_complete_basis());
        // incomplete rank sum is rejected
        let bad = MeasurementOp::new(2, vec![vec![bell_vector(0)], vec![bell_vector(1)]], vec![1, -1]);
        assert!(bad.is_err());
        // non-orthogonal vectors are rejected
        let bad = MeasurementOp::new(1, vec![vec![vec![ONE, ZERO]], vec![vec![ONE, ZERO]]], vec![0, 1]);
        assert!(bad.is_err());
    }

    #[test]
    fn plus_minus_is_xx_observable() {
        let xx = Observable::from_pauli(&"XX".parse().unwrap()).unwrap();
        assert!(MeasurementOp::parity_plus_minus().same_projectors(&MeasurementOp::from_observable(&xx), 1e-12));
    }

    #[test]
    fn observable_eigenspaces_are_right() {
        let a = Observable::pair(Axis::new(1.0, 1.0, 0.0), Axis::Z);
        let m = MeasurementOp::from_observable(&a);
        let expect = m.projector_matrix(0).add(&m.projector_matrix(1).scale(c(-1.0)));
        assert!(expect.approx_eq(&a.matrix(), 1e-12));
    }

    #[test]
    fn repeated_measurement_is_repeatable() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = StateVector::random(3, &mut rng);
        let zz: PauliString = "ZZ".parse().unwrap();
        let first = s.measure_pauli(&zz, &[0, 2], &mut Sampler::seeded(1)).unwrap();
        let again = first.state.measure_pauli(&zz, &[0, 2], &mut Sampler::seeded(2)).unwrap();
        assert_eq!(first.label, again.label);
        assert!((again.probabilities[again.index] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extract_and_permute() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = StateVector::random(1, &mut rng);
        let b = StateVector::random(2, &mut rng);
        let ab = a.tensor(&b).unwrap();
        assert!(equal_up_to_global_phase(&ab.extract(&[0]).unwrap(), &a, 1e-12).unwrap());
        assert!(equal_up_to_global_phase(&ab.extract(&[1, 2]).unwrap(), &b, 1e-12).unwrap());
        let ba = ab.permute(&[1, 2, 0]).unwrap();
        assert!(equal_up_to_global_phase(&ba, &b.tensor(&a).unwrap(), 1e-12).unwrap());
        assert!(StateVector::bell(0).unwrap().extract(&[0]).is_err());
    }

    #[test]
    fn sparse_round_trip() {
        let s = StateVector::bell(2).unwrap();
        let t = StateVector::from_sparse(&s.to_sparse()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn pauli_application_matches_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = StateVector::random(3, &mut rng);
        for txt in ["-iYXZ", "+XIY", "iZZI"] {
            let p: PauliString = txt.parse().unwrap();
            let got = s.apply_pauli(&p).unwrap();
            let want = p.to_matrix().apply(s.amplitudes());
            assert!(got.amplitudes().iter().zip(&want).all(|(x, y)| (x - y).norm() < 1e-12), "{txt}");
        }
    }

    #[test]
    fn gates_are_unitary() {
        for k in [GateKind::H, GateKind::P, GateKind::Cnot, GateKind::Swap, GateKind::Rz(0.3), GateKind::Rx(-1.1)] {
            assert!(k.matrix().is_unitary(1e-12));
        }
        assert!(Gate::unitary(Matrix::from_real(&[1.0, 1.0, 0.0, 1.0]), vec![0]).is_err());
    }
}
