//! Stabilizer tableaux updated with the textbook generator rule.
//!
//! A tableau is just `n` signed, commuting, independent Pauli strings. There is
//! no destabilizer half: the registers here stay small, so deterministic
//! outcomes are found by Gaussian elimination instead.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::outcome::OutcomeSource;
use crate::pauli::{conjugate, CliffordGate, PauliError, PauliString};
use crate::statevector::{pauli_action, SimError, StateVector};

/// Largest register `to_statevector` will expand.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilizerError {
    #[error("expected {n} generators, got {got}")]
    WrongCount { got: usize, n: usize },
    #[error("generator {0} is not Hermitian (phase must be ±1)")]
    NotHermitian(usize),
    #[error("generators {0} and {1} anticommute")]
    Anticommuting(usize, usize),
    #[error("generators are not independent")]
    Dependent,
    #[error("cannot measure the identity")]
    IdentityMeasurement,
    #[error("measured operator must be sign-free, got {0}")]
    SignedMeasurement(String),
    #[error("tableau has {0} qubits; dense expansion supports at most {MAX_DENSE_QUBITS}")]
    TooLarge(usize),
    #[error("tableau does not fix any nonzero state")]
    Inconsistent,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerTableau {
    n: usize,
    generators: Vec<PauliString>,
}

/// Outcome of a generator-wise measurement.
#[derive(Clone, Debug)]
pub struct StabMeasured {
    /// `+1` or `-1`.
    pub label: i8,
    pub deterministic: bool,
    pub tableau: StabilizerTableau,
}

// Symplectic bit vector of a string as two u64 halves.
fn bits(p: &PauliString) -> (u64, u64) {
    (p.x_mask(), p.z_mask())
}

fn bit_at((x, z): (u64, u64), col: usize, n: usize) -> bool {
    if col < n {
        x >> col & 1 == 1
    } else {
        z >> (col - n) & 1 == 1
    }
}

/// Reduced row echelon form over GF(2), phases carried along through the
/// group product. Returns the rows and their pivot columns; columns are the
/// X bits of qubits `0..n` followed by the Z bits.
fn row_reduce(rows: &[PauliString], n: usize) -> (Vec<PauliString>, Vec<usize>) {
    let mut rows = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..2 * n {
        let Some(found) = (r..rows.len()).find(|&i| bit_at(bits(&rows[i]), col, n)) else {
            continue;
        };
        rows.swap(r, found);
        for i in 0..rows.len() {
            if i != r && bit_at(bits(&rows[i]), col, n) {
                rows[i] = rows[r].multiply(&rows[i]).expect("same size");
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (rows, pivots)
}

impl StabilizerTableau {
    /// Validates `n` Hermitian, commuting, independent generators.
    pub fn new(generators: Vec<PauliString>) -> Result<Self, StabilizerError> {
        let n = generators.first().map(PauliString::n_qubits).ok_or(StabilizerError::WrongCount { got: 0, n: 0 })?;
        if generators.len() != n {
            return Err(StabilizerError::WrongCount { got: generators.len(), n });
        }
        for (i, g) in generators.iter().enumerate() {
            if g.n_qubits() != n {
                return Err(PauliError::DimensionMismatch(g.n_qubits(), n).into());
            }
            if !g.is_hermitian() {
                return Err(StabilizerError::NotHermitian(i));
            }
            for (j, h) in generators[..i].iter().enumerate() {
                if !g.commutes(h)? {
                    return Err(StabilizerError::Anticommuting(j, i));
                }
            }
        }
        let (reduced, pivots) = row_reduce(&generators, n);
        if pivots.len() != n {
            return Err(StabilizerError::Dependent);
        }
        // a dependent-free commuting set could still contain -I only if it
        // were dependent, so every row here is a proper stabilizer element
        debug_assert!(reduced.iter().all(|g| !g.is_identity()));
        Ok(Self { n, generators })
    }

    /// `{Z₀, Z₁, …}`, the stabilizer of `|0…0⟩`.
    pub fn zero_state(n: usize) -> Result<Self, StabilizerError> {
        let gens = (0..n)
            .map(|q| PauliString::single(n, q, crate::pauli::Pauli::Z))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(gens)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// `Some(±1)` if `±p` belongs to the stabilizer group, `None` otherwise.
    pub fn sign_of(&self, p: &PauliString) -> Result<Option<i8>, StabilizerError> {
        if p.n_qubits() != self.n {
            return Err(PauliError::DimensionMismatch(p.n_qubits(), self.n).into());
        }
        let (rows, pivots) = row_reduce(&self.generators, self.n);
        let mut acc = PauliString::identity(self.n);
        for (row, &col) in rows.iter().zip(&pivots) {
            if bit_at(bits(p), col, self.n) != bit_at(bits(&acc), col, self.n) {
                acc = acc.multiply(row)?;
            }
        }
        if bits(&acc) != bits(p) {
            return Ok(None);
        }
        // both are Hermitian with equal letters, so the phases differ by 0 or 2
        let rel = (acc.phase_exp() + 4 - p.phase_exp()) % 4;
        Ok(Some(if rel == 0 { 1 } else { -1 }))
    }

    /// Measures the sign-free Pauli observable `m`.
    ///
    /// If `m` commutes with every generator the outcome is fixed and the
    /// tableau is returned unchanged. Otherwise the anticommuting generators
    /// `N₁, N₂, …` (in tableau order) become `±m, N₁N₂, N₁N₃, …`, with the
    /// sign chosen by `src` from two equally likely branches. The outcome
    /// source is consulted in both cases so forced scripts stay aligned with
    /// the state-vector backend.
    pub fn measure_generatorwise(
        &self,
        m: &PauliString,
        src: &mut dyn OutcomeSource,
    ) -> Result<StabMeasured, StabilizerError> {
        if m.n_qubits() != self.n {
            return Err(PauliError::DimensionMismatch(m.n_qubits(), self.n).into());
        }
        if m.is_identity() {
            return Err(StabilizerError::IdentityMeasurement);
        }
        if m.phase_exp() != 0 {
            return Err(StabilizerError::SignedMeasurement(m.to_string()));
        }
        let anti: Vec<usize> = (0..self.n)
            .filter(|&i| !self.generators[i].commutes(m).expect("same size"))
            .collect();
        let Some((&first, rest)) = anti.split_first() else {
            let sign = self.sign_of(m)?.expect("a commuting observable lies in a maximal stabilizer group");
            let probs = if sign > 0 { [1.0, 0.0] } else { [0.0, 1.0] };
            let k = src.choose(&probs)?;
            return Ok(StabMeasured { label: if k == 0 { 1 } else { -1 }, deterministic: true, tableau: self.clone() });
        };
        let k = src.choose(&[0.5, 0.5])?;
        let mut gens = self.generators.clone();
        let n1 = gens[first].clone();
        for &i in rest {
            gens[i] = n1.multiply(&gens[i])?;
        }
        gens[first] = if k == 0 { m.clone() } else { m.neg() };
        Ok(StabMeasured {
            label: if k == 0 { 1 } else { -1 },
            deterministic: false,
            tableau: Self { n: self.n, generators: gens },
        })
    }

    /// Measures `m` placed on `targets`.
    pub fn measure_on(
        &self,
        m: &PauliString,
        targets: &[usize],
        src: &mut dyn OutcomeSource,
    ) -> Result<StabMeasured, StabilizerError> {
        self.measure_generatorwise(&m.embed(self.n, targets)?, src)
    }

    pub fn apply_clifford(&self, g: &CliffordGate) -> Result<Self, StabilizerError> {
        let generators = self
            .generators
            .iter()
            .map(|p| conjugate(g, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { n: self.n, generators })
    }

    /// All `2^n` signed elements of the stabilizer group, identity first.
    ///
    /// Panics above 20 qubits.
    pub fn group_elements(&self) -> Vec<PauliString> {
        assert!(self.n <= 20, "group enumeration is exponential");
        let mut out = vec![PauliString::identity(self.n)];
        for g in &self.generators {
            let more: Vec<PauliString> = out.iter().map(|e| e.multiply(g).expect("same size")).collect();
            out.extend(more);
        }
        out
    }

    /// Reduced row echelon form of the signed generators; two tableaux
    /// describe the same state iff their canonical forms are equal.
    pub fn canonical_form(&self) -> Vec<PauliString> {
        row_reduce(&self.generators, self.n).0
    }

    pub fn same_stabilizer_state(&self, other: &Self) -> bool {
        self.n == other.n && self.canonical_form() == other.canonical_form()
    }

    /// The state fixed by every generator, with its first nonzero amplitude
    /// made real and positive.
    pub fn to_statevector(&self) -> Result<StateVector, StabilizerError> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(StabilizerError::TooLarge(self.n));
        }
        // Project a generic vector with ∏(I+g)/2; it has nonzero overlap
        // with the target unless chosen adversarially.
        for seed in 0..4u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
            let mut v: Vec<C64> = (0..1usize << self.n)
                .map(|_| C64::from_polar(1.0 + rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>()))
                .collect();
            for g in &self.generators {
                let gv = pauli_action(&v, g);
                v = v.iter().zip(&gv).map(|(a, b)| (a + b) * 0.5).collect();
            }
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue;
            }
            let lead = v.iter().position(|a| a.norm() > 1e-9 * norm).expect("nonzero vector");
            let phase = v[lead].conj() / v[lead].norm();
            let mut v: Vec<C64> = v.into_iter().map(|a| a * phase).collect();
            v[lead] = C64::new(v[lead].norm(), 0.0);
            return Ok(StateVector::normalized(v)?);
        }
        Err(StabilizerError::Inconsistent)
    }
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.generators {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// One signed Pauli string per line; blank lines and `#` comments skipped.
impl FromStr for StabilizerTableau {
    type Err = StabilizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut gens = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let p = line
                .parse::<PauliString>()
                .map_err(|e| StabilizerError::Parse { line: i + 1, msg: e.to_string() })?;
            gens.push(p);
        }
        Self::new(gens)
    }
}
