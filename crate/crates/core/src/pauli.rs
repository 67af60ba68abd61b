//! Phased Pauli strings and their conjugation by the Clifford generators.
//!
//! A [`PauliString`] on `n` qubits is `i^phase · P₀ ⊗ P₁ ⊗ … ⊗ Pₙ₋₁`, stored as
//! an exponent mod 4 plus two bit masks. Bit `q` of `x` is set when qubit `q`
//! carries X or Y, bit `q` of `z` when it carries Z or Y. The letter Y is the
//! Hermitian Pauli Y (so the bit pair (1,1) is *not* the product XZ, which is
//! `-iY`).
//!
//! Qubit 0 is the leftmost tensor factor everywhere in this crate.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};

pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("qubit {qubit} out of range for {n} qubits")]
    TargetOutOfRange { qubit: usize, n: usize },
    #[error("gate targets must be distinct (got {0} twice)")]
    RepeatedTarget(usize),
    #[error("Pauli strings support 1..={MAX_QUBITS} qubits, got {0}")]
    BadSize(usize),
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Index in σ₀..σ₃ order.
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_index(j: usize) -> Option<Self> {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].get(j).copied()
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> Matrix {
        linalg::sigma(self.index())
    }
}

/// `i^phase · ⊗_q P_q` over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n_qubits: usize,
    phase: u8,
    x: u64,
    z: u64,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, phase_exp: u8, x_mask: u64, z_mask: u64) -> Result<Self, PauliError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(PauliError::BadSize(n_qubits));
        }
        let m = mask(n_qubits);
        if x_mask & !m != 0 || z_mask & !m != 0 {
            let bad = ((x_mask | z_mask) & !m).trailing_zeros() as usize;
            return Err(PauliError::TargetOutOfRange { qubit: bad, n: n_qubits });
        }
        Ok(Self { n_qubits, phase: phase_exp % 4, x: x_mask, z: z_mask })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(n_qubits, 0, 0, 0).expect("identity size")
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self, PauliError> {
        if qubit >= n_qubits {
            return Err(PauliError::TargetOutOfRange { qubit, n: n_qubits });
        }
        let (x, z) = p.bits();
        Self::new(n_qubits, 0, (x as u64) << qubit, (z as u64) << qubit)
    }

    /// Builds a sign-free string from letters, qubit 0 first.
    pub fn from_paulis(letters: &[Pauli]) -> Result<Self, PauliError> {
        let mut x = 0;
        let mut z = 0;
        for (q, p) in letters.iter().enumerate() {
            let (bx, bz) = p.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Self::new(letters.len(), 0, x, z)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn paulis(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.get(q)).collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| (self.x | self.z) >> q & 1 == 1).collect()
    }

    /// Identity letters everywhere (any phase).
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Same letters, phase replaced.
    pub fn with_phase(&self, phase_exp: u8) -> Self {
        Self { phase: phase_exp % 4, ..self.clone() }
    }

    /// Same letters with phase `+1`.
    pub fn unsigned(&self) -> Self {
        self.with_phase(0)
    }

    pub fn neg(&self) -> Self {
        self.with_phase(self.phase + 2)
    }

    /// `+1` for phase 0, `-1` for phase 2; `None` for ±i.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Group product `self · other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let mut e = self.phase as i32 + other.phase as i32;
        for q in 0..self.n_qubits {
            let (x1, z1) = (self.x >> q & 1, self.z >> q & 1);
            let (x2, z2) = (other.x >> q & 1, other.z >> q & 1);
            e += single_product_phase(x1 as i32, z1 as i32, x2 as i32, z2 as i32);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            phase: e.rem_euclid(4) as u8,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        })
    }

    /// `true` iff `self · other = other · self`.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let s = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(s % 2 == 0)
    }

    /// Places this string on `targets` of a larger register.
    pub fn embed(&self, n_total: usize, targets: &[usize]) -> Result<Self, PauliError> {
        if targets.len() != self.n_qubits {
            return Err(PauliError::DimensionMismatch(targets.len(), self.n_qubits));
        }
        let mut x = 0;
        let mut z = 0;
        for (k, &q) in targets.iter().enumerate() {
            if q >= n_total {
                return Err(PauliError::TargetOutOfRange { qubit: q, n: n_total });
            }
            x |= (self.x >> k & 1) << q;
            z |= (self.z >> k & 1) << q;
        }
        Self::new(n_total, self.phase, x, z)
    }

    /// Restriction to `targets` (phase kept).
    pub fn restrict(&self, targets: &[usize]) -> Result<Self, PauliError> {
        let mut x = 0;
        let mut z = 0;
        for (k, &q) in targets.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(PauliError::TargetOutOfRange { qubit: q, n: self.n_qubits });
            }
            x |= (self.x >> q & 1) << k;
            z |= (self.z >> q & 1) << k;
        }
        Self::new(targets.len(), self.phase, x, z)
    }

    /// Dense matrix, qubit 0 as the leftmost Kronecker factor.
    ///
    /// Panics above 10 qubits.
    pub fn to_matrix(&self) -> Matrix {
        assert!(self.n_qubits <= 10, "to_matrix is for small strings");
        let mut m = Matrix::identity(1);
        for q in 0..self.n_qubits {
            m = m.kron(&self.get(q).matrix());
        }
        m.scale(phase_factor(self.phase))
    }
}

pub fn phase_factor(exp: u8) -> C64 {
    match exp % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

// Exponent of i picked up by P(x1,z1)·P(x2,z2) = i^g P(x1⊕x2, z1⊕z2), with
// P(1,1) = Y.
fn single_product_phase(x1: i32, z1: i32, x2: i32, z2: i32) -> i32 {
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n_qubits {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    /// Accepts an optional `+`, `-`, `+i`, `-i` or `i` prefix followed by
    /// letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self, PauliError> {
        let t = s.trim();
        let (phase, rest) = if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else {
            (0, t)
        };
        if rest.is_empty() {
            return Err(PauliError::Parse(s.to_string()));
        }
        let letters = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(PauliError::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_paulis(&letters)?.with_phase(phase))
    }
}

/// Clifford generators acting by conjugation on Pauli strings.
///
/// `P` is `e^{-iπ/4 Z} = diag(e^{-iπ/4}, e^{iπ/4})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    Cnot { control: usize, target: usize },
    H(usize),
    P(usize),
    Swap(usize, usize),
}

impl CliffordGate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            CliffordGate::Cnot { control, target } => vec![control, target],
            CliffordGate::H(q) | CliffordGate::P(q) => vec![q],
            CliffordGate::Swap(a, b) => vec![a, b],
        }
    }

    /// Gates whose product is the inverse of `self`.
    pub fn inverse(&self) -> Vec<CliffordGate> {
        match *self {
            CliffordGate::P(q) => vec![CliffordGate::P(q); 3],
            g => vec![g],
        }
    }

    fn check(&self, n: usize) -> Result<(), PauliError> {
        let t = self.targets();
        for &q in &t {
            if q >= n {
                return Err(PauliError::TargetOutOfRange { qubit: q, n });
            }
        }
        if t.len() == 2 && t[0] == t[1] {
            return Err(PauliError::RepeatedTarget(t[0]));
        }
        Ok(())
    }

    // Images of X_q and Z_q for each target q, in target order.
    fn generator_images(&self, n: usize) -> Vec<(PauliString, PauliString)> {
        let s = |q: usize, p: Pauli| PauliString::single(n, q, p).expect("checked target");
        let prod = |a: PauliString, b: PauliString| a.multiply(&b).expect("same size");
        match *self {
            CliffordGate::H(q) => vec![(s(q, Pauli::Z), s(q, Pauli::X))],
            CliffordGate::P(q) => vec![(s(q, Pauli::Y), s(q, Pauli::Z))],
            CliffordGate::Cnot { control: c, target: t } => vec![
                (prod(s(c, Pauli::X), s(t, Pauli::X)), s(c, Pauli::Z)),
                (s(t, Pauli::X), prod(s(c, Pauli::Z), s(t, Pauli::Z))),
            ],
            CliffordGate::Swap(a, b) => vec![
                (s(b, Pauli::X), s(b, Pauli::Z)),
                (s(a, Pauli::X), s(a, Pauli::Z)),
            ],
        }
    }

    /// Unitary matrix on the gate's own targets.
    pub fn matrix(&self) -> Matrix {
        match self {
            CliffordGate::H(_) => crate::statevector::GateKind::H.matrix(),
            CliffordGate::P(_) => crate::statevector::GateKind::P.matrix(),
            CliffordGate::Cnot { .. } => crate::statevector::GateKind::Cnot.matrix(),
            CliffordGate::Swap(..) => crate::statevector::GateKind::Swap.matrix(),
        }
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliffordGate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            CliffordGate::H(q) => write!(f, "H {q}"),
            CliffordGate::P(q) => write!(f, "P {q}"),
            CliffordGate::Swap(a, b) => write!(f, "SWAP {a} {b}"),
        }
    }
}

/// `g · p · g†`.
pub fn conjugate(g: &CliffordGate, p: &PauliString) -> Result<PauliString, PauliError> {
    let n = p.n_qubits();
    g.check(n)?;
    let targets = g.targets();
    let local: u64 = targets.iter().map(|&q| 1u64 << q).sum();
    let rest = PauliString::new(n, 0, p.x & !local, p.z & !local)?;

    // p restricted to the targets is i^(phase + #Y) ∏_q X_q^x Z_q^z.
    let n_y = (p.x & p.z & local).count_ones() as u8;
    let mut out = PauliString::identity(n).with_phase(p.phase + n_y);
    for (&q, (img_x, img_z)) in targets.iter().zip(g.generator_images(n)) {
        if p.x >> q & 1 == 1 {
            out = out.multiply(&img_x)?;
        }
        if p.z >> q & 1 == 1 {
            out = out.multiply(&img_z)?;
        }
    }
    out.multiply(&rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn identity_times_x() {
        assert_eq!(ps("I").multiply(&ps("X")).unwrap(), ps("X"));
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let p = ps("X").multiply(&ps("Z")).unwrap();
        assert_eq!((p.phase_exp(), p.x_mask(), p.z_mask()), (3, 1, 1));
        assert_eq!(p.to_string(), "-iY");
        // 2x2 matrix oracle
        let m = &linalg::pauli_x() * &linalg::pauli_z();
        assert!(p.to_matrix().approx_eq(&m, 1e-15));
    }

    #[test]
    fn disjoint_supports() {
        let p = ps("XI").multiply(&ps("IX")).unwrap();
        assert_eq!(p, ps("XX"));
        assert_eq!(p.phase_exp(), 0);
    }

    #[test]
    fn size_mismatch() {
        assert!(matches!(ps("X").multiply(&ps("XX")), Err(PauliError::DimensionMismatch(1, 2))));
        assert!(ps("X").commutes(&ps("XX")).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(!ps("IZII").commutes(&ps("IXXI")).unwrap());
        assert!(ps("XYZ").commutes(&PauliString::identity(3)).unwrap());
    }

    #[test]
    fn commutation_agrees_with_matrix_commutator_on_all_two_qubit_pairs() {
        let all: Vec<PauliString> = (0..16)
            .map(|k| PauliString::new(2, 0, k & 3, k >> 2).unwrap())
            .collect();
        assert_eq!(all.len() * all.len(), 256);
        for a in &all {
            for b in &all {
                let (ma, mb) = (a.to_matrix(), b.to_matrix());
                let comm = (&ma * &mb).add(&(&mb * &ma).scale(C64::new(-1.0, 0.0)));
                let zero = comm.data().iter().all(|x| x.norm() < 1e-12);
                assert_eq!(a.commutes(b).unwrap(), zero, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn cnot_conjugation_table() {
        let cx = CliffordGate::Cnot { control: 0, target: 1 };
        assert_eq!(conjugate(&cx, &ps("XI")).unwrap(), ps("XX"));
        assert_eq!(conjugate(&cx, &ps("IX")).unwrap(), ps("IX"));
        assert_eq!(conjugate(&cx, &ps("ZI")).unwrap(), ps("ZI"));
        assert_eq!(conjugate(&cx, &ps("IZ")).unwrap(), ps("ZZ"));
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        assert_eq!(conjugate(&CliffordGate::H(0), &ps("X")).unwrap(), ps("Z"));
        assert_eq!(conjugate(&CliffordGate::H(0), &ps("Z")).unwrap(), ps("X"));
        assert_eq!(conjugate(&CliffordGate::H(0), &ps("Y")).unwrap(), ps("-Y"));
    }

    #[test]
    fn phase_gate_signs() {
        assert_eq!(conjugate(&CliffordGate::P(0), &ps("X")).unwrap(), ps("Y"));
        assert_eq!(conjugate(&CliffordGate::P(0), &ps("Y")).unwrap(), ps("-X"));
    }

    #[test]
    fn out_of_range_target() {
        let e = conjugate(&CliffordGate::H(3), &ps("XX")).unwrap_err();
        assert_eq!(e, PauliError::TargetOutOfRange { qubit: 3, n: 2 });
        let e = conjugate(&CliffordGate::Cnot { control: 1, target: 1 }, &ps("XX")).unwrap_err();
        assert_eq!(e, PauliError::RepeatedTarget(1));
    }

    #[test]
    fn text_round_trip() {
        for s in ["-iYX", "+XIXX", "+iZ", "-ZZ"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert_eq!(ps("XZ"), ps("+XZ"));
        assert!("".parse::<PauliString>().is_err());
        assert!("+XQ".parse::<PauliString>().is_err());
        assert!("-".parse::<PauliString>().is_err());
    }

    #[test]
    fn weight_counts_nontrivial_factors() {
        assert_eq!(PauliString::identity(4).weight(), 0);
        assert_eq!(ps("IZZZ").weight(), 3);
        assert_eq!(ps("-iYIXI").weight(), 2);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        let m = (1u64 << n) - 1;
        (0u8..4, 0..=m, 0..=m).prop_map(move |(p, x, z)| PauliString::new(n, p, x, z).unwrap())
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = CliffordGate> {
        (0..4usize, 0..n, 1..n).prop_map(move |(k, a, off)| {
            let b = (a + off) % n;
            match k {
                0 => CliffordGate::Cnot { control: a, target: b },
                1 => CliffordGate::H(a),
                2 => CliffordGate::P(a),
                _ => CliffordGate::Swap(a, b),
            }
        })
    }

    fn gate_matrix_on(g: &CliffordGate, n: usize) -> Matrix {
        // dense n-qubit unitary via basis-state simulation
        let dim = 1 << n;
        let mut m = Matrix::zeros(dim);
        for col in 0..dim {
            let s = crate::statevector::StateVector::basis_index(n, col).unwrap();
            let out = s.apply_clifford(g).unwrap();
            for (row, a) in out.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_pauli(3), b in arb_pauli(3), c in arb_pauli(3)) {
            let l = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn products_match_matrices(a in arb_pauli(4), b in arb_pauli(4)) {
            let prod = a.multiply(&b).unwrap();
            prop_assert!(prod.to_matrix().approx_eq(&(&a.to_matrix() * &b.to_matrix()), 1e-12));
        }

        #[test]
        fn conjugation_matches_matrices(p in arb_pauli(3), g in arb_gate(3)) {
            let u = gate_matrix_on(&g, 3);
            let expect = &(&u * &p.to_matrix()) * &u.adjoint();
            let got = conjugate(&g, &p).unwrap();
            prop_assert!(got.to_matrix().approx_eq(&expect, 1e-12), "{} {} -> {}", g, p, got);
        }

        #[test]
        fn conjugation_inverts(p in arb_pauli(3), g in arb_gate(3)) {
            let mut q = p.clone();
            for h in g.inverse() {
                q = conjugate(&h, &q).unwrap();
            }
            prop_assert_eq!(conjugate(&g, &q).unwrap(), p);
        }

        #[test]
        fn one_qubit_gates_stay_local(p in arb_pauli(4), q in 0usize..4, k in 0usize..2) {
            let g = if k == 0 { CliffordGate::H(q) } else { CliffordGate::P(q) };
            let out = conjugate(&g, &p).unwrap();
            let outside = !(1u64 << q) & 0xf;
            prop_assert_eq!(out.x_mask() & outside, p.x_mask() & outside);
            prop_assert_eq!(out.z_mask() & outside, p.z_mask() & outside);
            prop_assert_eq!(out.weight(), p.weight());
        }
    }
}
