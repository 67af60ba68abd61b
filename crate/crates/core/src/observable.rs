//! Product observables `n₀·σ ⊗ n₁·σ` built from Bloch-sphere axes.
//!
//! Pauli observables are the special case where every axis is ±X, ±Y or ±Z;
//! the non-Clifford members of the universal sets, such as
//! `(X+Y)/√2 ⊗ X`, need the general form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};
use crate::pauli::{Pauli, PauliString};

const EPS: f64 = 1e-12;

/// Real unit vector `(x, y, z)` standing for `xX + yY + zZ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Axis {
    pub const X: Axis = Axis { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Axis = Axis { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Axis = Axis { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`; panics on the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        assert!(n > EPS, "axis must be nonzero");
        Self { x: x / n, y: y / n, z: z / n }
    }

    pub fn from_pauli(p: Pauli) -> Option<Self> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(Self::X),
            Pauli::Y => Some(Self::Y),
            Pauli::Z => Some(Self::Z),
        }
    }

    /// Reads the axis off a Hermitian traceless 2×2 matrix with eigenvalues ±1.
    pub fn from_matrix(m: &Matrix) -> Self {
        assert_eq!(m.dim(), 2);
        let comp = |p: Matrix| ((&p * m).trace().re) / 2.0;
        Self::new(comp(linalg::pauli_x()), comp(linalg::pauli_y()), comp(linalg::pauli_z()))
    }

    pub fn neg(self) -> Self {
        Self { x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn matrix(&self) -> Matrix {
        linalg::pauli_x()
            .scale(self.x.into())
            .add(&linalg::pauli_y().scale(self.y.into()))
            .add(&linalg::pauli_z().scale(self.z.into()))
    }

    /// `Some((P, sign))` if the axis is `±P` for a Pauli letter.
    pub fn as_pauli(&self) -> Option<(Pauli, i8)> {
        let comps = [(Pauli::X, self.x), (Pauli::Y, self.y), (Pauli::Z, self.z)];
        let nonzero: Vec<_> = comps.iter().filter(|(_, c)| c.abs() > 1e-9).collect();
        match nonzero.as_slice() {
            [(p, c)] => Some((*p, if *c > 0.0 { 1 } else { -1 })),
            _ => None,
        }
    }

    fn leading_sign(&self) -> f64 {
        [self.x, self.y, self.z]
            .into_iter()
            .find(|c| c.abs() > 1e-9)
            .map(f64::signum)
            .unwrap_or(1.0)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.x - other.x).abs() < tol && (self.y - other.y).abs() < tol && (self.z - other.z).abs() < tol
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((p, s)) = self.as_pauli() {
            if s < 0 {
                f.write_str("-")?;
            }
            return write!(f, "{}", p.letter());
        }
        f.write_str("(")?;
        let mut first = true;
        for (c, l) in [(self.x, 'X'), (self.y, 'Y'), (self.z, 'Z')] {
            if c.abs() <= 1e-9 {
                continue;
            }
            if !first && c > 0.0 {
                f.write_str("+")?;
            }
            write!(f, "{}{l}", format_coeff(c))?;
            first = false;
        }
        f.write_str(")")
    }
}

fn format_coeff(c: f64) -> String {
    let s = format!("{c:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Tensor product of one or two axis observables, eigenvalues ±1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    factors: Vec<Axis>,
}

impl Observable {
    pub fn new(factors: Vec<Axis>) -> Self {
        assert!(
            (1..=2).contains(&factors.len()),
            "observables act on one or two qubits"
        );
        Self { factors }
    }

    pub fn single(a: Axis) -> Self {
        Self::new(vec![a])
    }

    pub fn pair(a: Axis, b: Axis) -> Self {
        Self::new(vec![a, b])
    }

    /// Hermitian Pauli string with every letter non-identity, e.g. `-YX`.
    pub fn from_pauli(p: &PauliString) -> Option<Self> {
        let sign = p.sign()?;
        let mut factors: Vec<Axis> = p.paulis().into_iter().map(Axis::from_pauli).collect::<Option<_>>()?;
        if factors.is_empty() || factors.len() > 2 {
            return None;
        }
        if sign < 0 {
            factors[0] = factors[0].neg();
        }
        Some(Self::new(factors))
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Axis] {
        &self.factors
    }

    pub fn matrix(&self) -> Matrix {
        self.factors
            .iter()
            .fold(Matrix::identity(1), |m, a| m.kron(&a.matrix()))
    }

    pub fn neg(&self) -> Self {
        let mut f = self.factors.clone();
        f[0] = f[0].neg();
        Self::new(f)
    }

    /// Signed Pauli string if every factor is a Pauli axis.
    pub fn as_pauli(&self) -> Option<PauliString> {
        let mut letters = Vec::new();
        let mut sign = 1;
        for a in &self.factors {
            let (p, s) = a.as_pauli()?;
            letters.push(p);
            sign *= s;
        }
        let p = PauliString::from_paulis(&letters).ok()?;
        Some(if sign < 0 { p.neg() } else { p })
    }

    /// Sign-positive representative: every factor's leading component is made
    /// positive. Returns the representative and whether the overall sign
    /// flipped (outcomes must then be relabeled).
    pub fn canonical(&self) -> (Self, bool) {
        let mut flipped = false;
        let factors = self
            .factors
            .iter()
            .map(|a| {
                if a.leading_sign() < 0.0 {
                    flipped = !flipped;
                    a.neg()
                } else {
                    *a
                }
            })
            .collect();
        (Self::new(factors), flipped)
    }

    /// Equality up to overall sign and the order of the tensor factors.
    pub fn same_up_to_sign_and_order(&self, other: &Self) -> bool {
        if self.arity() != other.arity() {
            return false;
        }
        let (a, _) = self.canonical();
        let (b, _) = other.canonical();
        let eq = |x: &Axis, y: &Axis| x.approx_eq(y, 1e-9);
        match a.arity() {
            1 => eq(&a.factors[0], &b.factors[0]),
            _ => {
                (eq(&a.factors[0], &b.factors[0]) && eq(&a.factors[1], &b.factors[1]))
                    || (eq(&a.factors[0], &b.factors[1]) && eq(&a.factors[1], &b.factors[0]))
            }
        }
    }
}

/// Puts `(obs, targets)` in canonical form: sign-positive factors and
/// ascending targets. The flag reports a sign flip.
pub fn canonicalize(obs: &Observable, targets: &[usize]) -> (Observable, Vec<usize>, bool) {
    let (c, flipped) = obs.canonical();
    if targets.len() == 2 && targets[0] > targets[1] {
        let f = c.factors();
        (Observable::pair(f[1], f[0]), vec![targets[1], targets[0]], flipped)
    } else {
        (c, targets.to_vec(), flipped)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (c, flipped) = self.canonical();
        if flipped {
            f.write_str("-")?;
        }
        for a in c.factors() {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}
