//! The discrete universal sets of 2-qubit measurement operators.
//!
//! Each set always contains XX and ZZ (Bell measurements, hence teleports and
//! Pauli corrections) and XZ (the Hadamard gadget). S0–S2 add XY for the
//! phase gate; each set adds one non-Clifford operator whose gadget realizes
//! a single-qubit rotation, called the native rotation below.
//!
//! The displayed non-Clifford operators are taken verbatim. Read as the
//! first observable of a `B_{V†}` gadget they select `V = RX(θ)` for S1,
//! `V = RZ(−θ)` for S2 and `V = RZ(−π/4)` for S3. S0 is built from `u`
//! itself, so its native rotation is `u`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadgets::bu_observables;
use crate::linalg::Matrix;
use crate::observable::{Axis, Observable};
use crate::statevector::GateKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("θ = {0} is a multiple of π/2; the set requires θ ≠ mπ/2 for m an integer")]
    DegenerateTheta(f64),
    #[error("set {0} needs a θ value")]
    MissingTheta(SetId),
    #[error("unknown set {0:?} (expected s0, s1, s2 or s3)")]
    UnknownSet(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetId {
    S0,
    S1,
    S2,
    S3,
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SetId::S0 => "S0",
            SetId::S1 => "S1",
            SetId::S2 => "S2",
            SetId::S3 => "S3",
        };
        f.write_str(s)
    }
}

impl FromStr for SetId {
    type Err = SetError;

    fn from_str(s: &str) -> Result<Self, SetError> {
        match s.to_ascii_lowercase().as_str() {
            "s0" => Ok(SetId::S0),
            "s1" => Ok(SetId::S1),
            "s2" => Ok(SetId::S2),
            "s3" => Ok(SetId::S3),
            _ => Err(SetError::UnknownSet(s.to_string())),
        }
    }
}

/// Rotation axis of a native gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotAxis {
    Z,
    X,
}

/// `RZ(angle)` or `RX(angle)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub axis: RotAxis,
    pub angle: f64,
}

impl Rotation {
    pub fn matrix(&self) -> Matrix {
        match self.axis {
            RotAxis::Z => GateKind::Rz(self.angle).matrix(),
            RotAxis::X => GateKind::Rx(self.angle).matrix(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self { axis: self.axis, angle: -self.angle }
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.axis {
            RotAxis::Z => "RZ",
            RotAxis::X => "RX",
        };
        write!(f, "{name}({})", self.angle)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniversalSet {
    pub id: SetId,
    pub theta: Option<f64>,
    /// Rotation axis of `u` for S0.
    pub s0_axis: RotAxis,
    operators: Vec<Observable>,
}

fn is_degenerate(theta: f64) -> bool {
    let m = theta / FRAC_PI_2;
    (m - m.round()).abs() < 1e-9
}

fn canonical(list: Vec<Observable>) -> Vec<Observable> {
    list.into_iter().map(|o| o.canonical().0).collect()
}

fn pair(a: Axis, b: Axis) -> Observable {
    Observable::pair(a, b)
}

/// Canonical operator list of a set. `theta` is required for S0–S2; S0 uses
/// `u = RZ(θ)`.
pub fn set_operators(id: SetId, theta: Option<f64>) -> Result<Vec<Observable>, SetError> {
    Ok(UniversalSet::new(id, theta)?.operators)
}

impl UniversalSet {
    pub fn new(id: SetId, theta: Option<f64>) -> Result<Self, SetError> {
        Self::with_axis(id, theta, RotAxis::Z)
    }

    /// S0 with `u = RZ(θ)` or `RX(θ)`; the axis is ignored for other sets.
    pub fn with_axis(id: SetId, theta: Option<f64>, s0_axis: RotAxis) -> Result<Self, SetError> {
        let clifford = [pair(Axis::X, Axis::X), pair(Axis::Z, Axis::Z), pair(Axis::X, Axis::Z)];
        let mut ops = clifford.to_vec();
        let theta = match id {
            SetId::S3 => None,
            _ => {
                let t = theta.ok_or(SetError::MissingTheta(id))?;
                if is_degenerate(t) {
                    return Err(SetError::DegenerateTheta(t));
                }
                ops.push(pair(Axis::X, Axis::Y));
                Some(t)
            }
        };
        match id {
            SetId::S0 => {
                let u = Rotation { axis: s0_axis, angle: theta.expect("checked") };
                let (a, b) = bu_observables(&u.matrix()).expect("rotations are unitary");
                ops.push(a);
                ops.push(b);
            }
            SetId::S1 => {
                let t = theta.expect("checked");
                ops.push(pair(Axis::new(0.0, t.sin(), t.cos()), Axis::Z));
            }
            SetId::S2 => {
                let t = theta.expect("checked");
                ops.push(pair(Axis::new(t.cos(), t.sin(), 0.0), Axis::X));
            }
            SetId::S3 => ops.push(pair(Axis::new(1.0, 1.0, 0.0), Axis::X)),
        }
        Ok(Self { id, theta, s0_axis, operators: canonical(ops) })
    }

    pub fn operators(&self) -> &[Observable] {
        &self.operators
    }

    /// Single-qubit operators used for preparation and readout.
    pub fn prep_operators(&self) -> Vec<Observable> {
        vec![Observable::single(Axis::Z), Observable::single(Axis::X)]
    }

    pub fn has_phase_gadget(&self) -> bool {
        self.id != SetId::S3
    }

    /// The rotation `V` realized by the set's non-Clifford gadget when the
    /// incoming frame commutes with it.
    pub fn native_rotation(&self) -> Rotation {
        match self.id {
            SetId::S0 => Rotation { axis: self.s0_axis, angle: self.theta.expect("S0 has θ") },
            SetId::S1 => Rotation { axis: RotAxis::X, angle: self.theta.expect("S1 has θ") },
            SetId::S2 => Rotation { axis: RotAxis::Z, angle: -self.theta.expect("S2 has θ") },
            SetId::S3 => Rotation { axis: RotAxis::Z, angle: -FRAC_PI_4 },
        }
    }

    /// True if `obs` is in the operator list or among the prep operators, up
    /// to sign and factor order.
    pub fn contains(&self, obs: &Observable) -> bool {
        self.operators.iter().chain(&self.prep_operators()).any(|o| o.same_up_to_sign_and_order(obs))
    }

    /// Signed multiple `c` with `c·α ≡ φ (mod 2π)` and smallest `|c| ≤ 8`,
    /// positive on ties, where `α` is the native angle; `Some(0)` if `φ ≡ 0`.
    pub fn native_multiple(&self, phi: f64) -> Option<i32> {
        let alpha = self.native_rotation().angle;
        let close = |x: f64| {
            let r = x.rem_euclid(2.0 * PI);
            r < 1e-9 || 2.0 * PI - r < 1e-9
        };
        if close(phi) {
            return Some(0);
        }
        (1..=8).flat_map(|c| [c, -c]).find(|&c| close(c as f64 * alpha - phi))
    }
}

impl fmt::Display for UniversalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.id)?;
        for (i, o) in self.operators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::bu_observables;

    #[test]
    fn s3_list() {
        let ops = set_operators(SetId::S3, None).unwrap();
        let names: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
        assert_eq!(names, ["XX", "ZZ", "XZ", "(0.707107X+0.707107Y)X"]);
    }

    #[test]
    fn s1_contains_theta_operator() {
        let t = PI / 3.0;
        let ops = set_operators(SetId::S1, Some(t)).unwrap();
        let want = Observable::pair(Axis::new(0.0, t.sin(), t.cos()), Axis::Z);
        assert!(ops.iter().any(|o| o.same_up_to_sign_and_order(&want)));
        assert_eq!(ops.len(), 5);
    }

    #[test]
    fn degenerate_theta_rejected() {
        for id in [SetId::S0, SetId::S1, SetId::S2] {
            for m in -3..=3 {
                let t = m as f64 * FRAC_PI_2;
                assert_eq!(set_operators(id, Some(t)).unwrap_err(), SetError::DegenerateTheta(t));
            }
            assert_eq!(set_operators(id, None).unwrap_err(), SetError::MissingTheta(id));
        }
        assert!(set_operators(SetId::S1, Some(0.3)).is_ok());
    }

    #[test]
    fn native_rotations_match_displayed_operators() {
        for (id, theta) in [(SetId::S0, Some(0.4)), (SetId::S1, Some(0.4)), (SetId::S2, Some(0.4)), (SetId::S3, None)] {
            let set = UniversalSet::new(id, theta).unwrap();
            let (a, b) = bu_observables(&set.native_rotation().matrix()).unwrap();
            assert!(set.contains(&a), "{id}: {a}");
            assert!(set.contains(&b), "{id}: {b}");
        }
        let x = UniversalSet::with_axis(SetId::S0, Some(0.4), RotAxis::X).unwrap();
        let (a, b) = bu_observables(&x.native_rotation().matrix()).unwrap();
        assert!(x.contains(&a) && x.contains(&b));
    }

    #[test]
    fn multiples_of_the_native_angle() {
        let s3 = UniversalSet::new(SetId::S3, None).unwrap();
        assert_eq!(s3.native_multiple(FRAC_PI_4), Some(-1));
        assert_eq!(s3.native_multiple(-FRAC_PI_4), Some(1));
        assert_eq!(s3.native_multiple(FRAC_PI_2), Some(-2));
        assert_eq!(s3.native_multiple(2.0 * PI), Some(0));
        assert_eq!(s3.native_multiple(0.1), None);
    }

    #[test]
    fn parse_ids() {
        assert_eq!("S3".parse::<SetId>().unwrap(), SetId::S3);
        assert!("s9".parse::<SetId>().is_err());
    }
}
