use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Mat2, Mat4, UnitaryOp, C64};
use crate::error::{Error, Result};

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    /// The three non-identity labels, the only single-qubit Clifford measurements.
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> Mat2 {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        match self {
            Pauli::I => Mat2::new(o, z, z, o),
            Pauli::X => Mat2::new(z, o, o, z),
            Pauli::Y => Mat2::new(z, -i, i, z),
            Pauli::Z => Mat2::new(o, z, z, -o),
        }
    }

    /// Action on a computational basis state: `P|bit⟩ = phase·|bit'⟩`.
    #[inline]
    pub fn act(self, bit: usize) -> (usize, C64) {
        match self {
            Pauli::I => (bit, C64::new(1.0, 0.0)),
            Pauli::X => (bit ^ 1, C64::new(1.0, 0.0)),
            Pauli::Y => {
                if bit == 0 {
                    (1, C64::new(0.0, 1.0))
                } else {
                    (0, C64::new(0.0, -1.0))
                }
            }
            Pauli::Z => (bit, C64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0)),
        }
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    /// Product `self·other = phase·result`.
    pub fn product(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

impl FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(Pauli::I),
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            _ => Err(Error::InvalidArgument(format!("unknown Pauli label {s:?}"))),
        }
    }
}

/// Two-qubit Pauli string `a ⊗ b`, qubit A on the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub a: Pauli,
    pub b: Pauli,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString {
        a: Pauli::I,
        b: Pauli::I,
    };

    pub const fn new(a: Pauli, b: Pauli) -> Self {
        PauliString { a, b }
    }

    /// All sixteen strings, ordered by `4·index(a) + index(b)`.
    pub fn all() -> [PauliString; 16] {
        let mut out = [PauliString::IDENTITY; 16];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = PauliString::from_index(k);
        }
        out
    }

    pub fn from_index(k: usize) -> Self {
        PauliString::new(Pauli::ALL[(k >> 2) & 3], Pauli::ALL[k & 3])
    }

    pub fn index(self) -> usize {
        4 * self.a.index() + self.b.index()
    }

    pub fn is_identity(self) -> bool {
        self == PauliString::IDENTITY
    }

    pub fn commutes_with(self, other: PauliString) -> bool {
        // Two strings commute iff they anticommute on an even number of sites.
        let anti = usize::from(!self.a.commutes_with(other.a))
            + usize::from(!self.b.commutes_with(other.b));
        anti % 2 == 0
    }

    pub fn product(self, other: PauliString) -> (C64, PauliString) {
        let (pa, a) = self.a.product(other.a);
        let (pb, b) = self.b.product(other.b);
        (pa * pb, PauliString::new(a, b))
    }

    /// Action on basis index `k = 2·bit_A + bit_B`.
    #[inline]
    pub fn act(self, k: usize) -> (usize, C64) {
        let (ba, pa) = self.a.act(k >> 1);
        let (bb, pb) = self.b.act(k & 1);
        ((ba << 1) | bb, pa * pb)
    }

    pub fn matrix(self) -> Mat4 {
        let mut m = Mat4::zeros();
        for k in 0..4 {
            let (k2, phase) = self.act(k);
            m[(k2, k)] = phase;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a, self.b)
    }
}

/// Materializes `labels` as a 4×4 unitary.
pub fn pauli_matrix(labels: PauliString) -> UnitaryOp<4> {
    UnitaryOp::from_matrix_unchecked(labels.matrix())
}
