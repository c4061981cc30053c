//! Standard gates as library constants.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{c, Mat2, Mat4, Pauli, Qubit, UnitaryOp};

pub fn identity2() -> UnitaryOp<2> {
    UnitaryOp::identity()
}

pub fn hadamard() -> UnitaryOp<2> {
    let h = c(FRAC_1_SQRT_2, 0.0);
    UnitaryOp::from_matrix_unchecked(Mat2::new(h, h, h, -h))
}

/// Phase gate `diag(1, i)`.
pub fn phase_s() -> UnitaryOp<2> {
    UnitaryOp::from_matrix_unchecked(Mat2::new(
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 1.0),
    ))
}

/// `diag(1, e^{iπ/4})`
pub fn t_gate() -> UnitaryOp<2> {
    UnitaryOp::from_matrix_unchecked(Mat2::new(
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    ))
}

pub fn pauli(p: Pauli) -> UnitaryOp<2> {
    UnitaryOp::from_matrix_unchecked(p.matrix())
}

/// `R_y(θ) = exp(−iθY/2)`
pub fn ry(theta: f64) -> UnitaryOp<2> {
    let (s, co) = (0.5 * theta).sin_cos();
    UnitaryOp::from_matrix_unchecked(Mat2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)))
}

fn permutation(perm: [usize; 4]) -> UnitaryOp<4> {
    let mut m = Mat4::zeros();
    for (from, &to) in perm.iter().enumerate() {
        m[(to, from)] = c(1.0, 0.0);
    }
    UnitaryOp::from_matrix_unchecked(m)
}

/// CNOT with control A and target B.
pub fn cnot() -> UnitaryOp<4> {
    permutation([0, 1, 3, 2])
}

/// CNOT with control B and target A.
pub fn cnot_reversed() -> UnitaryOp<4> {
    permutation([0, 3, 2, 1])
}

pub fn swap() -> UnitaryOp<4> {
    permutation([0, 2, 1, 3])
}

/// Convenience: single-qubit gate on one factor.
pub fn local(g: &UnitaryOp<2>, q: Qubit) -> UnitaryOp<4> {
    g.on(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::max_abs;

    #[test]
    fn gates_are_unitary() {
        for g in [hadamard(), phase_s(), t_gate(), ry(0.7)] {
            assert!(g.unitarity_residual() < 1e-15);
        }
        for g in [cnot(), cnot_reversed(), swap()] {
            assert!(g.unitarity_residual() == 0.0);
        }
    }

    #[test]
    fn reversed_cnot_is_swap_conjugate() {
        let s = swap();
        let lhs = s * cnot() * s;
        assert!(max_abs(&(lhs.matrix() - cnot_reversed().matrix())) == 0.0);
    }

    #[test]
    fn ry_matches_exponential() {
        // R_y(θ) = cos(θ/2) I − i sin(θ/2) Y
        let t = 1.1f64;
        let expected = Mat2::identity() * c((t / 2.0).cos(), 0.0)
            - Pauli::Y.matrix() * c(0.0, (t / 2.0).sin());
        assert!(max_abs(&(ry(t).matrix() - expected)) < 1e-15);
    }
}
