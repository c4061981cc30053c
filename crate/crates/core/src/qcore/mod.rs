//! Dense complex linear algebra for one and two qubits.
//!
//! Basis ordering is `|00⟩, |01⟩, |10⟩, |11⟩` with qubit A as the left
//! tensor factor, so basis index `k = 2·a + b`. Everything is fixed-size and
//! stack allocated; at d = 4 there is nothing to gain from sparsity.

pub mod gates;
mod pauli;

use std::ops::Mul;

use nalgebra::{DMatrix, SMatrix};
pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use pauli::{pauli_matrix, Pauli, PauliString};

use crate::error::{Error, Result};

pub type Mat2 = nalgebra::Matrix2<C64>;
pub type Mat4 = nalgebra::Matrix4<C64>;
pub type Vec4 = nalgebra::Vector4<C64>;

/// Validation tolerance for user-supplied objects.
pub const INPUT_TOL: f64 = 1e-9;
/// Tolerance for objects produced internally.
pub const INTERNAL_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs<const R: usize, const K: usize>(m: &SMatrix<C64, R, K>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r >> 1, col >> 1)] * b[(r & 1, col & 1)])
}

/// Tensor factor of a two-qubit system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    A,
    B,
}

/// Normalized two-qubit pure state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVec(Vec4);

impl StateVec {
    /// Validates the squared norm within [`INPUT_TOL`] and renormalizes.
    pub fn new(amps: [C64; 4]) -> Result<Self> {
        let v = Vec4::from(amps);
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > INPUT_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(StateVec(v.unscale(n2.sqrt())))
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(amps: [C64; 4]) -> Result<Self> {
        let v = Vec4::from(amps);
        let n = v.norm();
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(StateVec(v.unscale(n)))
    }

    pub(crate) fn from_vec_unchecked(v: Vec4) -> Self {
        StateVec(v)
    }

    pub fn basis(k: usize) -> Self {
        let mut v = Vec4::zeros();
        v[k] = c(1.0, 0.0);
        StateVec(v)
    }

    /// `|00⟩`
    pub fn zero() -> Self {
        Self::basis(0)
    }

    /// `(|00⟩ + |11⟩)/√2`
    pub fn phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVec(Vec4::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)))
    }

    /// `a ⊗ b` for normalized single-qubit amplitudes.
    pub fn product(a: [C64; 2], b: [C64; 2]) -> Result<Self> {
        Self::new([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub fn amps(&self) -> &Vec4 {
        &self.0
    }

    pub fn to_array(&self) -> [C64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn apply(&self, u: &UnitaryOp<4>) -> StateVec {
        StateVec(u.matrix() * self.0)
    }

    pub fn inner(&self, other: &StateVec) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn density(&self) -> DensityMatrix<4> {
        DensityMatrix(self.0 * self.0.adjoint())
    }

    /// `⟨ψ|obs|ψ⟩` without validating `obs`; the imaginary part is dropped.
    #[inline]
    pub fn expect(&self, obs: &Mat4) -> f64 {
        self.0.dotc(&(obs * self.0)).re
    }

    #[inline]
    pub fn pauli_expectation(&self, p: PauliString) -> f64 {
        let mut acc = c(0.0, 0.0);
        for k in 0..4 {
            let (k2, phase) = p.act(k);
            acc += self.0[k2].conj() * phase * self.0[k];
        }
        acc.re
    }

    /// `Tr(Pψ)` for all sixteen strings in [`PauliString::all`] order.
    pub fn pauli_expectations(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.pauli_expectation(PauliString::from_index(k));
        }
        out
    }

    /// Correlation matrix `T_ij = ⟨σ_i ⊗ σ_j⟩`, i, j over X, Y, Z.
    pub fn correlations(&self) -> [[f64; 3]; 3] {
        let mut t = [[0.0; 3]; 3];
        for (i, &pa) in Pauli::XYZ.iter().enumerate() {
            for (j, &pb) in Pauli::XYZ.iter().enumerate() {
                t[i][j] = self.pauli_expectation(PauliString::new(pa, pb));
            }
        }
        t
    }

    pub fn reduced(&self, keep: Qubit) -> DensityMatrix<2> {
        let v = &self.0;
        let m = match keep {
            Qubit::A => Mat2::from_fn(|a, a2| {
                v[2 * a] * v[2 * a2].conj() + v[2 * a + 1] * v[2 * a2 + 1].conj()
            }),
            Qubit::B => Mat2::from_fn(|b, b2| v[b] * v[b2].conj() + v[2 + b] * v[2 + b2].conj()),
        };
        DensityMatrix(m)
    }

    /// `(cos 2Θ, sin 2Θ)` for the Schmidt angle Θ, computed from amplitudes
    /// without cancellation: `sin 2Θ = 2|ψ₀₀ψ₁₁ − ψ₀₁ψ₁₀|` and
    /// `cos 2Θ = λ₊ − λ₋` of the reduced state.
    pub(crate) fn schmidt_double_angle(&self) -> (f64, f64) {
        let v = &self.0;
        let sin2 = 2.0 * (v[0] * v[3] - v[1] * v[2]).norm();
        let diff = v[0].norm_sqr() + v[1].norm_sqr() - v[2].norm_sqr() - v[3].norm_sqr();
        let off = v[0] * v[2].conj() + v[1] * v[3].conj();
        let cos2 = (diff * diff + 4.0 * off.norm_sqr()).sqrt();
        (cos2, sin2)
    }
}

/// Density matrix on a `D`-dimensional space (`D` = 2 or 4).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<const D: usize>(SMatrix<C64, D, D>);

pub type QubitDensity = DensityMatrix<2>;
pub type TwoQubitDensity = DensityMatrix<4>;

impl<const D: usize> DensityMatrix<D> {
    /// Validates Hermiticity, unit trace and positivity within [`INPUT_TOL`].
    pub fn new(m: SMatrix<C64, D, D>) -> Result<Self> {
        let herm = max_abs(&(m - m.adjoint()));
        if herm > INPUT_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr - c(1.0, 0.0)).norm() > INPUT_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let rho = DensityMatrix((m + m.adjoint()) * c(0.5, 0.0));
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -INPUT_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(SMatrix::<C64, D, D>::identity() * c(1.0 / D as f64, 0.0))
    }

    pub fn matrix(&self) -> &SMatrix<C64, D, D> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, DensityMatrix<D>)]) -> Result<Self> {
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > INPUT_TOL {
            return Err(Error::InvalidArgument(
                "mixture weights must be a probability vector".into(),
            ));
        }
        let m = parts
            .iter()
            .fold(SMatrix::<C64, D, D>::zeros(), |acc, (w, rho)| {
                acc + rho.0 * c(*w, 0.0)
            });
        Ok(DensityMatrix(m))
    }

    /// Eigenvalues in ascending order. Closed form for qubits.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if D == 2 {
            let a = self.0[(0, 0)].re;
            let d = self.0[(1, 1)].re;
            let b = self.0[(0, 1)];
            let half_tr = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            return vec![half_tr - disc, half_tr + disc];
        }
        let dm = DMatrix::from_iterator(D, D, self.0.iter().copied());
        let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl DensityMatrix<4> {
    /// `Tr(ρP)`
    pub fn pauli_coefficient(&self, p: PauliString) -> f64 {
        // P|k⟩ = phase|k'⟩, so P_{k'k} = phase and Tr(ρP) = Σ_k ρ_{k k'}·phase.
        let mut acc = c(0.0, 0.0);
        for k in 0..4 {
            let (k2, phase) = p.act(k);
            acc += self.0[(k, k2)] * phase;
        }
        acc.re
    }

    pub fn pauli_coefficients(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.pauli_coefficient(PauliString::from_index(k));
        }
        out
    }

    pub fn expect(&self, obs: &Mat4) -> f64 {
        (self.0 * obs).trace().re
    }
}

impl DensityMatrix<2> {
    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0;
        [
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ]
    }
}

/// Reduced state of a two-qubit density matrix on the kept qubit.
pub fn partial_trace(rho: &DensityMatrix<4>, keep: Qubit) -> DensityMatrix<2> {
    let m = rho.matrix();
    let r = match keep {
        Qubit::A => Mat2::from_fn(|a, a2| m[(2 * a, 2 * a2)] + m[(2 * a + 1, 2 * a2 + 1)]),
        Qubit::B => Mat2::from_fn(|b, b2| m[(b, b2)] + m[(2 + b, 2 + b2)]),
    };
    DensityMatrix(r)
}

/// Schmidt angle Θ ∈ [0, π/4]: the entanglement spectrum is `{cos²Θ, sin²Θ}`.
pub fn schmidt_angle(psi: &StateVec) -> f64 {
    let (cos2, sin2) = psi.schmidt_double_angle();
    0.5 * sin2.atan2(cos2)
}

/// `⟨ψ|obs|ψ⟩` for a Hermitian observable.
pub fn expectation(obs: &Mat4, psi: &StateVec) -> Result<f64> {
    let herm = max_abs(&(obs - obs.adjoint()));
    if herm > INPUT_TOL {
        return Err(Error::NotHermitian(herm));
    }
    Ok(psi.expect(obs))
}

/// `D × D` unitary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryOp<const D: usize>(SMatrix<C64, D, D>);

impl<const D: usize> UnitaryOp<D> {
    pub fn new(m: SMatrix<C64, D, D>) -> Result<Self> {
        let u = UnitaryOp(m);
        let res = u.unitarity_residual();
        if res > INPUT_TOL {
            return Err(Error::NotUnitary(res));
        }
        Ok(u)
    }

    pub(crate) fn from_matrix_unchecked(m: SMatrix<C64, D, D>) -> Self {
        UnitaryOp(m)
    }

    pub fn identity() -> Self {
        UnitaryOp(SMatrix::identity())
    }

    pub fn matrix(&self) -> &SMatrix<C64, D, D> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryOp(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn unitarity_residual(&self) -> f64 {
        max_abs(&(self.0 * self.0.adjoint() - SMatrix::<C64, D, D>::identity()))
    }

    /// `g† · self · g`
    pub fn conjugate_by(&self, g: &UnitaryOp<D>) -> Self {
        UnitaryOp(g.0.adjoint() * self.0 * g.0)
    }

    pub fn scaled_phase(&self, phase: C64) -> Self {
        UnitaryOp(self.0 * phase)
    }
}

impl UnitaryOp<2> {
    /// `self ⊗ other`
    pub fn kron(&self, other: &UnitaryOp<2>) -> UnitaryOp<4> {
        UnitaryOp(kron2(&self.0, &other.0))
    }

    /// Embeds a single-qubit gate on the given factor of a two-qubit system.
    pub fn on(&self, q: Qubit) -> UnitaryOp<4> {
        let id = UnitaryOp::<2>::identity();
        match q {
            Qubit::A => self.kron(&id),
            Qubit::B => id.kron(self),
        }
    }
}

impl<const D: usize> Mul for UnitaryOp<D> {
    type Output = UnitaryOp<D>;

    fn mul(self, rhs: Self) -> Self {
        UnitaryOp(self.0 * rhs.0)
    }
}

impl<'a, const D: usize> Mul<&'a UnitaryOp<D>> for &'a UnitaryOp<D> {
    type Output = UnitaryOp<D>;

    fn mul(self, rhs: &UnitaryOp<D>) -> UnitaryOp<D> {
        UnitaryOp(self.0 * rhs.0)
    }
}
