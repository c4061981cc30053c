//! Pauli CHSH operators, canonical state families, the resource theorems as
//! executable checks, and the Hurwitz violation geometry.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Matrix4};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{canonical_phase, haar_state, local_clifford_pairs, stabilizer_states};
use crate::error::{Error, Result};
use crate::qcore::{
    c, gates, DensityMatrix, Mat4, Pauli, PauliString, Qubit, StateVec, UnitaryOp, Vec4, C64,
};
use crate::resources::nonlocal_magic;

pub const TSIRELSON: f64 = 2.0 * SQRT_2;
pub const LOCAL_BOUND: f64 = 2.0;

/// Slack allowed above the local bound in the theorem checks.
pub const THEOREM_TOL: f64 = 1e-9;

/// `B = P_A⊗(P_B + P_B′) + P_A′⊗(P_B − P_B′)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChshSpec {
    pub pa: Pauli,
    pub pa_prime: Pauli,
    pub pb: Pauli,
    pub pb_prime: Pauli,
}

impl ChshSpec {
    /// `B₀ = XX + XZ − ZX + ZZ`.
    pub const B0: ChshSpec = ChshSpec {
        pa: Pauli::X,
        pa_prime: Pauli::Z,
        pb: Pauli::Z,
        pb_prime: Pauli::X,
    };

    pub fn new(pa: Pauli, pa_prime: Pauli, pb: Pauli, pb_prime: Pauli) -> Result<Self> {
        for p in [pa, pa_prime, pb, pb_prime] {
            if p == Pauli::I {
                return Err(Error::InvalidChshLabel(p));
            }
        }
        Ok(ChshSpec {
            pa,
            pa_prime,
            pb,
            pb_prime,
        })
    }

    /// The four signed Pauli terms.
    pub fn terms(&self) -> [(f64, PauliString); 4] {
        [
            (1.0, PauliString::new(self.pa, self.pb)),
            (1.0, PauliString::new(self.pa, self.pb_prime)),
            (1.0, PauliString::new(self.pa_prime, self.pb)),
            (-1.0, PauliString::new(self.pa_prime, self.pb_prime)),
        ]
    }

    pub fn operator(&self) -> Mat4 {
        self.terms()
            .iter()
            .fold(Mat4::zeros(), |acc, (s, p)| acc + p.matrix() * c(*s, 0.0))
    }

    pub fn is_degenerate(&self) -> bool {
        self.pa == self.pa_prime || self.pb == self.pb_prime
    }

    /// Both parties measure the same pair of Paulis, in the pairing that
    /// makes `B₀` symmetric: `P_A = P_B′`, `P_A′ = P_B`. Then
    /// `B = P_A P_A + P_B P_B + (P_A P_B − P_B P_A)`, whose antisymmetric part
    /// vanishes on swap-symmetric states.
    pub fn is_symmetric(&self) -> bool {
        self.pa == self.pb_prime && self.pa_prime == self.pb
    }

    /// Evaluates from a precomputed table of the sixteen Pauli expectations.
    #[inline]
    pub fn from_expectations(&self, e: &[f64; 16]) -> f64 {
        self.terms().iter().map(|(s, p)| s * e[p.index()]).sum()
    }
}

impl fmt::Display for ChshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.pa, self.pa_prime, self.pb, self.pb_prime
        )
    }
}

/// All 81 label choices, A-labels outermost.
pub fn chsh_family() -> Vec<ChshSpec> {
    let mut out = Vec::with_capacity(81);
    for pa in Pauli::XYZ {
        for pa_prime in Pauli::XYZ {
            for pb in Pauli::XYZ {
                for pb_prime in Pauli::XYZ {
                    out.push(ChshSpec {
                        pa,
                        pa_prime,
                        pb,
                        pb_prime,
                    });
                }
            }
        }
    }
    out
}

pub fn chsh_expectation(spec: &ChshSpec, psi: &StateVec) -> f64 {
    spec.terms()
        .iter()
        .map(|(s, p)| s * psi.pauli_expectation(*p))
        .sum()
}

pub fn chsh_expectation_mixed(spec: &ChshSpec, rho: &DensityMatrix<4>) -> f64 {
    spec.terms()
        .iter()
        .map(|(s, p)| s * rho.pauli_coefficient(*p))
        .sum()
}

/// Strict violation predicate `|b| > 2`.
#[inline]
pub fn violates(b: f64) -> bool {
    b.abs() > LOCAL_BOUND
}

/// `W(θ) = (R_y(θ)⊗I)·C_X·(H⊗I)`.
pub fn w_theta(theta: f64) -> UnitaryOp<4> {
    gates::ry(theta).on(Qubit::A) * gates::cnot() * gates::hadamard().on(Qubit::A)
}

/// `cos θ|00⟩ + sin θ|11⟩`.
pub fn r_theta_state(theta: f64) -> StateVec {
    let (s, co) = theta.sin_cos();
    StateVec::from_vec_unchecked(Vec4::new(c(co, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)))
}

/// Purification of `ρ_A = (I + r·n̂(θ, φ)·σ)/2`.
///
/// The weight on `|01⟩` and `|11⟩` is `√((1−r)/2)` so that the state is
/// normalized for every `r`.
pub fn rho_family_state(r: f64, theta: f64, phi: f64) -> StateVec {
    let p = ((1.0 + r) / 2.0).sqrt();
    let m = ((1.0 - r) / 2.0).max(0.0).sqrt();
    let (sh, ch) = (0.5 * theta).sin_cos();
    StateVec::from_vec_unchecked(Vec4::new(
        c(p * ch, 0.0),
        -C64::from_polar(m * sh, -phi),
        C64::from_polar(p * sh, phi),
        c(m * ch, 0.0),
    ))
}

/// Closed forms for the family at `θ = π/4`, `φ = π/3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoClosedForms {
    /// Base 2.
    pub s1: f64,
    pub c_e: f64,
    pub m_nl: f64,
    pub b0: f64,
}

pub const RHO_FAMILY_THETA: f64 = PI / 4.0;
pub const RHO_FAMILY_PHI: f64 = PI / 3.0;

pub fn rho_family_closed_forms(r: f64) -> RhoClosedForms {
    let one_m = 1.0 - r * r;
    // Both entropic forms are 0·∞ at r = 1; their limit is 0.
    let (s1, c_e) = if one_m <= 0.0 {
        (0.0, 0.0)
    } else {
        (
            0.5 * (4.0 / one_m).log2() - 2.0 * r * r.atanh() / 4f64.ln(),
            -((r * r - 1.0) * (2.0 / (r + 1.0) - 1.0).ln().powi(2)) / 4.0,
        )
    };
    RhoClosedForms {
        s1,
        c_e,
        m_nl: -(1.0 - r * r + r.powi(4)).ln(),
        b0: 3.0 / 8.0
            * (2.0 * one_m.max(0.0).sqrt() + (2.0 - 2.0 * r * r).max(0.0).sqrt() + 2.0 * SQRT_2),
    }
}

/// Maximum CHSH value over all local measurement settings.
pub fn horodecki_max(psi: &StateVec) -> f64 {
    let t = psi.correlations();
    let t = Matrix3::from_fn(|i, j| t[i][j]);
    let mut mu: Vec<f64> = (t.transpose() * t)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    2.0 * (mu[0] + mu[1]).max(0.0).sqrt()
}

/// `f = 2√2 − M_NL(θ)/2 − |⟨B₀⟩|` on `(U_A⊗U_B)|r(θ)⟩`.
pub fn tsirelson_gap(theta: f64, u_a: &UnitaryOp<2>, u_b: &UnitaryOp<2>) -> f64 {
    let r = r_theta_state(theta);
    let b = chsh_expectation(&ChshSpec::B0, &r.apply(&u_a.kron(u_b)));
    TSIRELSON - 0.5 * nonlocal_magic(&r) - b.abs()
}

/// `M = SWAP·(Z⊗Z)`: it fixes `|00⟩` and `B₀`, and swaps the parties.
pub fn exchange_operator() -> UnitaryOp<4> {
    gates::swap() * gates::pauli(Pauli::Z).kron(&gates::pauli(Pauli::Z))
}

/// `M·U·M†`, the same preparation with the roles of A and B exchanged.
pub fn exchange_parties(u: &UnitaryOp<4>) -> UnitaryOp<4> {
    u.conjugate_by(&exchange_operator().adjoint())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub max_abs_b_pure: f64,
    pub max_abs_b_mixed: f64,
    pub pure_evaluations: usize,
    pub mixtures: usize,
    /// Every pure-state `|b|` lies in `{0, 1, 2}`.
    pub quantized: bool,
}

/// Stabilizer states never violate: pure states exhaustively, mixed states
/// as random convex combinations.
pub fn verify_theorem1<R: Rng + ?Sized>(n_mixtures: usize, rng: &mut R) -> Result<Theorem1Report> {
    let specs = chsh_family();
    let states = stabilizer_states();
    let mut max_pure: f64 = 0.0;
    let mut quantized = true;
    for s in states {
        let e = s.pauli_expectations();
        for spec in &specs {
            let b = spec.from_expectations(&e).abs();
            max_pure = max_pure.max(b);
            quantized &= (b - b.round()).abs() < 1e-12 && b.round() <= 2.0;
        }
    }
    let mut max_mixed: f64 = 0.0;
    for _ in 0..n_mixtures {
        let k = rng.random_range(2..=6);
        let mut parts = Vec::with_capacity(k);
        let mut total = 0.0;
        for _ in 0..k {
            let w: f64 = -rng.random::<f64>().max(f64::MIN_POSITIVE).ln();
            total += w;
            parts.push((w, states[rng.random_range(0..states.len())].density()));
        }
        for p in &mut parts {
            p.0 /= total;
        }
        let rho = DensityMatrix::mixture(&parts)?;
        for spec in &specs {
            max_mixed = max_mixed.max(chsh_expectation_mixed(spec, &rho).abs());
        }
    }
    let report = Theorem1Report {
        max_abs_b_pure: max_pure,
        max_abs_b_mixed: max_mixed,
        pure_evaluations: states.len() * specs.len(),
        mixtures: n_mixtures,
        quantized,
    };
    if max_pure > LOCAL_BOUND + THEOREM_TOL || max_mixed > LOCAL_BOUND + THEOREM_TOL {
        return Err(Error::Verification(format!(
            "stabilizer state exceeds the local bound: {report:?}"
        )));
    }
    Ok(report)
}

/// Hermitian basis of the SWAP commutant: `PP` and `PQ + QP`.
fn swap_symmetric_basis() -> Vec<Mat4> {
    let mut out = Vec::with_capacity(10);
    for (i, &p) in Pauli::ALL.iter().enumerate() {
        for &q in &Pauli::ALL[i..] {
            let pq = PauliString::new(p, q).matrix();
            out.push(if p == q {
                pq
            } else {
                pq + PauliString::new(q, p).matrix()
            });
        }
    }
    out
}

/// `exp(−iH)` for Hermitian `H`.
pub fn exp_minus_i(h: &Mat4) -> UnitaryOp<4> {
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l)));
    UnitaryOp::from_matrix_unchecked(v * phases * v.adjoint())
}

/// Random unitary commuting with SWAP: `exp(−iΣ cᵢSᵢ)` with standard-normal `cᵢ`.
pub fn random_symmetric_unitary<R: Rng + ?Sized>(rng: &mut R) -> UnitaryOp<4> {
    let h = swap_symmetric_basis().iter().fold(Mat4::zeros(), |acc, s| {
        let ci: f64 = rng.sample(StandardNormal);
        acc + s * c(ci, 0.0)
    });
    exp_minus_i(&h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub max_abs_b: f64,
    pub unitaries: usize,
    pub specs: usize,
}

/// Symmetric preparations measured with symmetric settings never violate.
pub fn verify_theorem2<R: Rng + ?Sized>(n_samples: usize, rng: &mut R) -> Result<Theorem2Report> {
    let specs: Vec<ChshSpec> = chsh_family()
        .into_iter()
        .filter(ChshSpec::is_symmetric)
        .collect();
    let mut max_b: f64 = 0.0;
    for _ in 0..n_samples {
        let e = StateVec::zero()
            .apply(&random_symmetric_unitary(rng))
            .pauli_expectations();
        for spec in &specs {
            max_b = max_b.max(spec.from_expectations(&e).abs());
        }
    }
    let report = Theorem2Report {
        max_abs_b: max_b,
        unitaries: n_samples,
        specs: specs.len(),
    };
    if max_b > LOCAL_BOUND + THEOREM_TOL {
        return Err(Error::Verification(format!(
            "symmetric preparation violates: {report:?}"
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Report {
    /// Max `|b|` over grid × local Clifford pairs × all specs.
    pub max_abs_b: f64,
    pub grid_points: usize,
    pub evaluations: usize,
    pub haar_checked: usize,
    /// Largest `horodecki_max` among Haar states with `M_NL > 0.01`.
    pub max_horodecki_with_magic: f64,
    /// Largest `horodecki_max − (2√2 − M_NL/2)` over the Haar states.
    pub max_bound_excess: f64,
}

pub const THEOREM3_MAGIC_FLOOR: f64 = 0.01;

/// Local Cliffords on `|r(θ)⟩` never violate, and states carrying non-local
/// magic stay strictly below the Tsirelson bound.
pub fn verify_theorem3<R: Rng + ?Sized>(
    theta_grid: usize,
    n_haar: usize,
    rng: &mut R,
) -> Result<Theorem3Report> {
    if theta_grid < 2 {
        return Err(Error::InvalidArgument(
            "theta grid needs at least two points".into(),
        ));
    }
    let specs = chsh_family();
    let pairs = local_clifford_pairs();
    let max_b = (0..theta_grid)
        .into_par_iter()
        .map(|k| {
            let psi = r_theta_state(PI * k as f64 / (theta_grid - 1) as f64);
            let mut m: f64 = 0.0;
            for g in pairs {
                let e = psi.apply(g).pauli_expectations();
                for spec in &specs {
                    m = m.max(spec.from_expectations(&e).abs());
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);

    let mut checked = 0;
    let mut max_h: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..n_haar {
        let psi = haar_state(rng);
        let mnl = nonlocal_magic(&psi);
        let h = horodecki_max(&psi);
        excess = excess.max(h - (TSIRELSON - 0.5 * mnl));
        if mnl > THEOREM3_MAGIC_FLOOR {
            checked += 1;
            max_h = max_h.max(h);
        }
    }
    let report = Theorem3Report {
        max_abs_b: max_b,
        grid_points: theta_grid,
        evaluations: theta_grid * pairs.len() * specs.len(),
        haar_checked: checked,
        max_horodecki_with_magic: max_h,
        max_bound_excess: if n_haar == 0 { 0.0 } else { excess },
    };
    if max_b > LOCAL_BOUND + 1e-12 || max_h >= TSIRELSON - 1e-6 {
        return Err(Error::Verification(format!(
            "local-Clifford or Tsirelson check failed: {report:?}"
        )));
    }
    Ok(report)
}

/// Coordinates of `ψ` in the B₀ eigenbasis that govern violation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurwitzCoords {
    pub theta2: f64,
    pub theta3: f64,
}

/// Eigenbasis of B₀ ordered by eigenvalue `{−2√2, 2√2, 0, 0}`, as columns.
///
/// Built from spectral projectors; the kernel basis comes from Gram–Schmidt
/// over the projected computational basis vectors in index order.
pub fn b0_eigenbasis() -> &'static Mat4 {
    static BASIS: OnceLock<Mat4> = OnceLock::new();
    BASIS.get_or_init(|| {
        let b = ChshSpec::B0.operator();
        let id = Mat4::identity();
        let lam = c(TSIRELSON, 0.0);
        let scale = c(1.0 / 16.0, 0.0);
        let projectors = [
            (b * (b - id * lam)) * scale,
            (b * (b + id * lam)) * scale,
            id - b * b * c(0.125, 0.0),
        ];
        let mut cols: Vec<Vec4> = Vec::with_capacity(4);
        for (pi, rank) in projectors.iter().zip([1, 1, 2]) {
            let mut found = 0;
            for k in 0..4 {
                if found == rank {
                    break;
                }
                let mut v: Vec4 = pi.column(k).into_owned();
                for u in &cols {
                    v -= u * u.dotc(&v);
                }
                let n = v.norm();
                if n > 1e-6 {
                    cols.push(canonical_phase(&(v / c(n, 0.0))));
                    found += 1;
                }
            }
        }
        Mat4::from_columns(&cols)
    })
}

pub fn hurwitz_coords(psi: &StateVec) -> HurwitzCoords {
    let basis = b0_eigenbasis();
    let a1 = basis.column(0).dotc(psi.amps()).norm().min(1.0);
    let a2 = basis.column(1).dotc(psi.amps()).norm();
    let theta3 = a1.acos();
    let s3 = theta3.sin();
    let theta2 = if s3 < 1e-12 {
        0.0
    } else {
        (a2 / s3).min(1.0).acos()
    };
    HurwitzCoords { theta2, theta3 }
}

/// `|cos²θ₃ − sin²θ₃·cos²θ₂| > 1/√2`.
pub fn hurwitz_violates(h: HurwitzCoords) -> bool {
    let (s3, c3) = h.theta3.sin_cos();
    let c2 = h.theta2.cos();
    (c3 * c3 - s3 * s3 * c2 * c2).abs() > FRAC_1_SQRT_2
}
