//! Resource monotones: stabilizer entropy, entanglement entropies, capacity
//! of entanglement, non-local and local magic, non-stabilizing power.
//!
//! Everything is in nats unless a [`LogBase`] is passed explicitly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::stabilizer_states;
use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, PauliString, Qubit, StateVec, UnitaryOp};

/// Round-off below this magnitude is clamped to zero.
pub const CLAMP_TOL: f64 = 1e-10;
/// A negative local magic beyond this is a hard error.
pub const INCONSISTENCY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    /// Converts a value in nats to this base.
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            LogBase::E => x,
            LogBase::Two => x / std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::E => "e",
            LogBase::Two => "2",
        })
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "E" | "ln" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            _ => Err(Error::InvalidArgument(format!(
                "log base must be e or 2, got {s:?}"
            ))),
        }
    }
}

fn clamp_nonneg(x: f64) -> f64 {
    if x < 0.0 && x > -CLAMP_TOL {
        0.0
    } else {
        x
    }
}

/// `M₂(ψ) = −ln( ¼ Σ_P ⟨P⟩⁴ )`.
pub fn stabilizer_entropy_pure(psi: &StateVec) -> f64 {
    let sum4: f64 = psi.pauli_expectations().iter().map(|e| e.powi(4)).sum();
    clamp_nonneg(-(0.25 * sum4).ln())
}

/// `M̃₂(ρ) = M₂(ρ) − S₂(ρ) = −ln( Σ_P Tr⁴(ρP) / Σ_P Tr²(ρP) )`.
pub fn stabilizer_entropy_mixed(rho: &DensityMatrix<4>) -> f64 {
    let coeffs = rho.pauli_coefficients();
    let sum2: f64 = coeffs.iter().map(|e| e * e).sum();
    let sum4: f64 = coeffs.iter().map(|e| e.powi(4)).sum();
    clamp_nonneg(-(sum4 / sum2).ln())
}

/// Stabilizer-mixture test on the Pauli coefficients of `rho`.
///
/// Free means every `Tr(ρP)` is `0` or `±1` within `tol`, and the support is
/// a commuting set closed under multiplication up to phase.
pub fn is_free_state(rho: &DensityMatrix<4>, tol: f64) -> bool {
    let coeffs = rho.pauli_coefficients();
    let mut support = Vec::new();
    for (k, &v) in coeffs.iter().enumerate() {
        if v.abs() <= tol {
            continue;
        }
        if (v.abs() - 1.0).abs() > tol {
            return false;
        }
        support.push(PauliString::from_index(k));
    }
    let in_support = |p: PauliString| coeffs[p.index()].abs() > tol;
    support.iter().all(|&p| {
        support
            .iter()
            .all(|&q| p.commutes_with(q) && in_support(p.product(q).1))
    })
}

/// `−Σ λ log λ` with `0·log 0 = 0`.
pub fn von_neumann_entropy<const D: usize>(rho: &DensityMatrix<D>, base: LogBase) -> f64 {
    let nats: f64 = rho
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum();
    base.from_nats(clamp_nonneg(nats))
}

/// Second Rényi entropy `−ln Tr ρ²`.
pub fn renyi2_entropy<const D: usize>(rho: &DensityMatrix<D>, base: LogBase) -> f64 {
    base.from_nats(clamp_nonneg(-rho.purity().ln()))
}

/// Schmidt probabilities `(cos²Θ, sin²Θ)` without cancellation in the small one.
fn schmidt_probabilities(psi: &StateVec) -> (f64, f64) {
    let (c2, s2) = psi.schmidt_double_angle();
    let r = c2.hypot(s2);
    let cos2 = 0.5 * (1.0 + c2 / r);
    // sin²Θ = (1 − cos2Θ)/2 = sin²2Θ / (2(1 + cos2Θ))
    let sin2 = 0.5 * (s2 / r).powi(2) / (1.0 + c2 / r);
    (cos2, sin2)
}

/// Capacity of entanglement `p(1−p)·ln²((1−p)/p)`, in nats².
pub fn entanglement_capacity(psi: &StateVec) -> f64 {
    let (big, small) = schmidt_probabilities(psi);
    if small <= 0.0 {
        return 0.0;
    }
    big * small * (big / small).ln().powi(2)
}

/// `M_NL(ψ) = −ln[(7 + cos 8Θ)/8]` with Θ the Schmidt angle.
pub fn nonlocal_magic(psi: &StateVec) -> f64 {
    let (c2, s2) = psi.schmidt_double_angle();
    let r2 = c2 * c2 + s2 * s2;
    // cos 8Θ = 1 − 2 sin²4Θ and sin 4Θ = 2 sin2Θ cos2Θ.
    let sin4sq = 4.0 * c2 * c2 * s2 * s2 / (r2 * r2);
    let cos8 = 1.0 - 2.0 * sin4sq;
    clamp_nonneg(-((7.0 + cos8) / 8.0).ln())
}

/// `M_LOC = M₂ − M_NL`.
pub fn local_magic(psi: &StateVec) -> Result<f64> {
    let d = stabilizer_entropy_pure(psi) - nonlocal_magic(psi);
    if d < -INCONSISTENCY_TOL {
        return Err(Error::Inconsistent(format!(
            "local magic {d:e} is negative"
        )));
    }
    Ok(d.max(0.0))
}

/// Mean `M₂(U|s⟩)` over the 60 two-qubit stabilizer states, in nats.
pub fn nonstabilizing_power(u: &UnitaryOp<4>) -> f64 {
    let states = stabilizer_states();
    let total: f64 = states
        .iter()
        .map(|s| stabilizer_entropy_pure(&s.apply(u)))
        .sum();
    total / states.len() as f64
}

pub fn nonstabilizing_power_in(u: &UnitaryOp<4>, base: LogBase) -> f64 {
    base.from_nats(nonstabilizing_power(u))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub m2: f64,
    pub s1: f64,
    pub s2: f64,
    /// Always nats².
    pub c_e: f64,
    pub m_nl: f64,
    pub m_loc: f64,
}

impl ResourceReport {
    pub fn of(psi: &StateVec, base: LogBase) -> Result<Self> {
        let rho_a = psi.reduced(Qubit::A);
        let m_loc = local_magic(psi)?;
        Ok(ResourceReport {
            m2: base.from_nats(stabilizer_entropy_pure(psi)),
            s1: von_neumann_entropy(&rho_a, base),
            s2: renyi2_entropy(&rho_a, base),
            c_e: entanglement_capacity(psi),
            m_nl: base.from_nats(nonlocal_magic(psi)),
            m_loc: base.from_nats(m_loc),
        })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, LN_2};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::chsh::{r_theta_state, w_theta};
    use crate::ensembles::{clifford_2q, haar_state, haar_unitary, local_clifford_pairs};
    use crate::qcore::{c, gates, DensityMatrix, C64};

    fn t_plus_zero() -> StateVec {
        let h = FRAC_1_SQRT_2;
        StateVec::product(
            [c(h, 0.0), C64::from_polar(h, FRAC_PI_4)],
            [c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn stabilizer_entropy_examples() {
        assert!(stabilizer_entropy_pure(&StateVec::zero()).abs() < 1e-15);
        for k in 0..=40 {
            let t = k as f64 * 0.1;
            let psi = StateVec::zero().apply(&w_theta(t));
            let expected = -((7.0 + (4.0 * t).cos()) / 8.0).ln();
            assert!((stabilizer_entropy_pure(&psi) - expected).abs() < 1e-12);
        }
        let psi = StateVec::zero().apply(&w_theta(FRAC_PI_4));
        assert!((stabilizer_entropy_pure(&psi) - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((stabilizer_entropy_pure(&t_plus_zero()) - (4.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn mixed_stabilizer_entropy() {
        assert!(stabilizer_entropy_mixed(&DensityMatrix::maximally_mixed()).abs() < 1e-15);
        assert!(stabilizer_entropy_mixed(&StateVec::phi_plus().density()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let psi = haar_state(&mut rng);
            assert!(
                (stabilizer_entropy_mixed(&psi.density()) - stabilizer_entropy_pure(&psi)).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn free_state_examples() {
        assert!(is_free_state(&StateVec::zero().density(), 1e-9));
        assert!(is_free_state(&DensityMatrix::maximally_mixed(), 1e-9));
        let w = StateVec::zero().apply(&w_theta(FRAC_PI_4));
        assert!(!is_free_state(&w.density(), 1e-9));

        let mix = DensityMatrix::mixture(&[
            (0.5, StateVec::zero().density()),
            (0.5, StateVec::phi_plus().density()),
        ])
        .unwrap();
        let by_entropy = stabilizer_entropy_mixed(&mix) > 1e-9;
        assert_eq!(is_free_state(&mix, 1e-9), !by_entropy);
        assert!(by_entropy);
    }

    #[test]
    fn von_neumann_examples() {
        let half = DensityMatrix::<2>::maximally_mixed();
        assert!((von_neumann_entropy(&half, LogBase::E) - LN_2).abs() < 1e-15);
        assert!((von_neumann_entropy(&half, LogBase::Two) - 1.0).abs() < 1e-15);
        assert_eq!(
            von_neumann_entropy(&StateVec::zero().reduced(Qubit::A), LogBase::E),
            0.0
        );
    }

    #[test]
    fn capacity_and_nonlocal_examples() {
        for psi in [StateVec::phi_plus(), StateVec::zero(), t_plus_zero()] {
            assert!(entanglement_capacity(&psi).abs() < 1e-15);
            assert!(nonlocal_magic(&psi).abs() < 1e-15);
        }
        // Capacity equals the variance of the surprisal of ρ_A.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let psi = haar_state(&mut rng);
            let ev = psi.reduced(Qubit::A).eigenvalues();
            let m1: f64 = ev.iter().map(|&l| -l * l.ln()).sum();
            let m2: f64 = ev.iter().map(|&l| l * l.ln().powi(2)).sum();
            assert!((entanglement_capacity(&psi) - (m2 - m1 * m1)).abs() < 1e-10);
        }
    }

    #[test]
    fn local_magic_examples() {
        for k in 0..=180 {
            let t = k as f64 * std::f64::consts::PI / 180.0;
            let psi = r_theta_state(t);
            assert!(local_magic(&psi).unwrap().abs() < 1e-10, "theta {t}");
        }
        assert!((local_magic(&t_plus_zero()).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert_eq!(local_magic(&StateVec::zero()).unwrap(), 0.0);
    }

    #[test]
    fn nonstabilizing_power_examples() {
        for g in clifford_2q().iter().step_by(97) {
            assert!(nonstabilizing_power(g).abs() < 1e-12);
        }
        for k in 0..=20 {
            let t = k as f64 * 0.15;
            let expected = -0.8 * ((7.0 + (4.0 * t).cos()) / 8.0).ln();
            assert!((nonstabilizing_power(&w_theta(t)) - expected).abs() < 1e-10);
        }
        let p = nonstabilizing_power_in(&w_theta(FRAC_PI_4), LogBase::Two);
        assert!((p - 0.332).abs() < 5e-4, "{p}");
    }

    #[test]
    fn additivity_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        for _ in 0..1000 {
            let ua = haar_unitary::<2, _>(&mut rng);
            let ub = haar_unitary::<2, _>(&mut rng);
            let a = [ua.matrix()[(0, 0)], ua.matrix()[(1, 0)]];
            let b = [ub.matrix()[(0, 0)], ub.matrix()[(1, 0)]];
            let joint = stabilizer_entropy_pure(&StateVec::product(a, b).unwrap());
            let sep = stabilizer_entropy_pure(&StateVec::product(a, zero).unwrap())
                + stabilizer_entropy_pure(&StateVec::product(zero, b).unwrap());
            assert!((joint - sep).abs() < 1e-10);
        }
    }

    #[test]
    fn local_clifford_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let psi = haar_state(&mut rng);
            let m = stabilizer_entropy_pure(&psi);
            for g in local_clifford_pairs() {
                assert!((stabilizer_entropy_pure(&psi.apply(g)) - m).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn faithfulness() {
        for s in stabilizer_states() {
            assert!(stabilizer_entropy_pure(s) < 1e-10);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10_000 {
            assert!(stabilizer_entropy_pure(&haar_state(&mut rng)) > 1e-10);
        }
    }

    #[test]
    fn nonlocal_bounded_by_total_and_local_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for i in 0..100_000 {
            let psi = haar_state(&mut rng);
            let nl = nonlocal_magic(&psi);
            assert!(nl <= stabilizer_entropy_pure(&psi) + 1e-10);
            if i % 100 == 0 {
                let g = haar_unitary::<2, _>(&mut rng).kron(&haar_unitary::<2, _>(&mut rng));
                assert!((nonlocal_magic(&psi.apply(&g)) - nl).abs() < 1e-10);
            }
        }
    }

    /// Variational definition: the minimum of M₂ over local unitaries never
    /// undercuts the closed form.
    #[test]
    fn variational_oracle_never_beats_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..5 {
            let psi = haar_state(&mut rng);
            let closed = nonlocal_magic(&psi);
            let mut best = f64::INFINITY;
            for _ in 0..2000 {
                let g = haar_unitary::<2, _>(&mut rng).kron(&haar_unitary::<2, _>(&mut rng));
                best = best.min(stabilizer_entropy_pure(&psi.apply(&g)));
            }
            assert!(best >= closed - 1e-6, "{best} < {closed}");
        }
        // Attained on the Schmidt form, from any local rotation of it.
        let g = gates::hadamard().kron(&gates::t_gate());
        let psi = r_theta_state(0.3).apply(&g);
        assert!(
            (stabilizer_entropy_pure(&r_theta_state(0.3)) - nonlocal_magic(&psi)).abs() < 1e-12
        );
    }
}
