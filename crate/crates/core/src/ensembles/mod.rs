//! Random and exhaustive generators.
//!
//! Haar unitaries and states, the single- and two-qubit Clifford groups
//! modulo global phase, the 60 two-qubit stabilizer states, and the
//! conjugated-core ensembles `{g† U_c g | g ∈ G}`.
//!
//! Finite tables are built once by breadth-first closure and shared
//! read-only afterwards.

pub mod cache;

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::SMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{gates, Qubit, StateVec, UnitaryOp, Vec4, C64};

pub const CLIFFORD_1Q_ORDER: usize = 24;
pub const CLIFFORD_2Q_ORDER: usize = 11520;
pub const STABILIZER_STATE_COUNT: usize = 60;

/// Entries below this modulus count as zero when fixing the global phase.
const PHASE_ZERO: f64 = 1e-6;
const HASH_SCALE: f64 = 1e10;

/// Which group twirls the core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// Haar on U(4).
    UFull,
    /// Haar on qubit A only.
    UA,
    /// Haar on qubit B only.
    UB,
    /// Full two-qubit Clifford group, 11520 elements.
    CFull,
    /// Single-qubit Cliffords on A, 24 elements.
    CA,
    /// Single-qubit Cliffords on B, 24 elements.
    CB,
    /// Independent local pairs `C_A ⊗ C_B`, 576 elements.
    CLocal,
    /// Identical local pairs `C ⊗ C`, 24 elements.
    CDiagonal,
}

impl GroupKind {
    /// The six groups of the twirling tables.
    pub const TABLE: [GroupKind; 6] = [
        GroupKind::UFull,
        GroupKind::UA,
        GroupKind::UB,
        GroupKind::CFull,
        GroupKind::CA,
        GroupKind::CB,
    ];

    pub fn is_finite(self) -> bool {
        !matches!(self, GroupKind::UFull | GroupKind::UA | GroupKind::UB)
    }

    pub fn order(self) -> Option<usize> {
        match self {
            GroupKind::CFull => Some(CLIFFORD_2Q_ORDER),
            GroupKind::CA | GroupKind::CB | GroupKind::CDiagonal => Some(CLIFFORD_1Q_ORDER),
            GroupKind::CLocal => Some(CLIFFORD_1Q_ORDER * CLIFFORD_1Q_ORDER),
            _ => None,
        }
    }

    /// The same group with qubits A and B exchanged.
    pub fn mirrored(self) -> GroupKind {
        match self {
            GroupKind::UA => GroupKind::UB,
            GroupKind::UB => GroupKind::UA,
            GroupKind::CA => GroupKind::CB,
            GroupKind::CB => GroupKind::CA,
            g => g,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupKind::UFull => "U",
            GroupKind::UA => "U_A",
            GroupKind::UB => "U_B",
            GroupKind::CFull => "C",
            GroupKind::CA => "C_A",
            GroupKind::CB => "C_B",
            GroupKind::CLocal => "C_AxC_B",
            GroupKind::CDiagonal => "CxC",
        };
        f.write_str(s)
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "u" => GroupKind::UFull,
            "ua" => GroupKind::UA,
            "ub" => GroupKind::UB,
            "c" => GroupKind::CFull,
            "ca" => GroupKind::CA,
            "cb" => GroupKind::CB,
            "cab" => GroupKind::CLocal,
            "cc" => GroupKind::CDiagonal,
            _ => return Err(Error::InvalidArgument(format!("unknown group {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupTag {
    pub kind: GroupKind,
    pub method: Method,
}

impl GroupTag {
    pub fn new(kind: GroupKind, method: Method) -> Result<Self> {
        if method == Method::ExactEnumeration && !kind.is_finite() {
            return Err(Error::NotEnumerable(kind));
        }
        Ok(GroupTag { kind, method })
    }

    /// Exact enumeration whenever the group is finite, Monte Carlo otherwise.
    pub fn preferred(kind: GroupKind) -> Self {
        let method = if kind.is_finite() {
            Method::ExactEnumeration
        } else {
            Method::MonteCarlo
        };
        GroupTag { kind, method }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec {
    pub core: UnitaryOp<4>,
    pub group: GroupTag,
    /// Sample budget, Monte Carlo only.
    pub n_samples: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(core: UnitaryOp<4>, group: GroupTag, n_samples: usize, seed: u64) -> Result<Self> {
        if group.method == Method::MonteCarlo && n_samples == 0 {
            return Err(Error::InvalidArgument(
                "Monte Carlo ensemble needs at least one sample".into(),
            ));
        }
        Ok(EnsembleSpec {
            core,
            group,
            n_samples,
            seed,
        })
    }

    /// Number of elements that `ensemble_stats` will visit.
    pub fn len(&self) -> usize {
        match self.group.method {
            Method::ExactEnumeration => self.group.kind.order().unwrap_or(0),
            Method::MonteCarlo => self.n_samples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Deterministic per-worker stream: the same `(seed, worker)` always yields
/// the same sequence, and distinct workers get disjoint ChaCha streams.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Splits `0..n` into `workers` contiguous chunks, earlier chunks one larger
/// when `n` does not divide evenly.
pub fn partition(n: usize, workers: usize) -> Vec<Range<usize>> {
    let workers = workers.max(1);
    let base = n / workers;
    let extra = n % workers;
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random `D × D` unitary.
///
/// Orthonormalizes a complex Gaussian matrix column by column. Gram–Schmidt
/// leaves the triangular factor with a positive real diagonal, which is the
/// phase normalization that makes the orthogonal factor Haar distributed.
pub fn haar_unitary<const D: usize, R: Rng + ?Sized>(rng: &mut R) -> UnitaryOp<D> {
    let mut m = SMatrix::<C64, D, D>::from_fn(|_, _| gaussian_c64(rng));
    for j in 0..D {
        for k in 0..j {
            let proj = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).into_owned();
            m.column_mut(j).axpy(-proj, &col_k, C64::new(1.0, 0.0));
        }
        // Second pass keeps orthogonality at round-off level.
        for k in 0..j {
            let proj = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).into_owned();
            m.column_mut(j).axpy(-proj, &col_k, C64::new(1.0, 0.0));
        }
        let n = m.column(j).norm();
        m.column_mut(j).unscale_mut(n);
    }
    UnitaryOp::from_matrix_unchecked(m)
}

/// Haar-random two-qubit pure state.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R) -> StateVec {
    let v = Vec4::from_fn(|_, _| gaussian_c64(rng));
    StateVec::from_vec_unchecked(v.unscale(v.norm()))
}

/// Rotates the global phase so the first non-zero entry in column-major
/// order is real and positive.
pub fn canonical_phase<const R: usize, const K: usize>(
    m: &SMatrix<C64, R, K>,
) -> SMatrix<C64, R, K> {
    match m.iter().find(|z| z.norm() > PHASE_ZERO) {
        Some(z) => m * (z.conj() / z.norm()),
        None => *m,
    }
}

fn phase_key<const R: usize, const K: usize>(m: &SMatrix<C64, R, K>) -> Vec<i64> {
    let canon = canonical_phase(m);
    canon
        .iter()
        .flat_map(|z| {
            [
                (z.re * HASH_SCALE).round() as i64,
                (z.im * HASH_SCALE).round() as i64,
            ]
        })
        .collect()
}

fn closure<const D: usize>(
    generators: &[UnitaryOp<D>],
    expected: usize,
    what: &'static str,
) -> Result<Vec<UnitaryOp<D>>> {
    let start = canonical_phase(&SMatrix::<C64, D, D>::identity());
    let mut seen = HashSet::new();
    seen.insert(phase_key(&start));
    let mut table = vec![UnitaryOp::from_matrix_unchecked(start)];
    let mut frontier = 0;
    while frontier < table.len() {
        let current = *table[frontier].matrix();
        frontier += 1;
        for g in generators {
            let next = canonical_phase(&(g.matrix() * current));
            if seen.insert(phase_key(&next)) {
                table.push(UnitaryOp::from_matrix_unchecked(next));
            }
        }
        if table.len() > expected {
            break;
        }
    }
    if table.len() != expected {
        return Err(Error::EnumerationSize {
            what,
            found: table.len(),
            expected,
        });
    }
    Ok(table)
}

/// Single-qubit Clifford group modulo phase, BFS over `{H, S}`.
pub fn enumerate_clifford_1q() -> Result<Vec<UnitaryOp<2>>> {
    closure(
        &[gates::hadamard(), gates::phase_s()],
        CLIFFORD_1Q_ORDER,
        "single-qubit Clifford",
    )
}

/// Two-qubit Clifford group modulo phase, BFS over
/// `{H⊗I, I⊗H, S⊗I, I⊗S, C_X, C̃_X}`.
pub fn enumerate_clifford_2q() -> Result<Vec<UnitaryOp<4>>> {
    let h = gates::hadamard();
    let s = gates::phase_s();
    let generators = [
        h.on(Qubit::A),
        h.on(Qubit::B),
        s.on(Qubit::A),
        s.on(Qubit::B),
        gates::cnot(),
        gates::cnot_reversed(),
    ];
    closure(&generators, CLIFFORD_2Q_ORDER, "two-qubit Clifford")
}

/// Orbit of `|00⟩` under the two-qubit Clifford group, modulo phase.
pub fn enumerate_stabilizer_states() -> Result<Vec<StateVec>> {
    let mut seen = HashSet::new();
    let mut states = Vec::new();
    for g in clifford_2q() {
        let col = canonical_phase(&g.matrix().column(0).into_owned());
        if seen.insert(phase_key(&col)) {
            states.push(StateVec::from_vec_unchecked(col));
        }
    }
    if states.len() != STABILIZER_STATE_COUNT {
        return Err(Error::EnumerationSize {
            what: "stabilizer state",
            found: states.len(),
            expected: STABILIZER_STATE_COUNT,
        });
    }
    Ok(states)
}

pub fn clifford_1q() -> &'static [UnitaryOp<2>] {
    static TABLE: OnceLock<Vec<UnitaryOp<2>>> = OnceLock::new();
    TABLE.get_or_init(|| enumerate_clifford_1q().expect("single-qubit Clifford closure"))
}

pub fn clifford_2q() -> &'static [UnitaryOp<4>] {
    static TABLE: OnceLock<Vec<UnitaryOp<4>>> = OnceLock::new();
    TABLE.get_or_init(|| enumerate_clifford_2q().expect("two-qubit Clifford closure"))
}

pub fn stabilizer_states() -> &'static [StateVec] {
    static TABLE: OnceLock<Vec<StateVec>> = OnceLock::new();
    TABLE.get_or_init(|| enumerate_stabilizer_states().expect("stabilizer orbit"))
}

/// Local Clifford table embedded on one qubit.
pub fn clifford_on(q: Qubit) -> &'static [UnitaryOp<4>] {
    static ON_A: OnceLock<Vec<UnitaryOp<4>>> = OnceLock::new();
    static ON_B: OnceLock<Vec<UnitaryOp<4>>> = OnceLock::new();
    let cell = match q {
        Qubit::A => &ON_A,
        Qubit::B => &ON_B,
    };
    cell.get_or_init(|| clifford_1q().iter().map(|g| g.on(q)).collect())
}

/// All `C_A ⊗ C_B` pairs, A-major.
pub fn local_clifford_pairs() -> &'static [UnitaryOp<4>] {
    static TABLE: OnceLock<Vec<UnitaryOp<4>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let c1 = clifford_1q();
        c1.iter()
            .flat_map(|a| c1.iter().map(move |b| a.kron(b)))
            .collect()
    })
}

fn diagonal_cliffords() -> &'static [UnitaryOp<4>] {
    static TABLE: OnceLock<Vec<UnitaryOp<4>>> = OnceLock::new();
    TABLE.get_or_init(|| clifford_1q().iter().map(|g| g.kron(g)).collect())
}

/// Elements of a finite group as two-qubit operators.
pub fn group_elements(kind: GroupKind) -> Result<&'static [UnitaryOp<4>]> {
    Ok(match kind {
        GroupKind::CFull => clifford_2q(),
        GroupKind::CA => clifford_on(Qubit::A),
        GroupKind::CB => clifford_on(Qubit::B),
        GroupKind::CLocal => local_clifford_pairs(),
        GroupKind::CDiagonal => diagonal_cliffords(),
        k => return Err(Error::NotEnumerable(k)),
    })
}

/// Draws one group element: a table entry for finite groups, Haar otherwise.
pub fn sample_group_element<R: Rng + ?Sized>(kind: GroupKind, rng: &mut R) -> UnitaryOp<4> {
    match kind {
        GroupKind::UFull => haar_unitary::<4, R>(rng),
        GroupKind::UA => haar_unitary::<2, R>(rng).on(Qubit::A),
        GroupKind::UB => haar_unitary::<2, R>(rng).on(Qubit::B),
        k => {
            let table = group_elements(k).expect("finite group");
            table[rng.random_range(0..table.len())]
        }
    }
}

pub enum ElementSource<'a, R: ?Sized> {
    Index(usize),
    Rng(&'a mut R),
}

/// One ensemble member `g† U_c g`.
pub fn draw_ensemble_element<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    source: ElementSource<'_, R>,
) -> Result<UnitaryOp<4>> {
    let g = match source {
        ElementSource::Index(index) => {
            let table = group_elements(spec.group.kind)?;
            *table.get(index).ok_or(Error::IndexOutOfRange {
                index,
                len: table.len(),
            })?
        }
        ElementSource::Rng(rng) => sample_group_element(spec.group.kind, rng),
    };
    Ok(spec.core.conjugate_by(&g))
}
