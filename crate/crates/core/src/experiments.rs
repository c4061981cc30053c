//! Experiment drivers producing tabular reports.
//!
//! Every driver is a pure function of its [`ExperimentConfig`]; sampling
//! drivers split their budget into `workers` deterministic streams, so a
//! fixed `(seed, workers)` always reproduces the same report.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chsh::{
    chsh_expectation, horodecki_max, hurwitz_coords, hurwitz_violates, r_theta_state,
    rho_family_closed_forms, rho_family_state, tsirelson_gap, verify_theorem1, verify_theorem2,
    verify_theorem3, violates, w_theta, ChshSpec, RHO_FAMILY_PHI, RHO_FAMILY_THETA, TSIRELSON,
};
use crate::ensembles::{
    cache, clifford_1q, clifford_2q, enumerate_clifford_1q, enumerate_clifford_2q,
    enumerate_stabilizer_states, haar_state, haar_unitary, partition, stabilizer_states,
    worker_rng, GroupKind, CLIFFORD_1Q_ORDER, CLIFFORD_2Q_ORDER, STABILIZER_STATE_COUNT,
};
use crate::error::Result;
use crate::qcore::{Qubit, StateVec};
use crate::resources::{
    entanglement_capacity, local_magic, nonlocal_magic, nonstabilizing_power_in,
    stabilizer_entropy_pure, von_neumann_entropy, LogBase,
};
use crate::stats::{
    chebyshev_bound, chi_square_folded_b, integrate, pdf_b0_haar, pviol_exact,
    ConditionalAccumulator, JointHistogram,
};
use crate::twirling::{table1_report, table2_report, Core};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub samples: usize,
    pub bins: usize,
    pub workers: usize,
    /// Grid size override for grid-based drivers.
    pub grid: Option<usize>,
    /// Restricts table drivers to these cores.
    pub cores: Option<Vec<Core>>,
    /// Restricts the violation table to one group.
    pub group: Option<GroupKind>,
    pub log_base: LogBase,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            samples: 1_000_000,
            bins: 50,
            workers: 1,
            grid: None,
            cores: None,
            group: None,
            log_base: LogBase::E,
        }
    }
}

/// A single output value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    /// Not defined for this row (empty bin, column not applicable).
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            // Adding zero folds −0 into +0.
            Cell::Num(x + 0.0)
        } else {
            Cell::Missing
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::from)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// False when a built-in check of the driver failed.
    pub verified: bool,
}

impl Report {
    fn new(name: &str, columns: &[&str]) -> Self {
        Report {
            name: name.to_string(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verified: true,
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

/// Expectation of `B₀` on `W(θ)|00⟩` and the two stabilizer-entropy curves.
pub fn fig1(cfg: &ExperimentConfig) -> Report {
    let mut r = Report::new("fig1", &["theta", "b", "m2_state", "m2_power"]);
    r.meta("log_base", cfg.log_base);
    for t in grid(cfg.grid.unwrap_or(361), 0.0, PI) {
        let u = w_theta(t);
        let psi = StateVec::zero().apply(&u);
        r.push(vec![
            t.into(),
            chsh_expectation(&ChshSpec::B0, &psi).into(),
            cfg.log_base.from_nats(stabilizer_entropy_pure(&psi)).into(),
            nonstabilizing_power_in(&u, cfg.log_base).into(),
        ]);
    }
    r
}

/// Range of `f(θ) = 2√2 − M_NL/2 − |⟨B₀⟩|` over Haar local unitaries.
pub fn fig2(cfg: &ExperimentConfig) -> Report {
    let mut r = Report::new("fig2", &["theta", "m_nl", "f_mean", "f_min", "f_max"]);
    r.meta("pairs_per_theta", cfg.samples);
    let n_theta = cfg.grid.unwrap_or(200);
    let thetas: Vec<f64> = (0..n_theta)
        .map(|k| 2.0 * PI * k as f64 / n_theta as f64)
        .collect();
    let rows: Vec<(f64, f64, f64, f64, f64)> = thetas
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut rng = worker_rng(cfg.seed, k);
            let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..cfg.samples {
                let f = tsirelson_gap(
                    t,
                    &haar_unitary::<2, _>(&mut rng),
                    &haar_unitary::<2, _>(&mut rng),
                );
                sum += f;
                lo = lo.min(f);
                hi = hi.max(f);
            }
            (
                t,
                nonlocal_magic(&r_theta_state(t)),
                sum / cfg.samples.max(1) as f64,
                lo,
                hi,
            )
        })
        .collect();
    let mut global_min = f64::INFINITY;
    for (t, m, mean, lo, hi) in rows {
        global_min = global_min.min(lo);
        r.push(vec![t.into(), m.into(), mean.into(), lo.into(), hi.into()]);
    }
    r.meta("min_f", global_min);
    r.verified = cfg.samples == 0 || global_min >= -1e-9;
    r
}

/// The `|ρ(r)⟩` family at `θ = π/4`, `φ = π/3`, numerics beside closed forms.
pub fn fig3(cfg: &ExperimentConfig) -> Report {
    let mut r = Report::new(
        "fig3",
        &[
            "r",
            "s1_bits",
            "c_e",
            "m_nl",
            "b0",
            "s1_closed",
            "c_e_closed",
            "m_nl_closed",
            "b0_closed",
            "violates",
        ],
    );
    let mut worst: f64 = 0.0;
    for x in grid(cfg.grid.unwrap_or(101), 0.0, 1.0) {
        let psi = rho_family_state(x, RHO_FAMILY_THETA, RHO_FAMILY_PHI);
        let s1 = von_neumann_entropy(&psi.reduced(Qubit::A), LogBase::Two);
        let ce = entanglement_capacity(&psi);
        let mnl = nonlocal_magic(&psi);
        let b0 = chsh_expectation(&ChshSpec::B0, &psi);
        let cf = rho_family_closed_forms(x);
        worst = worst
            .max((s1 - cf.s1).abs())
            .max((ce - cf.c_e).abs())
            .max((mnl - cf.m_nl).abs())
            .max((b0 - cf.b0).abs());
        r.push(vec![
            x.into(),
            s1.into(),
            ce.into(),
            mnl.into(),
            b0.into(),
            cf.s1.into(),
            cf.c_e.into(),
            cf.m_nl.into(),
            cf.b0.into(),
            violates(b0).into(),
        ]);
    }
    r.meta("max_closed_form_deviation", worst);
    r.verified = worst < 1e-9;
    r
}

/// Per-state quantities for the Haar conditional experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HaarSample {
    pub b: f64,
    pub s1: f64,
    pub m_nl: f64,
    pub m_loc: f64,
}

pub fn haar_sample<R: rand::Rng + ?Sized>(rng: &mut R, base: LogBase) -> Result<HaarSample> {
    let psi = haar_state(rng);
    Ok(HaarSample {
        b: chsh_expectation(&ChshSpec::B0, &psi),
        s1: von_neumann_entropy(&psi.reduced(Qubit::A), base),
        m_nl: base.from_nats(nonlocal_magic(&psi)),
        m_loc: base.from_nats(local_magic(&psi)?),
    })
}

/// Runs `n` Haar samples over `workers` streams, folding each into a
/// per-worker accumulator and merging in worker order.
pub fn fold_haar_samples<A, F, M>(
    n: usize,
    seed: u64,
    workers: usize,
    base: LogBase,
    init: A,
    push: F,
    merge: M,
) -> Result<A>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, &HaarSample) + Sync,
    M: Fn(&mut A, &A),
{
    let parts: Vec<Result<A>> = partition(n, workers)
        .into_par_iter()
        .enumerate()
        .map(|(w, range)| {
            let mut rng = worker_rng(seed, w);
            let mut acc = init.clone();
            for _ in range {
                push(&mut acc, &haar_sample(&mut rng, base)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = init;
    for p in parts {
        merge(&mut total, &p?);
    }
    Ok(total)
}

/// Upper ends of the conditioning ranges, in nats.
pub const S1_MAX_NATS: f64 = LN_2;
/// `max M_NL = −ln(3/4)`.
pub const M_NL_MAX_NATS: f64 = 0.287_682_072_451_780_9;
pub const M_LOC_RANGE_NATS: f64 = 0.9;
/// Fine origin window for `M_LOC`.
pub const M_LOC_FINE_MAX_NATS: f64 = 0.05;
pub const M_LOC_FINE_BINS: usize = 20;
pub const JOINT_B_BINS: usize = 200;

#[derive(Clone)]
struct Fig4Acc {
    s1: ConditionalAccumulator,
    m_nl: ConditionalAccumulator,
    m_loc: ConditionalAccumulator,
    m_loc_fine: ConditionalAccumulator,
    joint_nl: JointHistogram,
    joint_loc: JointHistogram,
}

/// Histograms from one Haar sampling pass.
pub struct HaarConditionals {
    pub s1: crate::stats::BinnedConditional,
    pub m_nl: crate::stats::BinnedConditional,
    pub m_loc: crate::stats::BinnedConditional,
    pub m_loc_fine: crate::stats::BinnedConditional,
    pub joint_nl: JointHistogram,
    pub joint_loc: JointHistogram,
}

pub fn haar_conditionals(cfg: &ExperimentConfig) -> Result<HaarConditionals> {
    let base = cfg.log_base;
    let bins = cfg.bins;
    let init = Fig4Acc {
        s1: ConditionalAccumulator::new(bins, (0.0, base.from_nats(S1_MAX_NATS)))?,
        m_nl: ConditionalAccumulator::new(bins, (0.0, base.from_nats(M_NL_MAX_NATS)))?,
        m_loc: ConditionalAccumulator::new(bins, (0.0, base.from_nats(M_LOC_RANGE_NATS)))?,
        m_loc_fine: ConditionalAccumulator::new(
            M_LOC_FINE_BINS,
            (0.0, base.from_nats(M_LOC_FINE_MAX_NATS)),
        )?,
        joint_nl: JointHistogram::new(JOINT_B_BINS, bins, (0.0, base.from_nats(M_NL_MAX_NATS)))?,
        joint_loc: JointHistogram::new(
            JOINT_B_BINS,
            bins,
            (0.0, base.from_nats(M_LOC_RANGE_NATS)),
        )?,
    };
    let acc = fold_haar_samples(
        cfg.samples,
        cfg.seed,
        cfg.workers,
        base,
        init,
        |a, s| {
            a.s1.push(s.b, s.s1);
            a.m_nl.push(s.b, s.m_nl);
            a.m_loc.push(s.b, s.m_loc);
            a.m_loc_fine.push(s.b, s.m_loc);
            a.joint_nl.push(s.b, s.m_nl);
            a.joint_loc.push(s.b, s.m_loc);
        },
        |a, o| {
            a.s1.merge(&o.s1);
            a.m_nl.merge(&o.m_nl);
            a.m_loc.merge(&o.m_loc);
            a.m_loc_fine.merge(&o.m_loc_fine);
            a.joint_nl.merge(&o.joint_nl);
            a.joint_loc.merge(&o.joint_loc);
        },
    )?;
    Ok(HaarConditionals {
        s1: acc.s1.finish(),
        m_nl: acc.m_nl.finish(),
        m_loc: acc.m_loc.finish(),
        m_loc_fine: acc.m_loc_fine.finish(),
        joint_nl: acc.joint_nl,
        joint_loc: acc.joint_loc,
    })
}

const HIST_COLUMNS: [&str; 11] = [
    "panel",
    "y_lo",
    "y_hi",
    "absb_lo",
    "absb_hi",
    "count",
    "violations",
    "p_viol",
    "stderr",
    "marginal",
    "max_abs_b",
];

fn push_conditional(r: &mut Report, panel: &str, c: &crate::stats::BinnedConditional) {
    for k in 0..c.counts.len() {
        r.push(vec![
            panel.into(),
            c.bin_edges[k].into(),
            c.bin_edges[k + 1].into(),
            Cell::Missing,
            Cell::Missing,
            c.counts[k].into(),
            c.violations[k].into(),
            c.p_viol[k].into(),
            c.stderr[k].into(),
            c.marginal[k].into(),
            Cell::Missing,
        ]);
    }
}

fn push_joint(r: &mut Report, panel: &str, h: &JointHistogram) {
    for (iy, row) in h.counts.iter().enumerate() {
        for (ib, &n) in row.iter().enumerate() {
            if n == 0 {
                continue;
            }
            r.push(vec![
                panel.into(),
                h.y_edges[iy].into(),
                h.y_edges[iy + 1].into(),
                h.b_edges[ib].into(),
                h.b_edges[ib + 1].into(),
                n.into(),
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                Cell::Missing,
                h.column_max_b[iy].into(),
            ]);
        }
    }
}

fn conditional_meta(r: &mut Report, cfg: &ExperimentConfig) {
    r.meta("log_base", cfg.log_base);
    r.meta("stderr", "binomial sqrt(p(1-p)/n)");
}

/// Violation probability conditioned on entanglement, non-local and local
/// magic, plus the `(|b|, M_NL)` density.
pub fn fig4(cfg: &ExperimentConfig) -> Result<Report> {
    let h = haar_conditionals(cfg)?;
    let mut r = Report::new("fig4", &HIST_COLUMNS);
    conditional_meta(&mut r, cfg);
    push_conditional(&mut r, "s1", &h.s1);
    push_conditional(&mut r, "m_nl", &h.m_nl);
    push_conditional(&mut r, "m_loc", &h.m_loc);
    push_joint(&mut r, "joint_m_nl", &h.joint_nl);
    Ok(r)
}

/// The `(|b|, M_LOC)` density and the fine origin binning in `M_LOC`.
pub fn fig6(cfg: &ExperimentConfig) -> Result<Report> {
    let h = haar_conditionals(cfg)?;
    let mut r = Report::new("fig6", &HIST_COLUMNS);
    conditional_meta(&mut r, cfg);
    push_conditional(&mut r, "m_loc_fine", &h.m_loc_fine);
    push_joint(&mut r, "joint_m_loc", &h.joint_loc);
    Ok(r)
}

/// Density of Haar states in the `(θ₂, θ₃)` plane with violation fractions.
pub fn geometry(cfg: &ExperimentConfig) -> Result<Report> {
    let bins = cfg.bins.max(2);
    #[derive(Clone)]
    struct Acc {
        counts: Vec<u64>,
        viol: Vec<u64>,
        disagreements: u64,
    }
    let init = Acc {
        counts: vec![0; bins * bins],
        viol: vec![0; bins * bins],
        disagreements: 0,
    };
    let parts: Vec<Acc> = partition(cfg.samples, cfg.workers)
        .into_par_iter()
        .enumerate()
        .map(|(w, range)| {
            let mut rng = worker_rng(cfg.seed, w);
            let mut a = init.clone();
            for _ in range {
                let psi = haar_state(&mut rng);
                let h = hurwitz_coords(&psi);
                let b = chsh_expectation(&ChshSpec::B0, &psi);
                let v = hurwitz_violates(h);
                if v != violates(b) && (b.abs() - 2.0).abs() >= 1e-9 {
                    a.disagreements += 1;
                }
                let idx = |t: f64| ((t / FRAC_PI_2 * bins as f64) as usize).min(bins - 1);
                let k = idx(h.theta2) * bins + idx(h.theta3);
                a.counts[k] += 1;
                a.viol[k] += u64::from(v);
            }
            a
        })
        .collect();
    let mut total = init;
    for p in parts {
        for (x, y) in total.counts.iter_mut().zip(&p.counts) {
            *x += y;
        }
        for (x, y) in total.viol.iter_mut().zip(&p.viol) {
            *x += y;
        }
        total.disagreements += p.disagreements;
    }
    let mut r = Report::new(
        "geometry",
        &[
            "theta2_lo",
            "theta2_hi",
            "theta3_lo",
            "theta3_hi",
            "count",
            "violations",
            "density",
            "violating_fraction",
        ],
    );
    r.meta("disagreements", total.disagreements);
    let width = FRAC_PI_2 / bins as f64;
    let n = cfg.samples.max(1) as f64;
    for i in 0..bins {
        for j in 0..bins {
            let k = i * bins + j;
            let c = total.counts[k];
            r.push(vec![
                (i as f64 * width).into(),
                ((i + 1) as f64 * width).into(),
                (j as f64 * width).into(),
                ((j + 1) as f64 * width).into(),
                c.into(),
                total.viol[k].into(),
                (c as f64 / n / (width * width)).into(),
                (c > 0).then(|| total.viol[k] as f64 / c as f64).into(),
            ]);
        }
    }
    r.verified = total.disagreements == 0;
    Ok(r)
}

fn table_cores(cfg: &ExperimentConfig, default: Vec<Core>) -> Vec<Core> {
    cfg.cores.clone().unwrap_or(default)
}

/// Default `W(θ)` angles for the twirling summary.
pub const TABLE1_ANGLES: [f64; 4] = [PI / 8.0, PI / 4.0, PI / 3.0, PI / 2.0];

pub fn table1(cfg: &ExperimentConfig) -> Result<Report> {
    let mut default = vec![Core::Cx, Core::CxH];
    default.extend(TABLE1_ANGLES.iter().map(|&t| Core::W(t)));
    let checks = table1_report(
        &table_cores(cfg, default),
        cfg.samples,
        cfg.seed,
        cfg.workers,
    )?;
    let mut r = Report::new(
        "table1",
        &[
            "quantity",
            "core",
            "method",
            "computed",
            "stderr",
            "printed",
            "tolerance",
            "pass",
        ],
    );
    for c in checks {
        r.push(vec![
            c.quantity.into(),
            c.core.into(),
            c.method.into(),
            c.computed.into(),
            c.stderr.into(),
            c.printed.into(),
            c.tolerance.into(),
            c.pass.into(),
        ]);
    }
    Ok(r)
}

pub fn table2(cfg: &ExperimentConfig) -> Result<Report> {
    let rows = table2_report(
        &table_cores(cfg, Core::table2_rows()),
        cfg.samples,
        cfg.seed,
        cfg.workers,
    )?;
    let mut r = Report::new(
        "table2",
        &[
            "core",
            "column",
            "method",
            "value",
            "stderr",
            "violations",
            "n",
            "printed",
            "pass",
        ],
    );
    r.meta("p_viol_units", "percent");
    r.meta("m2_units", "bits");
    for row in rows {
        for c in row.cells {
            if cfg.group.is_some_and(|g| g.to_string() != c.group) {
                continue;
            }
            r.push(vec![
                c.core.into(),
                c.group.into(),
                format!("{:?}", c.method).into(),
                (100.0 * c.p_viol).into(),
                (100.0 * c.stderr).into(),
                c.violations.into(),
                c.n.into(),
                c.printed.into(),
                c.pass.into(),
            ]);
        }
        r.push(vec![
            row.core.into(),
            "M2".into(),
            "exact".into(),
            row.m2_bits.into(),
            0.0.into(),
            Cell::Missing,
            STABILIZER_STATE_COUNT.into(),
            row.m2_printed.into(),
            row.m2_pass.into(),
        ]);
    }
    Ok(r)
}

/// Haar closed forms with quadrature and optional Monte Carlo cross-checks.
pub fn exact(cfg: &ExperimentConfig) -> Result<Report> {
    let mut r = Report::new(
        "exact",
        &["quantity", "value", "reference", "stderr", "pass"],
    );
    let a = TSIRELSON;
    let moment = |k: i32| {
        integrate(|x| x.powi(k) * pdf_b0_haar(x), -a, 0.0, 1e-13)
            + integrate(|x| x.powi(k) * pdf_b0_haar(x), 0.0, a, 1e-13)
    };
    let p = pviol_exact();
    let pq = 2.0 * integrate(pdf_b0_haar, 2.0, a, 1e-14);
    let cheb = chebyshev_bound(0.0, 0.8, 2.0)?;
    let mut ok = true;
    let mut row = |r: &mut Report, name: &str, value: f64, reference: f64, se: f64, tol: f64| {
        let pass = (value - reference).abs() <= tol;
        ok &= pass;
        r.push(vec![
            name.into(),
            value.into(),
            reference.into(),
            se.into(),
            pass.into(),
        ]);
    };
    row(&mut r, "pviol", p, pq, 0.0, 1e-12);
    row(&mut r, "pdf_norm", moment(0), 1.0, 0.0, 1e-10);
    row(&mut r, "mean", moment(1), 0.0, 0.0, 1e-10);
    row(&mut r, "var", moment(2), 0.8, 0.0, 1e-10);
    row(&mut r, "chebyshev", cheb, 0.2, 0.0, 1e-15);
    if cfg.samples > 0 {
        let hits = fold_haar_samples(
            cfg.samples,
            cfg.seed,
            cfg.workers,
            LogBase::E,
            0u64,
            |a, s| *a += u64::from(violates(s.b)),
            |a, o| *a += o,
        )?;
        let n = cfg.samples as f64;
        let se = (p * (1.0 - p) / n).sqrt();
        row(
            &mut r,
            "pviol_monte_carlo",
            hits as f64 / n,
            p,
            se,
            5.0 * se,
        );
    }
    r.verified = ok;
    Ok(r)
}

/// The three no-violation theorems.
pub fn verify(cfg: &ExperimentConfig) -> Result<Report> {
    let mut r = Report::new("verify", &["theorem", "quantity", "value", "bound", "pass"]);
    let mut rng = worker_rng(cfg.seed, 0);
    let mut ok = true;
    let mut row = |r: &mut Report, th: &str, q: &str, v: f64, bound: f64, pass: bool| {
        ok &= pass;
        r.push(vec![
            th.into(),
            q.into(),
            v.into(),
            bound.into(),
            pass.into(),
        ]);
    };
    let n = cfg.samples.min(100_000);
    match verify_theorem1(10_000, &mut rng) {
        Ok(t) => {
            row(
                &mut r,
                "1",
                "max_abs_b_pure",
                t.max_abs_b_pure,
                2.0,
                (t.max_abs_b_pure - 2.0).abs() < 1e-12,
            );
            row(&mut r, "1", "max_abs_b_mixed", t.max_abs_b_mixed, 2.0, true);
            row(
                &mut r,
                "1",
                "quantized",
                f64::from(u8::from(t.quantized)),
                1.0,
                t.quantized,
            );
        }
        Err(e) => row(&mut r, "1", &e.to_string(), f64::NAN, 2.0, false),
    }
    match verify_theorem2(n, &mut rng) {
        Ok(t) => row(&mut r, "2", "max_abs_b", t.max_abs_b, 2.0, true),
        Err(e) => row(&mut r, "2", &e.to_string(), f64::NAN, 2.0, false),
    }
    match verify_theorem3(cfg.grid.unwrap_or(181), n, &mut rng) {
        Ok(t) => {
            row(&mut r, "3", "max_abs_b", t.max_abs_b, 2.0, true);
            row(
                &mut r,
                "3",
                "max_horodecki_with_magic",
                t.max_horodecki_with_magic,
                TSIRELSON,
                true,
            );
            row(
                &mut r,
                "3",
                "max_bound_excess",
                t.max_bound_excess,
                0.0,
                t.max_bound_excess <= 1e-6,
            );
        }
        Err(e) => row(&mut r, "3", &e.to_string(), f64::NAN, 2.0, false),
    }
    r.verified = ok;
    Ok(r)
}

/// Enumeration counts and cache round trip.
pub fn enumerate(cache_dir: Option<&std::path::Path>) -> Result<Report> {
    let mut r = Report::new("enumerate", &["table", "count", "expected", "pass"]);
    let c1 = enumerate_clifford_1q()?.len();
    let c2 = enumerate_clifford_2q()?;
    let st = enumerate_stabilizer_states()?.len();
    let regen_identical = cache::encode(&c2) == cache::encode(clifford_2q());
    let mut ok = regen_identical;
    for (name, n, want) in [
        ("clifford_1q", c1, CLIFFORD_1Q_ORDER),
        ("clifford_2q", c2.len(), CLIFFORD_2Q_ORDER),
        ("stabilizer_states", st, STABILIZER_STATE_COUNT),
    ] {
        ok &= n == want;
        r.push(vec![name.into(), n.into(), want.into(), (n == want).into()]);
    }
    debug_assert_eq!(clifford_1q().len(), c1);
    debug_assert_eq!(stabilizer_states().len(), st);
    r.push(vec![
        "regeneration_byte_identical".into(),
        Cell::Missing,
        Cell::Missing,
        regen_identical.into(),
    ]);
    if let Some(dir) = cache_dir {
        let table = cache::load_or_build(dir)?;
        let same = cache::encode(&table) == cache::encode(clifford_2q());
        ok &= same;
        r.meta("cache_file", dir.join(cache::FILE_NAME).display());
        r.push(vec![
            "cache".into(),
            table.len().into(),
            CLIFFORD_2Q_ORDER.into(),
            same.into(),
        ]);
    }
    r.verified = ok;
    Ok(r)
}

/// Horodecki oracle values on `|r(θ)⟩`, used by tests and benchmarks.
pub fn horodecki_curve(n: usize) -> Vec<(f64, f64)> {
    grid(n, 0.0, FRAC_PI_2)
        .map(|t| (t, horodecki_max(&r_theta_state(t))))
        .collect()
}

/// χ² test of the `|b|` marginal of a joint histogram.
pub fn b_marginal_chi_square(h: &JointHistogram) -> Result<crate::stats::ChiSquareTest> {
    chi_square_folded_b(&h.b_marginal, &h.b_edges)
}
