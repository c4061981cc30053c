//! Haar distribution of the CHSH outcome and binned estimators.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chsh::{violates, TSIRELSON};
use crate::error::{Error, Result};

/// Density of `b = ⟨ψ|B₀|ψ⟩` for Haar-random `ψ`:
/// `(3/64)(8√2 + |x|(√2|x| − 8))` on `|x| ≤ 2√2`.
pub fn pdf_b0_haar(x: f64) -> f64 {
    let y = x.abs();
    if y > TSIRELSON {
        return 0.0;
    }
    (3.0 / 64.0 * (8.0 * SQRT_2 + y * (SQRT_2 * y - 8.0))).max(0.0)
}

/// `∫₀^y pdf` for `0 ≤ y ≤ 2√2`.
fn half_cdf(y: f64) -> f64 {
    let y = y.clamp(0.0, TSIRELSON);
    3.0 / 64.0 * (8.0 * SQRT_2 * y - 4.0 * y * y + SQRT_2 * y * y * y / 3.0)
}

pub fn cdf_b0_haar(x: f64) -> f64 {
    (0.5 + x.signum() * half_cdf(x.abs())).clamp(0.0, 1.0)
}

/// Probability that `|b|` falls in `[lo, hi]`, both non-negative.
pub fn folded_probability(lo: f64, hi: f64) -> f64 {
    2.0 * (half_cdf(hi) - half_cdf(lo))
}

/// `(10 − 7√2)/4`.
pub fn pviol_exact() -> f64 {
    (10.0 - 7.0 * SQRT_2) / 4.0
}

/// `min(1, σ²/(t − |μ|)²)`.
pub fn chebyshev_bound(mean: f64, variance: f64, threshold: f64) -> Result<f64> {
    if variance < 0.0 || threshold <= mean.abs() {
        return Err(Error::InvalidArgument(format!(
            "Chebyshev bound needs variance ≥ 0 and threshold > |mean| (got {variance}, {threshold}, {mean})"
        )));
    }
    Ok((variance / (threshold - mean.abs()).powi(2)).min(1.0))
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(&f, a, fa, b, fb);
    recurse(&f, a, fa, b, fb, m, fm, whole, tol, 50)
}

fn bin_index(y: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !(lo..=hi).contains(&y) {
        return None;
    }
    let k = ((y - lo) / (hi - lo) * bins as f64) as usize;
    Some(k.min(bins - 1))
}

fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins)
        .map(|k| lo + (hi - lo) * k as f64 / bins as f64)
        .collect()
}

fn check_range(bins: usize, range: (f64, f64)) -> Result<()> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if !(range.0.is_finite() && range.1.is_finite() && range.0 < range.1) {
        return Err(Error::InvalidArgument(format!("bad range {range:?}")));
    }
    Ok(())
}

/// Streaming counts of violations per bin of a conditioning variable `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalAccumulator {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    violations: Vec<u64>,
    underflow: u64,
    overflow: u64,
}

impl ConditionalAccumulator {
    pub fn new(bins: usize, y_range: (f64, f64)) -> Result<Self> {
        check_range(bins, y_range)?;
        Ok(ConditionalAccumulator {
            lo: y_range.0,
            hi: y_range.1,
            counts: vec![0; bins],
            violations: vec![0; bins],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn push(&mut self, b: f64, y: f64) {
        match bin_index(y, self.lo, self.hi, self.counts.len()) {
            Some(k) => {
                self.counts[k] += 1;
                self.violations[k] += u64::from(violates(b));
            }
            None if y < self.lo => self.underflow += 1,
            None => self.overflow += 1,
        }
    }

    pub fn merge(&mut self, other: &ConditionalAccumulator) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.violations.iter_mut().zip(&other.violations) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    pub fn finish(&self) -> BinnedConditional {
        let total: u64 = self.counts.iter().sum::<u64>() + self.underflow + self.overflow;
        let p_viol: Vec<Option<f64>> = self
            .counts
            .iter()
            .zip(&self.violations)
            .map(|(&n, &v)| (n > 0).then(|| v as f64 / n as f64))
            .collect();
        let stderr = p_viol
            .iter()
            .zip(&self.counts)
            .map(|(p, &n)| p.map(|p| (p * (1.0 - p) / n as f64).sqrt()))
            .collect();
        BinnedConditional {
            bin_edges: edges(self.lo, self.hi, self.counts.len()),
            p_viol,
            stderr,
            counts: self.counts.clone(),
            violations: self.violations.clone(),
            marginal: self
                .counts
                .iter()
                .map(|&n| {
                    if total > 0 {
                        n as f64 / total as f64
                    } else {
                        0.0
                    }
                })
                .collect(),
            underflow: self.underflow,
            overflow: self.overflow,
            total,
        }
    }
}

/// Per-bin violation probability given a resource value.
///
/// Empty bins carry `None` rather than zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedConditional {
    pub bin_edges: Vec<f64>,
    pub p_viol: Vec<Option<f64>>,
    /// Binomial `√(p(1−p)/n)`.
    pub stderr: Vec<Option<f64>>,
    pub counts: Vec<u64>,
    pub violations: Vec<u64>,
    /// `counts / total`.
    pub marginal: Vec<f64>,
    /// Samples with `y` below / above the binned range.
    pub underflow: u64,
    pub overflow: u64,
    pub total: u64,
}

pub fn conditional_violation<I>(
    samples: I,
    bins: usize,
    y_range: (f64, f64),
) -> Result<BinnedConditional>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut acc = ConditionalAccumulator::new(bins, y_range)?;
    for (b, y) in samples {
        acc.push(b, y);
    }
    Ok(acc.finish())
}

/// Counts over `|b| ∈ [0, 2√2]` × `y`, with per-column maxima of `|b|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub b_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `counts[iy][ib]`.
    pub counts: Vec<Vec<u64>>,
    pub b_marginal: Vec<u64>,
    pub y_marginal: Vec<u64>,
    /// Largest `|b|` seen in each `y` column.
    pub column_max_b: Vec<Option<f64>>,
    pub out_of_range: u64,
}

impl JointHistogram {
    pub fn new(bins_b: usize, bins_y: usize, y_range: (f64, f64)) -> Result<Self> {
        check_range(bins_b, (0.0, TSIRELSON))?;
        check_range(bins_y, y_range)?;
        Ok(JointHistogram {
            b_edges: edges(0.0, TSIRELSON, bins_b),
            y_edges: edges(y_range.0, y_range.1, bins_y),
            counts: vec![vec![0; bins_b]; bins_y],
            b_marginal: vec![0; bins_b],
            y_marginal: vec![0; bins_y],
            column_max_b: vec![None; bins_y],
            out_of_range: 0,
        })
    }

    pub fn push(&mut self, b: f64, y: f64) {
        let nb = self.b_marginal.len();
        let ny = self.y_marginal.len();
        let ab = b.abs().min(TSIRELSON);
        let (ylo, yhi) = (self.y_edges[0], self.y_edges[ny]);
        match (
            bin_index(ab, 0.0, TSIRELSON, nb),
            bin_index(y, ylo, yhi, ny),
        ) {
            (Some(ib), Some(iy)) => {
                self.counts[iy][ib] += 1;
                self.b_marginal[ib] += 1;
                self.y_marginal[iy] += 1;
                let m = &mut self.column_max_b[iy];
                *m = Some(m.map_or(ab, |v| v.max(ab)));
            }
            _ => self.out_of_range += 1,
        }
    }

    pub fn merge(&mut self, other: &JointHistogram) {
        for (ra, rb) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        for (a, b) in self.b_marginal.iter_mut().zip(&other.b_marginal) {
            *a += b;
        }
        for (a, b) in self.y_marginal.iter_mut().zip(&other.y_marginal) {
            *a += b;
        }
        for (a, b) in self.column_max_b.iter_mut().zip(&other.column_max_b) {
            *a = match (*a, *b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            };
        }
        self.out_of_range += other.out_of_range;
    }
}

pub fn joint_histogram<I>(
    samples: I,
    bins_b: usize,
    bins_y: usize,
    y_range: (f64, f64),
) -> Result<JointHistogram>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut h = JointHistogram::new(bins_b, bins_y, y_range)?;
    for (b, y) in samples {
        h.push(b, y);
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins left after pooling sparse tails.
    pub cells: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Pearson χ² test of `observed` against cell probabilities `probs`.
///
/// Adjacent cells are pooled until every expected count is at least 5.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::InvalidArgument(
            "observed and expected cells differ in length".into(),
        ));
    }
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        o_acc += o as f64;
        e_acc += p * n as f64;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::InvalidArgument(
            "too few populated cells for a χ² test".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
        cells: cells.len(),
    })
}

/// χ² test of observed `|b|` counts against the folded Haar density.
pub fn chi_square_folded_b(counts: &[u64], b_edges: &[f64]) -> Result<ChiSquareTest> {
    let probs: Vec<f64> = b_edges
        .windows(2)
        .map(|w| folded_probability(w[0], w[1]))
        .collect();
    chi_square_gof(counts, &probs)
}
