//! Mobius-weighted orbit averages, polynomial-phase sups, correlation sums
//! and discrepancy, all summed deterministically.
//!
//! Every floating-point sum here is assembled in one fixed shape: indices are
//! cut into absolute blocks of `2^16`, each block is compensated-summed in
//! index order, block totals combine along a fixed halving tree, and
//! checkpoint prefixes are taken inside the block that owns them. The shape
//! depends only on the index range, never on the worker count, so one rayon
//! thread and eight produce bit-identical results. Blocks are independent;
//! rayon distributes them.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::moebius::MoebiusTable;
use crate::orbits::OrbitValues;
use crate::polyeval::IntPolynomial;
use crate::torus::{unit_phase, Frac64};

/// Summation block length. Absolute: block `b` owns indices
/// `b * 2^16 + 1 ..= (b + 1) * 2^16`.
pub const SUM_BLOCK: u64 = 1 << 16;

/// Largest Davenport grid; E values for the whole grid are held in memory.
pub const MAX_GRID: u64 = 1 << 24;

/// Power-of-two grids up to this size go through residue-class regrouping.
const POW2_CLASS_LIMIT: u64 = 1 << 20;

/// Sups below this are treated as exact zeroes and dropped from decay fits.
const NEGLIGIBLE_SUP: f64 = 1e-15;

const MAX_DISCREPANCY_POINTS: u64 = 10_000_000;

#[derive(Debug)]
pub enum AverageError {
    NoCheckpoints,
    /// Checkpoints must be strictly increasing.
    UnsortedCheckpoints { at: usize },
    ZeroCheckpoint,
    ZeroSampleCount,
    TableTooSmall { needed: u64, limit: u64 },
    BadGrid { grid: u64 },
    NotPrime { q: u64 },
    EqualFrequencies { q: u64 },
    /// `q * n` would overflow the index type.
    IndexOverflow { q: u64, n: u64 },
    EmptyPointSet,
    TooManyPoints { n: u64 },
    /// Decay fits read `ln ln N`, pointless below N = 3.
    BadSampleSize { n: u64 },
    DegenerateFit { usable: usize },
    LengthMismatch { left: usize, right: usize },
}

impl fmt::Display for AverageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AverageError::NoCheckpoints => write!(f, "no checkpoints requested"),
            AverageError::UnsortedCheckpoints { at } => {
                write!(f, "checkpoints must be strictly increasing (position {at})")
            }
            AverageError::ZeroCheckpoint => write!(f, "checkpoints start at 1"),
            AverageError::ZeroSampleCount => write!(f, "need at least one sample"),
            AverageError::TableTooSmall { needed, limit } => {
                write!(f, "need mu up to {needed}, table stops at {limit}")
            }
            AverageError::BadGrid { grid } => {
                write!(f, "grid size {grid} outside 2..={MAX_GRID}")
            }
            AverageError::NotPrime { q } => write!(f, "{q} is not prime"),
            AverageError::EqualFrequencies { q } => {
                write!(f, "correlation frequencies must differ, both are {q}")
            }
            AverageError::IndexOverflow { q, n } => {
                write!(f, "{q} * {n} overflows the 64-bit index range")
            }
            AverageError::EmptyPointSet => write!(f, "discrepancy of an empty point set"),
            AverageError::TooManyPoints { n } => {
                write!(f, "{n} points exceed the {MAX_DISCREPANCY_POINTS} cap")
            }
            AverageError::BadSampleSize { n } => {
                write!(f, "decay fit needs N >= 3, got {n}")
            }
            AverageError::DegenerateFit { usable } => {
                write!(f, "fit needs >= 4 usable points, got {usable}")
            }
            AverageError::LengthMismatch { left, right } => {
                write!(f, "paired inputs of length {left} and {right}")
            }
        }
    }
}

impl std::error::Error for AverageError {}

/// Per-term weight of an average.
#[derive(Clone, Copy)]
pub enum Weight<'a> {
    /// Plain Birkhoff average.
    Unit,
    /// `mu(n)`-weighted average.
    Moebius(&'a MoebiusTable),
}

impl Weight<'_> {
    pub fn label(&self) -> &'static str {
        match self {
            Weight::Unit => "unit",
            Weight::Moebius(_) => "mobius",
        }
    }
}

/// Averages `S_N = (1/N) sum_{n<=N} w(n) v(n)` at each checkpoint.
#[derive(Debug, Clone)]
pub struct AverageSeries {
    pub checkpoints: Vec<u64>,
    pub averages: Vec<Complex64>,
    pub source_label: String,
    pub weight_label: String,
}

impl AverageSeries {
    pub fn final_average(&self) -> Complex64 {
        *self.averages.last().expect("series is never empty")
    }
}

// Neumaier's compensated accumulator: the running sum plus captured low bits.
struct Compensated {
    s: f64,
    c: f64,
}

impl Compensated {
    fn new() -> Self {
        Compensated { s: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.s + x;
        self.c += if self.s.abs() >= x.abs() { (self.s - t) + x } else { (x - t) + self.s };
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

// One block of the fixed summation shape: terms for n = start .. start + len,
// compensated in index order. Returns the block total and the running prefix
// at each mark (marks must lie inside the block, ascending).
fn block_sum_with_marks(
    values: &dyn OrbitValues,
    weight: &Weight<'_>,
    start: u64,
    len: usize,
    marks: &[u64],
) -> (Complex64, Vec<Complex64>) {
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    values.fill_block(start, &mut buf);
    let mu: Option<&[i8]> = match weight {
        Weight::Unit => None,
        Weight::Moebius(t) => Some(&t.values()[start as usize..start as usize + len]),
    };
    let mut re = Compensated::new();
    let mut im = Compensated::new();
    let mut prefixes = Vec::with_capacity(marks.len());
    let mut next_mark = marks.iter().copied().peekable();
    for (off, v) in buf.iter().enumerate() {
        let w = mu.map_or(1.0, |m| m[off] as f64);
        re.add(w * v.re);
        im.add(w * v.im);
        if next_mark.peek() == Some(&(start + off as u64)) {
            next_mark.next();
            prefixes.push(Complex64::new(re.value(), im.value()));
        }
    }
    debug_assert!(next_mark.peek().is_none(), "mark outside its block");
    (Complex64::new(re.value(), im.value()), prefixes)
}

// Fixed halving tree; the association depends only on the length.
fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

fn validate_checkpoints(checkpoints: &[u64]) -> Result<u64, AverageError> {
    let last = *checkpoints.last().ok_or(AverageError::NoCheckpoints)?;
    if checkpoints[0] == 0 {
        return Err(AverageError::ZeroCheckpoint);
    }
    for (i, pair) in checkpoints.windows(2).enumerate() {
        if pair[0] >= pair[1] {
            return Err(AverageError::UnsortedCheckpoints { at: i + 1 });
        }
    }
    Ok(last)
}

/// Weighted orbit average with intermediate checkpoints.
///
/// Checkpoints must be strictly increasing; the last one is the full range.
/// A Mobius weight needs the table to reach that far. Results are
/// bit-identical for any rayon pool size, and a prefix checkpoint yields the
/// same bits whether or not later checkpoints are computed in the same call.
pub fn weighted_average(
    values: &dyn OrbitValues,
    weight: Weight<'_>,
    checkpoints: &[u64],
) -> Result<AverageSeries, AverageError> {
    let n_max = validate_checkpoints(checkpoints)?;
    if let Weight::Moebius(t) = weight {
        if t.limit() < n_max {
            return Err(AverageError::TableTooSmall { needed: n_max, limit: t.limit() });
        }
    }

    let block_count = ((n_max - 1) / SUM_BLOCK + 1) as usize;
    let mut marks_by_block: Vec<Vec<u64>> = vec![Vec::new(); block_count];
    for &cp in checkpoints {
        marks_by_block[((cp - 1) / SUM_BLOCK) as usize].push(cp);
    }

    let results: Vec<(Complex64, Vec<Complex64>)> = (0..block_count)
        .into_par_iter()
        .map(|b| {
            let start = b as u64 * SUM_BLOCK + 1;
            let len = SUM_BLOCK.min(n_max - b as u64 * SUM_BLOCK) as usize;
            block_sum_with_marks(values, &weight, start, len, &marks_by_block[b])
        })
        .collect();

    let block_sums: Vec<Complex64> = results.iter().map(|r| r.0).collect();
    let mut averages = Vec::with_capacity(checkpoints.len());
    for (b, (_, prefixes)) in results.iter().enumerate() {
        for (&cp, &prefix) in marks_by_block[b].iter().zip(prefixes) {
            let total = pairwise_sum(&block_sums[..b]) + prefix;
            averages.push(total.unscale(cp as f64));
        }
    }
    Ok(AverageSeries {
        checkpoints: checkpoints.to_vec(),
        averages,
        source_label: values.label(),
        weight_label: weight.label().to_string(),
    })
}

// Phase source e(theta * p(n)): the thing the Davenport sup sweeps over.
// Phases are exact grid points, computed by wrapped scaling.
struct PhasePoly<'a> {
    p: &'a IntPolynomial,
    theta: Frac64,
}

impl OrbitValues for PhasePoly<'_> {
    fn value_at(&self, n: u64) -> Complex64 {
        unit_phase(self.theta.scale(self.p.eval_wrapped(n)))
    }

    fn fill_block(&self, start: u64, out: &mut [Complex64]) {
        let mut steps = self.p.stream_scaled(start, self.theta.raw());
        for slot in out.iter_mut() {
            *slot = unit_phase(Frac64::new(steps.next().expect("stream is infinite")));
        }
    }

    fn label(&self) -> String {
        format!("phase theta={} p=({})", self.theta, self.p)
    }
}

// (1/N) sum mu(n) e(theta p(n)), in the fixed summation shape, sequentially.
// Used for every per-theta evaluation, grid sweep and refinement alike.
fn phase_average(table: &MoebiusTable, p: &IntPolynomial, n: u64, theta: Frac64) -> Complex64 {
    let source = PhasePoly { p, theta };
    let weight = Weight::Moebius(table);
    let block_count = (n - 1) / SUM_BLOCK + 1;
    let sums: Vec<Complex64> = (0..block_count)
        .map(|b| {
            let start = b * SUM_BLOCK + 1;
            let len = SUM_BLOCK.min(n - b * SUM_BLOCK) as usize;
            block_sum_with_marks(&source, &weight, start, len, &[]).0
        })
        .collect();
    pairwise_sum(&sums).unscale(n as f64)
}

/// Grid point `j / grid` rounded to the `2^-64` lattice.
pub fn grid_theta(j: u64, grid: u64) -> Frac64 {
    let num = ((j as u128) << 64) + (grid as u128) / 2;
    Frac64::new((num / grid as u128) as u64)
}

/// Where and how large the best exponential average on the grid was.
#[derive(Debug, Clone, Copy)]
pub struct DavenportEstimate {
    pub theta: Frac64,
    pub value: f64,
    pub n: u64,
    pub grid: u64,
    pub refine_iters: u32,
}

/// Sup over theta of `E(theta) = |(1/N) sum_{n<=N} mu(n) e(theta p(n))|`,
/// estimated from below: the maximum of real evaluations of `E`, first over
/// the grid `theta_j = j / grid`, then along a golden-section walk in the
/// winning grid cell. Every probe is an actual grid-point evaluation, so the
/// reported value is a certified lower bound for the sup.
///
/// Power-of-two grids up to `2^20` are swept by regrouping: on such a grid
/// the phase of `n` depends only on `p(n) mod grid`, so the class sums
/// `C_s = sum of mu(n) over p(n) = s mod grid` (exact integers) are formed
/// once and each `E(theta_j)` is the same sum reassembled class by class.
/// Other grids are swept one theta at a time from the streamed phases.
pub fn davenport_sup(
    table: &MoebiusTable,
    p: &IntPolynomial,
    n: u64,
    grid: u64,
    refine: u32,
) -> Result<DavenportEstimate, AverageError> {
    if n == 0 {
        return Err(AverageError::ZeroSampleCount);
    }
    if grid < 2 || grid > MAX_GRID {
        return Err(AverageError::BadGrid { grid });
    }
    if table.limit() < n {
        return Err(AverageError::TableTooSmall { needed: n, limit: table.limit() });
    }

    let values: Vec<f64> = if grid.is_power_of_two() && grid <= POW2_CLASS_LIMIT {
        sweep_pow2_classes(table, p, n, grid)
    } else {
        (0..grid)
            .into_par_iter()
            .map(|j| phase_average(table, p, n, grid_theta(j, grid)).norm())
            .collect()
    };

    let mut best_j = 0u64;
    let mut best_value = values[0];
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > best_value {
            best_value = v;
            best_j = j as u64;
        }
    }

    let mut best = (best_value, grid_theta(best_j, grid).raw());
    if refine > 0 {
        let step = ((1u128 << 64) / grid as u128) as u64;
        best = refine_golden(table, p, n, best.1, step, refine, best);
    }
    Ok(DavenportEstimate {
        theta: Frac64::new(best.1),
        value: best.0,
        n,
        grid,
        refine_iters: refine,
    })
}

// E over a power-of-two grid via residue classes. theta_j = j * 2^64 / g
// exactly, so e(theta_j p(n)) = root[(j * (p(n) mod g)) mod g]: group the mu
// weights by p(n) mod g first, then reassemble per j. Same terms, same
// values, quadratically fewer transcendental calls.
fn sweep_pow2_classes(table: &MoebiusTable, p: &IntPolynomial, n: u64, g: u64) -> Vec<f64> {
    let mask = g - 1;
    let mut class = vec![0i64; g as usize];
    let mu = table.values();
    let mut residues = p.stream(1);
    for i in 1..=n {
        let s = residues.next().expect("stream is infinite") & mask;
        class[s as usize] += mu[i as usize] as i64;
    }
    let roots: Vec<Complex64> = (0..g)
        .map(|t| unit_phase(grid_theta(t, g)))
        .collect();
    let nonzero: Vec<(u64, f64)> = class
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(s, &c)| (s as u64, c as f64))
        .collect();
    let scale = 1.0 / n as f64;
    (0..g)
        .into_par_iter()
        .map(|j| {
            let mut acc_re = 0.0;
            let mut acc_im = 0.0;
            for &(s, coef) in &nonzero {
                let root = roots[((s * j) & mask) as usize];
                acc_re += coef * root.re;
                acc_im += coef * root.im;
            }
            Complex64::new(acc_re, acc_im).norm() * scale
        })
        .collect()
}

// Golden-section maximization of E on [center - step, center + step], raw
// units. E is 1-periodic, so raw offsets may leave [0, 2^64) freely; the
// truncation back to u64 is exactly the reduction mod 1. The incoming best
// (the grid winner) stays in play: refinement can only raise the reported
// value, and every probe is a true evaluation.
fn refine_golden(
    table: &MoebiusTable,
    p: &IntPolynomial,
    n: u64,
    center: u64,
    step: u64,
    iters: u32,
    mut best: (f64, u64),
) -> (f64, u64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let probe = |raw: i128| phase_average(table, p, n, Frac64::new(raw as u64)).norm();
    let consider = |best: &mut (f64, u64), value: f64, raw: i128| {
        if value > best.0 {
            *best = (value, raw as u64);
        }
    };

    let mut lo = center as i128 - step as i128;
    let mut hi = center as i128 + step as i128;
    let gap = |lo: i128, hi: i128| (((hi - lo) as f64) * INV_PHI) as i128;
    let mut x1 = hi - gap(lo, hi);
    let mut x2 = lo + gap(lo, hi);
    let mut f1 = probe(x1);
    let mut f2 = probe(x2);
    consider(&mut best, f1, x1);
    consider(&mut best, f2, x2);
    for _ in 0..iters {
        if hi - lo <= 4 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gap(lo, hi);
            f2 = probe(x2);
            consider(&mut best, f2, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gap(lo, hi);
            f1 = probe(x1);
            consider(&mut best, f1, x1);
        }
    }
    best
}

/// Least-squares line through `(xs, ys)`: `(slope, intercept, residual rms)`.
///
/// Needs two distinct x values; callers guarantee that.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "line through fewer than 2 points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    assert!(sxx > 0.0, "need two distinct x values");
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Power-law decay fit `sup_N ~ C (log N)^-A` from paired samples.
#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    /// Fitted decay exponent `A` (positive when the sups shrink).
    pub exponent: f64,
    /// `ln C`.
    pub log_c: f64,
    pub rms: f64,
    pub used: usize,
    pub dropped: usize,
}

/// Fit `ln sup = -A ln ln N + ln C` by least squares.
///
/// Sups at or below `1e-15` are noise floor, dropped and counted; at least
/// four usable points must remain.
pub fn decay_fit(ns: &[u64], sups: &[f64]) -> Result<DecayReport, AverageError> {
    if ns.len() != sups.len() {
        return Err(AverageError::LengthMismatch { left: ns.len(), right: sups.len() });
    }
    let mut xs = Vec::with_capacity(ns.len());
    let mut ys = Vec::with_capacity(ns.len());
    let mut dropped = 0usize;
    for (&n, &s) in ns.iter().zip(sups) {
        if n < 3 {
            return Err(AverageError::BadSampleSize { n });
        }
        if !(s > NEGLIGIBLE_SUP) {
            dropped += 1;
            continue;
        }
        xs.push((n as f64).ln().ln());
        ys.push(s.ln());
    }
    if xs.len() < 4 {
        return Err(AverageError::DegenerateFit { usable: xs.len() });
    }
    let (slope, intercept, rms) = line_fit(&xs, &ys);
    Ok(DecayReport { exponent: -slope, log_c: intercept, rms, used: xs.len(), dropped })
}

// v(q1 n) * conj(v(q2 n)): the integrand of the two-frequency correlation.
struct ProductValues<'a> {
    inner: &'a dyn OrbitValues,
    q1: u64,
    q2: u64,
}

impl OrbitValues for ProductValues<'_> {
    fn value_at(&self, n: u64) -> Complex64 {
        self.inner.value_at(self.q1 * n) * self.inner.value_at(self.q2 * n).conj()
    }

    fn label(&self) -> String {
        format!("correlation q1={} q2={} of [{}]", self.q1, self.q2, self.inner.label())
    }
}

/// Trial-division primality, enough for the small moduli correlations use.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q % 2 == 0 {
        return q == 2;
    }
    let mut d = 3;
    while d <= q / d {
        if q % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Two-frequency correlation `(1/N) sum_{n<=N} v(q1 n) conj(v(q2 n))` at
/// distinct primes `q1`, `q2`, in the fixed summation shape.
pub fn kbsz_correlation(
    values: &dyn OrbitValues,
    q1: u64,
    q2: u64,
    n: u64,
) -> Result<Complex64, AverageError> {
    if n == 0 {
        return Err(AverageError::ZeroSampleCount);
    }
    for q in [q1, q2] {
        if n > u64::MAX / q.max(1) {
            return Err(AverageError::IndexOverflow { q, n });
        }
        if !is_prime(q) {
            return Err(AverageError::NotPrime { q });
        }
    }
    if q1 == q2 {
        return Err(AverageError::EqualFrequencies { q: q1 });
    }
    let product = ProductValues { inner: values, q1, q2 };
    Ok(weighted_average(&product, Weight::Unit, &[n])?.final_average())
}

/// Star discrepancy of a finite point set on the circle, exactly.
///
/// With the points sorted, the sup runs over `i/N - x_(i)` and
/// `x_(i) - (i-1)/N`. Both numerators are exact in 128-bit integers (the
/// points ARE integers over `2^64`), the max is taken exactly, and only one
/// final division rounds. Points on a centered grid therefore come out at
/// `1/(2N)` to the last bit.
pub fn star_discrepancy(points: &[Frac64]) -> Result<f64, AverageError> {
    if points.is_empty() {
        return Err(AverageError::EmptyPointSet);
    }
    if points.len() as u64 > MAX_DISCREPANCY_POINTS {
        return Err(AverageError::TooManyPoints { n: points.len() as u64 });
    }
    let mut raws: Vec<u64> = points.iter().map(|p| p.raw()).collect();
    raws.sort_unstable();
    let n = raws.len() as i128;
    let one = 1i128 << 64;
    let mut max_num = i128::MIN;
    for (i0, &r) in raws.iter().enumerate() {
        let i = i0 as i128 + 1;
        let scaled = n * r as i128;
        max_num = max_num.max(i * one - scaled).max(scaled - (i - 1) * one);
    }
    Ok(max_num as f64 / (points.len() as f64 * one as f64))
}
