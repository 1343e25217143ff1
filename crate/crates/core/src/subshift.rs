//! Symbolic sequences over a small alphabet, and the Mobius-at-squares
//! sequence in particular.
//!
//! [`counterexample_sequence`] materializes `a` with `a_{k^2} = mu(k)` for
//! `k >= 1` and `a_n = 0` everywhere else (`a_0 = 0` by convention). Its
//! coordinate observable sampled along `n -> n^2` returns `mu(n)` itself, so
//! the Mobius-weighted average of that orbit converges to the squarefree
//! density `6 / pi^2` instead of zero, while the sequence stays combinatorially
//! tame: the number of distinct length-L words grows only polynomially.
//!
//! Points of the ambient shift space are compared in the metric
//! `d(x, y) = 2^-min{ i : x_i != y_i }`; two points are `2^-k`-close exactly
//! when their first `k` symbols agree, which is why word counts double as
//! covering numbers.
//!
//! [`distinct_factors`](SymbolSequence::distinct_factors) counts distinct
//! windows exactly: a wrapping rolling hash buckets the windows, every bucket
//! member is compared bytewise against its bucket representatives, and the
//! all-zero window (the overwhelmingly common one here) is detected in O(1)
//! from a next-nonzero table and never hashed. Hash collisions can therefore
//! cost time but never a wrong count.

use std::fmt;
use std::io::{self, Write};

use crate::moebius::{MoebiusError, MoebiusTable};
use crate::polyeval::{IntPolynomial, PolyError};

/// Symbols this crate's sequences use.
pub const DEFAULT_ALPHABET: [i8; 3] = [-1, 0, 1];

/// Sequences are index-addressed with 32-bit offsets internally.
pub const MAX_SEQUENCE_LEN: u64 = 1 << 31;

#[derive(Debug)]
pub enum SubshiftError {
    /// Sequence length outside `1..=MAX_SEQUENCE_LEN`.
    LengthOutOfRange { requested: u64 },
    /// The Mobius table does not reach `isqrt` of the largest index needed.
    TableTooSmall { needed: u64, limit: u64 },
    /// Orbit index `p(n)` landed outside the materialized sequence.
    IndexOutOfRange { index: i128, len: u64 },
    /// Exact polynomial evaluation failed.
    Eval(PolyError),
    Table(MoebiusError),
    /// Symbol outside the declared alphabet.
    BadSymbol { value: i8 },
    /// Word length outside `1..=len`.
    BadWordLength { l: u64, len: u64 },
    /// Word statistics past `len / 2` say more about truncation than about
    /// the sequence.
    TruncationRisk { l: u64, len: u64 },
    /// Growth fits need at least three word lengths.
    DegenerateFit { points: usize },
}

impl fmt::Display for SubshiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubshiftError::LengthOutOfRange { requested } => {
                write!(f, "sequence length {requested} outside 1..={MAX_SEQUENCE_LEN}")
            }
            SubshiftError::TableTooSmall { needed, limit } => {
                write!(f, "need mu up to {needed}, table stops at {limit}")
            }
            SubshiftError::IndexOutOfRange { index, len } => {
                write!(f, "orbit index {index} outside sequence of length {len}")
            }
            SubshiftError::Eval(e) => write!(f, "index polynomial: {e}"),
            SubshiftError::Table(e) => write!(f, "mobius table: {e}"),
            SubshiftError::BadSymbol { value } => write!(f, "symbol {value} not in alphabet"),
            SubshiftError::BadWordLength { l, len } => {
                write!(f, "word length {l} outside 1..={len}")
            }
            SubshiftError::TruncationRisk { l, len } => {
                write!(f, "word length {l} exceeds half the sequence length {len}")
            }
            SubshiftError::DegenerateFit { points } => {
                write!(f, "growth fit needs >= 3 word lengths, got {points}")
            }
        }
    }
}

impl std::error::Error for SubshiftError {}

impl From<PolyError> for SubshiftError {
    fn from(e: PolyError) -> Self {
        SubshiftError::Eval(e)
    }
}

impl From<MoebiusError> for SubshiftError {
    fn from(e: MoebiusError) -> Self {
        SubshiftError::Table(e)
    }
}

/// Finite word over a small signed alphabet.
pub struct SymbolSequence {
    data: Vec<i8>,
    alphabet: Vec<i8>,
}

impl SymbolSequence {
    /// Wrap raw symbols; every symbol must belong to `alphabet`.
    pub fn new(data: Vec<i8>, alphabet: &[i8]) -> Result<Self, SubshiftError> {
        if data.is_empty() || data.len() as u64 > MAX_SEQUENCE_LEN {
            return Err(SubshiftError::LengthOutOfRange { requested: data.len() as u64 });
        }
        let mut alphabet = alphabet.to_vec();
        alphabet.sort_unstable();
        alphabet.dedup();
        if let Some(&bad) = data.iter().find(|s| !alphabet.contains(s)) {
            return Err(SubshiftError::BadSymbol { value: bad });
        }
        Ok(SymbolSequence { data, alphabet })
    }

    /// Wrap symbols over the default alphabet `{-1, 0, +1}`.
    pub fn from_symbols(data: Vec<i8>) -> Result<Self, SubshiftError> {
        Self::new(data, &DEFAULT_ALPHABET)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn symbols(&self) -> &[i8] {
        &self.data
    }

    pub fn alphabet(&self) -> &[i8] {
        &self.alphabet
    }

    /// Value of the coordinate observable along the orbit `n -> p(n)`:
    /// `a_{p(n)}`, with the index computed exactly.
    pub fn shift_orbit_value(&self, p: &IntPolynomial, n: u64) -> Result<i8, SubshiftError> {
        let index = p.eval_exact(n)?;
        if index < 0 || index >= self.data.len() as i128 {
            return Err(SubshiftError::IndexOutOfRange { index, len: self.data.len() as u64 });
        }
        Ok(self.data[index as usize])
    }

    /// Start of the first run of `runlen` consecutive zeros, if any.
    pub fn first_zero_run(&self, runlen: usize) -> Option<usize> {
        assert!(runlen >= 1, "zero runs have positive length");
        let mut run = 0usize;
        for (i, &s) in self.data.iter().enumerate() {
            if s == 0 {
                run += 1;
                if run == runlen {
                    return Some(i + 1 - runlen);
                }
            } else {
                run = 0;
            }
        }
        None
    }

    /// Number of distinct length-`l` windows, exactly.
    pub fn distinct_factors(&self, l: usize) -> Result<usize, SubshiftError> {
        if l < 1 || l > self.data.len() {
            return Err(SubshiftError::BadWordLength {
                l: l as u64,
                len: self.data.len() as u64,
            });
        }
        let data = &self.data;
        let windows = data.len() - l + 1;

        // next_nonzero[i] = least j >= i with data[j] != 0, or len
        let mut next_nonzero = vec![0u32; data.len() + 1];
        next_nonzero[data.len()] = data.len() as u32;
        for i in (0..data.len()).rev() {
            next_nonzero[i] = if data[i] != 0 { i as u32 } else { next_nonzero[i + 1] };
        }

        const BASE: u64 = 0x100_0000_01b3; // odd, mixes the top bits quickly
        let mut top_power: u64 = 1;
        for _ in 1..l {
            top_power = top_power.wrapping_mul(BASE);
        }

        let mut buckets: std::collections::HashMap<u64, Vec<u32>> =
            std::collections::HashMap::new();
        let mut saw_zero_window = false;
        let mut distinct = 0usize;

        let mut hash: u64 = 0;
        for &s in &data[..l] {
            hash = hash.wrapping_mul(BASE).wrapping_add(s as u64);
        }
        for i in 0..windows {
            if next_nonzero[i] as usize >= i + l {
                saw_zero_window = true;
            } else {
                let reps = buckets.entry(hash).or_default();
                let window = &data[i..i + l];
                if !reps.iter().any(|&r| &data[r as usize..r as usize + l] == window) {
                    reps.push(i as u32);
                    distinct += 1;
                }
            }
            if i + l < data.len() {
                hash = hash
                    .wrapping_sub((data[i] as u64).wrapping_mul(top_power))
                    .wrapping_mul(BASE)
                    .wrapping_add(data[i + l] as u64);
            }
        }
        Ok(distinct + saw_zero_window as usize)
    }

    /// Word counts for each length plus a log-log growth fit.
    ///
    /// Lengths are deduplicated and sorted; each must stay below half the
    /// sequence length, and at least three are needed for the fit.
    pub fn entropy_growth_report(&self, lengths: &[usize]) -> Result<EntropyReport, SubshiftError> {
        let mut ls: Vec<usize> = lengths.to_vec();
        ls.sort_unstable();
        ls.dedup();
        if ls.len() < 3 {
            return Err(SubshiftError::DegenerateFit { points: ls.len() });
        }
        for &l in &ls {
            if l < 1 {
                return Err(SubshiftError::BadWordLength { l: 0, len: self.data.len() as u64 });
            }
            if l > self.data.len() / 2 {
                return Err(SubshiftError::TruncationRisk {
                    l: l as u64,
                    len: self.data.len() as u64,
                });
            }
        }

        use rayon::prelude::*;
        let counts: Result<Vec<usize>, SubshiftError> =
            ls.par_iter().map(|&l| self.distinct_factors(l)).collect();
        let counts = counts?;

        let xs: Vec<f64> = ls.iter().map(|&l| (l as f64).ln()).collect();
        let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
        let (slope, intercept, rms) = crate::averages::line_fit(&xs, &ys);
        Ok(EntropyReport {
            rows: ls.into_iter().zip(counts).collect(),
            slope,
            intercept,
            rms,
        })
    }

    /// Write one byte per symbol: `-`, `0`, `+`. Only defined over the
    /// default alphabet.
    pub fn write_plain<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut buf = Vec::with_capacity(self.data.len());
        for &s in &self.data {
            buf.push(match s {
                -1 => b'-',
                0 => b'0',
                1 => b'+',
                other => {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("symbol {other} has no plain-text form"),
                    ))
                }
            });
        }
        w.write_all(&buf)
    }
}

/// Word counts `(L, count)` with the least-squares slope of
/// `ln count` against `ln L`.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub rows: Vec<(usize, usize)>,
    /// Fitted growth exponent: `count ~ C * L^slope`.
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

/// The sequence `a_n = mu(k)` if `n = k^2` (k >= 1), else 0, for `n < m`.
///
/// Needs `mu` up to `isqrt(m - 1)`.
pub fn counterexample_sequence(
    m: u64,
    table: &MoebiusTable,
) -> Result<SymbolSequence, SubshiftError> {
    if m == 0 || m > MAX_SEQUENCE_LEN {
        return Err(SubshiftError::LengthOutOfRange { requested: m });
    }
    let needed = isqrt_u128(m.saturating_sub(1) as u128) as u64;
    if needed > table.limit() {
        return Err(SubshiftError::TableTooSmall { needed, limit: table.limit() });
    }
    let mut data = vec![0i8; m as usize];
    let mut k = 1u64;
    while k * k < m {
        data[(k * k) as usize] = table.value(k)?;
        k += 1;
    }
    SymbolSequence::new(data, &DEFAULT_ALPHABET)
}

/// `a_index` of the Mobius-at-squares sequence without materializing it:
/// `mu(isqrt(index))` when the index is a perfect square, else 0.
///
/// This is how orbits like `n -> a_{n^2}` are evaluated at indices far past
/// any table: only `isqrt(index)` must stay within the Mobius table.
pub fn counterexample_value(table: &MoebiusTable, index: u128) -> Result<i8, SubshiftError> {
    if index == 0 {
        return Ok(0);
    }
    let k = isqrt_u128(index);
    if k * k != index {
        return Ok(0);
    }
    if k > table.limit() as u128 {
        return Err(SubshiftError::TableTooSmall { needed: k as u64, limit: table.limit() });
    }
    Ok(table.value(k as u64)?)
}

/// Integer square root, rounded down.
pub fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    // float estimate is within a few units; fix it up exactly
    while x.checked_mul(x).map_or(true, |v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |v| v <= n) {
        x += 1;
    }
    x
}
