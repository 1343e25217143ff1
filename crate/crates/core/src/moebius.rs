//! Mobius function tables over a contiguous range.
//!
//! [`MoebiusTable::build`] fills `mu(1..=N)` with a linear sieve: every
//! composite is crossed off exactly once, through its smallest prime factor,
//! so construction is O(N). Mertens prefix sums `M(n) = mu(1) + ... + mu(n)`
//! ride along in the same pass.
//!
//! Memory: 1 byte per entry for the values, 8 bytes per entry for the prefix
//! sums, plus a transient 4-byte smallest-prime-factor entry and the prime
//! list during construction. Budget roughly 14 bytes per entry peak;
//! [`MoebiusTable::build_with_budget`] refuses requests that exceed a caller
//! limit instead of letting the allocator abort.
//!
//! Tables can be persisted to a small binary cache (`MOBT` header + raw value
//! bytes); prefix sums are rebuilt on load.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

/// Asymptotic density of squarefree integers, `6 / pi^2`.
pub const SQUAREFREE_DENSITY: f64 = 0.6079271018540267;

/// Hard ceiling on table size; above this the i64 prefix array alone is 16 GiB.
pub const MAX_LIMIT: u64 = 1 << 31;

/// Default construction budget, peak bytes. Covers `N = 5 * 10^8` with slack.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

// Peak per-entry cost during construction: i8 value + i64 prefix + u32 spf,
// rounded up to absorb the prime list.
const PEAK_BYTES_PER_ENTRY: u64 = 14;

const CACHE_MAGIC: &[u8; 4] = b"MOBT";
const CACHE_VERSION: u32 = 1;

#[derive(Debug)]
pub enum MoebiusError {
    /// Requested limit was zero or above [`MAX_LIMIT`].
    LimitOutOfRange { requested: u64 },
    /// Construction would exceed the caller's memory budget.
    BudgetExceeded { requested: u64, budget_bytes: u64 },
    /// Lookup index outside `1..=limit`.
    IndexOutOfRange { n: u64, limit: u64 },
    Io(io::Error),
    /// Cache file failed header or content validation.
    BadCache(String),
}

impl fmt::Display for MoebiusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoebiusError::LimitOutOfRange { requested } => {
                write!(f, "table limit {requested} outside 1..={MAX_LIMIT}")
            }
            MoebiusError::BudgetExceeded { requested, budget_bytes } => write!(
                f,
                "sieve to {requested} needs ~{} bytes, budget is {budget_bytes}",
                requested * PEAK_BYTES_PER_ENTRY
            ),
            MoebiusError::IndexOutOfRange { n, limit } => {
                write!(f, "index {n} outside table range 1..={limit}")
            }
            MoebiusError::Io(e) => write!(f, "cache i/o: {e}"),
            MoebiusError::BadCache(what) => write!(f, "bad cache file: {what}"),
        }
    }
}

impl std::error::Error for MoebiusError {}

impl From<io::Error> for MoebiusError {
    fn from(e: io::Error) -> Self {
        MoebiusError::Io(e)
    }
}

/// `mu(n)` for `1 <= n <= limit`, with Mertens prefix sums.
pub struct MoebiusTable {
    limit: u64,
    /// `values[n] = mu(n)`; entry 0 is padding.
    values: Vec<i8>,
    /// `mertens[n] = M(n)`; entry 0 is 0.
    mertens: Vec<i64>,
}

impl MoebiusTable {
    /// Sieve `mu(1..=n_max)` under [`DEFAULT_MEMORY_BUDGET`].
    pub fn build(n_max: u64) -> Result<Self, MoebiusError> {
        Self::build_with_budget(n_max, DEFAULT_MEMORY_BUDGET)
    }

    /// Sieve `mu(1..=n_max)`, refusing if peak memory would exceed `budget_bytes`.
    pub fn build_with_budget(n_max: u64, budget_bytes: u64) -> Result<Self, MoebiusError> {
        if n_max == 0 || n_max > MAX_LIMIT {
            return Err(MoebiusError::LimitOutOfRange { requested: n_max });
        }
        if n_max.saturating_mul(PEAK_BYTES_PER_ENTRY) > budget_bytes {
            return Err(MoebiusError::BudgetExceeded { requested: n_max, budget_bytes });
        }

        let n = n_max as usize;
        let mut values = vec![0i8; n + 1];
        values[1] = 1;

        // spf[i] = smallest prime factor of composite i, 0 for primes and 0, 1.
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                primes.push(i as u32);
                values[i] = -1;
            }
            for &p in &primes {
                let p = p as usize;
                let ip = match i.checked_mul(p) {
                    Some(ip) if ip <= n => ip,
                    _ => break,
                };
                spf[ip] = p as u32;
                if i % p == 0 {
                    // p^2 divides ip, so ip is not squarefree.
                    values[ip] = 0;
                    break;
                }
                values[ip] = -values[i];
            }
        }
        drop(spf);

        Ok(Self::from_values(n_max, values))
    }

    // Assumes values[1..=limit] already hold mu; rebuilds prefix sums.
    fn from_values(limit: u64, values: Vec<i8>) -> Self {
        let mut mertens = vec![0i64; values.len()];
        let mut acc = 0i64;
        for n in 1..values.len() {
            acc += values[n] as i64;
            mertens[n] = acc;
        }
        MoebiusTable { limit, values, mertens }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `mu(n)`.
    pub fn value(&self, n: u64) -> Result<i8, MoebiusError> {
        self.check(n)?;
        Ok(self.values[n as usize])
    }

    /// The raw value slice; `values()[n]` is `mu(n)`, entry 0 is padding.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Mertens function `M(n)`, an O(1) lookup.
    pub fn mertens(&self, n: u64) -> Result<i64, MoebiusError> {
        self.check(n)?;
        Ok(self.mertens[n as usize])
    }

    /// Fraction of `1..=n` that is squarefree, i.e. `(1/n) * #{k <= n : mu(k) != 0}`.
    ///
    /// Converges to [`SQUAREFREE_DENSITY`]. O(n) scan.
    pub fn squarefree_density(&self, n: u64) -> Result<f64, MoebiusError> {
        self.check(n)?;
        let squarefree = self.values[1..=n as usize].iter().filter(|&&v| v != 0).count();
        Ok(squarefree as f64 / n as f64)
    }

    /// Counts of (mu = -1, mu = 0, mu = +1) over `1..=n`.
    pub fn sign_histogram(&self, n: u64) -> Result<(u64, u64, u64), MoebiusError> {
        self.check(n)?;
        let (mut minus, mut zero, mut plus) = (0u64, 0u64, 0u64);
        for &v in &self.values[1..=n as usize] {
            match v {
                -1 => minus += 1,
                0 => zero += 1,
                _ => plus += 1,
            }
        }
        Ok((minus, zero, plus))
    }

    fn check(&self, n: u64) -> Result<(), MoebiusError> {
        if n == 0 || n > self.limit {
            return Err(MoebiusError::IndexOutOfRange { n, limit: self.limit });
        }
        Ok(())
    }

    /// Write the table to `path`: `MOBT`, version, limit, then raw value bytes.
    pub fn save_cache<P: AsRef<Path>>(&self, path: P) -> Result<(), MoebiusError> {
        let mut f = io::BufWriter::new(fs::File::create(path)?);
        f.write_all(CACHE_MAGIC)?;
        f.write_all(&CACHE_VERSION.to_le_bytes())?;
        f.write_all(&self.limit.to_le_bytes())?;
        // i8 and u8 share a layout; values[1..] skips the padding entry.
        let bytes: &[u8] = unsafe {
            std::slice::from_raw_parts(self.values[1..].as_ptr() as *const u8, self.limit as usize)
        };
        f.write_all(bytes)?;
        f.flush()?;
        Ok(())
    }

    /// Load a table written by [`save_cache`](Self::save_cache).
    ///
    /// Validates the header and that every value is in `{-1, 0, +1}` with
    /// `mu(1) = 1`; Mertens sums are recomputed.
    pub fn load_cache<P: AsRef<Path>>(path: P) -> Result<Self, MoebiusError> {
        let mut f = io::BufReader::new(fs::File::open(path)?);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(MoebiusError::BadCache("wrong magic".into()));
        }
        let mut word = [0u8; 4];
        f.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != CACHE_VERSION {
            return Err(MoebiusError::BadCache(format!("unsupported version {version}")));
        }
        let mut wide = [0u8; 8];
        f.read_exact(&mut wide)?;
        let limit = u64::from_le_bytes(wide);
        if limit == 0 || limit > MAX_LIMIT {
            return Err(MoebiusError::BadCache(format!("limit {limit} out of range")));
        }

        let mut values = vec![0i8; limit as usize + 1];
        {
            let bytes: &mut [u8] = unsafe {
                std::slice::from_raw_parts_mut(
                    values[1..].as_mut_ptr() as *mut u8,
                    limit as usize,
                )
            };
            f.read_exact(bytes)?;
        }
        let mut trailer = [0u8; 1];
        if f.read(&mut trailer)? != 0 {
            return Err(MoebiusError::BadCache("trailing bytes after value array".into()));
        }
        if values[1] != 1 {
            return Err(MoebiusError::BadCache("mu(1) != 1".into()));
        }
        if values[1..].iter().any(|&v| !(-1..=1).contains(&v)) {
            return Err(MoebiusError::BadCache("value outside {-1, 0, 1}".into()));
        }
        Ok(Self::from_values(limit, values))
    }
}

/// `mu(n)` by full trial-division factorization. Reference path for tests;
/// O(sqrt n), do not use in sieving loops.
pub fn mobius_oracle(n: u64) -> i8 {
    assert!(n >= 1, "mobius_oracle needs n >= 1");
    let mut m = n;
    let mut prime_count = 0u32;
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            prime_count += 1;
        }
        d += 1;
    }
    if m > 1 {
        prime_count += 1;
    }
    if prime_count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `sum of mu(d) over d | n`, enumerating divisors by trial division.
///
/// Equals 1 for `n = 1` and 0 otherwise; kept as an independent identity
/// check against sieve output.
pub fn divisor_mu_sum(n: u64) -> i64 {
    assert!(n >= 1 && n <= 1_000_000, "divisor_mu_sum expects 1 <= n <= 10^6");
    let mut sum = 0i64;
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            sum += mobius_oracle(d) as i64;
            let q = n / d;
            if q != d {
                sum += mobius_oracle(q) as i64;
            }
        }
        d += 1;
    }
    sum
}
