//! Integer polynomials and the three evaluation routes used downstream.
//!
//! * [`IntPolynomial::eval_exact`]: checked 128-bit Horner; any overflow is an
//!   error, never a silent wrap.
//! * [`IntPolynomial::eval_wrapped`]: two's-complement Horner in `u64`. The
//!   result is exactly `p(n) mod 2^64`, and this residue is the only thing the
//!   dynamical systems consume.
//! * [`PolyStream`]: forward-difference stepping. After priming, each
//!   successive `p(n) mod 2^64` costs `deg p` wrapping additions, no
//!   multiplications.
//!
//! Coefficients are stored low to high, matching the CLI syntax `c0,c1,...`
//! (so `0,0,1` is `n^2`).

use std::fmt;
use std::str::FromStr;

/// Above this, [`IntPolynomial::range_bounds`] switches from a direct integer
/// scan to sign checks at integer brackets of the derivative's real roots.
const DIRECT_SCAN_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    /// 128-bit evaluation overflowed at this argument.
    Overflow { n: u64 },
    /// Malformed coefficient list.
    BadSpec(String),
    /// Range operations need `n_limit >= 1`.
    EmptyRange,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::Overflow { n } => write!(f, "128-bit overflow evaluating at n = {n}"),
            PolyError::BadSpec(s) => write!(f, "bad polynomial spec: {s}"),
            PolyError::EmptyRange => write!(f, "polynomial range bound needs n_limit >= 1"),
        }
    }
}

impl std::error::Error for PolyError {}

/// Polynomial with `i64` coefficients, low to high. Trailing zero
/// coefficients are trimmed; the zero polynomial keeps a single `0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        IntPolynomial { coeffs }
    }

    /// `c0 + c1 n + ... + ck n^k` from `[c0, c1, ..., ck]`.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Degree after trimming; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `p(n)` in checked 128-bit arithmetic.
    pub fn eval_exact(&self, n: u64) -> Result<i128, PolyError> {
        let x = n as i128;
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc
                .checked_mul(x)
                .and_then(|v| v.checked_add(c as i128))
                .ok_or(PolyError::Overflow { n })?;
        }
        Ok(acc)
    }

    /// `p(n) mod 2^64`, two's-complement Horner. Agrees with
    /// [`eval_exact`](Self::eval_exact) reduced mod `2^64` whenever the latter
    /// succeeds.
    pub fn eval_wrapped(&self, n: u64) -> u64 {
        let mut acc: u64 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc.wrapping_mul(n).wrapping_add(c as u64);
        }
        acc
    }

    /// Iterator over `p(n_start), p(n_start + 1), ... mod 2^64`.
    pub fn stream(&self, n_start: u64) -> PolyStream {
        self.stream_scaled(n_start, 1)
    }

    /// Iterator over `scale * p(n) mod 2^64` from `n_start`. Scaling the
    /// emitted values and scaling every coefficient agree mod `2^64`.
    pub fn stream_scaled(&self, n_start: u64, scale: u64) -> PolyStream {
        let d = self.degree();
        let mut deltas: Vec<u64> = (0..=d as u64)
            .map(|j| self.eval_wrapped(n_start.wrapping_add(j)).wrapping_mul(scale))
            .collect();
        // deltas[k] becomes the k-th forward difference at n_start.
        for level in 1..=d {
            for j in (level..=d).rev() {
                deltas[j] = deltas[j].wrapping_sub(deltas[j - 1]);
            }
        }
        PolyStream { deltas }
    }

    /// Whether `p(n) >= 0` for every integer `1 <= n <= n_limit`.
    pub fn nonneg_on_range(&self, n_limit: u64) -> Result<bool, PolyError> {
        let (min, _) = self.range_bounds(n_limit)?;
        Ok(min >= 0)
    }

    /// `(min, max)` of `p` over the integers `1..=n_limit`.
    ///
    /// Direct scan up to `10^7`; past that, `p` is monotone between real
    /// critical points, so only the endpoints and the integers bracketing
    /// each sign change of `p'` can be extremal.
    pub fn range_bounds(&self, n_limit: u64) -> Result<(i128, i128), PolyError> {
        if n_limit == 0 {
            return Err(PolyError::EmptyRange);
        }
        if n_limit <= DIRECT_SCAN_LIMIT {
            return self.range_bounds_scan(n_limit);
        }
        self.range_bounds_brackets(n_limit)
    }

    fn range_bounds_scan(&self, n_limit: u64) -> Result<(i128, i128), PolyError> {
        let mut min = i128::MAX;
        let mut max = i128::MIN;
        for n in 1..=n_limit {
            let v = self.eval_exact(n)?;
            min = min.min(v);
            max = max.max(v);
        }
        Ok((min, max))
    }

    fn range_bounds_brackets(&self, n_limit: u64) -> Result<(i128, i128), PolyError> {
        let wide: Vec<i128> = self.coeffs.iter().map(|&c| c as i128).collect();
        let mut candidates = vec![1u64, n_limit];
        if self.degree() >= 2 {
            for m in root_anchors(&derivative(&wide), 1, n_limit)? {
                candidates.push(m);
                candidates.push(m.saturating_add(1).min(n_limit));
            }
        }
        let mut min = i128::MAX;
        let mut max = i128::MIN;
        for &n in &candidates {
            let v = self.eval_exact(n)?;
            min = min.min(v);
            max = max.max(v);
        }
        Ok((min, max))
    }
}

impl FromStr for IntPolynomial {
    type Err = PolyError;

    /// Parses `c0,c1,...` (low to high). Whitespace around commas is fine.
    fn from_str(s: &str) -> Result<Self, PolyError> {
        if s.trim().is_empty() {
            return Err(PolyError::BadSpec("empty coefficient list".into()));
        }
        let coeffs = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<i64>()
                    .map_err(|e| PolyError::BadSpec(format!("coefficient {:?}: {e}", part.trim())))
            })
            .collect::<Result<Vec<i64>, _>>()?;
        Ok(IntPolynomial::new(coeffs))
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 && self.degree() > 0 {
                continue;
            }
            if wrote {
                write!(f, " {} ", if c < 0 { "-" } else { "+" })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            let mag = c.unsigned_abs();
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != 1 {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        write!(f, "n")?;
                    } else {
                        write!(f, "n^{k}")?;
                    }
                }
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Forward-difference stepper emitting `scale * p(n) mod 2^64` for
/// consecutive `n`. Priming costs `deg + 1` full evaluations; each step after
/// that is `deg` wrapping additions.
pub struct PolyStream {
    // deltas[k] = k-th forward difference at the current index.
    deltas: Vec<u64>,
}

impl PolyStream {
    /// Number of per-step additions, equal to the polynomial degree.
    pub fn depth(&self) -> usize {
        self.deltas.len() - 1
    }
}

impl Iterator for PolyStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let out = self.deltas[0];
        for k in 0..self.deltas.len() - 1 {
            self.deltas[k] = self.deltas[k].wrapping_add(self.deltas[k + 1]);
        }
        Some(out)
    }
}

fn derivative(coeffs: &[i128]) -> Vec<i128> {
    if coeffs.len() <= 1 {
        return vec![0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as i128)
        .collect()
}

fn eval_checked(coeffs: &[i128], n: u64) -> Result<i128, PolyError> {
    let x = n as i128;
    let mut acc: i128 = 0;
    for &c in coeffs.iter().rev() {
        acc = acc
            .checked_mul(x)
            .and_then(|v| v.checked_add(c))
            .ok_or(PolyError::Overflow { n })?;
    }
    Ok(acc)
}

fn sign(v: i128) -> i8 {
    match v {
        0 => 0,
        v if v > 0 => 1,
        _ => -1,
    }
}

// Integers m in [lo, hi) such that q has a real root in [m, m+1], found by
// sign changes. Between consecutive real roots of q' the polynomial is
// monotone, so each such stretch holds at most one sign change and a binary
// search finds it; unit stretches around the recursive anchors are checked
// directly. Roots where q touches zero without changing sign are not
// reported; they do not move extrema of the antiderivative.
fn root_anchors(q: &[i128], lo: u64, hi: u64) -> Result<Vec<u64>, PolyError> {
    let deg = q.len() - 1;
    if deg == 0 || lo >= hi {
        return Ok(Vec::new());
    }
    let mut marks = vec![lo, hi];
    if deg >= 2 {
        for m in root_anchors(&derivative(q), lo, hi)? {
            marks.push(m);
            marks.push(m.saturating_add(1).min(hi));
        }
    }
    marks.sort_unstable();
    marks.dedup();

    let mut anchors = Vec::new();
    for w in marks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let mut sa = sign(eval_checked(q, a)?);
        let sb = sign(eval_checked(q, b)?);
        if sa == 0 {
            anchors.push(a);
            continue;
        }
        if sb == 0 || sa == sb {
            // a zero right endpoint belongs to the next stretch
            continue;
        }
        if b == a + 1 {
            anchors.push(a);
            continue;
        }
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            let sm = sign(eval_checked(q, mid)?);
            if sm == sa || sm == 0 {
                a = mid;
                if sm == 0 {
                    sa = 0;
                }
            } else {
                b = mid;
            }
        }
        anchors.push(a);
    }
    anchors.dedup();
    Ok(anchors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[i64]) -> IntPolynomial {
        IntPolynomial::new(coeffs.to_vec())
    }

    #[test]
    fn exact_evaluation_of_a_cubic() {
        // 2n^3 + n + 5 at n = 10
        let p = poly(&[5, 1, 0, 2]);
        assert_eq!(p.eval_exact(10).unwrap(), 2015);
        assert_eq!(p.eval_exact(0).unwrap(), 5);
    }

    #[test]
    fn exact_overflow_is_reported() {
        let p = poly(&[0, 0, 0, 0, 0, 1]); // n^5
        assert!(p.eval_exact(u64::MAX).is_err(), "n^5 at 2^64-1 cannot fit i128");
        assert!(p.eval_exact(1 << 25).is_ok());
    }

    #[test]
    fn wrapped_matches_exact_mod_2_64() {
        let samples = [
            poly(&[5, 1, 0, 2]),
            poly(&[-7, 3, -2, 0, 1]),
            poly(&[0, 0, 1]),
            poly(&[-1]),
        ];
        for p in &samples {
            for n in [0u64, 1, 2, 17, 1000, 123_456_789] {
                let exact = p.eval_exact(n).unwrap();
                assert_eq!(
                    p.eval_wrapped(n),
                    exact as u64,
                    "p = {p}, n = {n}: wrapped disagrees with truncated exact value"
                );
            }
        }
    }

    #[test]
    fn stream_reproduces_pointwise_evaluation() {
        let p = poly(&[-3, 7, 0, 5]);
        let mut s = p.stream(11);
        for n in 11..11_000u64 {
            assert_eq!(s.next().unwrap(), p.eval_wrapped(n), "stream at n = {n}");
        }
    }

    #[test]
    fn stream_survives_wraparound_of_the_index() {
        let p = poly(&[1, 2, 3]);
        let start = u64::MAX - 5;
        let mut s = p.stream(start);
        for k in 0..12u64 {
            let n = start.wrapping_add(k);
            assert_eq!(s.next().unwrap(), p.eval_wrapped(n), "stream at wrapped n");
        }
    }

    #[test]
    fn scaled_stream_scales_every_emitted_value() {
        let p = poly(&[4, -1, 9]);
        let t = 0x9e37_79b9_7f4a_7c15u64;
        let mut s = p.stream_scaled(3, t);
        for n in 3..300u64 {
            assert_eq!(s.next().unwrap(), p.eval_wrapped(n).wrapping_mul(t));
        }
    }

    #[test]
    fn stream_depth_equals_degree() {
        assert_eq!(poly(&[42]).stream(0).depth(), 0, "constants need no additions");
        assert_eq!(poly(&[0, 1]).stream(0).depth(), 1);
        assert_eq!(poly(&[0, 0, 0, 1]).stream(0).depth(), 3);
    }

    #[test]
    fn parse_low_to_high_syntax() {
        let p: IntPolynomial = "0,0,1".parse().unwrap();
        assert_eq!(p, poly(&[0, 0, 1]));
        assert_eq!(p.to_string(), "n^2");
        let p: IntPolynomial = " 5 , 1 ,0, 2 ".parse().unwrap();
        assert_eq!(p.to_string(), "2*n^3 + n + 5");
        let p: IntPolynomial = "-1,0,3".parse().unwrap();
        assert_eq!(p.to_string(), "3*n^2 - 1");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<IntPolynomial>().is_err());
        assert!("1,,2".parse::<IntPolynomial>().is_err());
        assert!("1,x".parse::<IntPolynomial>().is_err());
        assert!("99999999999999999999".parse::<IntPolynomial>().is_err());
    }

    #[test]
    fn trailing_zero_coefficients_are_trimmed() {
        assert_eq!(poly(&[1, 2, 0, 0]).degree(), 1);
        assert_eq!(poly(&[0, 0]).degree(), 0);
        assert_eq!(poly(&[]).eval_exact(9).unwrap(), 0);
    }

    #[test]
    fn nonnegativity_by_direct_scan() {
        assert!(poly(&[0, 0, 1]).nonneg_on_range(100_000).unwrap());
        // n^2 - 100n + 50 dips negative near n = 50
        assert!(!poly(&[50, -100, 1]).nonneg_on_range(1000).unwrap());
        assert!(!poly(&[-1]).nonneg_on_range(5).unwrap());
        assert!(poly(&[0, 1]).nonneg_on_range(1).unwrap());
    }

    #[test]
    fn nonnegativity_by_critical_brackets_past_the_scan_limit() {
        let n = 20_000_000u64;
        // (n - 15*10^6)^2 - 1 is negative only at the vertex
        let dip = poly(&[225_000_000_000_000 - 1, -30_000_000, 1]);
        assert!(!dip.nonneg_on_range(n).unwrap());
        let lifted = poly(&[225_000_000_000_000 + 1, -30_000_000, 1]);
        assert!(lifted.nonneg_on_range(n).unwrap());
        // decreasing line goes negative long before the right endpoint
        assert!(!poly(&[1_000_000, -1]).nonneg_on_range(n).unwrap());
    }

    #[test]
    fn bracket_bounds_agree_with_scans() {
        let cases = [
            poly(&[50, -100, 1]),
            poly(&[0, 3, -1, 2]),
            poly(&[7]),
            poly(&[-20, 1, 0, 0, 1]),
            poly(&[1000, -70, -3, 1]),
        ];
        for p in &cases {
            for n in [1u64, 2, 37, 1000, 4321] {
                let scan = p.range_bounds_scan(n).unwrap();
                let bracket = p.range_bounds_brackets(n).unwrap();
                assert_eq!(scan, bracket, "bounds mismatch for p = {p}, n = {n}");
            }
        }
    }

    #[test]
    fn range_bounds_of_a_quadratic() {
        let p = poly(&[50, -100, 1]);
        // vertex at n = 50: p(50) = 50 - 5000 + 2500
        let (min, max) = p.range_bounds(1000).unwrap();
        assert_eq!(min, -2450);
        assert_eq!(max, p.eval_exact(1000).unwrap());
    }

    #[test]
    fn empty_range_is_an_error() {
        assert_eq!(poly(&[1]).range_bounds(0), Err(PolyError::EmptyRange));
    }
}
