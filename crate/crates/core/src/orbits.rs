//! Value sources for orbit averages.
//!
//! An [`OrbitValues`] source maps the time index `n` to the complex value of
//! an observable at the `n`-th orbit point. Sources whose index polynomial
//! could leave their domain validate the whole range `1..=n_max` up front
//! (via exact polynomial range bounds), so evaluation inside that range never
//! fails and the averaging loops stay branch-free.

use std::sync::Arc;

use num_complex::Complex64;

use crate::moebius::MoebiusTable;
use crate::polyeval::{IntPolynomial, PolyError};
use crate::subshift::{counterexample_value, isqrt_u128, SymbolSequence};
use crate::torus::{
    character, heis_observable, heis_orbit_point, Frac64, HeisObservable, HeisenbergPoint,
    RotationSystem,
};

use std::fmt;

#[derive(Debug)]
pub enum OrbitError {
    /// Range validation needs exact values of `p`.
    Eval(PolyError),
    /// `p` dips below zero somewhere in `1..=n_max`.
    NegativeIndex { min: i128 },
    /// An exponent `p(n)` does not fit the closed-form power.
    ExponentRange { max: i128 },
    /// `mu` is needed at `isqrt(p(n))` beyond the table.
    TableTooSmall { needed: u64, limit: u64 },
    /// `p(n)` points past the materialized sequence.
    PastSequenceEnd { max: i128, len: u64 },
}

impl fmt::Display for OrbitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitError::Eval(e) => write!(f, "index polynomial: {e}"),
            OrbitError::NegativeIndex { min } => {
                write!(f, "index polynomial reaches {min} < 0 on the requested range")
            }
            OrbitError::ExponentRange { max } => {
                write!(f, "exponent reaches {max}, beyond 2^64 - 1")
            }
            OrbitError::TableTooSmall { needed, limit } => {
                write!(f, "need mu up to {needed}, table stops at {limit}")
            }
            OrbitError::PastSequenceEnd { max, len } => {
                write!(f, "index reaches {max}, sequence has length {len}")
            }
        }
    }
}

impl std::error::Error for OrbitError {}

impl From<PolyError> for OrbitError {
    fn from(e: PolyError) -> Self {
        OrbitError::Eval(e)
    }
}

/// Complex observable values along one orbit.
///
/// `value_at(n)` must be called only for `1 <= n <= n_max` of the range the
/// source was constructed for; inside it, evaluation cannot fail. Sources
/// built on wrapped arithmetic (rotations) are total and accept any `n`.
pub trait OrbitValues: Send + Sync {
    fn value_at(&self, n: u64) -> Complex64;

    /// Fill `out` with the values at `start, start + 1, ...`. Sources with a
    /// streamed fast path override this; the result must be bit-identical to
    /// calling [`value_at`](Self::value_at) pointwise.
    fn fill_block(&self, start: u64, out: &mut [Complex64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.value_at(start + i as u64);
        }
    }

    /// Human-readable source description for report headers.
    fn label(&self) -> String;
}

/// `e(k x_n)` along the rotation orbit `x_n = x0 + p(n) alpha`.
///
/// Positions are exact grid points, so this source is total: the wrapped
/// residue of `p(n)` already determines the orbit point.
pub struct RotationOrbit {
    system: RotationSystem,
    x0: Frac64,
    p: IntPolynomial,
    k: i64,
}

impl RotationOrbit {
    pub fn new(system: RotationSystem, x0: Frac64, p: IntPolynomial, k: i64) -> Self {
        RotationOrbit { system, x0, p, k }
    }
}

impl OrbitValues for RotationOrbit {
    fn value_at(&self, n: u64) -> Complex64 {
        character(self.k, self.system.orbit_point(self.x0, &self.p, n))
    }

    fn fill_block(&self, start: u64, out: &mut [Complex64]) {
        // stream yields alpha * p(n) on the grid, the same bits as
        // orbit_point computes one n at a time
        let mut steps = self.p.stream_scaled(start, self.system.alpha.raw());
        for slot in out.iter_mut() {
            let pos = self.x0 + Frac64::new(steps.next().expect("stream is infinite"));
            *slot = character(self.k, pos);
        }
    }

    fn label(&self) -> String {
        format!("rotation {} x0={} p=({}) k={}", self.system.label, self.x0, self.p, self.k)
    }
}

/// Observable along the Heisenberg orbit `a^{p(n)} g0`.
///
/// The closed-form power is exact only for true integer exponents, so the
/// constructor checks that `p` stays within `0..2^64` on `1..=n_max`.
pub struct HeisenbergOrbit {
    a: HeisenbergPoint,
    g0: HeisenbergPoint,
    p: IntPolynomial,
    observable: HeisObservable,
}

impl HeisenbergOrbit {
    pub fn new(
        a: HeisenbergPoint,
        g0: HeisenbergPoint,
        p: IntPolynomial,
        observable: HeisObservable,
        n_max: u64,
    ) -> Result<Self, OrbitError> {
        let (min, max) = p.range_bounds(n_max)?;
        if min < 0 {
            return Err(OrbitError::NegativeIndex { min });
        }
        if max > u64::MAX as i128 {
            return Err(OrbitError::ExponentRange { max });
        }
        Ok(HeisenbergOrbit { a, g0, p, observable })
    }
}

impl OrbitValues for HeisenbergOrbit {
    fn value_at(&self, n: u64) -> Complex64 {
        heis_observable(self.observable, &heis_orbit_point(&self.a, &self.g0, &self.p, n))
    }

    fn label(&self) -> String {
        format!(
            "heisenberg a=({},{},{}) g0=({},{},{}) p=({}) obs={}",
            self.a.x,
            self.a.y,
            self.a.z,
            self.g0.x,
            self.g0.y,
            self.g0.z,
            self.p,
            self.observable
        )
    }
}

/// Coordinate observable of the Mobius-at-squares sequence along `n -> p(n)`,
/// evaluated without materializing the sequence.
///
/// Along `p(n) = n^2` this returns `mu(n)` itself. The constructor checks
/// that `p` stays nonnegative and that `isqrt(max p)` fits the table, so the
/// virtual lookup in `value_at` cannot fail.
pub struct CounterexampleOrbit {
    table: Arc<MoebiusTable>,
    p: IntPolynomial,
}

impl CounterexampleOrbit {
    pub fn new(
        table: Arc<MoebiusTable>,
        p: IntPolynomial,
        n_max: u64,
    ) -> Result<Self, OrbitError> {
        let (min, max) = p.range_bounds(n_max)?;
        if min < 0 {
            return Err(OrbitError::NegativeIndex { min });
        }
        let needed = isqrt_u128(max as u128) as u64;
        if needed > table.limit() {
            return Err(OrbitError::TableTooSmall { needed, limit: table.limit() });
        }
        Ok(CounterexampleOrbit { table, p })
    }
}

impl OrbitValues for CounterexampleOrbit {
    fn value_at(&self, n: u64) -> Complex64 {
        let index = self.p.eval_exact(n).expect("range checked at construction");
        let symbol = counterexample_value(&self.table, index as u128)
            .expect("table size checked at construction");
        Complex64::new(symbol as f64, 0.0)
    }

    fn label(&self) -> String {
        format!("subshift counterexample p=({}) coord0", self.p)
    }
}

/// Coordinate observable of a materialized sequence along `n -> p(n)`.
pub struct MaterializedShiftOrbit {
    seq: Arc<SymbolSequence>,
    p: IntPolynomial,
}

impl MaterializedShiftOrbit {
    pub fn new(
        seq: Arc<SymbolSequence>,
        p: IntPolynomial,
        n_max: u64,
    ) -> Result<Self, OrbitError> {
        let (min, max) = p.range_bounds(n_max)?;
        if min < 0 {
            return Err(OrbitError::NegativeIndex { min });
        }
        if max >= seq.len() as i128 {
            return Err(OrbitError::PastSequenceEnd { max, len: seq.len() as u64 });
        }
        Ok(MaterializedShiftOrbit { seq, p })
    }
}

impl OrbitValues for MaterializedShiftOrbit {
    fn value_at(&self, n: u64) -> Complex64 {
        let index = self.p.eval_exact(n).expect("range checked at construction");
        Complex64::new(self.seq.symbols()[index as usize] as f64, 0.0)
    }

    fn label(&self) -> String {
        format!("subshift materialized len={} p=({}) coord0", self.seq.len(), self.p)
    }
}

/// The constant value 1: a rotation character with frequency 0.
///
/// `e(0) = 1` exactly, so unit-weight averages of this source are exactly 1.
pub fn constant_one() -> RotationOrbit {
    RotationOrbit::new(RotationSystem::golden(), Frac64::ZERO, IntPolynomial::new(vec![0, 1]), 0)
}
