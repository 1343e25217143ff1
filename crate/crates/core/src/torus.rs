//! Exact fixed-point dynamics on the circle and on the Heisenberg
//! nilmanifold.
//!
//! # The grid substitute for irrational rotation
//!
//! A circle point is a [`Frac64`]: an unsigned 64-bit raw value `r`
//! representing `r / 2^64` in `[0, 1)`. Addition wraps, which is exactly the
//! group law on `R/Z` restricted to the grid, and scaling by an integer `m`
//! is a wrapping multiply, exactly `m * x mod 1`. Irrational angles are
//! replaced by their nearest grid point (perturbation at most `2^-65`); a
//! rotation by an odd raw value has order `2^64` on the grid, which stands in
//! for minimality at every scale this crate reaches. Because the angle lives
//! on the grid, an orbit position depends on the step count only mod `2^64`,
//! so the wrapped residue `p(n) mod 2^64` drives everything and closed-form
//! powers are bit-identical to iterated rotation.
//!
//! # Heisenberg coordinates and the z error model
//!
//! A point of the Heisenberg group is `(x, y, z)` with multiplication
//! `(x, y, z) * (x', y', z') = (x + x', y + y', z + z' + x y')`. Powers have
//! the closed form `a^m = (m a_x, m a_y, m a_z + C(m,2) a_x a_y)`. Reducing
//! modulo the integer lattice brings all coordinates into `[0, 1)`; the
//! z-coordinate of the canonical representative of `(X, Y, Z)` is
//! `Z - X * floor(Y) mod 1`, and [`HeisenbergPoint::mul`] applies that
//! correction whenever the y-sum wraps, so products always represent the same
//! coset as the real-coordinate group law.
//!
//! `x` and `y` are exact [`Frac64`] values; `z` is an `f64`. In
//! [`HeisenbergPoint::pow`] every fractional part (`m a_z mod 1`,
//! `C(m,2) a_x a_y mod 1` and the lattice correction) is computed in exact
//! integer arithmetic and only converted to `f64` at the end, so a single
//! power carries about `1e-16` of z error. Iterated multiplication
//! accumulates roughly one rounding per step, keeping closed form and
//! iteration within `1e-9` out to `10^6` steps and beyond.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::polyeval::IntPolynomial;

/// Nearest odd grid point to `frac(golden ratio) = (sqrt 5 - 1) / 2`.
///
/// High-precision value 0.61803398874989484820...; the raw value below is
/// `floor(2^64 * frac(phi))`, which is odd, 0.95 grid units under the real
/// angle.
pub const GOLDEN: Frac64 = Frac64::new(0x9e37_79b9_7f4a_7c15);

/// Nearest grid point to `frac(sqrt 2) = 0.41421356237309504880...`, odd.
pub const SQRT2_FRAC: Frac64 = Frac64::new(0x6a09_e667_f3bc_c909);

/// Nearest grid point to `frac(sqrt 3) = 0.73205080756887729352...`, odd.
pub const SQRT3_FRAC: Frac64 = Frac64::new(0xbb67_ae85_84ca_a73b);

const TWO_PI: f64 = std::f64::consts::TAU;
// 2^-64 and 2^-128 as f64 scale factors.
const INV_2_64: f64 = 5.421010862427522e-20;
const INV_2_128: f64 = 2.9387358770557188e-39;

#[derive(Debug, Clone, PartialEq)]
pub enum TorusError {
    /// Circle points come from `[0, 1)`.
    NotAUnitValue(f64),
}

impl fmt::Display for TorusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusError::NotAUnitValue(t) => write!(f, "{t} is not a finite value in [0, 1)"),
        }
    }
}

impl std::error::Error for TorusError {}

/// A circle point `raw / 2^64` in `[0, 1)`. Addition and integer scaling wrap
/// exactly; both are the true group operations restricted to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Frac64 {
    raw: u64,
}

impl Frac64 {
    pub const ZERO: Frac64 = Frac64::new(0);
    /// One half; the only grid point of order 2.
    pub const HALF: Frac64 = Frac64::new(1 << 63);

    pub const fn new(raw: u64) -> Self {
        Frac64 { raw }
    }

    pub const fn raw(self) -> u64 {
        self.raw
    }

    /// Nearest grid point to a real `t` in `[0, 1)`; error at most `2^-65`.
    ///
    /// Every `f64` in `[2^-11, 1)` lies exactly on the grid, so the common
    /// case is lossless.
    pub fn from_real(t: f64) -> Result<Self, TorusError> {
        if !t.is_finite() || !(0.0..1.0).contains(&t) {
            return Err(TorusError::NotAUnitValue(t));
        }
        // rounding may land on 2^64 itself, which is 0 mod 1
        let scaled = (t * 18_446_744_073_709_551_616.0).round();
        Ok(Frac64::new(if scaled >= 18_446_744_073_709_551_616.0 {
            0
        } else {
            scaled as u64
        }))
    }

    /// Real representative in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        self.raw as f64 * INV_2_64
    }

    /// `m * x mod 1`, exact.
    pub fn scale(self, m: u64) -> Self {
        Frac64::new(self.raw.wrapping_mul(m))
    }

    /// `k * x mod 1` for signed `k`; the two's-complement residue of `k`
    /// gives the same grid point, so this is exact as well.
    pub fn scale_signed(self, k: i64) -> Self {
        self.scale(k as u64)
    }
}

impl Add for Frac64 {
    type Output = Frac64;
    fn add(self, rhs: Frac64) -> Frac64 {
        Frac64::new(self.raw.wrapping_add(rhs.raw))
    }
}

impl Sub for Frac64 {
    type Output = Frac64;
    fn sub(self, rhs: Frac64) -> Frac64 {
        Frac64::new(self.raw.wrapping_sub(rhs.raw))
    }
}

impl Neg for Frac64 {
    type Output = Frac64;
    fn neg(self) -> Frac64 {
        Frac64::new(self.raw.wrapping_neg())
    }
}

impl fmt::Display for Frac64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// `e(x) = exp(2 pi i x)`.
pub fn unit_phase(x: Frac64) -> Complex64 {
    let (sin, cos) = (TWO_PI * x.to_f64()).sin_cos();
    Complex64::new(cos, sin)
}

/// Character `e(k x)`; the frequency product `k * x` is computed on the grid,
/// so `|k| <= 2^63` costs no precision at all.
pub fn character(k: i64, x: Frac64) -> Complex64 {
    unit_phase(x.scale_signed(k))
}

/// Distance on the circle between two real representatives.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Rotation `x -> x + alpha` on the grid circle.
///
/// An odd `alpha` raw value generates all `2^64` grid points, the stand-in
/// for minimality; [`RotationSystem::is_max_order`] reports it. Constructors
/// accept any angle (a rational like 1/2 is sometimes exactly what a test
/// wants).
#[derive(Debug, Clone)]
pub struct RotationSystem {
    pub alpha: Frac64,
    pub label: String,
}

impl RotationSystem {
    pub fn new(alpha: Frac64) -> Self {
        RotationSystem { alpha, label: format!("alpha=0x{:016x}", alpha.raw()) }
    }

    /// The default angle: the golden fraction.
    pub fn golden() -> Self {
        RotationSystem { alpha: GOLDEN, label: "alpha=golden".into() }
    }

    pub fn is_max_order(&self) -> bool {
        self.alpha.raw() % 2 == 1
    }

    /// Orbit position `x0 + p(n) * alpha`, driven by the wrapped residue of
    /// `p(n)`. Bit-identical to applying the rotation `p(n)` times.
    pub fn orbit_point(&self, x0: Frac64, p: &IntPolynomial, n: u64) -> Frac64 {
        x0 + self.alpha.scale(p.eval_wrapped(n))
    }
}

/// Point of the Heisenberg nilmanifold in coordinates `(x, y, z)`.
///
/// `x`, `y` are exact grid points; `z` is `f64` and may leave `[0, 1)` in
/// intermediate products ([`reduce`](Self::reduce) wraps it back). All
/// constructors and [`pow`](Self::pow) return canonical representatives.
///
/// Points stand for right cosets: the lattice of integer-coordinate elements
/// quotients on the right, and [`reduce_coords`] picks the representative
/// with all coordinates in `[0, 1)`. Only left translation by a genuine
/// group element descends to this quotient, so orbit iteration multiplies
/// new factors on the left, and powers translate via the true lift of `a^m`
/// ([`heis_power_translate`]), never via a reduced representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergPoint {
    pub x: Frac64,
    pub y: Frac64,
    pub z: f64,
}

impl HeisenbergPoint {
    pub const IDENTITY: HeisenbergPoint =
        HeisenbergPoint { x: Frac64::ZERO, y: Frac64::ZERO, z: 0.0 };

    pub fn new(x: Frac64, y: Frac64, z: f64) -> Self {
        HeisenbergPoint { x, y, z: z.rem_euclid(1.0) }
    }

    /// Group product. `x`, `y` wrap exactly; when the y-sum wraps, `z` picks
    /// up the lattice correction `-x mod 1`, so the result stays in the coset
    /// of the real-coordinate product. `z` itself is left unreduced.
    ///
    /// `self` must be a true group element (any canonically reduced point
    /// qualifies as its own lift); `rhs` may be any representative of its
    /// coset. The other order does not descend to the quotient: multiplying
    /// a representative on the right by a fixed element can land in a
    /// different coset than multiplying the point it represents.
    pub fn mul(&self, rhs: &HeisenbergPoint) -> HeisenbergPoint {
        let x = self.x + rhs.x;
        let (y_raw, y_wrapped) = self.y.raw().overflowing_add(rhs.y.raw());
        let mut z = self.z + rhs.z + self.x.to_f64() * rhs.y.to_f64();
        if y_wrapped {
            z -= x.to_f64();
        }
        HeisenbergPoint { x, y: Frac64::new(y_raw), z }
    }

    /// `a^m` in closed form, canonically reduced: the true lift is
    /// `(m a_x, m a_y, m a_z + C(m,2) a_x a_y)`, and every contribution to
    /// the canonical `z` is reduced mod 1 in exact integer arithmetic before
    /// the final `f64` sum.
    pub fn pow(&self, m: u64) -> HeisenbergPoint {
        heis_power_translate(self, &HeisenbergPoint::IDENTITY, m)
    }

    /// Canonical coset representative: wraps `z` into `[0, 1)`.
    pub fn reduce(&self) -> HeisenbergPoint {
        HeisenbergPoint { x: self.x, y: self.y, z: self.z.rem_euclid(1.0) }
    }

    /// Right-multiplication by the lattice element `(j, k, l)`, in real
    /// coordinates: `(x + j, y + k, z + l + x k)`. Test helper for lattice
    /// invariance; the result is meant for [`reduce_coords`].
    pub fn lattice_mul(&self, j: i64, k: i64, l: i64) -> (f64, f64, f64) {
        let x = self.x.to_f64();
        (x + j as f64, self.y.to_f64() + k as f64, self.z + l as f64 + x * k as f64)
    }
}

/// Canonical representative of the coset of an arbitrary real-coordinate
/// point: `(frac X, frac Y, frac(Z - X floor Y))`.
pub fn reduce_coords(x: f64, y: f64, z: f64) -> Result<HeisenbergPoint, TorusError> {
    for v in [x, y, z] {
        if !v.is_finite() {
            return Err(TorusError::NotAUnitValue(v));
        }
    }
    let zc = (z - x * y.floor()).rem_euclid(1.0);
    Ok(HeisenbergPoint {
        x: Frac64::from_real(x.rem_euclid(1.0).min(ONE_BELOW))?,
        y: Frac64::from_real(y.rem_euclid(1.0).min(ONE_BELOW))?,
        z: zc,
    })
}

// rem_euclid can return 1.0 when the argument is a tiny negative number
const ONE_BELOW: f64 = 0.999_999_999_999_999_9;

/// Canonical representative of `a^m g0`, with `a^m` taken as its true lift.
///
/// A reduced representative of `a^m` would translate `g0` to the wrong
/// point: the quotient only forgets lattice factors on the right, and those
/// do not commute past `g0`. The true lift is
/// `(I_x + f_x, I_y + f_y, m a_z + C(m,2) a_x a_y)` with `I = floor`,
/// `f = frac`; the integers `I_x`, `I_y` reach `z` only through products
/// with grid points, each exact mod 1 in wrapped 64-bit arithmetic, so the
/// result costs a fixed handful of `f64` roundings however large `m` is.
pub fn heis_power_translate(
    a: &HeisenbergPoint,
    g0: &HeisenbergPoint,
    m: u64,
) -> HeisenbergPoint {
    let mx = (m as u128) * (a.x.raw() as u128);
    let my = (m as u128) * (a.y.raw() as u128);
    let frac_mx = Frac64::new(mx as u64);
    let frac_my = Frac64::new(my as u64);
    let int_mx = (mx >> 64) as u64;
    let int_my = (my >> 64) as u64;

    let x = frac_mx + g0.x;
    let (y_raw, y_carry) = frac_my.raw().overflowing_add(g0.y.raw());
    // floor of the true second coordinate m a_y + g0_y; int_my <= m - 1
    let floor_y = int_my + y_carry as u64;

    // z of the true product, canonically reduced:
    //   m a_z + C(m,2) a_x a_y + g0_z + (m a_x) g0_y - (m a_x + g0_x) floor_y
    // split so that integer * integer terms vanish mod 1 and the rest is
    // integer * grid (wrapped multiply) or grid * grid (one u128 product)
    let z = (frac_mul_u64_f64(m, a.z)
        + frac_binom2_product(m, a.x, a.y)
        + g0.z
        + Frac64::new(int_mx.wrapping_mul(g0.y.raw())).to_f64()
        + ((frac_mx.raw() as u128) * (g0.y.raw() as u128)) as f64 * INV_2_128
        - Frac64::new(frac_mx.raw().wrapping_mul(floor_y)).to_f64()
        - Frac64::new(g0.x.raw().wrapping_mul(floor_y)).to_f64())
    .rem_euclid(1.0);
    HeisenbergPoint { x, y: Frac64::new(y_raw), z }
}

/// Orbit point `a^{p(n)} g0`, canonically reduced. The exponent is the
/// wrapped residue `p(n) mod 2^64`; for exponents that fit in 64 bits this
/// is the exact orbit point, and sources that average over these orbits
/// check that bound on their whole range up front.
pub fn heis_orbit_point(
    a: &HeisenbergPoint,
    g0: &HeisenbergPoint,
    p: &IntPolynomial,
    n: u64,
) -> HeisenbergPoint {
    heis_power_translate(a, g0, p.eval_wrapped(n))
}

/// Observable on the Heisenberg nilmanifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeisObservable {
    /// `e(k x)`: character of the abelianized x-coordinate.
    CharX(i64),
    /// `e(k y)`.
    CharY(i64),
    /// `e(z) sin^2(pi x) sin^2(pi y)`: picks up the central coordinate; the
    /// bump factors vanish on the fundamental-domain boundary, which is what
    /// makes this continuous on the quotient.
    SmoothZ,
}

impl fmt::Display for HeisObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeisObservable::CharX(k) => write!(f, "char_x:{k}"),
            HeisObservable::CharY(k) => write!(f, "char_y:{k}"),
            HeisObservable::SmoothZ => write!(f, "smooth_z"),
        }
    }
}

/// Evaluate a Heisenberg observable at a (reduced) point.
pub fn heis_observable(obs: HeisObservable, g: &HeisenbergPoint) -> Complex64 {
    match obs {
        HeisObservable::CharX(k) => character(k, g.x),
        HeisObservable::CharY(k) => character(k, g.y),
        HeisObservable::SmoothZ => {
            let (sin, cos) = (TWO_PI * g.z.rem_euclid(1.0)).sin_cos();
            let bump_x = (std::f64::consts::PI * g.x.to_f64()).sin().powi(2);
            let bump_y = (std::f64::consts::PI * g.y.to_f64()).sin().powi(2);
            Complex64::new(cos, sin) * (bump_x * bump_y)
        }
    }
}

// frac(m * g) for an f64 g, exact: g is mant * 2^-shift, so the fractional
// part of m * g is (m * mant mod 2^shift) * 2^-shift.
fn frac_mul_u64_f64(m: u64, g: f64) -> f64 {
    if g == 0.0 || m == 0 {
        return 0.0;
    }
    debug_assert!((0.0..1.0).contains(&g));
    let bits = g.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac_bits = bits & ((1u64 << 52) - 1);
    let (mant, e2) = if exp == 0 {
        (frac_bits, -1074i64)
    } else {
        (frac_bits | (1 << 52), exp - 1075)
    };
    let shift = (-e2) as u32;
    let prod = (m as u128) * (mant as u128); // at most 2^117
    if shift >= 128 {
        // product is far below the modulus; the value is already fractional
        return prod as f64 * (e2 as f64).exp2();
    }
    let rem = if shift >= 117 { prod } else { prod & ((1u128 << shift) - 1) };
    rem as f64 * (e2 as f64).exp2()
}

// frac(C(m,2) * x * y) for grid points x, y: x y = (rx ry) / 2^128 exactly,
// and a wrapping u128 multiply reduces the product mod 2^128.
fn frac_binom2_product(m: u64, x: Frac64, y: Frac64) -> f64 {
    let binom = (m as u128).wrapping_mul((m as u128).wrapping_sub(1)) / 2;
    let xy = (x.raw() as u128) * (y.raw() as u128);
    binom.wrapping_mul(xy) as f64 * INV_2_128
}
