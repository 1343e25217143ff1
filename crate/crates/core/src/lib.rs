//! Numerical laboratory for Mobius-weighted orbit averages.
//!
//! The library has five layers, each usable on its own:
//!
//! * [`moebius`]: linear-sieve tables of the Mobius function with Mertens
//!   prefix sums and a binary cache format.
//! * [`polyeval`]: integer polynomials with exact 128-bit, wrapped 64-bit and
//!   streamed finite-difference evaluation. The wrapped residue `p(n) mod 2^64`
//!   is the index currency every dynamical system below consumes.
//! * [`torus`]: exact fixed-point arithmetic on the circle, rotation orbits,
//!   and a Heisenberg nilmanifold with closed-form powers.
//! * [`subshift`]: the Mobius-at-squares sequence, word counting and zero-run
//!   statistics for symbolic systems.
//! * [`averages`]: deterministic weighted Birkhoff-style averages, a grid
//!   estimator for the exponential-sum supremum, log-log decay fits, two-prime
//!   correlations and star discrepancy.
//!
//! All averages run over `1 <= n <= N`. Parallel code paths are bit-identical
//! to the sequential ones by construction; see [`averages`] for the summation
//! contract.

pub mod averages;
pub mod moebius;
pub mod orbits;
pub mod polyeval;
pub mod subshift;
pub mod torus;

pub use moebius::MoebiusTable;
pub use polyeval::IntPolynomial;
pub use torus::Frac64;
