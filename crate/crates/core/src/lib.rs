//! Numerics for general Dirichlet series `Σ a(n) e^{-λ(n) s}`.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! The `parallel` feature spreads τ-scans and random-phase sampling over a
//! rayon pool; results are identical with and without it.
//!
//! Module map:
//!
//! * [`series`] and [`poly`]: series as data, built-in families, polynomial inverses.
//! * [`abscissae`]: Bohr–Cahen style estimates of `σ_c`, `σ_a`, `σ_2`.
//! * [`eval`]: partial sums, the exponential-sum transform, tail-bounded
//!   evaluation, `ζ`, branch-tracked `log ζ` and the prime series.
//! * [`functionals`]: atomic measures, Laplace transforms, divergence and
//!   window-density checks.
//! * [`rearrange`]: scalar Riemann rearrangement and greedy steering of
//!   function-valued partial sums.
//! * [`lab`]: translate scans, random-phase sampling, distribution
//!   comparison and mean-square checks.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod abscissae;
pub mod compact;
pub mod error;
pub mod eval;
pub mod functionals;
pub mod lab;
pub mod poly;
pub mod primes;
pub mod quad;
pub mod rearrange;
pub mod series;
pub mod sum;

pub use num_complex::Complex64;

pub use compact::CompactRect;
pub use error::{Error, Result};
pub use poly::PolynomialReal;
pub use series::{Family, PhaseRule, SeriesSpec};

/// Anything that can be sampled as a target function on a compact.
pub trait Target: Sync {
    fn at(&self, s: Complex64) -> Complex64;
}

impl<F> Target for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn at(&self, s: Complex64) -> Complex64 {
        self(s)
    }
}

/// The constant function `s ↦ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstTarget(pub Complex64);

impl Target for ConstTarget {
    fn at(&self, _s: Complex64) -> Complex64 {
        self.0
    }
}
