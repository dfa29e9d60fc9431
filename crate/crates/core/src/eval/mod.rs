//! Evaluation of Dirichlet series inside the strip.

mod logzeta;
mod tail;
mod vdc;
mod zeta;

pub use logzeta::{
    eval_log_zeta_tracked, eval_prime_series, eval_prime_series_with, guard_winding, log_zeta_path, PathGuard,
};
pub use tail::{eval_tail_bounded, TailOptions, TailPlan};
pub use vdc::{vdc_transform, FnPair, SmoothFn, VdcResult};
pub use zeta::eval_zeta;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::SeriesSpec;
use crate::sum::ComplexSum;

/// A value with a remainder bound. `certified` is set only when the bound is
/// rigorous up to the disclosed calibration constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub remainder_bound: f64,
    pub certified: bool,
    pub terms_used: u64,
}

/// `Σ_{n≤N} a(n) e^{-λ(n)s}` in index order with compensated accumulation.
pub fn partial_sum(spec: &SeriesSpec, n: u64, s: Complex64) -> Result<Complex64> {
    partial_sum_range(spec, 1, n, s)
}

/// `Σ_{lo≤n≤hi} a(n) e^{-λ(n)s}`.
pub fn partial_sum_range(spec: &SeriesSpec, lo: u64, hi: u64, s: Complex64) -> Result<Complex64> {
    if hi == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    let mut acc = ComplexSum::new();
    spec.for_each_term(lo, hi, |_, lam, a| acc.add(a * crate::series::exp_neg(lam, s)))?;
    let v = acc.value();
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Numeric("partial sum overflow".into()));
    }
    Ok(v)
}

/// Partial sums at several cut points `ns` (increasing).
pub fn partial_sums_at(spec: &SeriesSpec, ns: &[u64], s: Complex64) -> Result<alloc::vec::Vec<Complex64>> {
    let mut out = alloc::vec::Vec::with_capacity(ns.len());
    let mut acc = ComplexSum::new();
    let mut done = 0u64;
    for &n in ns {
        if n < done {
            return Err(Error::Precondition("cut points must be increasing".into()));
        }
        spec.for_each_term(done + 1, n, |_, lam, a| acc.add(a * crate::series::exp_neg(lam, s)))?;
        done = n;
        out.push(acc.value());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_builtin, FamilyParams, PhaseRule};

    #[test]
    fn first_term_at_zero() {
        let spec = make_builtin(FamilyParams::Ordinary { phase: PhaseRule::Uniform { omega: 0.4 }, rho_exponent: 0.3 })
            .unwrap();
        let v = partial_sum(&spec, 1, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, spec.coeff(1).unwrap());
    }

    #[test]
    fn basel_prefix() {
        // 1968329/1270080 = Σ_{n≤10} n^{-2}
        let v = partial_sum(&SeriesSpec::zeta(), 10, Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.re - 1968329.0 / 1270080.0).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn alternating_pair_cancels() {
        let v = partial_sum(&SeriesSpec::alternating_ordinary(), 2, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cut_points_agree() {
        let spec = SeriesSpec::alternating_prime();
        let s = Complex64::new(0.7, 2.0);
        let v = partial_sums_at(&spec, &[10, 100, 1000], s).unwrap();
        assert!((v[2] - partial_sum(&spec, 1000, s).unwrap()).norm() < 1e-13);
    }
}
