//! Truncation with a van der Corput tail bound.
//!
//! Past the cutoff `x` the phase `f(u) = (ωu - tλ(u))/2π` has derivative in a
//! band of half-width `|t|λ'(x)/2π ≤ dist(ω/2π, ℤ)/4π`, so with
//! `ε = dist/4` no integer lies in `(α - ε, β + ε)` and the exponential-sum
//! transform leaves only the boundary term `G·(1/ε + log(β - α + 2))` with
//! `G = g(x)` for monotone `g`.

use num_complex::Complex64;

use super::{partial_sum, EvalResult};
use crate::error::{Error, Result};
use crate::series::{phase_distance, SeriesSpec, SmoothModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// Stand-in for the absolute constant in the exponential-sum estimate.
    pub calibration: f64,
    /// Largest cutoff index that is summed directly.
    pub budget: u64,
    /// Lower bound for the cutoff; larger values trade speed for a smaller bound.
    pub min_cutoff: u64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { calibration: 20.0, budget: 10_000_000, min_cutoff: 1 }
    }
}

/// Cutoff logic for one abscissa `σ`; reusable across many ordinates.
#[derive(Debug, Clone)]
pub struct TailPlan<'a> {
    model: SmoothModel<'a>,
    sigma: f64,
    dist: f64,
    start: u64,
    opts: TailOptions,
}

fn check_flags(spec: &SeriesSpec, sigma: f64) -> Result<SmoothModel<'_>> {
    let model = spec.smooth_model().ok_or(Error::FlagsAbsent("smooth frequency with uniform phase"))?;
    if phase_distance(model.omega()) < 1e-12 {
        return Err(Error::FlagsAbsent("uniform phase with ω ∉ 2πℤ"));
    }
    let flags = spec.flags();
    if !flags.lambda_prime_nonincreasing {
        return Err(Error::FlagsAbsent("λ' nonincreasing"));
    }
    let sigma0 = flags.rho_decay_sigma0.ok_or(Error::FlagsAbsent("ρ(x)e^{-λ(x)σ} nonincreasing"))?;
    if !(sigma > sigma0) {
        return Err(Error::Precondition("Re s must exceed the monotonicity threshold".into()));
    }
    Ok(model)
}

/// First integer from which `g(u) = ρ(u)e^{-λ(u)σ}` is nonincreasing,
/// located on a geometric grid.
fn monotone_start(model: &SmoothModel<'_>, sigma: f64) -> u64 {
    let mut last_bad = 0.0f64;
    let mut x = 1.0f64;
    while x < 1e15 {
        if model.g_log_derivative(x, sigma) > 0.0 {
            last_bad = x;
        }
        x *= 1.02;
    }
    if last_bad == 0.0 {
        1
    } else {
        libm::ceil(last_bad * 1.02) as u64 + 1
    }
}

impl<'a> TailPlan<'a> {
    pub fn new(spec: &'a SeriesSpec, sigma: f64, opts: TailOptions) -> Result<Self> {
        let model = check_flags(spec, sigma)?;
        let dist = phase_distance(model.omega());
        let start = monotone_start(&model, sigma).max(opts.min_cutoff).max(1);
        Ok(Self { model, sigma, dist, start, opts })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Least index `x ≥ start` with `|t|λ'(x) ≤ dist/2`, or `None` past the budget.
    pub fn cutoff(&self, t: f64) -> Option<u64> {
        let t = libm::fabs(t);
        let half = 0.5 * self.dist;
        let ok = |x: u64| t * self.model.lambda_prime(x as f64) <= half;
        if ok(self.start) {
            return Some(self.start);
        }
        let mut hi = self.start.max(2);
        while !ok(hi) {
            if hi > self.opts.budget {
                return None;
            }
            hi = hi.saturating_mul(2);
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi > self.opts.budget {
            None
        } else {
            Some(hi)
        }
    }

    /// Bound on `|Σ_{n≥x} a(n)e^{-λ(n)s}|`.
    pub fn bound(&self, x: u64, t: f64) -> f64 {
        let eps = 0.25 * self.dist;
        let width = libm::fabs(t) * self.model.lambda_prime(x as f64) / core::f64::consts::TAU;
        self.opts.calibration * (1.0 / eps + libm::log(width + 2.0)) * self.model.g(x as f64, self.sigma)
    }

    /// `D_{x-1}(s)` with its tail bound.
    pub fn eval(&self, spec: &SeriesSpec, t: f64) -> Result<EvalResult> {
        let s = Complex64::new(self.sigma, t);
        match self.cutoff(t) {
            Some(x) => {
                let value = if x > 1 { partial_sum(spec, x - 1, s)? } else { Complex64::new(0.0, 0.0) };
                Ok(EvalResult { value, remainder_bound: self.bound(x, t), certified: true, terms_used: x - 1 })
            }
            None => {
                let n = self.opts.budget;
                let value = partial_sum(spec, n, s)?;
                let heuristic = self.bound(n + 1, t);
                Ok(EvalResult { value, remainder_bound: heuristic, certified: false, terms_used: n })
            }
        }
    }
}

/// `D(s)` as a truncated sum whose tail is controlled by the exponential-sum
/// transform. Requires uniform phase `ω ∉ 2πℤ`, a smooth frequency with `λ'`
/// nonincreasing, and `Re s` above the declared monotonicity threshold.
pub fn eval_tail_bounded(spec: &SeriesSpec, s: Complex64, opts: TailOptions) -> Result<EvalResult> {
    TailPlan::new(spec, s.re, opts)?.eval(spec, s.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_builtin, FamilyParams};

    #[test]
    fn flags_absent_for_zeta() {
        let r = eval_tail_bounded(&SeriesSpec::zeta(), Complex64::new(0.7, 1.0), TailOptions::default());
        assert!(matches!(r, Err(Error::FlagsAbsent(_))));
    }

    #[test]
    fn real_axis_uses_minimal_cutoff() {
        let spec = SeriesSpec::alternating_ordinary();
        let r = eval_tail_bounded(&spec, Complex64::new(0.6, 0.0), TailOptions::default()).unwrap();
        assert!(r.certified);
        assert_eq!(r.terms_used, 0);
        // 20·(4/(1/2) + log 2)·ρ(1)
        assert!((r.remainder_bound - 20.0 * (8.0 + libm::log(2.0))).abs() < 1e-9);
    }

    #[test]
    fn eta_against_direct_sum() {
        // -η(2) = -π²/12
        let spec = SeriesSpec::alternating_ordinary();
        let opts = TailOptions { min_cutoff: 100_000, ..TailOptions::default() };
        let r = eval_tail_bounded(&spec, Complex64::new(2.0, 0.0), opts).unwrap();
        let exact = -core::f64::consts::PI.powi(2) / 12.0;
        assert!((r.value.re - exact).abs() <= r.remainder_bound);
        assert!(r.remainder_bound < 1e-6);
    }

    #[test]
    fn budget_exhaustion_is_uncertified() {
        let spec = make_builtin(FamilyParams::default_for(crate::Family::LogLog)).unwrap();
        let opts = TailOptions { budget: 1000, ..TailOptions::default() };
        let r = eval_tail_bounded(&spec, Complex64::new(0.5, 1e4), opts).unwrap();
        assert!(!r.certified);
        assert!(r.remainder_bound.is_finite());
    }
}
