//! `log ζ` continued along horizontal paths, and the prime series
//! `Σ_p p^{-s} = Σ_k μ(k) log ζ(ks)/k`.

use core::f64::consts::{FRAC_PI_4, TAU};
use num_complex::Complex64;

use super::{eval_zeta, EvalResult};
use crate::error::{Error, Result};
use crate::primes::mobius;
use crate::sum::ComplexSum;

const SMALL: f64 = 1e-8;
const LARGE: f64 = 1e8;

fn zeta_checked(s: Complex64, sigma: f64, t: f64) -> Result<(Complex64, f64)> {
    let r = eval_zeta(s)?;
    let m = r.value.norm();
    if m < SMALL {
        return Err(Error::ZeroCrossing { sigma, t, reason: "|zeta| below threshold on path" });
    }
    if m > LARGE {
        return Err(Error::ZeroCrossing { sigma, t, reason: "pole on path" });
    }
    Ok((r.value, r.remainder_bound))
}

/// `log ζ(σ+it)` by continuity from `2+it` (where `Re ζ > 0`, so the
/// principal branch is the right one). Returns the value and an error
/// estimate. No zero-neighbourhood guard; see [`eval_log_zeta_tracked`].
pub fn log_zeta_path(sigma: f64, t: f64) -> Result<(Complex64, f64)> {
    if sigma >= 2.0 {
        let (z, err) = zeta_checked(Complex64::new(sigma, t), sigma, t)?;
        return Ok((z.ln(), err / z.norm()));
    }
    if t == 0.0 && sigma <= 1.0 {
        return Err(Error::ZeroCrossing { sigma, t, reason: "pole on path" });
    }
    let (mut z, _) = zeta_checked(Complex64::new(2.0, t), sigma, t)?;
    let mut arg = z.arg();
    let mut x = 2.0;
    let mut h = 0.05;
    let mut err = 0.0;
    while x > sigma {
        let xn = (x - h).max(sigma);
        let (zn, e) = zeta_checked(Complex64::new(xn, t), sigma, t)?;
        let d = (zn / z).arg();
        if libm::fabs(d) >= FRAC_PI_4 {
            h /= 10.0;
            if h < 1e-9 {
                return Err(Error::ZeroCrossing { sigma, t, reason: "argument unresolved" });
            }
            continue;
        }
        arg += d;
        z = zn;
        x = xn;
        err = e / zn.norm();
        h = (2.0 * h).min(0.1);
    }
    Ok((Complex64::new(libm::log(z.norm()), arg), err))
}

/// Neighbourhood of the path in which zeros are not tolerated.
///
/// The path at height `t` is rejected when the rectangle
/// `[σ - r_h, 1.1] × [t - r_v, t + r_v]` contains a zero, counted by the
/// argument principle. This widens the removed segments to a strip, which is
/// what a finite-precision scan can actually resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGuard {
    pub r_h: f64,
    pub r_v: f64,
}

impl Default for PathGuard {
    fn default() -> Self {
        Self { r_h: 0.15, r_v: 0.02 }
    }
}

impl PathGuard {
    /// Checks the paths to `[σ, ·] × [t_lo, t_hi]` at once.
    pub fn check_band(&self, sigma: f64, t_lo: f64, t_hi: f64) -> Result<()> {
        let re_lo = sigma - self.r_h;
        if re_lo > 1.0 {
            return Ok(());
        }
        let (lo, hi) = (t_lo - self.r_v, t_hi + self.r_v);
        let winding = guard_winding(re_lo, 1.1, lo, hi)?;
        let poles = if lo < 0.0 && hi > 0.0 && re_lo < 1.0 { 1 } else { 0 };
        if winding + poles != 0 {
            return Err(Error::ZeroCrossing { sigma, t: 0.5 * (t_lo + t_hi), reason: "zero near path" });
        }
        Ok(())
    }

    pub fn check(&self, sigma: f64, t: f64) -> Result<()> {
        self.check_band(sigma, t, t)
    }
}

/// Winding number of `ζ` around the counterclockwise boundary of the
/// rectangle, i.e. zeros minus poles inside.
pub fn guard_winding(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<i64> {
    let corners = [
        Complex64::new(re_lo, im_lo),
        Complex64::new(re_hi, im_lo),
        Complex64::new(re_hi, im_hi),
        Complex64::new(re_lo, im_hi),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let len = (b - a).norm();
        let mut u = 0.0;
        let mut h = (0.02 / len).min(1.0);
        let mut z = boundary_zeta(a)?;
        while u < 1.0 {
            let un = (u + h).min(1.0);
            let zn = boundary_zeta(a + (b - a) * un)?;
            let d = (zn / z).arg();
            if libm::fabs(d) >= FRAC_PI_4 {
                h /= 4.0;
                if h * len < 1e-10 {
                    return Err(Error::Numeric("guard boundary passes through a zero".into()));
                }
                continue;
            }
            total += d;
            z = zn;
            u = un;
            h = (2.0 * h).min(0.05 / len);
        }
    }
    let w = total / TAU;
    let r = libm::round(w);
    if libm::fabs(w - r) > 0.1 {
        return Err(Error::Numeric("winding number not resolved".into()));
    }
    Ok(r as i64)
}

fn boundary_zeta(s: Complex64) -> Result<Complex64> {
    let v = eval_zeta(s)?.value;
    if v.norm() < 1e-12 {
        return Err(Error::Numeric("guard boundary passes through a zero".into()));
    }
    Ok(v)
}

/// `log ζ(σ+it)`, `σ > 1/2`, with the branch fixed along the horizontal path
/// from `2+it`. Paths that pass within the default [`PathGuard`] of a zero
/// are rejected with a zero-crossing error.
pub fn eval_log_zeta_tracked(sigma: f64, t: f64) -> Result<Complex64> {
    if !(sigma > 0.5) {
        return Err(Error::Precondition("sigma must exceed 1/2".into()));
    }
    PathGuard::default().check(sigma, t)?;
    Ok(log_zeta_path(sigma, t)?.0)
}

/// `log ζ(w)` for `Re w > 1`, where no zeros can interfere.
fn log_zeta_right(w: Complex64) -> Result<(Complex64, f64)> {
    log_zeta_path(w.re, w.im)
}

/// `Σ_{k≤K} μ(k) log ζ(ks)/k`, guarded for `k = 1`. The bound adds the
/// omitted `k > K` terms, using `|log ζ(w)| ≤ 2^{-u}(1 + 2/(u-1))` for
/// `u = Re w > 1`, to the propagated `ζ` errors.
pub fn eval_prime_series(s: Complex64, k_max: u64) -> Result<EvalResult> {
    eval_prime_series_with(s, k_max, Some(PathGuard::default()))
}

/// As [`eval_prime_series`], with the guard for the `k = 1` path optional
/// (scans check a whole band once instead).
pub fn eval_prime_series_with(s: Complex64, k_max: u64, guard: Option<PathGuard>) -> Result<EvalResult> {
    let sigma = s.re;
    if !(sigma > 0.5) {
        return Err(Error::Precondition("Re s must exceed 1/2".into()));
    }
    if k_max == 0 {
        return Err(Error::Precondition("K_max must be at least 1".into()));
    }
    if let Some(g) = guard {
        g.check(sigma, s.im)?;
    }
    let mut acc = ComplexSum::new();
    let mut err = 0.0;
    for k in 1..=k_max {
        let mu = mobius(k);
        if mu == 0 {
            continue;
        }
        let w = s * k as f64;
        let (l, e) = if k == 1 { log_zeta_path(sigma, s.im)? } else { log_zeta_right(w)? };
        acc.add(l * (mu as f64 / k as f64));
        err += e / k as f64;
    }
    let k1 = (k_max + 1) as f64;
    let u = k1 * sigma;
    let tail = (1.0 + 2.0 / (u - 1.0)) / k1 * libm::exp2(-u) / (1.0 - libm::exp2(-sigma));
    let value = acc.value();
    let rounding = 8.0 * f64::EPSILON * (value.norm() + 1.0);
    Ok(EvalResult { value, remainder_bound: tail + err + rounding, certified: true, terms_used: k_max })
}
