//! The exponential-sum transform
//! `Σ_{a<n≤b} g(n)e(f(n)) ≈ Σ_{α-ε<m<β+ε} ∫_a^b g(x)e(f(x) - mx) dx`.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::integrate;

/// A real C¹ function with its derivative.
pub trait SmoothFn {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

/// [`SmoothFn`] from a pair of closures.
pub struct FnPair<F, D>(pub F, pub D);

impl<F: Fn(f64) -> f64, D: Fn(f64) -> f64> SmoothFn for FnPair<F, D> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        (self.1)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdcResult {
    pub value: Complex64,
    pub integrals: usize,
    /// `|g(b)| + ∫_a^b |g'|`.
    pub g_variation: f64,
    /// Accumulated quadrature error estimate.
    pub quad_error: f64,
}

const SAMPLES: usize = 513;

fn sample_grid(a: f64, b: f64) -> impl Iterator<Item = f64> {
    (0..SAMPLES).map(move |i| a + (b - a) * i as f64 / (SAMPLES - 1) as f64)
}

/// Breakpoints at roughly one period of `f(x) - mx`, refined where the
/// frequency is high.
fn period_breaks(f: &dyn SmoothFn, m: f64, a: f64, b: f64) -> Vec<f64> {
    let xs: Vec<f64> = sample_grid(a, b).collect();
    let mut breaks = alloc::vec![a];
    let mut acc = 0.0;
    for w in xs.windows(2) {
        let dphase = libm::fabs(f.value(w[1]) - m * w[1] - f.value(w[0]) + m * w[0]);
        let pieces = libm::ceil(dphase).max(1.0) as usize;
        if pieces > 1 {
            for k in 1..pieces {
                breaks.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
            }
            breaks.push(w[1]);
            acc = 0.0;
        } else {
            acc += dphase;
            if acc >= 1.0 || breaks.len() < 16 {
                breaks.push(w[1]);
                acc = 0.0;
            }
        }
    }
    if *breaks.last().unwrap() < b {
        breaks.push(b);
    }
    breaks
}

fn check_monotone(f: &dyn SmoothFn, a: f64, b: f64, alpha: f64, beta: f64) -> Result<()> {
    let d: Vec<f64> = sample_grid(a, b).map(|x| f.derivative(x)).collect();
    let scale = alpha.abs().max(beta.abs()).max(1.0);
    let tol = 1e-9 * scale;
    let up = d.windows(2).all(|w| w[1] >= w[0] - tol);
    let down = d.windows(2).all(|w| w[1] <= w[0] + tol);
    if !(up || down) {
        return Err(Error::NotMonotone);
    }
    if d.iter().any(|&v| v < alpha - tol || v > beta + tol) {
        return Err(Error::Precondition("f' leaves [alpha, beta]".into()));
    }
    Ok(())
}

/// Computes the transform with adaptive Gauss–Kronrod quadrature split at
/// period boundaries.
pub fn vdc_transform(
    g: &dyn SmoothFn,
    f: &dyn SmoothFn,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    eps: f64,
) -> Result<VdcResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition("eps must lie in (0, 1)".into()));
    }
    if !(a < b) || alpha > beta {
        return Err(Error::Precondition("need a < b and alpha <= beta".into()));
    }
    check_monotone(f, a, b, alpha, beta)?;
    let abs_dg = |x: f64| Complex64::new(libm::fabs(g.derivative(x)), 0.0);
    let breaks: Vec<f64> = sample_grid(a, b).step_by(16).chain(core::iter::once(b)).collect();
    let var = integrate(abs_dg, &breaks, 1e-13, 1e-12, 4096).value.re;
    let g_variation = libm::fabs(g.value(b)) + var;

    let m_lo = libm::floor(alpha - eps) as i64 + 1;
    let m_hi = libm::ceil(beta + eps) as i64 - 1;
    let mut value = Complex64::new(0.0, 0.0);
    let mut quad_error = 0.0;
    let mut integrals = 0;
    for m in m_lo..=m_hi {
        let mf = m as f64;
        if !(mf > alpha - eps && mf < beta + eps) {
            continue;
        }
        let integrand = |x: f64| {
            let theta = TAU * (f.value(x) - mf * x);
            Complex64::new(libm::cos(theta), libm::sin(theta)) * g.value(x)
        };
        let bk = period_breaks(f, mf, a, b);
        let q = integrate(integrand, &bk, 1e-12 * (b - a).max(1.0), 1e-12, 200_000);
        value += q.value;
        quad_error += q.error;
        integrals += 1;
    }
    Ok(VdcResult { value, integrals, g_variation, quad_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_band_gives_zero() {
        let g = FnPair(|_| 1.0, |_| 0.0);
        let f = FnPair(|u| 0.3 * u, |_| 0.3);
        let r = vdc_transform(&g, &f, 1.0, 1000.0, 0.3, 0.3, 0.2).unwrap();
        assert_eq!(r.integrals, 0);
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        assert_eq!(r.g_variation, 1.0);
    }

    #[test]
    fn constant_phase_gives_length() {
        let g = FnPair(|_| 1.0, |_| 0.0);
        let f = FnPair(|_| 0.0, |_| 0.0);
        let r = vdc_transform(&g, &f, 1.0, 50.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(r.integrals, 1);
        assert!((r.value - Complex64::new(49.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn rejects_bad_eps_and_nonmonotone() {
        let g = FnPair(|_| 1.0, |_| 0.0);
        let f = FnPair(|_| 0.0, |_| 0.0);
        assert!(vdc_transform(&g, &f, 0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        let wavy = FnPair(libm::cos, |x: f64| -libm::sin(x));
        assert_eq!(vdc_transform(&g, &wavy, 0.0, 10.0, -1.0, 1.0, 0.5), Err(Error::NotMonotone));
    }
}
