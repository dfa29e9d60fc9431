//! Real polynomials with positive leading coefficient and their inverses on
//! the half-line where they are increasing.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialReal {
    /// `b_0, ..., b_d`, lowest degree first.
    coeffs: Vec<f64>,
    x0: f64,
}

impl PolynomialReal {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Result<Self> {
        let mut coeffs: Vec<f64> = coeffs.into();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedParams("non-finite polynomial coefficient".into()));
        }
        if coeffs.len() < 2 {
            return Err(Error::MalformedParams("polynomial degree must be at least 1".into()));
        }
        if *coeffs.last().unwrap() <= 0.0 {
            return Err(Error::MalformedParams("leading coefficient must be positive".into()));
        }
        let mut p = Self { coeffs, x0: 0.0 };
        p.x0 = p.increasing_threshold();
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    pub fn second_derivative_at(&self, x: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(2).rev().fold(0.0, |acc, (k, &c)| acc * x + (k * (k - 1)) as f64 * c)
    }

    /// Beyond this point `P` is strictly increasing (`x₀` of the bijection).
    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// `y₀ = P(x₀)`: the inverse is defined on `[y₀, ∞)`.
    pub fn y0(&self) -> f64 {
        self.eval(self.x0)
    }

    /// Cauchy bound for the real roots of `P'`, then a downward scan for the
    /// last sign change, refined by bisection. Never below zero.
    fn increasing_threshold(&self) -> f64 {
        let d = self.degree();
        if d == 1 {
            return 0.0;
        }
        let lead = d as f64 * self.leading();
        let bound = 1.0 + (1..d).map(|k| libm::fabs(k as f64 * self.coeffs[k] / lead)).fold(0.0, f64::max);
        let steps = 8192;
        let h = 2.0 * bound / steps as f64;
        let mut hi = bound;
        let mut found = None;
        for i in 1..=steps {
            let x = bound - h * i as f64;
            if self.derivative_at(x) <= 0.0 {
                found = Some((x, hi));
                break;
            }
            hi = x;
        }
        let Some((mut lo, mut hi)) = found else {
            return 0.0;
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.derivative_at(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.max(0.0)
    }

    /// `P^{-1}(x)` on `[x₀, ∞)` by Newton's method safeguarded with bisection.
    pub fn inverse(&self, x: f64) -> Result<f64> {
        let y0 = self.y0();
        if !(x >= y0) {
            return Err(Error::BelowThreshold { threshold: y0 });
        }
        let mut lo = self.x0;
        let mut hi = lo.max(1.0);
        while self.eval(hi) < x {
            hi *= 2.0;
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.eval(t) - x;
            if f == 0.0 {
                return Ok(t);
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let df = self.derivative_at(t);
            let newton = t - f / df;
            let next = if df > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if libm::fabs(next - t) <= 4.0 * f64::EPSILON * libm::fabs(t).max(1.0) {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }

    /// Leading and constant terms of the expansion of `P^{-1}` at infinity,
    /// `P^{-1}(x) = x^{1/d} / b_d^{1/d} + c + o(1)` with `c = -b_{d-1} / (d b_d)`.
    pub fn inverse_expansion(&self, x: f64) -> f64 {
        let d = self.degree() as f64;
        let bd = self.leading();
        libm::pow(x / bd, 1.0 / d) + self.inverse_constant()
    }

    pub fn inverse_constant(&self) -> f64 {
        let d = self.degree();
        -self.coeffs[d - 1] / (d as f64 * self.leading())
    }
}

/// `P^{-1}(x)` for `x ≥ y₀`.
pub fn poly_inverse_asymptotic(p: &PolynomialReal, x: f64) -> Result<f64> {
    p.inverse(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_root(p: &PolynomialReal, x: f64) -> f64 {
        let (mut lo, mut hi) = (p.x0(), p.x0() + 1.0);
        while p.eval(hi) < x {
            hi *= 2.0;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if p.eval(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn square_inverse() {
        let p = PolynomialReal::new([0.0, 0.0, 1.0]).unwrap();
        assert!(p.x0() < 1e-12);
        assert!((p.inverse(49.0).unwrap() - 7.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_plus_linear_against_bisection() {
        let p = PolynomialReal::new([0.0, 1.0, 1.0]).unwrap();
        let got = p.inverse(1e6).unwrap();
        let oracle = bisect_root(&p, 1e6);
        assert!((got - oracle).abs() < 1e-3);
        assert!((got - oracle).abs() < 1e-9);
    }

    #[test]
    fn cubic_leading_term() {
        let p = PolynomialReal::new([0.0, 0.0, 0.0, 1.0]).unwrap();
        let x = 1e15;
        let r = p.inverse(x).unwrap() / libm::cbrt(x);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_for_shifted_parabola() {
        // P = X² - 4X + 1, minimum at 2
        let p = PolynomialReal::new([1.0, -4.0, 1.0]).unwrap();
        assert!((p.x0() - 2.0).abs() < 1e-9);
        assert!(matches!(p.inverse(-10.0), Err(Error::BelowThreshold { .. })));
        let t = p.inverse(6.0).unwrap();
        assert!((p.eval(t) - 6.0).abs() < 1e-12 && t > 2.0);
    }

    #[test]
    fn malformed() {
        assert!(PolynomialReal::new([1.0]).is_err());
        assert!(PolynomialReal::new([1.0, -1.0]).is_err());
    }
}
