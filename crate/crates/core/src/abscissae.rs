//! Abscissa estimates from truncations.
//!
//! The running quantity `Q(n)` is `|S_n|`, `Σ_{m≤n}|a(m)|` or
//! `Σ_{m≤n}|a(m)|²`. Over dyadic windows `W_k = (N/2^{k+1}, N/2^k]` the
//! window maxima `M_k` give slopes `Δ log M / Δ λ`, which estimate
//! `limsup log Q(n)/λ(n)` without the constant-factor bias of the direct ratio.
//! When `Q` settles (the window spread decays) the abscissa is `≤ 0` and the
//! same slopes are taken on the remainders `|Q(∞) - Q(n)|` instead.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::series::SeriesSpec;
use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbscissaKind {
    Convergence,
    Absolute,
    Square,
}

impl AbscissaKind {
    pub fn short(self) -> &'static str {
        match self {
            AbscissaKind::Convergence => "c",
            AbscissaKind::Absolute => "a",
            AbscissaKind::Square => "2",
        }
    }
}

impl fmt::Display for AbscissaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbscissaKind::Convergence => "convergence",
            AbscissaKind::Absolute => "absolute",
            AbscissaKind::Square => "square",
        })
    }
}

impl FromStr for AbscissaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" | "convergence" => Ok(AbscissaKind::Convergence),
            "a" | "absolute" => Ok(AbscissaKind::Absolute),
            "2" | "square" => Ok(AbscissaKind::Square),
            other => Err(Error::MalformedParams(alloc::format!("unknown abscissa kind {other}"))),
        }
    }
}

/// Which slope formula produced the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Growth,
    Remainder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbscissaEstimate {
    pub kind: AbscissaKind,
    /// `f64::NEG_INFINITY` when the quantity decays faster than any exponential in `λ`.
    pub value: f64,
    pub n_used: u64,
    /// Spread of the slopes over the three largest usable windows.
    pub stability: f64,
    pub variant: Variant,
}

impl AbscissaEstimate {
    pub fn is_neg_infinite(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }
}

pub const MIN_TERMS: u64 = 1000;
const MIN_WINDOW_BOTTOM: u64 = 16;

struct Window {
    lo: usize, // first index (0-based) inside the window
    hi: usize, // last index (0-based)
}

fn windows(n: u64) -> Vec<Window> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let top = n >> k;
        let bottom = n >> (k + 1);
        if bottom < MIN_WINDOW_BOTTOM {
            break;
        }
        out.push(Window { lo: bottom as usize, hi: top as usize - 1 });
        k += 1;
    }
    out
}

fn spread3(xs: &[f64]) -> f64 {
    let take = &xs[..xs.len().min(3)];
    let lo = take.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = take.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn slopes(log_m: &[f64], lam_top: &[f64]) -> Vec<f64> {
    (0..log_m.len() - 1).map(|k| (log_m[k] - log_m[k + 1]) / (lam_top[k] - lam_top[k + 1])).collect()
}

/// Estimates `σ_c`, `σ_a` or `σ_2` from the first `n_max` terms.
pub fn estimate_abscissa(spec: &SeriesSpec, kind: AbscissaKind, n_max: u64) -> Result<AbscissaEstimate> {
    if n_max < MIN_TERMS {
        return Err(Error::Precondition(alloc::format!("N_max must be at least {MIN_TERMS}")));
    }
    let (lam, q, partial) = running_quantities(spec, kind, n_max)?;
    let ws = windows(n_max);
    let factor = if kind == AbscissaKind::Square { 0.5 } else { 1.0 };
    let finish = |s: &[f64], pos: &[f64], variant| {
        let est = extrapolated(s, pos);
        AbscissaEstimate { kind, value: factor * est[0], n_used: n_max, stability: factor * spread3(&est), variant }
    };

    if kind != AbscissaKind::Convergence {
        // increment densities ΔQ/Δλ ~ e^{σλ} on either side of zero, and
        // insensitive to additive constants in Q
        let (log_d, pos): (Vec<f64>, Vec<f64>) = ws
            .windows(2)
            .map(|p| {
                let (a, b) = (p[0].hi, p[1].hi);
                (libm::log((q[a] - q[b]) / (lam[a] - lam[b])), 0.5 * (lam[a] + lam[b]))
            })
            .unzip();
        let settled = q[ws[0].hi] - q[ws[0].lo] < 0.8 * (q[ws[2].hi] - q[ws[2].lo]);
        let variant = if settled { Variant::Remainder } else { Variant::Growth };
        if log_d.iter().any(|v| !v.is_finite()) {
            return Ok(neg_infinity(kind, n_max, variant));
        }
        let s = slopes(&log_d, &pos);
        if settled && superexponential(&log_d, &pos, &s) {
            return Ok(neg_infinity(kind, n_max, variant));
        }
        return Ok(finish(&s, &pos, variant));
    }

    let p = partial.as_ref().unwrap();
    let spread = |w: &Window| (w.lo..=w.hi).map(|i| (p[i] - p[w.hi]).norm()).fold(0.0, f64::max);
    let settled = spread(&ws[0]) < 0.8 * spread(&ws[2]);
    let window_max = |vals: &[f64], w: &Window| libm::log(vals[w.lo..=w.hi].iter().copied().fold(0.0, f64::max));
    let pos: Vec<f64> = ws.iter().map(|w| lam[w.hi]).collect();

    if !settled {
        let log_m: Vec<f64> = ws.iter().map(|w| window_max(&q, w)).collect();
        if log_m.iter().any(|v| !v.is_finite()) {
            return Ok(neg_infinity(kind, n_max, Variant::Growth));
        }
        return Ok(finish(&slopes(&log_m, &pos), &pos, Variant::Growth));
    }

    // remainders against the mean of the top window, which stands in for the limit
    let w0 = &ws[0];
    let mut acc = ComplexSum::new();
    for z in &p[w0.lo..=w0.hi] {
        acc.add(*z);
    }
    let limit = acc.value() / (w0.hi - w0.lo + 1) as f64;
    let rem: Vec<f64> = p.iter().map(|z| (limit - *z).norm()).collect();
    let tail_ws = &ws[3..];
    if tail_ws.len() < 3 {
        return Err(Error::Precondition("too few dyadic windows".into()));
    }
    let tail_pos = &pos[3..];
    let log_r: Vec<f64> = tail_ws.iter().map(|w| window_max(&rem, w)).collect();
    if log_r.iter().any(|v| !v.is_finite()) {
        return Ok(neg_infinity(kind, n_max, Variant::Remainder));
    }
    let s = slopes(&log_r, tail_pos);
    if superexponential(&log_r, tail_pos, &s) {
        return Ok(neg_infinity(kind, n_max, Variant::Remainder));
    }
    Ok(AbscissaEstimate { kind, value: s[0], n_used: n_max, stability: spread3(&s), variant: Variant::Remainder })
}

/// Decay faster than any `e^{σλ}`: far below `e^{-50λ}`, or slopes that keep
/// falling as `N` grows.
fn superexponential(log_vals: &[f64], pos: &[f64], s: &[f64]) -> bool {
    if log_vals.iter().zip(pos).any(|(r, l)| *l > 0.0 && *r < -50.0 * l) {
        return true;
    }
    let monotone = s.windows(2).all(|w| w[0] <= w[1] + 1e-9);
    let first = s[s.len() - 1];
    monotone && first - s[0] > 0.1 * libm::fabs(first) + 0.2
}

const RICHARDSON_GAP: usize = 4;

/// Removes the `c/λ` drift that logarithmic prefactors put into the slopes:
/// `(λ_j s_j - λ_{j+g} s_{j+g}) / (λ_j - λ_{j+g})`, for the first three `j`.
fn extrapolated(s: &[f64], pos: &[f64]) -> Vec<f64> {
    let mid = |k: usize| 0.5 * (pos[k] + pos[k + 1]);
    let g = RICHARDSON_GAP;
    (0..3)
        .filter(|j| j + g < s.len())
        .map(|j| {
            let (l0, l1) = (mid(j), mid(j + g));
            (l0 * s[j] - l1 * s[j + g]) / (l0 - l1)
        })
        .collect()
}

fn neg_infinity(kind: AbscissaKind, n: u64, variant: Variant) -> AbscissaEstimate {
    AbscissaEstimate { kind, value: f64::NEG_INFINITY, n_used: n, stability: 0.0, variant }
}

type Running = (Vec<f64>, Vec<f64>, Option<Vec<num_complex::Complex64>>);

fn running_quantities(spec: &SeriesSpec, kind: AbscissaKind, n: u64) -> Result<Running> {
    let len = n as usize;
    let mut lam = Vec::with_capacity(len);
    let mut q = Vec::with_capacity(len);
    let mut partial = if kind == AbscissaKind::Convergence { Some(Vec::with_capacity(len)) } else { None };
    let mut csum = ComplexSum::new();
    let mut rsum = NeumaierSum::new();
    spec.for_each_term(1, n, |_, l, a| {
        lam.push(l);
        match kind {
            AbscissaKind::Convergence => {
                csum.add(a);
                let v = csum.value();
                q.push(v.norm());
                partial.as_mut().unwrap().push(v);
            }
            AbscissaKind::Absolute => {
                rsum.add(a.norm());
                q.push(rsum.value());
            }
            AbscissaKind::Square => {
                rsum.add(a.norm_sqr());
                q.push(rsum.value());
            }
        }
    })?;
    Ok((lam, q, partial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_builtin, Family, FamilyParams};

    #[test]
    fn too_few_terms() {
        assert!(estimate_abscissa(&SeriesSpec::zeta(), AbscissaKind::Absolute, 999).is_err());
    }

    #[test]
    fn zeta_absolute() {
        let e = estimate_abscissa(&SeriesSpec::zeta(), AbscissaKind::Absolute, 100_000).unwrap();
        assert!((e.value - 1.0).abs() < 0.05, "{e:?}");
    }

    #[test]
    fn alternating_convergence_is_zero() {
        let e = estimate_abscissa(&SeriesSpec::alternating_ordinary(), AbscissaKind::Convergence, 100_000).unwrap();
        assert!(e.value.abs() < 0.1, "{e:?}");
    }

    #[test]
    fn loglog_square_is_neg_infinite() {
        let spec = make_builtin(FamilyParams::default_for(Family::LogLog)).unwrap();
        let e = estimate_abscissa(&spec, AbscissaKind::Square, 100_000).unwrap();
        assert!(e.is_neg_infinite(), "{e:?}");
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("2".parse::<AbscissaKind>().unwrap(), AbscissaKind::Square);
        assert!("x".parse::<AbscissaKind>().is_err());
    }
}
