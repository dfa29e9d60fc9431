use alloc::vec::Vec;
use num_complex::Complex64;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};

const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    Re,
    Im,
    Abs,
}

impl Projection {
    pub fn apply(self, z: Complex64) -> f64 {
        match self {
            Projection::Re => z.re,
            Projection::Im => z.im,
            Projection::Abs => z.norm(),
        }
    }
}

/// A real observable `z ↦ proj(D(s))` at a fixed point `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observable {
    pub s: Complex64,
    pub projection: Projection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSamples {
    pub observable: Observable,
    pub values: Vec<f64>,
}

impl ObservableSamples {
    pub fn from_complex(observable: Observable, zs: &[Complex64]) -> Self {
        Self { observable, values: zs.iter().map(|z| observable.projection.apply(*z)).collect() }
    }
}

/// Two-sample Kolmogorov–Smirnov result at level 0.01.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub reject: bool,
}

/// `sup_x |F_a(x) - F_b(x)|` with the asymptotic critical value
/// `√(-ln(0.005)/2)·√((n+m)/(nm))`.
pub fn compare_distributions(a: &ObservableSamples, b: &ObservableSamples) -> Result<KsResult> {
    if a.observable != b.observable {
        return Err(Error::MismatchedObservables);
    }
    if a.values.len() < MIN_SAMPLES || b.values.len() < MIN_SAMPLES {
        return Err(Error::Precondition("each sample needs at least 1000 values".into()));
    }
    if a.values.iter().chain(&b.values).any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite sample value".into()));
    }
    let mut x = a.values.clone();
    let mut y = b.values.clone();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let (nf, mf) = (n as f64, m as f64);
    let critical = libm::sqrt(-libm::log(0.005) / 2.0) * libm::sqrt((nf + mf) / (nf * mf));
    Ok(KsResult { statistic: d, critical, reject: d > critical })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `|Σ_{r≠s} ū_r u_s/(λ_r - λ_s)|` with `(3π/2) Σ |u_r|²/δ_r`,
/// `δ_r` the distance from `λ_r` to the nearest other frequency.
pub fn mv_bound_check(lambdas: &[f64], u: &[Complex64]) -> Result<MvCheck> {
    if lambdas.len() != u.len() {
        return Err(Error::Precondition("frequencies and coefficients differ in length".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite()) || u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Precondition("inputs must be finite".into()));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::RepeatedFrequency(w[0]));
    }
    let mut lhs = ComplexSum::new();
    for (r, (lr, ur)) in lambdas.iter().zip(u).enumerate() {
        for (s, (ls, us)) in lambdas.iter().zip(u).enumerate() {
            if r != s {
                lhs.add(ur.conj() * *us / (lr - ls));
            }
        }
    }
    let mut rhs = NeumaierSum::new();
    for (lr, ur) in lambdas.iter().zip(u) {
        let i = sorted.partition_point(|x| x < lr);
        let below = if i > 0 { lr - sorted[i - 1] } else { f64::INFINITY };
        let above = sorted.get(i + 1).map_or(f64::INFINITY, |x| x - lr);
        let delta = below.min(above);
        if delta.is_finite() {
            rhs.add(ur.norm_sqr() / delta);
        }
    }
    let (lhs, rhs) = (lhs.value().norm(), 1.5 * core::f64::consts::PI * rhs.value());
    Ok(MvCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 8.0 * f64::EPSILON) })
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Random instance `index` for seed `seed`: `n` uniform in `1..=n_max`,
/// frequencies with gaps uniform in `[10⁻³, 1)` from a uniform offset, and
/// coefficients uniform in the square `[-1, 1]²`.
pub fn random_mv_instance(seed: u64, index: u64, n_max: usize) -> (Vec<f64>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = 1 + (rng.next_u64() % n_max.max(1) as u64) as usize;
    let mut lambda = 10.0 * (unit(&mut rng) - 0.5);
    let mut lambdas = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        lambdas.push(lambda);
        lambda += 1e-3 + (1.0 - 1e-3) * unit(&mut rng);
        u.push(Complex64::new(2.0 * unit(&mut rng) - 1.0, 2.0 * unit(&mut rng) - 1.0));
    }
    (lambdas, u)
}
