use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::series::{exp_neg, SeriesSpec};
use crate::sum::{ComplexSum, NeumaierSum};

const TAIL_TARGET: f64 = 1e-6;
const AUTO_CAP: u64 = 1 << 24;

/// Draws of the random model `Σ a(n) z_n e^{-λ_n s}` with independent
/// uniform unimodular `z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSampleSet {
    pub s: Complex64,
    pub seed: u64,
    pub n_terms: u64,
    /// Estimated `Σ_{n>N} |a_n e^{-λ_n s}|² / Σ_{n≤N} |a_n e^{-λ_n s}|²`.
    pub tail_ratio: f64,
    /// `Σ_{n≤N} |a_n e^{-λ_n s}|²`, the exact second moment of each draw.
    pub second_moment: f64,
    pub values: Vec<Complex64>,
}

/// Geometric extrapolation from the last two dyadic blocks of `w`.
fn tail_ratio(w: &[f64]) -> f64 {
    let n = w.len();
    if n < 8 {
        return f64::INFINITY;
    }
    let total: f64 = w.iter().copied().collect::<NeumaierSum>().value();
    let b0: f64 = w[n / 2..].iter().copied().collect::<NeumaierSum>().value();
    let b1: f64 = w[n / 4..n / 2].iter().copied().collect::<NeumaierSum>().value();
    let r = b0 / b1;
    if !(r < 1.0) {
        return f64::INFINITY;
    }
    b0 * r / (1.0 - r) / total
}

/// Samples `count` draws. With `n_terms = None` the truncation doubles
/// until the discarded tail falls below `10⁻⁶` of the retained `L²` mass;
/// a fixed `n_terms` is used as given and its tail ratio is reported.
pub fn sample_random_phases(
    spec: &SeriesSpec,
    s: Complex64,
    count: usize,
    seed: u64,
    n_terms: Option<u64>,
) -> Result<PhaseSampleSet> {
    let s2 = spec.declared().square;
    if spec.max_index().is_none() && !s2.is_some_and(|s2| s.re > s2) {
        return Err(Error::Precondition("random model needs Re s above the square-mean abscissa".into()));
    }
    let scale = spec.scale();
    let weights = |n: u64| -> Result<Vec<Complex64>> {
        let mut w = Vec::with_capacity(n as usize);
        spec.for_each_term(1, n, |_, lambda, a| w.push(scale * a * exp_neg(lambda, s)))?;
        Ok(w)
    };
    let (terms, ratio) = match (spec.max_index(), n_terms) {
        (Some(m), cap) => {
            let mut w = weights(m)?;
            let n = cap.map_or(m, |c| c.min(m)) as usize;
            let mass = |z: &[Complex64]| z.iter().map(|z| z.norm_sqr()).collect::<NeumaierSum>().value();
            let r = mass(&w[n..]) / mass(&w[..n]);
            w.truncate(n);
            (w, r)
        }
        (None, Some(n)) => {
            let w = weights(n)?;
            let r = tail_ratio(&w.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
            (w, r)
        }
        (None, None) => {
            let mut n = 1024;
            loop {
                let w = weights(n)?;
                let r = tail_ratio(&w.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
                if r < TAIL_TARGET {
                    break (w, r);
                }
                if n >= AUTO_CAP {
                    return Err(Error::Precondition("tail mass stays above 1e-6 within the term cap".into()));
                }
                n *= 2;
            }
        }
    };
    let second_moment = terms.iter().map(|z| z.norm_sqr()).collect::<NeumaierSum>().value();
    let draw = |d: u64| -> Complex64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(d);
        let mut acc = ComplexSum::new();
        for w in &terms {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let theta = TAU * u;
            acc.add(*w * Complex64::new(libm::cos(theta), libm::sin(theta)));
        }
        acc.value()
    };
    #[cfg(feature = "parallel")]
    let values: Vec<Complex64> = {
        use rayon::prelude::*;
        (0..count as u64).into_par_iter().map(draw).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Complex64> = (0..count as u64).map(draw).collect();
    Ok(PhaseSampleSet { s, seed, n_terms: terms.len() as u64, tail_ratio: ratio, second_moment, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_moment_matches_weights() {
        let spec = SeriesSpec::alternating_ordinary();
        let set = sample_random_phases(&spec, Complex64::new(1.0, 0.0), 20000, 7, Some(500)).unwrap();
        let mean: f64 = set.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / set.values.len() as f64;
        let expect: f64 = (1..=500).map(|n| 1.0 / (n as f64 * n as f64)).sum();
        assert!((set.second_moment - expect).abs() < 1e-12);
        assert!((mean / expect - 1.0).abs() < 0.05);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = SeriesSpec::alternating_ordinary();
        let s = Complex64::new(0.8, 0.0);
        let a = sample_random_phases(&spec, s, 50, 3, Some(200)).unwrap();
        let b = sample_random_phases(&spec, s, 50, 3, Some(200)).unwrap();
        let c = sample_random_phases(&spec, s, 50, 4, Some(200)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn below_square_abscissa_rejected() {
        let spec = SeriesSpec::alternating_ordinary();
        let r = sample_random_phases(&spec, Complex64::new(0.5, 0.0), 10, 1, Some(100));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn automatic_truncation_meets_tail_target() {
        let spec = SeriesSpec::alternating_ordinary();
        let set = sample_random_phases(&spec, Complex64::new(2.0, 0.0), 10, 1, None).unwrap();
        assert!(set.tail_ratio < 1e-6);
        let tail: f64 = (set.n_terms + 1..10_000_000).map(|n| (n as f64).powi(-4)).sum();
        assert!(tail / set.second_moment < 2e-6);
    }
}
