//! Shared evaluator for translates `D(s_j + iτ)` at a fixed set of base
//! points, used by scans, observables and mean squares.
//!
//! Terms `a_n e^{-λ_n s_j}` are tabulated once. Along an arithmetic grid
//! `τ_k = k·h` the phases `e^{-iλ_n τ_k}` are advanced by rotation inside
//! chunks of [`CHUNK`] steps and recomputed exactly at each chunk start, so
//! every value depends only on `k` and not on where a run started.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::EvalConfig;
use crate::error::{Error, Result};
use crate::eval::{eval_prime_series_with, eval_zeta, TailPlan};
use crate::series::{exp_neg, SeriesSpec};
use crate::sum::ComplexSum;

pub(crate) const CHUNK: u64 = 64;

/// Values at every base point, or `None` when the translate was excluded.
#[derive(Debug, Clone)]
pub(crate) struct Sample {
    pub values: Option<Vec<Complex64>>,
    pub bound: f64,
    pub certified: bool,
}

enum Method<'a> {
    Table(Table<'a>),
    Zeta { shift: f64 },
    Prime,
}

struct Table<'a> {
    lambdas: Vec<f64>,
    h: Vec<Vec<Complex64>>,
    plans: Vec<Option<TailPlan<'a>>>,
    finite: Option<u64>,
}

pub(crate) struct Engine<'a> {
    spec: &'a SeriesSpec,
    points: Vec<Complex64>,
    cfg: EvalConfig,
    method: Method<'a>,
    band: (f64, f64, f64),
}

impl<'a> Engine<'a> {
    pub fn new(spec: &'a SeriesSpec, points: Vec<Complex64>, cfg: &EvalConfig) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("no evaluation points".into()));
        }
        let re_lo = points.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
        let im_lo = points.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
        let im_hi = points.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
        let method = if spec.is_prime_zeta() {
            if !(re_lo > 0.0) {
                return Err(Error::Precondition("prime series needs Re s > 0".into()));
            }
            Method::Prime
        } else if let Some(shift) = spec.zeta_shift() {
            Method::Zeta { shift }
        } else {
            let finite = spec.max_index();
            let plans = points
                .iter()
                .map(|p| if finite.is_some() { None } else { TailPlan::new(spec, p.re, cfg.tail).ok() })
                .collect();
            Method::Table(Table { lambdas: Vec::new(), h: vec![Vec::new(); points.len()], plans, finite })
        };
        Ok(Self { spec, points, cfg: *cfg, method, band: (re_lo, im_lo, im_hi) })
    }

    /// Terms summed at point `j` for translate `tau`, with remainder bound.
    fn cutoff(&self, table: &Table<'a>, j: usize, tau: f64) -> (u64, f64, bool) {
        if let Some(n) = table.finite {
            return (n, 0.0, true);
        }
        let t = self.points[j].im + tau;
        match &table.plans[j] {
            Some(plan) => match plan.cutoff(t) {
                Some(x) => (x - 1, plan.bound(x, t), true),
                None => (self.cfg.partial_budget, plan.bound(self.cfg.partial_budget + 1, t), false),
            },
            None => {
                let n = self.cfg.partial_budget;
                let last = table.h[j].get(n as usize - 1).map_or(f64::INFINITY, |z| z.norm());
                (n, last, false)
            }
        }
    }

    fn terms_needed(&self, table: &Table<'a>, taus: &[f64]) -> u64 {
        let mut n = 0;
        for j in 0..self.points.len() {
            for &tau in taus {
                n = n.max(self.cutoff(table, j, tau).0);
            }
        }
        n
    }

    fn extend(&mut self, n: u64) -> Result<()> {
        let Method::Table(table) = &mut self.method else { return Ok(()) };
        let have = table.lambdas.len() as u64;
        if n <= have {
            return Ok(());
        }
        let points = &self.points;
        let (lambdas, h) = (&mut table.lambdas, &mut table.h);
        self.spec.for_each_term(have + 1, n, |_, lambda, a| {
            lambdas.push(lambda);
            for (row, p) in h.iter_mut().zip(points) {
                row.push(a * exp_neg(lambda, *p));
            }
        })
    }

    /// Makes the table long enough for every `τ` in `[tau_lo, tau_hi]`.
    pub fn prepare(&mut self, tau_lo: f64, tau_hi: f64) -> Result<()> {
        let needed = match &self.method {
            Method::Table(table) => {
                // partial-budget rows need one extra term for their heuristic bound
                let mut n = self.terms_needed(table, &[tau_lo, tau_hi]);
                if table.finite.is_none() && table.plans.iter().any(|p| p.is_none()) {
                    n = n.max(self.cfg.partial_budget);
                }
                if tau_lo < 0.0 && tau_hi > 0.0 {
                    n = n.max(self.terms_needed(table, &[0.0]));
                }
                n
            }
            _ => 0,
        };
        self.extend(needed)
    }

    fn finish(&self, table: &Table<'a>, tau: f64, phase: impl Fn(usize) -> Complex64) -> Sample {
        let scale = self.spec.scale();
        let mut values = Vec::with_capacity(self.points.len());
        let (mut bound, mut certified) = (0.0f64, true);
        for j in 0..self.points.len() {
            let (n, b, c) = self.cutoff(table, j, tau);
            let mut acc = ComplexSum::new();
            for (i, h) in table.h[j][..n as usize].iter().enumerate() {
                acc.add(*h * phase(i));
            }
            values.push(acc.value() * scale);
            bound = bound.max(b * scale.norm());
            certified &= c;
        }
        Sample { values: Some(values), bound, certified }
    }

    /// One translate, phases computed directly. Needs [`Engine::prepare`].
    pub fn eval(&self, tau: f64) -> Result<Sample> {
        match &self.method {
            Method::Table(table) => {
                Ok(self.finish(table, tau, |i| exp_neg(table.lambdas[i], Complex64::new(0.0, tau))))
            }
            Method::Zeta { shift } => {
                let scale = self.spec.scale();
                let mut values = Vec::with_capacity(self.points.len());
                let (mut bound, mut certified) = (0.0f64, true);
                for p in &self.points {
                    let r = eval_zeta(*p + Complex64::new(*shift, tau))?;
                    values.push(r.value * scale);
                    bound = bound.max(r.remainder_bound * scale.norm());
                    certified &= r.certified;
                }
                Ok(Sample { values: Some(values), bound, certified })
            }
            Method::Prime => {
                let (re_lo, im_lo, im_hi) = self.band;
                match self.cfg.guard.check_band(re_lo, im_lo + tau, im_hi + tau) {
                    Err(Error::ZeroCrossing { .. }) => {
                        return Ok(Sample { values: None, bound: 0.0, certified: true });
                    }
                    r => r?,
                }
                let scale = self.spec.scale();
                let mut values = Vec::with_capacity(self.points.len());
                let (mut bound, mut certified) = (0.0f64, true);
                for p in &self.points {
                    match eval_prime_series_with(*p + Complex64::new(0.0, tau), self.cfg.prime_terms, None) {
                        Ok(r) => {
                            values.push(r.value * scale);
                            bound = bound.max(r.remainder_bound * scale.norm());
                            certified &= r.certified;
                        }
                        Err(Error::ZeroCrossing { .. }) => {
                            return Ok(Sample { values: None, bound: 0.0, certified: true });
                        }
                        Err(e) => return Err(e),
                    }
                }
                Ok(Sample { values: Some(values), bound, certified })
            }
        }
    }

    /// Translates `τ_k = k·step` for `k` in `[k_lo, k_hi)`, which must not
    /// cross a chunk boundary. Needs [`Engine::prepare`] over the range.
    fn eval_run(&self, k_lo: u64, k_hi: u64, step: f64) -> Result<Vec<Sample>> {
        let Method::Table(table) = &self.method else {
            return (k_lo..k_hi).map(|k| self.eval(k as f64 * step)).collect();
        };
        let anchor = k_lo / CHUNK * CHUNK;
        let last_tau = (k_hi - 1) as f64 * step;
        let n = (self.terms_needed(table, &[anchor as f64 * step, last_tau]) as usize).min(table.lambdas.len());
        let lambdas = &table.lambdas[..n];
        let mut phase: Vec<Complex64> =
            lambdas.iter().map(|&l| exp_neg(l, Complex64::new(0.0, anchor as f64 * step))).collect();
        let rot: Vec<Complex64> = lambdas.iter().map(|&l| exp_neg(l, Complex64::new(0.0, step))).collect();
        let mut out = Vec::with_capacity((k_hi - k_lo) as usize);
        for k in anchor..k_hi {
            if k > anchor {
                for (p, r) in phase.iter_mut().zip(&rot) {
                    *p *= *r;
                }
            }
            if k >= k_lo {
                let tau = k as f64 * step;
                out.push(self.finish(table, tau, |i| phase[i]));
            }
        }
        Ok(out)
    }

    /// Translates `τ_k = k·step` for `k` in `[k_lo, k_hi)`, in order.
    pub fn eval_range(&self, k_lo: u64, k_hi: u64, step: f64) -> Result<Vec<Sample>> {
        let mut runs = Vec::new();
        let mut k = k_lo;
        while k < k_hi {
            let end = ((k / CHUNK + 1) * CHUNK).min(k_hi);
            runs.push((k, end));
            k = end;
        }
        #[cfg(feature = "parallel")]
        let parts: Vec<Result<Vec<Sample>>> = {
            use rayon::prelude::*;
            runs.par_iter().map(|&(a, b)| self.eval_run(a, b, step)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Result<Vec<Sample>>> = runs.iter().map(|&(a, b)| self.eval_run(a, b, step)).collect();
        let mut out = Vec::with_capacity((k_hi - k_lo) as usize);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }
}
