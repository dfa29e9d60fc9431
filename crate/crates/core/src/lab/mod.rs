//! Numerical experiments on vertical translates `D(s + iτ)`: sup distances
//! to a target on a compact, density scans, random-phase models and mean
//! squares.

mod engine;
mod mean_square;
mod phases;
mod scan;
mod stats;

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::compact::CompactRect;
use crate::error::Result;
use crate::eval::{PathGuard, TailOptions};
use crate::series::SeriesSpec;
use crate::Target;
use engine::Engine;

pub use mean_square::{mean_square, MeanSquare};
pub use phases::{sample_random_phases, PhaseSampleSet};
pub use scan::{scan_translates, scan_translates_resumable, ScanCheckpoint, ScanParams, ScanReport, ScanState};
pub use stats::{
    compare_distributions, mv_bound_check, random_mv_instance, KsResult, MvCheck, Observable, ObservableSamples,
    Projection,
};

/// How translates are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Options for the tail-bounded evaluator.
    pub tail: TailOptions,
    /// Terms used when no tail bound applies.
    pub partial_budget: u64,
    /// Möbius truncation for the prime series.
    pub prime_terms: u64,
    pub guard: PathGuard,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tail: TailOptions { min_cutoff: 1000, ..TailOptions::default() },
            partial_budget: 100_000,
            prime_terms: 30,
            guard: PathGuard::default(),
        }
    }
}

/// Outcome of a sup-distance evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Value(f64),
    /// The translated compact came too close to a zero of `ζ`.
    Excluded,
}

impl Distance {
    pub fn value(self) -> Option<f64> {
        match self {
            Distance::Value(d) => Some(d),
            Distance::Excluded => None,
        }
    }
}

pub(crate) fn sup_from(values: &[Complex64], targets: &[Complex64]) -> f64 {
    values.iter().zip(targets).map(|(v, f)| (*v - *f).norm()).fold(0.0, f64::max)
}

/// `max_{s ∈ grid(K)} |D(s + iτ) - f(s)|`.
pub fn sup_distance(
    spec: &SeriesSpec,
    tau: f64,
    target: &dyn Target,
    compact: &CompactRect,
    cfg: &EvalConfig,
) -> Result<Distance> {
    let points = compact.grid_points();
    let targets: Vec<Complex64> = points.iter().map(|p| target.at(*p)).collect();
    let mut engine = Engine::new(spec, points, cfg)?;
    engine.prepare(tau, tau)?;
    let sample = engine.eval(tau)?;
    Ok(match sample.values {
        Some(v) => Distance::Value(sup_from(&v, &targets)),
        None => Distance::Excluded,
    })
}

/// `D(s + iτ_k)` for `τ_k = k·step`, `0 ≤ τ_k ≤ t_max`; `None` marks
/// excluded translates.
pub fn translate_values(
    spec: &SeriesSpec,
    s: Complex64,
    t_max: f64,
    step: f64,
    cfg: &EvalConfig,
) -> Result<Vec<Option<Complex64>>> {
    if !(step > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(crate::Error::Precondition("need step > 0 and finite t_max >= 0".into()));
    }
    let k_max = libm::floor(t_max / step + 1e-9) as u64;
    let mut engine = Engine::new(spec, alloc::vec![s], cfg)?;
    engine.prepare(0.0, k_max as f64 * step)?;
    let samples = engine.eval_range(0, k_max + 1, step)?;
    Ok(samples.into_iter().map(|x| x.values.map(|v| v[0])).collect())
}
