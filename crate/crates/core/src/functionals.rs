//! Atomic measures on compacts and the checks built on their Laplace
//! transforms: divergence of `Σ |a(n) L_μ(λ(n))|`, growth windows of `L_μ`,
//! and the window-density condition on the coefficients.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::compact::CompactRect;
use crate::error::{Error, Result};
use crate::series::SeriesSpec;
use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: Complex64,
    pub weight: Complex64,
}

/// `μ = Σ c_j δ_{s_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    support: CompactRect,
}

impl DiscreteMeasure {
    /// Requires at least one atom and a moment `Σ c_j s_j^r` that is not
    /// numerically zero for some `r ≤` number of atoms.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mu = Self::allow_degenerate(atoms)?;
        if mu.nonzero_moment().is_none() {
            return Err(Error::Precondition("all moments of the measure vanish".into()));
        }
        Ok(mu)
    }

    /// Skips the moment check, e.g. for measures that cancel by construction.
    pub fn allow_degenerate(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Precondition("a measure needs at least one atom".into()));
        }
        if atoms.iter().any(|a| {
            !(a.at.re.is_finite() && a.at.im.is_finite() && a.weight.re.is_finite() && a.weight.im.is_finite())
        }) {
            return Err(Error::MalformedParams("atoms must be finite".into()));
        }
        let points: Vec<Complex64> = atoms.iter().map(|a| a.at).collect();
        let support = CompactRect::bounding(&points, 1e-3)?;
        Ok(Self { atoms, support })
    }

    pub fn single(at: Complex64, weight: Complex64) -> Result<Self> {
        Self::new(alloc::vec![Atom { at, weight }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support(&self) -> &CompactRect {
        &self.support
    }

    /// `b = max Re s_j`.
    pub fn max_re(&self) -> f64 {
        self.atoms.iter().map(|a| a.at.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `R = max |s_j|`, the exponential type of `L_μ`.
    pub fn exponential_type(&self) -> f64 {
        self.atoms.iter().map(|a| a.at.norm()).fold(0.0, f64::max)
    }

    /// `∫ s^r dμ`.
    pub fn moment(&self, r: u32) -> Complex64 {
        let mut acc = ComplexSum::new();
        for a in &self.atoms {
            acc.add(a.weight * a.at.powu(r));
        }
        acc.value()
    }

    /// Smallest `r ≤ #atoms` with a moment above rounding level.
    pub fn nonzero_moment(&self) -> Option<u32> {
        (0..=self.atoms.len() as u32).find(|&r| {
            let scale: f64 = self.atoms.iter().map(|a| a.weight.norm() * libm::pow(a.at.norm(), r as f64)).sum();
            self.moment(r).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE)
        })
    }

    /// `μ₁ + μ₂`.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self::allow_degenerate(atoms)
    }
}

/// `L_μ(x) = Σ c_j e^{-x s_j}`.
pub fn laplace_transform(mu: &DiscreteMeasure, x: f64) -> Complex64 {
    let mut acc = ComplexSum::new();
    for a in &mu.atoms {
        acc.add(a.weight * (-a.at * x).exp());
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    /// `(N, Σ_{n≤N} |a(n) L_μ(λ(n))|)` at powers of two and at `n_max`.
    pub checkpoints: Vec<(u64, f64)>,
    /// First index at which the running sum exceeds each threshold.
    pub crossings: Vec<Option<u64>>,
    pub final_sum: f64,
    /// The running sum at `n_max / 100`.
    pub reference_sum: f64,
    /// `final_sum > 10 · reference_sum`.
    pub divergence_evidence: bool,
    /// Least-squares slope of `log(ΔS/Δλ)` against `λ` over the last dyadic windows.
    pub growth_rate: Option<f64>,
}

/// Running sums of `|a(n)| · |L_μ(λ(n))|`.
pub fn divergence_oracle(
    spec: &SeriesSpec,
    mu: &DiscreteMeasure,
    n_max: u64,
    thresholds: &[f64],
) -> Result<DivergenceReport> {
    if n_max < 1000 {
        return Err(Error::Precondition("n_max must be at least 1000".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("thresholds must be increasing".into()));
    }
    let reference_at = n_max / 100;
    let mut acc = NeumaierSum::new();
    let mut checkpoints = Vec::new();
    let mut lam_at = Vec::new();
    let mut crossings = alloc::vec![None; thresholds.len()];
    let mut next_threshold = 0;
    let mut next_check = 1u64;
    let mut reference_sum = 0.0;
    spec.for_each_term(1, n_max, |n, lam, a| {
        acc.add(a.norm() * laplace_transform(mu, lam).norm());
        let v = acc.value();
        while next_threshold < thresholds.len() && v > thresholds[next_threshold] {
            crossings[next_threshold] = Some(n);
            next_threshold += 1;
        }
        if n == reference_at {
            reference_sum = v;
        }
        if n == next_check || n == n_max {
            checkpoints.push((n, v));
            lam_at.push(lam);
            if n == next_check {
                next_check *= 2;
            }
        }
    })?;
    let final_sum = acc.value();
    Ok(DivergenceReport {
        growth_rate: growth_rate(&checkpoints, &lam_at),
        checkpoints,
        crossings,
        final_sum,
        reference_sum,
        divergence_evidence: final_sum > 10.0 * reference_sum,
    })
}

fn growth_rate(checkpoints: &[(u64, f64)], lam: &[f64]) -> Option<f64> {
    // dyadic checkpoints only; the trailing n_max entry may break the pattern
    let dyadic: Vec<usize> = (0..checkpoints.len()).filter(|&i| checkpoints[i].0.is_power_of_two()).collect();
    let pts: Vec<(f64, f64)> = dyadic
        .windows(2)
        .filter_map(|w| {
            let (i, j) = (w[0], w[1]);
            let ds = checkpoints[j].1 - checkpoints[i].1;
            let dl = lam[j] - lam[i];
            (ds > 0.0 && dl > 0.0).then(|| (0.5 * (lam[i] + lam[j]), libm::log(ds / dl)))
        })
        .collect();
    let tail = &pts[pts.len().saturating_sub(6)..];
    if tail.len() < 3 {
        return None;
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthWindow {
    pub y: f64,
    pub length: f64,
}

/// Smallest `M ≥ 1` with `-M log M + M log(eR) + R < -d`, found by doubling
/// and bisection.
pub fn markov_degree_factor(exponential_type: f64, d: f64) -> f64 {
    let r = exponential_type;
    if r == 0.0 {
        return 1.0;
    }
    let h = |m: f64| -m * libm::log(m) + m * libm::log(core::f64::consts::E * r) + r + d;
    if h(1.0) < 0.0 {
        return 1.0;
    }
    let mut hi = 2.0;
    while h(hi) >= 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Default window parameter `δ = 1/(8M²)`.
pub fn default_window_delta(mu: &DiscreteMeasure, d: f64) -> f64 {
    let m = markov_degree_factor(mu.exponential_type(), d);
    1.0 / (8.0 * m * m)
}

const WINDOW_SAMPLES: usize = 9;

/// Grid points `y` in `[x_lo, x_hi]` such that `|L_μ| ≥ e^{-dy}/2` at
/// every sample of `[y, y + δ/y²]`. `delta = None` uses [`default_window_delta`].
pub fn find_growth_windows(
    mu: &DiscreteMeasure,
    d: f64,
    x_lo: f64,
    x_hi: f64,
    grid_step: f64,
    delta: Option<f64>,
) -> Result<Vec<GrowthWindow>> {
    if !(d > 0.0) {
        return Err(Error::Precondition("d must be positive".into()));
    }
    if !(grid_step > 0.0 && grid_step <= 1e-2) {
        return Err(Error::Precondition("grid step must lie in (0, 0.01]".into()));
    }
    if !(x_lo > 0.0 && x_lo <= x_hi) {
        return Err(Error::Precondition("need 0 < x_lo <= x_hi".into()));
    }
    let delta = delta.unwrap_or_else(|| default_window_delta(mu, d));
    let steps = libm::floor((x_hi - x_lo) / grid_step + 1e-9) as usize;
    let mut out = Vec::new();
    for i in 0..=steps {
        let y = x_lo + grid_step * i as f64;
        let length = delta / (y * y);
        let floor = 0.5 * libm::exp(-d * y);
        let ok = (0..WINDOW_SAMPLES).all(|k| {
            let x = y + length * k as f64 / (WINDOW_SAMPLES - 1) as f64;
            laplace_transform(mu, x).norm() >= floor
        });
        if ok {
            out.push(GrowthWindow { y, length });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub alpha: f64,
    pub beta: f64,
    pub x_grid: Vec<f64>,
    /// `Σ |a(n)|` over `λ(n) ∈ [x, x + α/x²]`.
    pub window_sums: Vec<f64>,
    pub window_counts: Vec<u64>,
    /// `e^{(σ_a - β)x}`.
    pub bounds: Vec<f64>,
    pub declared_sigma_a: f64,
    /// `min_x window_sum / bound`.
    pub fitted_c: f64,
    pub pass: bool,
    /// Frequencies ran past the index budget before the last grid point.
    pub truncated: bool,
}

impl DensityReport {
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.window_sums.iter().zip(&self.bounds).map(|(s, b)| s / b)
    }
}

/// Smallest `n ≥ from` with `λ(n) ≥ x`, or `None` past `budget`.
fn first_index_at_least(spec: &SeriesSpec, x: f64, from: u64, budget: u64) -> Result<Option<u64>> {
    let at = |n: u64| spec.frequency(n);
    if at(from)? >= x {
        return Ok(Some(from));
    }
    let mut lo = from;
    let mut step = 1u64;
    let mut hi = from + 1;
    loop {
        if hi > budget {
            if at(budget)? < x {
                return Ok(None);
            }
            hi = budget;
            break;
        }
        if at(hi)? >= x {
            break;
        }
        lo = hi;
        step = step.saturating_mul(2);
        hi = hi.saturating_add(step);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if at(mid)? >= x {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

struct WindowTally {
    sum: f64,
    count: u64,
    truncated: bool,
}

fn tally_window(spec: &SeriesSpec, x: f64, alpha: f64, budget: u64) -> Result<WindowTally> {
    let budget = spec.max_index().map_or(budget, |m| m.min(budget));
    let right = x + alpha / (x * x);
    let Some(start) = first_index_at_least(spec, x, 1, budget)? else {
        return Ok(WindowTally { sum: 0.0, count: 0, truncated: true });
    };
    let mut acc = NeumaierSum::new();
    let mut count = 0;
    let mut n = start;
    loop {
        if n > budget {
            return Ok(WindowTally { sum: acc.value(), count, truncated: true });
        }
        if spec.frequency(n)? > right {
            break;
        }
        acc.add(spec.modulus(n)?);
        count += 1;
        n += 1;
    }
    Ok(WindowTally { sum: acc.value(), count, truncated: false })
}

/// Default index budget for [`window_sum_check`].
pub const WINDOW_INDEX_BUDGET: u64 = 100_000_000;

/// Coefficient mass in the windows `[x, x + α/x²]` against `C e^{(σ_a - β)x}`.
pub fn window_sum_check(
    spec: &SeriesSpec,
    alpha: f64,
    beta: f64,
    x_grid: &[f64],
    index_budget: u64,
) -> Result<DensityReport> {
    let sigma_a = spec
        .declared()
        .absolute
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Precondition("series must declare a finite σ_a".into()))?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Precondition("alpha and beta must be positive".into()));
    }
    if x_grid.is_empty() || x_grid[0] < 1.0 || x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("x grid must be increasing with min >= 1".into()));
    }
    let tallies: Vec<WindowTally> = tally_all(spec, alpha, x_grid, index_budget)?;
    let bounds: Vec<f64> = x_grid.iter().map(|x| libm::exp((sigma_a - beta) * x)).collect();
    let window_sums: Vec<f64> = tallies.iter().map(|t| t.sum).collect();
    let window_counts: Vec<u64> = tallies.iter().map(|t| t.count).collect();
    let truncated = tallies.iter().any(|t| t.truncated);
    let fitted_c = window_sums.iter().zip(&bounds).map(|(s, b)| s / b).fold(f64::INFINITY, f64::min);
    let pass = !truncated && fitted_c > 0.0 && window_counts.iter().all(|&c| c > 0);
    Ok(DensityReport {
        alpha,
        beta,
        x_grid: x_grid.to_vec(),
        window_sums,
        window_counts,
        bounds,
        declared_sigma_a: sigma_a,
        fitted_c,
        pass,
        truncated,
    })
}

#[cfg(feature = "parallel")]
fn tally_all(spec: &SeriesSpec, alpha: f64, xs: &[f64], budget: u64) -> Result<Vec<WindowTally>> {
    use rayon::prelude::*;
    xs.par_iter().map(|&x| tally_window(spec, x, alpha, budget)).collect()
}

#[cfg(not(feature = "parallel"))]
fn tally_all(spec: &SeriesSpec, alpha: f64, xs: &[f64], budget: u64) -> Result<Vec<WindowTally>> {
    xs.iter().map(|&x| tally_window(spec, x, alpha, budget)).collect()
}
