//! Rearrangements: the classical scalar Riemann construction and greedy
//! steering of function-valued partial sums toward a target on compacts.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::compact::CompactRect;
use crate::error::{Error, Result};
use crate::series::{exp_neg, SeriesSpec};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::Target;

/// Result of [`riemann_rearrange_scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRearrangement {
    pub target: f64,
    /// Original indices in the order taken.
    pub prefix: Vec<u64>,
    /// Partial sum after each step.
    pub partials: Vec<f64>,
    /// Term added at each step.
    pub terms: Vec<f64>,
    /// First step (0-based) at which the partial sum reached the other side of the target.
    pub first_crossing: Option<usize>,
}

impl ScalarRearrangement {
    pub fn final_error(&self) -> f64 {
        self.partials.last().map_or(libm::fabs(self.target), |p| libm::fabs(p - self.target))
    }

    /// Steps after the first crossing at which `|S_k - target|` exceeds the
    /// largest term magnitude used since that crossing.
    pub fn invariant_violations(&self) -> Vec<usize> {
        let Some(c) = self.first_crossing else { return Vec::new() };
        let mut largest = 0.0f64;
        let mut bad = Vec::new();
        for k in c..self.partials.len() {
            largest = largest.max(libm::fabs(self.terms[k]));
            if libm::fabs(self.partials[k] - self.target) > largest {
                bad.push(k);
            }
        }
        bad
    }
}

struct SignCursor {
    next: u64,
    positive: bool,
}

impl SignCursor {
    fn advance(&mut self, terms: &dyn Fn(u64) -> f64, index_budget: u64) -> Result<(u64, f64)> {
        while self.next <= index_budget {
            let n = self.next;
            self.next += 1;
            let v = terms(n);
            if (self.positive && v > 0.0) || (!self.positive && v < 0.0) {
                return Ok((n, v));
            }
        }
        Err(Error::PatternExhausted(if self.positive { "positive terms" } else { "negative terms" }))
    }
}

/// Greedy Riemann rearrangement: unused positive terms while the partial sum
/// is `≤ target`, unused negative terms otherwise. Terms are indexed from 1;
/// zero terms are skipped. Indices beyond `index_budget` are never examined.
pub fn riemann_rearrange_scalar(
    terms: &dyn Fn(u64) -> f64,
    target: f64,
    n_steps: usize,
    index_budget: u64,
) -> Result<ScalarRearrangement> {
    let mut pos = SignCursor { next: 1, positive: true };
    let mut neg = SignCursor { next: 1, positive: false };
    let mut acc = NeumaierSum::new();
    let mut out = ScalarRearrangement {
        target,
        prefix: Vec::with_capacity(n_steps),
        partials: Vec::with_capacity(n_steps),
        terms: Vec::with_capacity(n_steps),
        first_crossing: None,
    };
    let start_below = 0.0 <= target;
    for step in 0..n_steps {
        let (n, v) =
            if acc.value() <= target { pos.advance(terms, index_budget)? } else { neg.advance(terms, index_budget)? };
        acc.add(v);
        let s = acc.value();
        out.prefix.push(n);
        out.terms.push(v);
        out.partials.push(s);
        if out.first_crossing.is_none() && ((start_below && s > target) || (!start_below && s <= target)) {
            out.first_crossing = Some(step);
        }
    }
    Ok(out)
}

/// Real terms `a(n) e^{-λ(n)σ}` of a series with real coefficients.
pub fn real_terms(spec: &SeriesSpec, sigma: f64) -> impl Fn(u64) -> f64 + '_ {
    move |n| {
        let a = spec.coeff(n).unwrap_or_default();
        let lam = spec.frequency(n).unwrap_or(f64::INFINITY);
        a.re * libm::exp(-lam * sigma)
    }
}

/// One stage of a steering schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub compact: CompactRect,
    pub tolerance: f64,
    /// Step budget for this stage.
    pub budget: u64,
}

impl Stage {
    /// Stages on a fixed compact with grid density doubling each stage.
    pub fn doubling(compact: CompactRect, tolerances: &[f64], budgets: &[u64]) -> Vec<Stage> {
        let mut k = compact;
        tolerances
            .iter()
            .zip(budgets)
            .map(|(&tolerance, &budget)| {
                let s = Stage { compact: k, tolerance, budget };
                k = k.doubled();
                s
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub stage: usize,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutcome {
    pub start_step: u64,
    pub end_step: u64,
    pub start_error: f64,
    pub end_error: f64,
    pub met: bool,
    /// Budget exhausted without reaching the tolerance.
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementTrace {
    pub prefix: Vec<u64>,
    pub checkpoints: Vec<Checkpoint>,
    pub schedule: Vec<Stage>,
    pub stages: Vec<StageOutcome>,
}

impl RearrangementTrace {
    pub fn stalled_stage(&self) -> Option<usize> {
        self.stages.iter().position(|s| s.stalled)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.stages.last().map(|s| s.end_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteerOptions {
    /// Number of smallest unused indices offered at each step.
    pub window: usize,
    /// Record a checkpoint every this many steps (and at stage boundaries).
    pub checkpoint_every: u64,
}

impl Default for SteerOptions {
    fn default() -> Self {
        Self { window: 64, checkpoint_every: 1000 }
    }
}

/// `a(n) e^{-λ(n)s}` over the grid.
pub fn term_vector(spec: &SeriesSpec, n: u64, grid: &[Complex64]) -> Result<Vec<Complex64>> {
    let a = spec.coeff(n)?;
    let lam = spec.frequency(n)?;
    Ok(grid.iter().map(|&s| a * exp_neg(lam, s)).collect())
}

fn sup_error(acc: &[ComplexSum], target: &[Complex64]) -> f64 {
    acc.iter().zip(target).map(|(a, t)| (a.value() - t).norm()).fold(0.0, f64::max)
}

fn check_strip(spec: &SeriesSpec, schedule: &[Stage]) -> Result<()> {
    let d = spec.declared();
    let (Some(sc), Some(sa)) = (d.convergence, d.absolute) else {
        return Err(Error::Precondition("σ_c and σ_a must be declared".into()));
    };
    if !(sc < sa) {
        return Err(Error::Precondition("rearrangement needs σ_c < σ_a".into()));
    }
    if schedule.is_empty() {
        return Err(Error::Precondition("empty schedule".into()));
    }
    for st in schedule {
        if !(st.compact.re_lo > sc && st.compact.re_hi < sa) {
            return Err(Error::Precondition("stage compact must lie inside σ_c < Re s < σ_a".into()));
        }
    }
    Ok(())
}

struct StageGrid {
    grid: Vec<Complex64>,
    target: Vec<Complex64>,
}

impl StageGrid {
    fn new(stage: &Stage, target: &dyn Target) -> Self {
        let grid = stage.compact.grid_points();
        let target = grid.iter().map(|&s| target.at(s)).collect();
        Self { grid, target }
    }

    /// Partial sums of `prefix` from scratch, in order.
    fn accumulate(&self, spec: &SeriesSpec, prefix: &[u64]) -> Result<Vec<ComplexSum>> {
        let mut acc = alloc::vec![ComplexSum::new(); self.grid.len()];
        for &n in prefix {
            let v = term_vector(spec, n, &self.grid)?;
            for (a, t) in acc.iter_mut().zip(v) {
                a.add(t);
            }
        }
        Ok(acc)
    }
}

/// Greedy steering: at each step append, among the `window` smallest unused
/// indices, the term minimizing `max_grid |current + term - target|` (ties to
/// the lowest index). A stage ends when its tolerance is met or its budget is
/// spent; partial sums are then rebuilt on the next stage's grid. A stage
/// that ends unmet is cut back to the best prefix it reached, and its freed
/// indices return to the pool, so no stage ends above its starting error.
pub fn steer_rearrange(
    spec: &SeriesSpec,
    target: &dyn Target,
    schedule: &[Stage],
    opts: SteerOptions,
) -> Result<RearrangementTrace> {
    check_strip(spec, schedule)?;
    if opts.window == 0 || opts.checkpoint_every == 0 {
        return Err(Error::Precondition("window and checkpoint interval must be positive".into()));
    }
    let mut prefix: Vec<u64> = Vec::new();
    let mut checkpoints = Vec::new();
    let mut outcomes = Vec::new();
    let limit = spec.max_index();
    let mut pool = IndexPool::new(opts.window, limit);

    for (si, stage) in schedule.iter().enumerate() {
        let sg = StageGrid::new(stage, target);
        let mut acc = sg.accumulate(spec, &prefix)?;
        let mut cache: Vec<Vec<Complex64>> =
            pool.window.iter().map(|&n| term_vector(spec, n, &sg.grid)).collect::<Result<_>>()?;
        let start_step = prefix.len() as u64;
        let start_error = sup_error(&acc, &sg.target);
        checkpoints.push(Checkpoint { step: start_step, stage: si, sup_error: start_error });
        let mut err = start_error;
        let mut used = 0u64;
        let mut residual: Vec<Complex64> = acc.iter().zip(&sg.target).map(|(a, t)| a.value() - t).collect();
        let mut order: Vec<usize> = (0..residual.len()).collect();
        let mut best_seen = (start_error, prefix.len());
        while err > stage.tolerance && used < stage.budget && !pool.window.is_empty() {
            // visit grid points with the largest residual first so candidates prune early
            if used % 64 == 0 {
                order.sort_by(|&i, &j| residual[j].norm_sqr().partial_cmp(&residual[i].norm_sqr()).unwrap());
            }
            let mut best = (f64::INFINITY, usize::MAX);
            for (ci, v) in cache.iter().enumerate() {
                let mut worst = 0.0f64;
                for &g in &order {
                    worst = worst.max((residual[g] + v[g]).norm_sqr());
                    if worst > best.0 {
                        break;
                    }
                }
                let better = worst < best.0 || (worst == best.0 && pool.window[ci] < pool.window[best.1]);
                if better {
                    best = (worst, ci);
                }
            }
            let ci = best.1;
            let n = pool.take(ci);
            let v = cache.remove(ci);
            for ((a, r), (t, x)) in acc.iter_mut().zip(residual.iter_mut()).zip(sg.target.iter().zip(&v)) {
                a.add(*x);
                *r = a.value() - t;
            }
            prefix.push(n);
            used += 1;
            if let Some(fresh) = pool.refill() {
                cache.push(term_vector(spec, fresh, &sg.grid)?);
            }
            err = residual.iter().map(|r| r.norm()).fold(0.0, f64::max);
            if err < best_seen.0 {
                best_seen = (err, prefix.len());
            }
            if used % opts.checkpoint_every == 0 {
                checkpoints.push(Checkpoint {
                    step: prefix.len() as u64,
                    stage: si,
                    sup_error: sup_error(&acc, &sg.target),
                });
            }
        }
        if err > stage.tolerance && best_seen.1 < prefix.len() {
            // unmet stage: fall back to the best prefix seen, so the stage never ends worse than it began
            for n in prefix.drain(best_seen.1..) {
                pool.release(n);
            }
            checkpoints.retain(|c| c.stage != si || c.step <= best_seen.1 as u64);
            acc = sg.accumulate(spec, &prefix)?;
        }
        let end_step = prefix.len() as u64;
        let end_error = sup_error(&acc, &sg.target);
        if checkpoints.last().map(|c| c.step) != Some(end_step) || checkpoints.last().map(|c| c.stage) != Some(si) {
            checkpoints.push(Checkpoint { step: end_step, stage: si, sup_error: end_error });
        }
        let met = end_error <= stage.tolerance;
        outcomes.push(StageOutcome { start_step, end_step, start_error, end_error, met, stalled: !met });
    }
    Ok(RearrangementTrace { prefix, checkpoints, schedule: schedule.to_vec(), stages: outcomes })
}

/// The `W` smallest unused indices, in increasing order.
struct IndexPool {
    window: Vec<u64>,
    used: Vec<bool>,
    size: usize,
    limit: Option<u64>,
}

impl IndexPool {
    fn new(size: usize, limit: Option<u64>) -> Self {
        let mut pool = Self { window: Vec::with_capacity(size + 1), used: alloc::vec![false], size, limit };
        while pool.refill().is_some() {}
        pool
    }

    fn is_used(&self, n: u64) -> bool {
        self.used.get(n as usize).copied().unwrap_or(false)
    }

    fn take(&mut self, i: usize) -> u64 {
        let n = self.window.remove(i);
        if self.used.len() <= n as usize {
            self.used.resize(n as usize + 1, false);
        }
        self.used[n as usize] = true;
        n
    }

    /// Appends the next unused index above the window if there is room.
    fn refill(&mut self) -> Option<u64> {
        if self.window.len() >= self.size {
            return None;
        }
        let mut n = self.window.last().map_or(1, |&w| w + 1);
        // indices above the window are unused except for those taken before a rollback
        while self.is_used(n) {
            n += 1;
        }
        if self.limit.is_some_and(|m| n > m) {
            return None;
        }
        self.window.push(n);
        Some(n)
    }

    fn release(&mut self, n: u64) {
        self.used[n as usize] = false;
        let pos = self.window.partition_point(|&w| w < n);
        self.window.insert(pos, n);
        self.window.truncate(self.size);
    }
}

fn check_distinct(prefix: &[u64]) -> Result<()> {
    let mut sorted = prefix.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateIndex(w[0]));
    }
    if sorted.first() == Some(&0) {
        return Err(Error::IndexZero);
    }
    Ok(())
}

/// Sup-errors of the partial sums of `prefix` on `compact` after each of
/// `steps` (which must be increasing), recomputed from scratch.
pub fn verify_on_compact(
    prefix: &[u64],
    spec: &SeriesSpec,
    target: &dyn Target,
    compact: &CompactRect,
    steps: &[u64],
) -> Result<Vec<(u64, f64)>> {
    check_distinct(prefix)?;
    let grid = compact.grid_points();
    let tv: Vec<Complex64> = grid.iter().map(|&s| target.at(s)).collect();
    let mut acc = alloc::vec![ComplexSum::new(); grid.len()];
    let mut done = 0usize;
    let mut out = Vec::with_capacity(steps.len());
    for &step in steps {
        let step = step as usize;
        if step > prefix.len() || step < done {
            return Err(Error::Precondition("checkpoint steps must be increasing and within the prefix".into()));
        }
        for &n in &prefix[done..step] {
            for (a, t) in acc.iter_mut().zip(term_vector(spec, n, &grid)?) {
                a.add(t);
            }
        }
        done = step;
        out.push((step as u64, sup_error(&acc, &tv)));
    }
    Ok(out)
}

/// Recomputes every checkpoint of `trace` on its stage's compact, using the
/// same accumulation order as the steering run.
pub fn verify_rearrangement(
    trace: &RearrangementTrace,
    spec: &SeriesSpec,
    target: &dyn Target,
) -> Result<Vec<Checkpoint>> {
    check_distinct(&trace.prefix)?;
    let mut out = Vec::with_capacity(trace.checkpoints.len());
    for (si, stage) in trace.schedule.iter().enumerate() {
        let steps: Vec<u64> = trace.checkpoints.iter().filter(|c| c.stage == si).map(|c| c.step).collect();
        for (step, e) in verify_on_compact(&trace.prefix, spec, target, &stage.compact, &steps)? {
            out.push(Checkpoint { step, stage: si, sup_error: e });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_builtin, FamilyParams, PhaseRule};
    use crate::ConstTarget;

    fn alt_harmonic(n: u64) -> f64 {
        if n % 2 == 0 {
            1.0 / n as f64
        } else {
            -1.0 / n as f64
        }
    }

    #[test]
    fn scalar_invariant_and_accuracy() {
        let r = riemann_rearrange_scalar(&alt_harmonic, 0.3, 100_000, u64::MAX).unwrap();
        assert!(r.first_crossing.is_some());
        assert!(r.invariant_violations().is_empty());
        assert!(r.final_error() < 1e-4);
    }

    #[test]
    fn scalar_pattern_exhausted() {
        let few_negatives = |n: u64| if n <= 10 && n % 2 == 1 { -1.0 / n as f64 } else { 1.0 / (n * n) as f64 };
        let r = riemann_rearrange_scalar(&few_negatives, -100.0, 1000, 10_000);
        assert_eq!(r, Err(Error::PatternExhausted("negative terms")));
    }

    #[test]
    fn absolutely_convergent_rejected() {
        let spec = make_builtin(FamilyParams::Ordinary { phase: PhaseRule::Uniform { omega: 0.0 }, rho_exponent: 2.0 })
            .unwrap();
        let k = CompactRect::new(0.6, 0.9, -0.2, 0.2, 8.0).unwrap();
        let stages = Stage::doubling(k, &[0.1], &[10]);
        let r = steer_rearrange(&spec, &ConstTarget(Complex64::new(0.3, 0.0)), &stages, SteerOptions::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn empty_prefix_error_is_target_max() {
        let spec = SeriesSpec::alternating_ordinary();
        let k = CompactRect::new(0.6, 0.9, -0.2, 0.2, 8.0).unwrap();
        let target = |s: Complex64| s * 2.0;
        let e = verify_on_compact(&[], &spec, &target, &k, &[0]).unwrap();
        let want = k.grid_points().iter().map(|s| (s * 2.0).norm()).fold(0.0, f64::max);
        assert_eq!(e[0].1, want);
        assert_eq!(verify_on_compact(&[1, 2, 1], &spec, &target, &k, &[3]), Err(Error::DuplicateIndex(1)));
    }

    #[test]
    fn short_steering_run_verifies() {
        let spec = SeriesSpec::alternating_ordinary();
        let k = CompactRect::new(0.6, 0.9, -0.2, 0.2, 8.0).unwrap();
        let stages = Stage::doubling(k, &[0.2, 0.1], &[2000, 4000]);
        let target = ConstTarget(Complex64::new(0.3, 0.0));
        let trace =
            steer_rearrange(&spec, &target, &stages, SteerOptions { window: 16, checkpoint_every: 100 }).unwrap();
        let again = verify_rearrangement(&trace, &spec, &target).unwrap();
        assert_eq!(again.len(), trace.checkpoints.len());
        for (a, b) in again.iter().zip(&trace.checkpoints) {
            assert_eq!(a.step, b.step);
            assert!((a.sup_error - b.sup_error).abs() <= 1e-10);
        }
        let mut seen = trace.prefix.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), trace.prefix.len());
    }

    #[test]
    fn unmet_stage_keeps_its_best_prefix() {
        let spec = SeriesSpec::alternating_ordinary();
        let k = CompactRect::new(0.6, 0.9, -0.2, 0.2, 8.0).unwrap();
        let stages = Stage::doubling(k, &[1e-3, 1e-3], &[3000, 3000]);
        let target = ConstTarget(Complex64::new(0.3, 0.0));
        let trace =
            steer_rearrange(&spec, &target, &stages, SteerOptions { window: 8, checkpoint_every: 250 }).unwrap();
        assert_eq!(trace.stalled_stage(), Some(0));
        for st in &trace.stages {
            assert!(st.end_error <= st.start_error);
        }
        assert!(trace.checkpoints.iter().all(|c| c.step <= trace.prefix.len() as u64));
        let again = verify_rearrangement(&trace, &spec, &target).unwrap();
        for (a, b) in again.iter().zip(&trace.checkpoints) {
            assert_eq!(a.sup_error, b.sup_error);
        }
    }

    #[test]
    fn index_pool_holds_smallest_unused() {
        let mut pool = IndexPool::new(4, None);
        assert_eq!(pool.window, [1, 2, 3, 4]);
        assert_eq!(pool.take(1), 2);
        assert_eq!(pool.refill(), Some(5));
        assert_eq!(pool.take(0), 1);
        assert_eq!(pool.refill(), Some(6));
        pool.release(2);
        assert_eq!(pool.window, [2, 3, 4, 5]);
        assert_eq!(pool.take(2), 4);
        assert_eq!(pool.refill(), Some(6));
        let mut capped = IndexPool::new(4, Some(2));
        assert_eq!(capped.window, [1, 2]);
        capped.take(0);
        assert_eq!(capped.refill(), None);
    }
}
