use alloc::vec::Vec;
use num_complex::Complex64;

use super::engine::{Engine, Sample, CHUNK};
use super::{sup_from, EvalConfig};
use crate::compact::CompactRect;
use crate::error::{Error, Result};
use crate::series::SeriesSpec;
use crate::Target;

const REFINE: u64 = 10;
const BATCH: u64 = 16 * CHUNK;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanParams {
    pub t_max: f64,
    pub step: f64,
    pub eps: f64,
}

impl ScanParams {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.5) {
            return Err(Error::Precondition("scan step must lie in (0, 0.5]".into()));
        }
        if !(self.t_max >= 100.0) || !self.t_max.is_finite() {
            return Err(Error::Precondition("scan length must be at least 100".into()));
        }
        if !(self.eps >= 0.0) {
            return Err(Error::Precondition("eps must be nonnegative".into()));
        }
        Ok(())
    }

    /// Number of grid cells `[τ_k, τ_{k+1})` covering `[0, T]`.
    pub fn cells(&self) -> u64 {
        libm::round(self.t_max / self.step) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCheckpoint {
    pub t: f64,
    pub good_measure: f64,
    pub density: f64,
    pub best_tau: Option<f64>,
    pub best_distance: f64,
}

/// Everything needed to continue an interrupted scan bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanState {
    pub params: ScanParams,
    /// Cells already classified.
    pub next_cell: u64,
    /// Distance at `τ_{next_cell}` once it has been evaluated; `None` inside
    /// marks an excluded translate.
    pub last: Option<Option<f64>>,
    pub full_good: u64,
    pub sub_good: u64,
    pub included_cells: u64,
    pub excluded_cells: u64,
    pub refinements: u64,
    pub best_tau: Option<f64>,
    pub best_distance: f64,
    pub certified: bool,
    pub max_bound: f64,
    pub checkpoints: Vec<ScanCheckpoint>,
}

impl ScanState {
    pub fn new(params: ScanParams) -> Self {
        Self {
            params,
            next_cell: 0,
            last: None,
            full_good: 0,
            sub_good: 0,
            included_cells: 0,
            excluded_cells: 0,
            refinements: 0,
            best_tau: None,
            best_distance: f64::INFINITY,
            certified: true,
            max_bound: 0.0,
            checkpoints: Vec::new(),
        }
    }

    fn good_measure(&self) -> f64 {
        let h = self.params.step;
        self.full_good as f64 * h + self.sub_good as f64 * (h / REFINE as f64)
    }

    fn density(&self) -> f64 {
        if self.included_cells == 0 {
            return 0.0;
        }
        self.good_measure() / (self.included_cells as f64 * self.params.step)
    }

    fn observe(&mut self, tau: f64, d: Option<f64>) {
        if let Some(d) = d {
            if d < self.best_distance {
                self.best_distance = d;
                self.best_tau = Some(tau);
            }
        }
    }

    /// `true` once every cell has been classified.
    pub fn is_complete(&self) -> bool {
        self.next_cell >= self.params.cells()
    }

    /// Summary of the cells classified so far.
    pub fn report(&self) -> ScanReport {
        let cells = self.params.cells();
        ScanReport {
            params: self.params,
            good_measure: self.good_measure(),
            included_measure: self.included_cells as f64 * self.params.step,
            density: self.density(),
            excluded_fraction: if cells == 0 { 0.0 } else { self.excluded_cells as f64 / cells as f64 },
            best_tau: self.best_tau,
            best_distance: self.best_distance,
            refinements: self.refinements,
            certified: self.certified,
            max_bound: self.max_bound,
            checkpoints: self.checkpoints.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub params: ScanParams,
    /// Estimated Lebesgue measure of `{τ ≤ T : distance < ε}`.
    pub good_measure: f64,
    /// Measure of the translates that were not excluded.
    pub included_measure: f64,
    /// `good_measure / included_measure`.
    pub density: f64,
    pub excluded_fraction: f64,
    pub best_tau: Option<f64>,
    pub best_distance: f64,
    pub refinements: u64,
    /// `true` when every value carried a proven remainder bound.
    pub certified: bool,
    pub max_bound: f64,
    /// Snapshots at `T/4`, `T/2` and `T`.
    pub checkpoints: Vec<ScanCheckpoint>,
}

/// Scans `τ ∈ [0, T]` on the grid `τ_k = k·step`, refining cells whose
/// endpoints disagree about `distance < ε` into ten subsamples.
pub fn scan_translates(
    spec: &SeriesSpec,
    target: &dyn Target,
    compact: &CompactRect,
    params: ScanParams,
    cfg: &EvalConfig,
) -> Result<ScanReport> {
    Ok(scan_translates_resumable(spec, target, compact, params, cfg, None, None, &mut |_, _| {})?.report())
}

/// Like [`scan_translates`], continuing from `state` and stopping after
/// `max_cells` cells. `sink` receives every grid sample `(τ_k, distance)`
/// exactly once across all resumptions. The returned state is complete
/// when all cells have been classified.
#[allow(clippy::too_many_arguments)]
pub fn scan_translates_resumable(
    spec: &SeriesSpec,
    target: &dyn Target,
    compact: &CompactRect,
    params: ScanParams,
    cfg: &EvalConfig,
    state: Option<ScanState>,
    max_cells: Option<u64>,
    sink: &mut dyn FnMut(f64, Option<f64>),
) -> Result<ScanState> {
    params.validate()?;
    let mut st = match state {
        Some(st) if st.params != params => {
            return Err(Error::Precondition("resume state belongs to a different scan".into()));
        }
        Some(st) => st,
        None => ScanState::new(params),
    };
    let points = compact.grid_points();
    let targets: Vec<Complex64> = points.iter().map(|p| target.at(*p)).collect();
    let mut engine = Engine::new(spec, points, cfg)?;
    let cells = params.cells();
    let h = params.step;
    let tau = |k: u64| k as f64 * h;
    engine.prepare(0.0, tau(cells))?;
    let marks = [cells / 4, cells / 2, cells];

    let record = |st: &mut ScanState, s: &Sample| -> Option<f64> {
        st.certified &= s.certified;
        st.max_bound = st.max_bound.max(s.bound);
        s.values.as_ref().map(|v| sup_from(v, &targets))
    };

    if st.last.is_none() {
        let s = engine.eval(0.0)?;
        let d = record(&mut st, &s);
        st.observe(0.0, d);
        sink(0.0, d);
        st.last = Some(d);
    }
    let stop = max_cells.map_or(cells, |m| (st.next_cell + m).min(cells));
    let good = |d: Option<f64>| d.is_some_and(|d| d < params.eps);
    while st.next_cell < stop {
        let k0 = st.next_cell;
        let k1 = (k0 + BATCH).min(stop);
        let batch = engine.eval_range(k0 + 1, k1 + 1, h)?;
        for (i, s) in batch.iter().enumerate() {
            let k = k0 + i as u64;
            let left = st.last.flatten();
            let left_in = st.last.is_some_and(|d| d.is_some());
            let right = record(&mut st, s);
            st.observe(tau(k + 1), right);
            sink(tau(k + 1), right);
            if !left_in || right.is_none() {
                st.excluded_cells += 1;
            } else {
                st.included_cells += 1;
                match (good(left), good(right)) {
                    (true, true) => st.full_good += 1,
                    (false, false) => {}
                    _ => {
                        st.refinements += 1;
                        let mut count = u64::from(good(left));
                        for j in 1..REFINE {
                            let t = tau(k) + j as f64 * (h / REFINE as f64);
                            let sub = engine.eval(t)?;
                            let d = record(&mut st, &sub);
                            st.observe(t, d);
                            count += u64::from(good(d));
                        }
                        st.sub_good += count;
                    }
                }
            }
            st.last = Some(right);
            st.next_cell = k + 1;
            if marks.contains(&st.next_cell) && st.checkpoints.last().map_or(true, |c| c.t < tau(st.next_cell)) {
                let cp = ScanCheckpoint {
                    t: tau(st.next_cell),
                    good_measure: st.good_measure(),
                    density: st.density(),
                    best_tau: st.best_tau,
                    best_distance: st.best_distance,
                };
                st.checkpoints.push(cp);
            }
        }
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ConstTarget, SeriesSpec};

    fn setup() -> (SeriesSpec, CompactRect, ConstTarget) {
        (
            SeriesSpec::alternating_ordinary(),
            CompactRect::new(0.7, 0.8, -0.05, 0.05, 8.0).unwrap(),
            ConstTarget(Complex64::new(0.3, 0.0)),
        )
    }

    #[test]
    fn rejects_bad_parameters() {
        let (spec, k, f) = setup();
        let cfg = EvalConfig::default();
        let p = ScanParams { t_max: 100.0, step: 0.6, eps: 0.5 };
        assert!(matches!(scan_translates(&spec, &f, &k, p, &cfg), Err(Error::Precondition(_))));
        let p = ScanParams { t_max: 50.0, step: 0.1, eps: 0.5 };
        assert!(matches!(scan_translates(&spec, &f, &k, p, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn extreme_thresholds() {
        let (spec, k, f) = setup();
        let cfg = EvalConfig::default();
        let all =
            scan_translates(&spec, &f, &k, ScanParams { t_max: 100.0, step: 0.5, eps: f64::INFINITY }, &cfg).unwrap();
        assert_eq!(all.density, 1.0);
        let none = scan_translates(&spec, &f, &k, ScanParams { t_max: 100.0, step: 0.5, eps: 1e-12 }, &cfg).unwrap();
        assert_eq!(none.density, 0.0);
        assert_eq!(all.checkpoints.len(), 3);
        assert_eq!(all.best_distance, none.best_distance);
    }

    #[test]
    fn density_nondecreasing_in_eps() {
        let (spec, k, f) = setup();
        let cfg = EvalConfig::default();
        let mut last = 0.0;
        for eps in [0.2, 0.5, 1.0, 2.0] {
            let r = scan_translates(&spec, &f, &k, ScanParams { t_max: 100.0, step: 0.5, eps }, &cfg).unwrap();
            assert!(r.density >= last);
            last = r.density;
        }
    }

    #[test]
    fn resume_reproduces_uninterrupted_scan() {
        let (spec, k, f) = setup();
        let cfg = EvalConfig::default();
        let p = ScanParams { t_max: 100.0, step: 0.25, eps: 0.6 };
        let mut full_rows = Vec::new();
        let full = scan_translates_resumable(&spec, &f, &k, p, &cfg, None, None, &mut |t, d| full_rows.push((t, d)))
            .unwrap()
            .report();
        let mut rows = Vec::new();
        let mut state = None;
        let report = loop {
            let st = scan_translates_resumable(&spec, &f, &k, p, &cfg, state.take(), Some(37), &mut |t, d| {
                rows.push((t, d))
            })
            .unwrap();
            if st.is_complete() {
                break st.report();
            }
            state = Some(st);
        };
        assert_eq!(report, full);
        assert_eq!(rows, full_rows);
    }
}
