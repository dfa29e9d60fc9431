use num_complex::Complex64;

use super::engine::Engine;
use super::EvalConfig;
use crate::error::{Error, Result};
use crate::series::SeriesSpec;
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSquare {
    /// Trapezoid estimate of `(1/T)∫₀ᵀ |D(σ+it)|² dt`.
    pub value: f64,
    /// Largest remainder bound over the nodes.
    pub max_bound: f64,
    pub certified: bool,
    pub nodes: u64,
}

/// Trapezoid rule on `ceil(T/dt)` equal panels.
pub fn mean_square(spec: &SeriesSpec, sigma: f64, t_max: f64, dt: f64, cfg: &EvalConfig) -> Result<MeanSquare> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::Precondition("dt must lie in (0, 0.1]".into()));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Precondition("T must be positive and finite".into()));
    }
    if spec.max_index().is_none() && !spec.sigma0().is_some_and(|s0| sigma > s0) {
        return Err(Error::Precondition("sigma must exceed the declared threshold".into()));
    }
    let panels = libm::ceil(t_max / dt - 1e-9).max(1.0) as u64;
    let h = t_max / panels as f64;
    let mut engine = Engine::new(spec, alloc::vec![Complex64::new(sigma, 0.0)], cfg)?;
    engine.prepare(0.0, t_max)?;
    let samples = engine.eval_range(0, panels + 1, h)?;
    let mut acc = NeumaierSum::new();
    let (mut max_bound, mut certified) = (0.0f64, true);
    for (k, s) in samples.iter().enumerate() {
        let v = s.values.as_ref().ok_or(Error::Numeric("translate excluded".into()))?[0].norm_sqr();
        let w = if k == 0 || k as u64 == panels { 0.5 } else { 1.0 };
        acc.add(w * v);
        max_bound = max_bound.max(s.bound);
        certified &= s.certified;
    }
    Ok(MeanSquare { value: acc.value() / panels as f64, max_bound, certified, nodes: panels + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{make_builtin, FamilyParams};

    #[test]
    fn single_term_is_constant() {
        let spec = SeriesSpec::custom(alloc::vec![0.7], alloc::vec![Complex64::new(1.0, 0.0)]).unwrap();
        for t in [1.0, 10.0, 123.4] {
            let m = mean_square(&spec, 0.3, t, 0.1, &EvalConfig::default()).unwrap();
            assert!((m.value - libm::exp(-2.0 * 0.7 * 0.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn bad_step_rejected() {
        let spec = SeriesSpec::alternating_ordinary();
        assert!(mean_square(&spec, 0.8, 10.0, 0.2, &EvalConfig::default()).is_err());
        assert!(mean_square(&spec, 0.4, 10.0, 0.1, &EvalConfig::default()).is_err());
    }

    #[test]
    fn loglog_mean_square_is_moderate() {
        let spec = make_builtin(FamilyParams::default_for(crate::Family::LogLog)).unwrap();
        let m = mean_square(&spec, 0.8, 100.0, 0.1, &EvalConfig::default()).unwrap();
        assert!(m.value.is_finite() && m.value > 0.0);
    }
}
