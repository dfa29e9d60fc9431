//! General Dirichlet series as immutable data.
//!
//! A [`SeriesSpec`] combines a frequency rule `λ(n)`, a modulus rule `ρ(n)`
//! and a phase rule, so that `a(n) = scale · ρ(n) · phase(n)`. Built-in
//! families carry their known abscissae and the structural flags used by the
//! tail-bounded evaluator.

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, PI, TAU};
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::poly::PolynomialReal;
use crate::primes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ordinary,
    Prime,
    Lerch,
    Poly,
    LogLog,
    Custom,
}

impl Family {
    pub fn id(self) -> &'static str {
        match self {
            Family::Ordinary => "ordinary",
            Family::Prime => "prime",
            Family::Lerch => "lerch",
            Family::Poly => "poly",
            Family::LogLog => "loglog",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ordinary" => Family::Ordinary,
            "prime" => Family::Prime,
            "lerch" => Family::Lerch,
            "poly" => Family::Poly,
            "loglog" => Family::LogLog,
            "custom" => Family::Custom,
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

/// Unimodular factor of the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseRule {
    /// `e^{iωn}`.
    Uniform { omega: f64 },
    /// `(-1)^n`, i.e. the uniform rule with `ω = π`.
    Alternating,
    /// A fixed unimodular sequence, `phases[n-1]`.
    Fixed(Arc<[Complex64]>),
    /// `e^{2πi U_n}` with `U_n` drawn from a seeded ChaCha8 stream at word
    /// position `2n`, so every index is reproducible independently.
    SeededRandom { seed: u64 },
}

impl PhaseRule {
    pub fn fixed(phases: Vec<Complex64>) -> Result<Self> {
        if phases.iter().any(|z| libm::fabs(z.norm() - 1.0) > 1e-12) {
            return Err(Error::MalformedParams("fixed phases must be unimodular".into()));
        }
        Ok(PhaseRule::Fixed(phases.into()))
    }

    /// `ω` when the phase is `e^{iωn}`.
    pub fn uniform_omega(&self) -> Option<f64> {
        match *self {
            PhaseRule::Uniform { omega } => Some(omega),
            PhaseRule::Alternating => Some(PI),
            _ => None,
        }
    }

    fn at(&self, n: u64) -> Result<Complex64> {
        Ok(match self {
            PhaseRule::Uniform { omega } => {
                let theta = omega * n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            }
            PhaseRule::Alternating => Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
            PhaseRule::Fixed(phases) => *phases.get((n - 1) as usize).ok_or(Error::TableExhausted(n))?,
            PhaseRule::SeededRandom { seed } => random_unimodular(*seed, n),
        })
    }
}

/// `e^{2πiU}` with `U` the 53-bit uniform at word position `2n` of the
/// ChaCha8 stream keyed by `seed`.
pub fn random_unimodular(seed: u64, n: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * n as u128);
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let theta = TAU * u;
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// `dist(ω/2π, ℤ)`.
pub fn phase_distance(omega: f64) -> f64 {
    let x = omega / TAU;
    libm::fabs(x - libm::round(x))
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum FrequencyRule {
    /// `log n`
    Log,
    /// `log p_n`
    LogPrime,
    /// `log(n - 1 + α)` (Lerch, index shifted so `n = 1` is the `m = 0` term)
    LogShift {
        alpha: f64,
    },
    /// `log P(n)`
    LogPoly(PolynomialReal),
    /// `log log(n + γ)`
    LogLog {
        gamma: f64,
    },
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ModulusRule {
    /// `n^{-e}`
    Power {
        exponent: f64,
    },
    /// `Q(n) (log n)^γ`; `Q` positive on `[1, ∞)`.
    PolyLog {
        q: Vec<f64>,
        gamma: f64,
    },
    /// `1/n`
    Reciprocal,
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CustomTable {
    pub lambdas: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

/// Declared abscissae. `None` is "unknown"; `-∞` is a legitimate value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Abscissae {
    pub convergence: Option<f64>,
    pub absolute: Option<f64>,
    pub square: Option<f64>,
}

/// Structural metadata used to decide which evaluator applies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Flags {
    /// `λ` is a C² function of a real variable with `λ'` nonincreasing to 0.
    pub lambda_prime_nonincreasing: bool,
    /// `ρ(x) e^{-λ(x)σ}` is (eventually) nonincreasing for `σ` above this value.
    pub rho_decay_sigma0: Option<f64>,
    /// Declared only; never verified.
    pub q_linearly_independent: bool,
}

/// Parameters for [`make_builtin`].
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyParams {
    /// `a(n) = n^{-rho_exponent} · phase(n)`, `λ(n) = log n`.
    Ordinary { phase: PhaseRule, rho_exponent: f64 },
    /// `a(n) = phase(n)`, `λ(n) = log p_n`.
    Prime { phase: PhaseRule },
    /// `Σ_{m≥0} e^{2πiλm} (m + α)^{-s}`.
    Lerch { alpha: f64, lambda: f64 },
    /// `Σ Q(n) (log n)^γ e^{iωn} P(n)^{-s}`; coefficient vectors lowest degree first.
    Poly { p: Vec<f64>, q: Vec<f64>, gamma: f64, omega: f64 },
    /// `Σ e^{iωn} n^{-1} e^{-s log log(n + γ)}`.
    LogLog { gamma: f64, omega: f64 },
    /// Tabulated `(λ(n), a(n))`, `n = 1, 2, ...`.
    Custom { lambdas: Vec<f64>, coeffs: Vec<Complex64> },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Ordinary { .. } => Family::Ordinary,
            FamilyParams::Prime { .. } => Family::Prime,
            FamilyParams::Lerch { .. } => Family::Lerch,
            FamilyParams::Poly { .. } => Family::Poly,
            FamilyParams::LogLog { .. } => Family::LogLog,
            FamilyParams::Custom { .. } => Family::Custom,
        }
    }

    /// Default parameters for a family.
    ///
    /// `poly` defaults to `P = (X + e - 2)^d`, `Q = X^{d-1}`, `γ = 0`, `ω = π`
    /// with `d = 1`; see [`FamilyParams::poly_default`].
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Ordinary => FamilyParams::Ordinary { phase: PhaseRule::Uniform { omega: 0.0 }, rho_exponent: 0.0 },
            Family::Prime => FamilyParams::Prime { phase: PhaseRule::Uniform { omega: 0.0 } },
            Family::Lerch => FamilyParams::Lerch { alpha: 1.0 / E, lambda: 1.0 / core::f64::consts::SQRT_2 },
            Family::Poly => Self::poly_default(1),
            Family::LogLog => FamilyParams::LogLog { gamma: E - 1.0, omega: PI },
            Family::Custom => FamilyParams::Custom { lambdas: Vec::new(), coeffs: Vec::new() },
        }
    }

    /// `P = (X + β)^d` with `β = e - 2`, `Q = X^{d-1}`, `γ = 0`, `ω = π`.
    pub fn poly_default(d: usize) -> Self {
        let beta = E - 2.0;
        let mut p = vec![1.0];
        for _ in 0..d {
            let mut next = vec![0.0; p.len() + 1];
            for (k, &c) in p.iter().enumerate() {
                next[k] += beta * c;
                next[k + 1] += c;
            }
            p = next;
        }
        let mut q = vec![0.0; d];
        q[d - 1] = 1.0;
        FamilyParams::Poly { p, q, gamma: 0.0, omega: PI }
    }
}

/// A general Dirichlet series. Cheap to clone; immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    family: Family,
    frequency: FrequencyRule,
    modulus: ModulusRule,
    phase: PhaseRule,
    scale: Complex64,
    table: Option<Arc<CustomTable>>,
    declared: Abscissae,
    flags: Flags,
}

fn eval_coeffs(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

fn eval_coeffs_derivative(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &v)| acc * x + k as f64 * v)
}

fn is_multiple_of_tau(omega: f64) -> bool {
    phase_distance(omega) < 1e-12
}

/// `x ↦ Q(x)` positive on `[1, ∞)`: positive leading coefficient and positive
/// on a dense sample of `[1, Cauchy bound]`.
fn positive_on_half_line(q: &[f64]) -> bool {
    let Some(&lead) = q.last() else { return false };
    if lead <= 0.0 {
        return false;
    }
    let bound = 1.0 + q[..q.len() - 1].iter().map(|c| libm::fabs(c / lead)).fold(0.0, f64::max);
    let steps = 4096;
    (0..=steps).all(|i| eval_coeffs(q, 1.0 + (bound - 1.0).max(0.0) * i as f64 / steps as f64) > 0.0)
}

/// Runs `f` over a geometric grid on `[lo, 1e12]`.
fn geometric_all(lo: f64, f: impl Fn(f64) -> bool) -> bool {
    let mut x = lo;
    while x < 1e12 {
        if !f(x) {
            return false;
        }
        x *= 1.01;
    }
    true
}

/// Builds a built-in series.
pub fn make_builtin(params: FamilyParams) -> Result<SeriesSpec> {
    let family = params.family();
    let one = Complex64::new(1.0, 0.0);
    let spec = match params {
        FamilyParams::Ordinary { phase, rho_exponent } => {
            check_finite(&[rho_exponent])?;
            let sa = 1.0 - rho_exponent;
            let s2 = 0.5 - rho_exponent;
            let sc = match phase.uniform_omega() {
                Some(w) if is_multiple_of_tau(w) => Some(sa),
                Some(_) => Some(0.0 - rho_exponent),
                None => None,
            };
            SeriesSpec {
                family,
                frequency: FrequencyRule::Log,
                modulus: ModulusRule::Power { exponent: rho_exponent },
                phase,
                scale: one,
                table: None,
                declared: Abscissae { convergence: sc, absolute: Some(sa), square: Some(s2) },
                flags: Flags {
                    lambda_prime_nonincreasing: true,
                    rho_decay_sigma0: Some(0.0 - rho_exponent),
                    q_linearly_independent: false,
                },
            }
        }
        FamilyParams::Prime { phase } => {
            let sc = match phase.uniform_omega() {
                Some(w) if is_multiple_of_tau(w) => Some(1.0),
                Some(_) => Some(0.0),
                None => None,
            };
            SeriesSpec {
                family,
                frequency: FrequencyRule::LogPrime,
                modulus: ModulusRule::Power { exponent: 0.0 },
                phase,
                scale: one,
                table: None,
                declared: Abscissae { convergence: sc, absolute: Some(1.0), square: Some(0.5) },
                flags: Flags {
                    lambda_prime_nonincreasing: false,
                    rho_decay_sigma0: None,
                    q_linearly_independent: true,
                },
            }
        }
        FamilyParams::Lerch { alpha, lambda } => {
            check_finite(&[alpha, lambda])?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::MalformedParams("lerch requires 0 < alpha <= 1".into()));
            }
            let omega = TAU * lambda;
            let sc = if is_multiple_of_tau(omega) { 1.0 } else { 0.0 };
            SeriesSpec {
                family,
                frequency: FrequencyRule::LogShift { alpha },
                modulus: ModulusRule::Power { exponent: 0.0 },
                phase: PhaseRule::Uniform { omega },
                // e^{iω(n-1)}: index n = 1 is the m = 0 term
                scale: Complex64::new(libm::cos(omega), -libm::sin(omega)),
                table: None,
                declared: Abscissae { convergence: Some(sc), absolute: Some(1.0), square: Some(0.5) },
                flags: Flags {
                    lambda_prime_nonincreasing: true,
                    rho_decay_sigma0: Some(0.0),
                    q_linearly_independent: false,
                },
            }
        }
        FamilyParams::Poly { p, q, gamma, omega } => {
            check_finite(&p)?;
            check_finite(&q)?;
            check_finite(&[gamma, omega])?;
            let p = PolynomialReal::new(p)?;
            let d = p.degree();
            let mut q = q;
            while q.len() > 1 && *q.last().unwrap() == 0.0 {
                q.pop();
            }
            if q.is_empty() {
                return Err(Error::MalformedParams("Q must be nonzero".into()));
            }
            let qdeg = q.len() - 1;
            if qdeg >= d {
                return Err(Error::MalformedParams("deg Q must be at most deg P - 1".into()));
            }
            if !positive_on_half_line(&q) {
                return Err(Error::MalformedParams("Q must be positive on [1, ∞)".into()));
            }
            if p.x0() > 1.0 || p.eval(1.0) <= 0.0 {
                return Err(Error::MalformedParams("P must be positive and increasing on [1, ∞)".into()));
            }
            let d_f = d as f64;
            let qd = qdeg as f64;
            let sa = (qd + 1.0) / d_f;
            let s2 = (2.0 * qd + 1.0) / (2.0 * d_f);
            let sc = if is_multiple_of_tau(omega) { sa } else { qd / d_f };
            let lambda_ok = geometric_all(1.0, |x| {
                let pv = p.eval(x);
                p.second_derivative_at(x) * pv - p.derivative_at(x) * p.derivative_at(x) <= 0.0
            });
            SeriesSpec {
                family,
                frequency: FrequencyRule::LogPoly(p),
                modulus: ModulusRule::PolyLog { q, gamma },
                phase: PhaseRule::Uniform { omega },
                scale: one,
                table: None,
                declared: Abscissae { convergence: Some(sc), absolute: Some(sa), square: Some(s2) },
                flags: Flags {
                    lambda_prime_nonincreasing: lambda_ok,
                    rho_decay_sigma0: Some(s2),
                    q_linearly_independent: false,
                },
            }
        }
        FamilyParams::LogLog { gamma, omega } => {
            check_finite(&[gamma, omega])?;
            if gamma < E - 1.0 {
                return Err(Error::MalformedParams("loglog requires gamma >= e - 1".into()));
            }
            let sc = if is_multiple_of_tau(omega) { 1.0 } else { f64::NEG_INFINITY };
            SeriesSpec {
                family,
                frequency: FrequencyRule::LogLog { gamma },
                modulus: ModulusRule::Reciprocal,
                phase: PhaseRule::Uniform { omega },
                scale: one,
                table: None,
                declared: Abscissae { convergence: Some(sc), absolute: Some(1.0), square: Some(f64::NEG_INFINITY) },
                flags: Flags {
                    lambda_prime_nonincreasing: true,
                    rho_decay_sigma0: Some(f64::NEG_INFINITY),
                    q_linearly_independent: false,
                },
            }
        }
        FamilyParams::Custom { lambdas, coeffs } => return SeriesSpec::custom(lambdas, coeffs),
    };
    Ok(spec)
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::MalformedParams("parameters must be finite".into()))
    }
}

impl SeriesSpec {
    /// `Σ (-1)^n n^{-s}`.
    pub fn alternating_ordinary() -> Self {
        make_builtin(FamilyParams::Ordinary { phase: PhaseRule::Alternating, rho_exponent: 0.0 }).unwrap()
    }

    /// `ζ(s) = Σ n^{-s}`.
    pub fn zeta() -> Self {
        make_builtin(FamilyParams::default_for(Family::Ordinary)).unwrap()
    }

    /// `Σ (-1)^n p_n^{-s}`.
    pub fn alternating_prime() -> Self {
        make_builtin(FamilyParams::Prime { phase: PhaseRule::Alternating }).unwrap()
    }

    /// `Σ p_n^{-s}`.
    pub fn prime_zeta() -> Self {
        make_builtin(FamilyParams::default_for(Family::Prime)).unwrap()
    }

    /// Tabulated series; `λ` strictly increasing and nonnegative.
    pub fn custom(lambdas: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != coeffs.len() {
            return Err(Error::MalformedParams("custom table needs equal, nonzero numbers of λ and a".into()));
        }
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::MalformedParams("λ must be finite and nonnegative".into()));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedParams("λ must be strictly increasing".into()));
        }
        if coeffs.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::MalformedParams("coefficients must be finite".into()));
        }
        Ok(SeriesSpec {
            family: Family::Custom,
            frequency: FrequencyRule::Table,
            modulus: ModulusRule::Table,
            phase: PhaseRule::Uniform { omega: 0.0 },
            scale: Complex64::new(1.0, 0.0),
            table: Some(Arc::new(CustomTable { lambdas, coeffs })),
            declared: Abscissae::default(),
            flags: Flags::default(),
        })
    }

    /// Same series with every coefficient multiplied by `c`.
    pub fn scaled(mut self, c: Complex64) -> Self {
        self.scale *= c;
        self
    }

    pub fn with_declared(mut self, declared: Abscissae) -> Self {
        self.declared = declared;
        self
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn phase(&self) -> &PhaseRule {
        &self.phase
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn declared(&self) -> Abscissae {
        self.declared
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    /// Largest valid index for tabulated data.
    pub fn max_index(&self) -> Option<u64> {
        match (&self.table, &self.phase) {
            (Some(t), _) => Some(t.lambdas.len() as u64),
            (None, PhaseRule::Fixed(p)) => Some(p.len() as u64),
            _ => None,
        }
    }

    /// `σ₀` for the translation results: `max(σ₂, monotonicity threshold)`.
    pub fn sigma0(&self) -> Option<f64> {
        let s2 = self.declared.square?;
        let mono = self.flags.rho_decay_sigma0?;
        Some(s2.max(mono))
    }

    /// `true` for the plain prime zeta series `Σ p^{-s}` (possibly scaled).
    pub fn is_prime_zeta(&self) -> bool {
        self.family == Family::Prime && matches!(self.phase, PhaseRule::Uniform { omega } if is_multiple_of_tau(omega))
    }

    /// `Some(e)` when the series is `c·ζ(s + e)`, so values continue past the
    /// half-plane of convergence.
    pub fn zeta_shift(&self) -> Option<f64> {
        match (&self.frequency, &self.modulus, &self.phase, self.family) {
            (FrequencyRule::Log, ModulusRule::Power { exponent }, PhaseRule::Uniform { omega }, Family::Ordinary)
                if is_multiple_of_tau(*omega) =>
            {
                Some(*exponent)
            }
            _ => None,
        }
    }

    /// `ρ(n) = |a(n)|`.
    pub fn modulus(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::IndexZero);
        }
        let x = n as f64;
        let rho = match &self.modulus {
            ModulusRule::Power { exponent } => {
                if *exponent == 0.0 {
                    1.0
                } else {
                    libm::pow(x, -exponent)
                }
            }
            ModulusRule::PolyLog { q, gamma } => {
                let qv = eval_coeffs(q, x);
                if *gamma == 0.0 {
                    qv
                } else if n == 1 {
                    // (log 1)^γ: zero for γ > 0, and the n = 1 term is dropped for γ < 0
                    0.0
                } else {
                    qv * libm::pow(libm::log(x), *gamma)
                }
            }
            ModulusRule::Reciprocal => 1.0 / x,
            ModulusRule::Table => return Ok(self.table_coeff(n)?.norm() * self.scale.norm()),
        };
        Ok(rho * self.scale.norm())
    }

    fn table_coeff(&self, n: u64) -> Result<Complex64> {
        let t = self.table.as_ref().expect("table rule without table");
        t.coeffs.get((n - 1) as usize).copied().ok_or(Error::TableExhausted(n))
    }

    /// `a(n)`.
    pub fn coeff(&self, n: u64) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::IndexZero);
        }
        if let ModulusRule::Table = self.modulus {
            return Ok(self.table_coeff(n)? * self.scale);
        }
        let rho = self.modulus(n)?;
        Ok(self.phase.at(n)? * rho_sign_free(self, rho))
    }

    /// `λ(n)`.
    pub fn frequency(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::IndexZero);
        }
        let x = n as f64;
        Ok(match &self.frequency {
            FrequencyRule::Log => libm::log(x),
            FrequencyRule::LogPrime => libm::log(primes::nth_prime(n) as f64),
            FrequencyRule::LogShift { alpha } => libm::log(x - 1.0 + alpha),
            FrequencyRule::LogPoly(p) => libm::log(p.eval(x)),
            FrequencyRule::LogLog { gamma } => libm::log(libm::log(x + gamma)),
            FrequencyRule::Table => {
                let t = self.table.as_ref().expect("table rule without table");
                *t.lambdas.get((n - 1) as usize).ok_or(Error::TableExhausted(n))?
            }
        })
    }

    /// `a(n) e^{-λ(n) s}`.
    pub fn term(&self, n: u64, s: Complex64) -> Result<Complex64> {
        let a = self.coeff(n)?;
        let lam = self.frequency(n)?;
        Ok(a * exp_neg(lam, s))
    }

    /// Calls `f(n, λ(n), a(n))` for `n` in `lo..=hi`, in index order.
    pub fn for_each_term(&self, lo: u64, hi: u64, mut f: impl FnMut(u64, f64, Complex64)) -> Result<()> {
        if lo == 0 {
            return Err(Error::IndexZero);
        }
        if hi < lo {
            return Ok(());
        }
        if let Some(max) = self.max_index() {
            if hi > max {
                return Err(Error::TableExhausted(max + 1));
            }
        }
        if let FrequencyRule::LogPrime = self.frequency {
            return primes::with_primes(hi, |ps| {
                for n in lo..=hi {
                    let lam = libm::log(ps[(n - 1) as usize] as f64);
                    f(n, lam, self.coeff(n)?);
                }
                Ok(())
            });
        }
        for n in lo..=hi {
            f(n, self.frequency(n)?, self.coeff(n)?);
        }
        Ok(())
    }

    /// `(λ(n), a(n))` for `n = 1..=n_max`.
    pub fn tabulate(&self, n_max: u64) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let mut lam = Vec::with_capacity(n_max as usize);
        let mut a = Vec::with_capacity(n_max as usize);
        self.for_each_term(1, n_max, |_, l, c| {
            lam.push(l);
            a.push(c);
        })?;
        Ok((lam, a))
    }

    /// The C² model of `λ` and `ρ` when the series has one: uniform phase,
    /// smooth frequency, smooth modulus.
    pub fn smooth_model(&self) -> Option<SmoothModel<'_>> {
        let omega = self.phase.uniform_omega()?;
        let freq_ok = matches!(
            self.frequency,
            FrequencyRule::Log
                | FrequencyRule::LogShift { .. }
                | FrequencyRule::LogPoly(_)
                | FrequencyRule::LogLog { .. }
        );
        if !freq_ok || matches!(self.modulus, ModulusRule::Table) {
            return None;
        }
        Some(SmoothModel { spec: self, omega })
    }
}

// ρ already includes |scale|; reapply the scale's phase.
fn rho_sign_free(spec: &SeriesSpec, rho: f64) -> Complex64 {
    let s = spec.scale;
    let m = s.norm();
    if m == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        s * (rho / m)
    }
}

/// `e^{-λ s}` for real `λ`.
#[inline]
pub fn exp_neg(lambda: f64, s: Complex64) -> Complex64 {
    let m = libm::exp(-lambda * s.re);
    let (sin, cos) = libm::sincos(-lambda * s.im);
    Complex64::new(m * cos, m * sin)
}

/// Real-variable view of a smooth series: `g(u) = ρ(u) e^{-λ(u)σ}` and
/// `f(u) = (ωu - tλ(u)) / 2π`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothModel<'a> {
    spec: &'a SeriesSpec,
    omega: f64,
}

impl SmoothModel<'_> {
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self, x: f64) -> f64 {
        match &self.spec.frequency {
            FrequencyRule::Log => libm::log(x),
            FrequencyRule::LogShift { alpha } => libm::log(x - 1.0 + alpha),
            FrequencyRule::LogPoly(p) => libm::log(p.eval(x)),
            FrequencyRule::LogLog { gamma } => libm::log(libm::log(x + gamma)),
            _ => unreachable!(),
        }
    }

    pub fn lambda_prime(&self, x: f64) -> f64 {
        match &self.spec.frequency {
            FrequencyRule::Log => 1.0 / x,
            FrequencyRule::LogShift { alpha } => 1.0 / (x - 1.0 + alpha),
            FrequencyRule::LogPoly(p) => p.derivative_at(x) / p.eval(x),
            FrequencyRule::LogLog { gamma } => 1.0 / ((x + gamma) * libm::log(x + gamma)),
            _ => unreachable!(),
        }
    }

    /// `ρ(x)` including `|scale|`.
    pub fn rho(&self, x: f64) -> f64 {
        let r = match &self.spec.modulus {
            ModulusRule::Power { exponent } => libm::pow(x, -exponent),
            ModulusRule::PolyLog { q, gamma } => {
                let qv = eval_coeffs(q, x);
                if *gamma == 0.0 {
                    qv
                } else if x <= 1.0 {
                    0.0
                } else {
                    qv * libm::pow(libm::log(x), *gamma)
                }
            }
            ModulusRule::Reciprocal => 1.0 / x,
            ModulusRule::Table => unreachable!(),
        };
        r * self.spec.scale.norm()
    }

    /// `ρ'/ρ`; `+∞` where `ρ` vanishes to the left of increasing values.
    pub fn rho_log_derivative(&self, x: f64) -> f64 {
        match &self.spec.modulus {
            ModulusRule::Power { exponent } => -exponent / x,
            ModulusRule::PolyLog { q, gamma } => {
                let base = eval_coeffs_derivative(q, x) / eval_coeffs(q, x);
                if *gamma == 0.0 {
                    base
                } else if x <= 1.0 {
                    f64::INFINITY
                } else {
                    base + gamma / (x * libm::log(x))
                }
            }
            ModulusRule::Reciprocal => -1.0 / x,
            ModulusRule::Table => unreachable!(),
        }
    }

    /// `g(x) = ρ(x) e^{-λ(x)σ}`.
    pub fn g(&self, x: f64, sigma: f64) -> f64 {
        self.rho(x) * libm::exp(-self.lambda(x) * sigma)
    }

    /// `g'(x)/g(x)`.
    pub fn g_log_derivative(&self, x: f64, sigma: f64) -> f64 {
        self.rho_log_derivative(x) - sigma * self.lambda_prime(x)
    }
}
