//! Text descriptors for series, targets, compacts and stage schedules.
//!
//! Series: `family[:key=value,...]`, the aliases `alt-ordinary` and
//! `alt-prime`, or `file:path.csv` with header `n,lambda,re_a,im_a`.
//! Numbers accept the constants `pi`, `tau` and `e` with an optional
//! leading sign and multiplier (`2pi`, `-pi`).

use std::collections::BTreeMap;
use std::f64::consts::{E, PI, TAU};
use std::path::Path;

use dul_core::rearrange::Stage;
use dul_core::series::{make_builtin, FamilyParams};
use dul_core::{CompactRect, Complex64, Family, PhaseRule, SeriesSpec, Target};

use crate::error::{CliError, CliResult};

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn parse_real(s: &str) -> CliResult<f64> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    for (name, value) in [("pi", PI), ("tau", TAU), ("e", E)] {
        if let Some(m) = body.strip_suffix(name) {
            let m = m.strip_suffix('*').unwrap_or(m);
            let mult =
                if m.is_empty() { 1.0 } else { m.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")))? };
            return Ok(sign * mult * value);
        }
    }
    Err(bad(format!("bad number `{s}`")))
}

/// `re[,im]`.
pub fn parse_complex(s: &str) -> CliResult<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse_real(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_real(re)?, parse_real(im)?)),
        _ => Err(bad(format!("bad complex number `{s}` (want re,im)"))),
    }
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(';').map(parse_real).collect()
}

struct Params {
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(body: &str) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        for kv in body.split(',').filter(|x| !x.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{kv}`")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(bad(format!("repeated key `{k}`")));
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, k: &str) -> Option<String> {
        self.map.remove(k)
    }

    fn real(&mut self, k: &str) -> CliResult<Option<f64>> {
        self.take(k).map(|v| parse_real(&v)).transpose()
    }

    fn finish(self, family: &str) -> CliResult<()> {
        match self.map.keys().next() {
            Some(k) => Err(bad(format!("unknown key `{k}` for {family}"))),
            None => Ok(()),
        }
    }
}

fn parse_phase(p: &mut Params) -> CliResult<Option<PhaseRule>> {
    let omega = p.real("omega")?;
    let phase = match p.take("phase").as_deref() {
        None => omega.map(|omega| PhaseRule::Uniform { omega }),
        Some("alt") | Some("alternating") => Some(PhaseRule::Alternating),
        Some("uniform") => Some(PhaseRule::Uniform { omega: omega.unwrap_or(0.0) }),
        Some(other) => match other.strip_prefix("random:") {
            Some(seed) => {
                Some(PhaseRule::SeededRandom { seed: seed.parse().map_err(|_| bad(format!("bad seed `{seed}`")))? })
            }
            None => return Err(bad(format!("unknown phase `{other}`"))),
        },
    };
    Ok(phase)
}

/// Parses a series descriptor.
pub fn parse_series(desc: &str) -> CliResult<SeriesSpec> {
    if let Some(path) = desc.strip_prefix("file:") {
        return read_series_csv(Path::new(path));
    }
    let (name, body) = desc.split_once(':').unwrap_or((desc, ""));
    let mut p = Params::parse(body)?;
    let scale = p.take("scale").map(|v| parse_complex(&v.replace(';', ","))).transpose()?;
    let params = match name {
        "alt-ordinary" => {
            FamilyParams::Ordinary { phase: PhaseRule::Alternating, rho_exponent: p.real("rho")?.unwrap_or(0.0) }
        }
        "alt-prime" => FamilyParams::Prime { phase: PhaseRule::Alternating },
        _ => {
            let family: Family = name.parse()?;
            match FamilyParams::default_for(family) {
                FamilyParams::Ordinary { phase, rho_exponent } => FamilyParams::Ordinary {
                    phase: parse_phase(&mut p)?.unwrap_or(phase),
                    rho_exponent: p.real("rho")?.unwrap_or(rho_exponent),
                },
                FamilyParams::Prime { phase } => FamilyParams::Prime { phase: parse_phase(&mut p)?.unwrap_or(phase) },
                FamilyParams::Lerch { alpha, lambda } => FamilyParams::Lerch {
                    alpha: p.real("alpha")?.unwrap_or(alpha),
                    lambda: p.real("lambda")?.unwrap_or(lambda),
                },
                FamilyParams::Poly { .. } => {
                    let d = p.take("d").map(|v| v.parse::<usize>()).transpose().map_err(|_| bad("bad poly degree"))?;
                    let FamilyParams::Poly { p: pc, q, gamma, omega } =
                        FamilyParams::poly_default(d.unwrap_or(1).max(1))
                    else {
                        unreachable!()
                    };
                    FamilyParams::Poly {
                        p: p.take("p").map(|v| parse_list(&v)).transpose()?.unwrap_or(pc),
                        q: p.take("q").map(|v| parse_list(&v)).transpose()?.unwrap_or(q),
                        gamma: p.real("gamma")?.unwrap_or(gamma),
                        omega: p.real("omega")?.unwrap_or(omega),
                    }
                }
                FamilyParams::LogLog { gamma, omega } => FamilyParams::LogLog {
                    gamma: p.real("gamma")?.unwrap_or(gamma),
                    omega: p.real("omega")?.unwrap_or(omega),
                },
                FamilyParams::Custom { .. } => return Err(bad("custom series are read with file:path.csv")),
            }
        }
    };
    p.finish(name)?;
    let spec = make_builtin(params)?;
    Ok(match scale {
        Some(c) => spec.scaled(c),
        None => spec,
    })
}

fn reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file))
}

fn expect_header(r: &mut csv::Reader<std::fs::File>, path: &Path, want: &[&str]) -> CliResult<()> {
    let h = r.headers().map_err(|e| bad(format!("{}: {e}", path.display())))?;
    if h.iter().collect::<Vec<_>>() != want {
        return Err(bad(format!("{}: expected header {}", path.display(), want.join(","))));
    }
    Ok(())
}

fn rows(path: &Path, want: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut r = reader(path)?;
    expect_header(&mut r, path, want)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(parse_real)
            .collect::<CliResult<Vec<f64>>>()
            .map_err(|e| bad(format!("{} row {}: {e}", path.display(), i + 1)))?;
        out.push(row);
    }
    Ok(out)
}

/// Custom series from `n,lambda,re_a,im_a` rows with `n = 1, 2, ...`.
pub fn read_series_csv(path: &Path) -> CliResult<SeriesSpec> {
    let rows = rows(path, &["n", "lambda", "re_a", "im_a"])?;
    let mut lambdas = Vec::with_capacity(rows.len());
    let mut coeffs = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r[0] != (i + 1) as f64 {
            return Err(bad(format!("{}: indices must run 1, 2, ... (row {})", path.display(), i + 1)));
        }
        lambdas.push(r[1]);
        coeffs.push(Complex64::new(r[2], r[3]));
    }
    Ok(SeriesSpec::custom(lambdas, coeffs)?)
}

/// `re0,re1,im0,im1[,density]`.
pub fn parse_compact(s: &str) -> CliResult<CompactRect> {
    let v = s.split(',').map(parse_real).collect::<CliResult<Vec<f64>>>()?;
    match v.as_slice() {
        [a, b, c, d] => Ok(CompactRect::new(*a, *b, *c, *d, 8.0)?),
        [a, b, c, d, g] => Ok(CompactRect::new(*a, *b, *c, *d, *g)?),
        _ => Err(bad(format!("bad compact `{s}` (want re0,re1,im0,im1[,density])"))),
    }
}

/// Target functions given on the command line.
#[derive(Debug, Clone)]
pub enum TargetFn {
    Const(Complex64),
    /// Nearest tabulated sample.
    Samples(Vec<(Complex64, Complex64)>),
}

impl Target for TargetFn {
    fn at(&self, s: Complex64) -> Complex64 {
        match self {
            TargetFn::Const(c) => *c,
            TargetFn::Samples(v) => {
                let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
                for (z, f) in v {
                    let d = (z - s).norm_sqr();
                    if d < best.0 {
                        best = (d, *f);
                    }
                }
                best.1
            }
        }
    }
}

/// `const:re[,im]` or `file:path.csv` with header `re,im,f_re,f_im`.
pub fn parse_target(s: &str) -> CliResult<TargetFn> {
    if let Some(c) = s.strip_prefix("const:") {
        return Ok(TargetFn::Const(parse_complex(c)?));
    }
    if let Some(path) = s.strip_prefix("file:") {
        let path = Path::new(path);
        let rows = rows(path, &["re", "im", "f_re", "f_im"])?;
        if rows.is_empty() {
            return Err(bad(format!("{}: no samples", path.display())));
        }
        return Ok(TargetFn::Samples(
            rows.iter().map(|r| (Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3]))).collect(),
        ));
    }
    Err(bad(format!("bad target `{s}` (want const:re[,im] or file:path.csv)")))
}

/// Stage schedule with header `re0,re1,im0,im1,grid,tolerance,budget`.
pub fn read_stages(path: &Path) -> CliResult<Vec<Stage>> {
    let rows = rows(path, &["re0", "re1", "im0", "im1", "grid", "tolerance", "budget"])?;
    rows.iter()
        .map(|r| {
            if r[6] < 0.0 || r[6].fract() != 0.0 {
                return Err(bad(format!("{}: budget must be a nonnegative integer", path.display())));
            }
            Ok(Stage { compact: CompactRect::new(r[0], r[1], r[2], r[3], r[4])?, tolerance: r[5], budget: r[6] as u64 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_constants() {
        assert_eq!(parse_real("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("1.5").unwrap(), 1.5);
        assert!(parse_real("x").is_err());
        assert_eq!(parse_complex("2,0").unwrap(), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn series_descriptors() {
        assert_eq!(parse_series("alt-ordinary").unwrap(), SeriesSpec::alternating_ordinary());
        assert_eq!(parse_series("ordinary").unwrap(), SeriesSpec::zeta());
        assert_eq!(parse_series("alt-prime").unwrap(), SeriesSpec::alternating_prime());
        assert_eq!(parse_series("poly:d=2").unwrap(), make_builtin(FamilyParams::poly_default(2)).unwrap());
        assert!(parse_series("ordinary:bogus=1").is_err());
        assert!(matches!(parse_series("nope"), Err(CliError::Core(dul_core::Error::UnknownFamily(_)))));
        let s = parse_series("ordinary:omega=1,rho=0.5").unwrap();
        assert_eq!(s.coeff(2).unwrap(), Complex64::from_polar(1.0 / 2f64.sqrt(), 2.0));
    }
}
