use std::path::PathBuf;

use dul_core::abscissae::{estimate_abscissa, AbscissaEstimate, AbscissaKind, Variant};
use dul_core::eval::{eval_prime_series, eval_tail_bounded, eval_zeta, partial_sum, EvalResult, TailOptions};
use dul_core::functionals::{divergence_oracle, window_sum_check, Atom, DiscreteMeasure};
use dul_core::lab::{
    compare_distributions, mean_square, mv_bound_check, random_mv_instance, sample_random_phases,
    scan_translates_resumable, translate_values, EvalConfig, Observable, ObservableSamples, Projection, ScanParams,
};
use dul_core::rearrange::{
    real_terms, riemann_rearrange_scalar, steer_rearrange, verify_rearrangement, Stage, SteerOptions,
};
use dul_core::{Complex64, SeriesSpec};
use serde_json::{json, Value};

use crate::checkpoint::{checkpoints_json, Sidecar};
use crate::config::ExperimentConfig;
use crate::descriptor::{parse_compact, parse_complex, parse_real, parse_series, parse_target, read_stages};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, num, opt_num, CsvOut, OutDir};
use crate::*;

pub fn execute(cmd: &Command) -> CliResult<Value> {
    let config = cmd.config();
    let out = OutDir::new(&cmd.common().out)?;
    let mut summary = match cmd {
        Command::Abscissa(a) => abscissa(a)?,
        Command::Eval(a) => eval(a)?,
        Command::DensityCheck(a) => density(a, &config, &out)?,
        Command::Rearrange(a) => rearrange(a, &config, &out)?,
        Command::TranslateScan(a) => translate_scan(a, &config, &out)?,
        Command::McSample(a) => mc_sample(a, &config, &out)?,
        Command::MvCheck(a) => mv_check(a, &config, &out)?,
        Command::MeanSquare(a) => mean_sq(a)?,
        Command::DivergenceOracle(a) => divergence(a, &config, &out)?,
    };
    let obj = summary.as_object_mut().expect("summaries are objects");
    obj.entry("status").or_insert_with(|| Value::String("ok".into()));
    obj.insert("command".into(), Value::String(cmd.id().into()));
    obj.insert("config".into(), config.to_json());
    let stalled = obj.get("stalled_stage").and_then(Value::as_u64);
    out.write_json(&format!("{}.json", cmd.id()), &summary)?;
    if let Some(stage) = stalled {
        return Err(CliError::Stalled(stage as usize));
    }
    Ok(summary)
}

fn list<T>(s: &str, f: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    s.split(';').filter(|x| !x.trim().is_empty()).map(f).collect()
}

fn complex_json(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn estimate_json(e: &AbscissaEstimate) -> Value {
    json!({
        "value": num(e.value),
        "stability": num(e.stability),
        "n_used": e.n_used,
        "variant": match e.variant { Variant::Growth => "growth", Variant::Remainder => "remainder" },
    })
}

fn abscissa(a: &AbscissaArgs) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let kinds: Vec<AbscissaKind> = match a.kind.as_str() {
        "all" => vec![AbscissaKind::Convergence, AbscissaKind::Absolute, AbscissaKind::Square],
        k => vec![k.parse()?],
    };
    let mut estimates = serde_json::Map::new();
    for kind in kinds {
        estimates.insert(kind.short().into(), estimate_json(&estimate_abscissa(&spec, kind, a.nmax)?));
    }
    let d = spec.declared();
    Ok(json!({
        "series": a.series,
        "declared": { "c": opt_num(d.convergence), "a": opt_num(d.absolute), "2": opt_num(d.square) },
        "estimates": estimates,
    }))
}

fn eval_json(method: &str, r: &EvalResult) -> Value {
    json!({
        "method": method,
        "value": complex_json(r.value),
        "remainder_bound": num(r.remainder_bound),
        "certified": r.certified,
        "terms_used": r.terms_used,
    })
}

fn eval(a: &EvalArgs) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let s = parse_complex(&a.s)?;
    let opts = TailOptions { calibration: a.calibration, budget: a.budget, min_cutoff: a.min_cutoff };
    let partial = |n: u64| -> CliResult<Value> {
        let value = partial_sum(&spec, n, s)?;
        Ok(json!({ "method": "partial", "value": complex_json(value), "terms_used": n, "certified": false }))
    };
    let mobius = |spec: &SeriesSpec| -> CliResult<Value> {
        if !spec.is_prime_zeta() {
            return Err(dul_core::Error::Precondition("the Möbius method needs the prime zeta series".into()).into());
        }
        let mut r = eval_prime_series(s, a.k)?;
        r.value *= spec.scale();
        r.remainder_bound *= spec.scale().norm();
        Ok(eval_json("mobius", &r))
    };
    match a.method.as_str() {
        "partial" => partial(a.n.ok_or_else(|| CliError::Usage("--method partial needs --n".into()))?),
        "vdc" => Ok(eval_json("vdc", &eval_tail_bounded(&spec, s, opts)?)),
        "mobius" => mobius(&spec),
        "auto" => {
            if let Some(n) = a.n {
                partial(n)
            } else if spec.is_prime_zeta() {
                mobius(&spec)
            } else if let Some(shift) = spec.zeta_shift() {
                let mut r = eval_zeta(s + Complex64::new(shift, 0.0))?;
                r.value *= spec.scale();
                r.remainder_bound *= spec.scale().norm();
                Ok(eval_json("zeta", &r))
            } else {
                Ok(eval_json("vdc", &eval_tail_bounded(&spec, s, opts)?))
            }
        }
        other => Err(CliError::Usage(format!("unknown eval method `{other}`"))),
    }
}

fn density(a: &DensityArgs, config: &ExperimentConfig, out: &OutDir) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    if !(a.x_step > 0.0) || !(a.x_hi >= a.x_lo) {
        return Err(dul_core::Error::Precondition("need x-step > 0 and x-hi >= x-lo".into()).into());
    }
    let n = ((a.x_hi - a.x_lo) / a.x_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| a.x_lo + k as f64 * a.x_step).collect();
    let r = window_sum_check(&spec, a.alpha, a.beta, &grid, a.budget)?;
    let mut csv = CsvOut::create(out.path("density-check.csv"), config, &["x", "window_sum", "window_count", "bound"])?;
    for i in 0..r.x_grid.len() {
        csv.row(&[
            fmt_f64(r.x_grid[i]),
            fmt_f64(r.window_sums[i]),
            r.window_counts[i].to_string(),
            fmt_f64(r.bounds[i]),
        ])?;
    }
    let path = csv.finish()?;
    Ok(json!({
        "pass": r.pass,
        "fitted_c": num(r.fitted_c),
        "declared_sigma_a": num(r.declared_sigma_a),
        "truncated": r.truncated,
        "csv": path.to_string_lossy(),
    }))
}

fn rearrange(a: &RearrangeArgs, config: &ExperimentConfig, out: &OutDir) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let thin = a.thin.max(1);
    match a.mode.as_str() {
        "scalar" => {
            let target = parse_real(&a.target)?;
            let terms = real_terms(&spec, a.sigma);
            let r = riemann_rearrange_scalar(&terms, target, a.steps, a.index_budget)?;
            let mut csv = CsvOut::create(out.path("rearrange.csv"), config, &["step", "index", "term", "partial"])?;
            for (i, ((n, t), p)) in r.prefix.iter().zip(&r.terms).zip(&r.partials).enumerate() {
                if (i as u64 + 1) % thin == 0 || i + 1 == r.prefix.len() {
                    csv.row(&[(i + 1).to_string(), n.to_string(), fmt_f64(*t), fmt_f64(*p)])?;
                }
            }
            let path = csv.finish()?;
            Ok(json!({
                "mode": "scalar",
                "target": num(target),
                "steps": r.prefix.len(),
                "final_error": num(r.final_error()),
                "first_crossing": r.first_crossing,
                "invariant_violations": r.invariant_violations().len(),
                "csv": path.to_string_lossy(),
            }))
        }
        "steer" => {
            let target = parse_target(&a.target)?;
            let schedule = match (&a.stages, &a.compact) {
                (Some(path), _) => read_stages(path)?,
                (None, Some(k)) => {
                    let tol = list(&a.tolerances, parse_real)?;
                    let budgets = list(&a.budgets, |b| {
                        b.trim().parse::<u64>().map_err(|_| CliError::Input(format!("bad budget `{b}`")))
                    })?;
                    if tol.len() != budgets.len() {
                        return Err(CliError::Input("tolerances and budgets differ in length".into()));
                    }
                    Stage::doubling(parse_compact(k)?, &tol, &budgets)
                }
                (None, None) => return Err(CliError::Usage("steer mode needs --stages or --compact".into())),
            };
            let opts = SteerOptions { window: a.window, checkpoint_every: a.checkpoint_every };
            let trace = steer_rearrange(&spec, &target, &schedule, opts)?;
            let check = verify_rearrangement(&trace, &spec, &target)?;
            let max_diff = trace
                .checkpoints
                .iter()
                .zip(&check)
                .map(|(x, y)| (x.sup_error - y.sup_error).abs())
                .fold(0.0, f64::max);
            let mut csv = CsvOut::create(out.path("rearrange.csv"), config, &["step", "stage", "sup_error"])?;
            for c in &trace.checkpoints {
                csv.row(&[c.step.to_string(), c.stage.to_string(), fmt_f64(c.sup_error)])?;
            }
            let path = csv.finish()?;
            let mut pre = CsvOut::create(out.path("rearrange-prefix.csv"), config, &["step", "index"])?;
            for (i, n) in trace.prefix.iter().enumerate() {
                pre.row(&[(i + 1).to_string(), n.to_string()])?;
            }
            let prefix = pre.finish()?;
            let stages: Vec<Value> = trace
                .stages
                .iter()
                .map(|s| {
                    json!({
                        "start_step": s.start_step,
                        "end_step": s.end_step,
                        "start_error": num(s.start_error),
                        "end_error": num(s.end_error),
                        "met": s.met,
                        "stalled": s.stalled,
                    })
                })
                .collect();
            Ok(json!({
                "mode": "steer",
                "status": if trace.stalled_stage().is_some() { "stalled" } else { "ok" },
                "stalled_stage": trace.stalled_stage(),
                "steps": trace.prefix.len(),
                "final_error": opt_num(trace.final_error()),
                "verify_max_diff": num(max_diff),
                "stages": stages,
                "csv": path.to_string_lossy(),
                "prefix_csv": prefix.to_string_lossy(),
            }))
        }
        other => Err(CliError::Usage(format!("unknown rearrange mode `{other}`"))),
    }
}

/// The part of a scan config that must match for a resume.
fn scan_identity(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.sections.remove("output");
    if let Some(p) = c.sections.get_mut("params") {
        p.remove("max-cells");
    }
    c
}

fn translate_scan(a: &ScanArgs, config: &ExperimentConfig, out: &OutDir) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let target = parse_target(&a.target)?;
    let compact = parse_compact(&a.compact)?;
    let params = ScanParams { t_max: a.t_max, step: a.step, eps: a.eps };
    let eval_cfg = EvalConfig {
        tail: TailOptions { min_cutoff: a.min_cutoff, ..TailOptions::default() },
        partial_budget: a.partial_budget,
        ..EvalConfig::default()
    };
    let sidecar_path = a.resume.clone().unwrap_or_else(|| out.path("translate-scan.checkpoint.json"));
    let (state, mut csv, csv_path, side_config) = match &a.resume {
        Some(p) if p.exists() => {
            let side = Sidecar::load(p)?;
            if scan_identity(&side.config) != scan_identity(config) {
                return Err(CliError::Input(format!("{} belongs to a different scan", p.display())));
            }
            (Some(side.state), CsvOut::append(side.csv.clone())?, side.csv, side.config)
        }
        _ => {
            let path = out.path("translate-scan.csv");
            (None, CsvOut::create(path.clone(), config, &["tau", "distance"])?, path, config.clone())
        }
    };
    let thin = a.thin.max(1);
    let mut write_err: Option<CliError> = None;
    let mut sink = |tau: f64, d: Option<f64>| {
        let k = (tau / a.step).round() as u64;
        if k % thin == 0 && write_err.is_none() {
            let field = d.map_or_else(|| "excluded".to_string(), fmt_f64);
            if let Err(e) = csv.row(&[fmt_f64(tau), field]) {
                write_err = Some(e);
            }
        }
    };
    let st = scan_translates_resumable(&spec, &target, &compact, params, &eval_cfg, state, a.max_cells, &mut sink)?;
    if let Some(e) = write_err {
        return Err(e);
    }
    csv.finish()?;
    let side = Sidecar { config: side_config, csv: csv_path.clone(), state: st };
    side.save(&sidecar_path)?;
    let r = side.state.report();
    Ok(json!({
        "status": if side.state.is_complete() { "done" } else { "paused" },
        "density": num(r.density),
        "best_tau": opt_num(r.best_tau),
        "best_distance": num(r.best_distance),
        "excluded_fraction": num(r.excluded_fraction),
        "good_measure": num(r.good_measure),
        "included_measure": num(r.included_measure),
        "refinements": r.refinements,
        "certified": r.certified,
        "max_bound": num(r.max_bound),
        "last_tau": num(side.state.next_cell as f64 * a.step),
        "checkpoints": checkpoints_json(&r.checkpoints),
        "csv": csv_path.to_string_lossy(),
        "checkpoint": sidecar_path.to_string_lossy(),
    }))
}

fn projection(s: &str) -> CliResult<Projection> {
    match s {
        "re" => Ok(Projection::Re),
        "im" => Ok(Projection::Im),
        "abs" => Ok(Projection::Abs),
        other => Err(CliError::Usage(format!("unknown projection `{other}` (want re, im or abs)"))),
    }
}

fn mc_sample(a: &McArgs, config: &ExperimentConfig, out: &OutDir) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let s = parse_complex(&a.s)?;
    let proj = projection(&a.projection)?;
    let set = sample_random_phases(&spec, s, a.count, a.seed, a.n_terms)?;
    let mut csv = CsvOut::create(out.path("mc-sample.csv"), config, &["draw", "re", "im"])?;
    for (i, z) in set.values.iter().enumerate() {
        csv.row(&[i.to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    let path = csv.finish()?;
    let empirical = set.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / set.values.len().max(1) as f64;
    let ks = match a.compare_t {
        None => Value::Null,
        Some(t) => {
            let obs = Observable { s, projection: proj };
            let translates: Vec<Complex64> =
                translate_values(&spec, s, t, a.step, &EvalConfig::default())?.into_iter().flatten().collect();
            let r = compare_distributions(
                &ObservableSamples::from_complex(obs, &translates),
                &ObservableSamples::from_complex(obs, &set.values),
            )?;
            json!({
                "statistic": num(r.statistic),
                "critical": num(r.critical),
                "reject": r.reject,
                "translates": translates.len(),
            })
        }
    };
    Ok(json!({
        "n_terms": set.n_terms,
        "tail_ratio": num(set.tail_ratio),
        "second_moment": num(set.second_moment),
        "empirical_second_moment": num(empirical),
        "ks": ks,
        "csv": path.to_string_lossy(),
    }))
}

fn mv_check(a: &MvArgs, config: &ExperimentConfig, out: &OutDir) -> CliResult<Value> {
    let mut csv = CsvOut::create(out.path("mv-check.csv"), config, &["instance", "n", "lhs", "rhs", "holds"])?;
    let mut violations = 0u64;
    for i in 0..a.random {
        let (lambdas, u) = random_mv_instance(a.seed, i, a.nmax);
        let r = mv_bound_check(&lambdas, &u)?;
        violations += u64::from(!r.holds);
        csv.row(&[i.to_string(), lambdas.len().to_string(), fmt_f64(r.lhs), fmt_f64(r.rhs), r.holds.to_string()])?;
    }
    let path = csv.finish()?;
    Ok(json!({ "instances": a.random, "violations": violations, "csv": path.to_string_lossy() }))
}

fn mean_sq(a: &MeanSquareArgs) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let cfg = EvalConfig {
        tail: TailOptions { min_cutoff: a.min_cutoff, ..TailOptions::default() },
        ..EvalConfig::default()
    };
    let m = mean_square(&spec, a.sigma, a.t_max, a.dt, &cfg)?;
    Ok(json!({
        "value": num(m.value),
        "max_bound": num(m.max_bound),
        "certified": m.certified,
        "nodes": m.nodes,
    }))
}

fn parse_atom(s: &str) -> CliResult<Atom> {
    let v = s.split(',').map(parse_real).collect::<CliResult<Vec<f64>>>()?;
    let (at, weight) = match v.as_slice() {
        [re, im] => (Complex64::new(*re, *im), Complex64::new(1.0, 0.0)),
        [re, im, w] => (Complex64::new(*re, *im), Complex64::new(*w, 0.0)),
        [re, im, wr, wi] => (Complex64::new(*re, *im), Complex64::new(*wr, *wi)),
        _ => return Err(CliError::Input(format!("bad atom `{s}` (want re,im[,w_re[,w_im]])"))),
    };
    Ok(Atom { at, weight })
}

fn divergence(a: &DivergenceArgs, config: &ExperimentConfig, out: &OutDir) -> CliResult<Value> {
    let spec = parse_series(&a.series)?;
    let mu = DiscreteMeasure::new(list(&a.atoms, parse_atom)?)?;
    let thresholds = a.thresholds.as_deref().map(|t| list(t, parse_real)).transpose()?.unwrap_or_default();
    let r = divergence_oracle(&spec, &mu, a.nmax, &thresholds)?;
    let mut csv = CsvOut::create(out.path("divergence-oracle.csv"), config, &["n", "sum"])?;
    for (n, s) in &r.checkpoints {
        csv.row(&[n.to_string(), fmt_f64(*s)])?;
    }
    let path: PathBuf = csv.finish()?;
    let crossings: Vec<Value> =
        thresholds.iter().zip(&r.crossings).map(|(t, c)| json!({ "threshold": num(*t), "n": c })).collect();
    Ok(json!({
        "final_sum": num(r.final_sum),
        "reference_sum": num(r.reference_sum),
        "divergence_evidence": r.divergence_evidence,
        "growth_rate": opt_num(r.growth_rate),
        "crossings": crossings,
        "csv": path.to_string_lossy(),
    }))
}
