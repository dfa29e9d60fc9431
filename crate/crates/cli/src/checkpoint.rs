//! JSON sidecar for resumable translate scans: the resolved config, the
//! scan state and the last grid point reached.

use std::path::{Path, PathBuf};

use dul_core::lab::{ScanCheckpoint, ScanParams, ScanState};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, read_f64, write_json};

#[derive(Debug, Clone, PartialEq)]
pub struct Sidecar {
    pub config: ExperimentConfig,
    pub csv: PathBuf,
    pub state: ScanState,
}

fn checkpoint_json(c: &ScanCheckpoint) -> Value {
    json!({
        "t": num(c.t),
        "good_measure": num(c.good_measure),
        "density": num(c.density),
        "best_tau": opt_num(c.best_tau),
        "best_distance": num(c.best_distance),
    })
}

pub fn checkpoints_json(cs: &[ScanCheckpoint]) -> Value {
    Value::Array(cs.iter().map(checkpoint_json).collect())
}

fn state_json(s: &ScanState) -> Value {
    json!({
        "T": num(s.params.t_max),
        "step": num(s.params.step),
        "eps": num(s.params.eps),
        "next_cell": s.next_cell,
        "last_tau": num(s.next_cell as f64 * s.params.step),
        "started": s.last.is_some(),
        "last_distance": opt_num(s.last.flatten()),
        "full_good": s.full_good,
        "sub_good": s.sub_good,
        "included_cells": s.included_cells,
        "excluded_cells": s.excluded_cells,
        "refinements": s.refinements,
        "best_tau": opt_num(s.best_tau),
        "best_distance": num(s.best_distance),
        "certified": s.certified,
        "max_bound": num(s.max_bound),
        "checkpoints": checkpoints_json(&s.checkpoints),
    })
}

struct Reader<'a>(&'a Value);

impl Reader<'_> {
    fn bad(key: &str) -> CliError {
        CliError::Input(format!("checkpoint field `{key}` missing or malformed"))
    }

    fn f64(&self, key: &str) -> CliResult<f64> {
        self.0.get(key).and_then(read_f64).ok_or_else(|| Self::bad(key))
    }

    fn opt_f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.0.get(key) {
            Some(Value::Null) => Ok(None),
            Some(v) => read_f64(v).map(Some).ok_or_else(|| Self::bad(key)),
            None => Err(Self::bad(key)),
        }
    }

    fn u64(&self, key: &str) -> CliResult<u64> {
        self.0.get(key).and_then(Value::as_u64).ok_or_else(|| Self::bad(key))
    }

    fn bool(&self, key: &str) -> CliResult<bool> {
        self.0.get(key).and_then(Value::as_bool).ok_or_else(|| Self::bad(key))
    }
}

fn state_from_json(v: &Value) -> CliResult<ScanState> {
    let r = Reader(v);
    let params = ScanParams { t_max: r.f64("T")?, step: r.f64("step")?, eps: r.f64("eps")? };
    let checkpoints = v
        .get("checkpoints")
        .and_then(Value::as_array)
        .ok_or_else(|| Reader::bad("checkpoints"))?
        .iter()
        .map(|c| {
            let r = Reader(c);
            Ok(ScanCheckpoint {
                t: r.f64("t")?,
                good_measure: r.f64("good_measure")?,
                density: r.f64("density")?,
                best_tau: r.opt_f64("best_tau")?,
                best_distance: r.f64("best_distance")?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ScanState {
        params,
        next_cell: r.u64("next_cell")?,
        last: if r.bool("started")? { Some(r.opt_f64("last_distance")?) } else { None },
        full_good: r.u64("full_good")?,
        sub_good: r.u64("sub_good")?,
        included_cells: r.u64("included_cells")?,
        excluded_cells: r.u64("excluded_cells")?,
        refinements: r.u64("refinements")?,
        best_tau: r.opt_f64("best_tau")?,
        best_distance: r.f64("best_distance")?,
        certified: r.bool("certified")?,
        max_bound: r.f64("max_bound")?,
        checkpoints,
    })
}

impl Sidecar {
    pub fn to_json(&self) -> Value {
        json!({
            "config": self.config.to_json(),
            "csv": self.csv.to_string_lossy(),
            "last_tau": num(self.state.next_cell as f64 * self.state.params.step),
            "state": state_json(&self.state),
        })
    }

    pub fn from_json(v: &Value) -> CliResult<Self> {
        let bad = |k: &str| CliError::Input(format!("checkpoint field `{k}` missing or malformed"));
        Ok(Self {
            config: ExperimentConfig::from_json(v.get("config").ok_or_else(|| bad("config"))?)?,
            csv: PathBuf::from(v.get("csv").and_then(Value::as_str).ok_or_else(|| bad("csv"))?),
            state: state_from_json(v.get("state").ok_or_else(|| bad("state"))?)?,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&v)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_json(path, &self.to_json())
    }
}
