use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// 17 significant digits, so every binary64 value round-trips.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number with 17 significant digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(serde_json::from_str(&fmt_f64(x)).expect("formatted float is valid JSON"))
    } else {
        Value::String(fmt_f64(x))
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn read_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_json(&self, name: &str, v: &Value) -> CliResult<PathBuf> {
        let path = self.path(name);
        write_json(&path, v)?;
        Ok(path)
    }
}

pub fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// CSV output whose body depends only on the run; the timestamp lives in
/// its own comment line above the config lines.
pub struct CsvOut {
    path: PathBuf,
    w: BufWriter<File>,
}

impl CsvOut {
    pub fn create(path: PathBuf, cfg: &ExperimentConfig, header: &[&str]) -> CliResult<Self> {
        let file = File::create(&path).map_err(CliError::io(&path))?;
        let mut w = BufWriter::new(file);
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let head = format!("# generated unix={stamp}\n{}{}\n", cfg.comment_lines(), header.join(","));
        w.write_all(head.as_bytes()).map_err(CliError::io(&path))?;
        Ok(Self { path, w })
    }

    /// Reopens an existing file for appending rows.
    pub fn append(path: PathBuf) -> CliResult<Self> {
        let file = OpenOptions::new().append(true).open(&path).map_err(CliError::io(&path))?;
        Ok(Self { w: BufWriter::new(file), path })
    }

    pub fn row(&mut self, fields: &[String]) -> CliResult<()> {
        let line = fields.join(",");
        writeln!(self.w, "{line}").map_err(CliError::io(&self.path))
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.w.flush().map_err(CliError::io(&self.path))?;
        Ok(self.path)
    }
}
