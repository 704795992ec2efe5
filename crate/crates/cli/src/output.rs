use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Cli, Failure};

/// Run-level bookkeeping shared by every subcommand.
pub struct Run<'a> {
    pub cli: &'a Cli,
    started_at: DateTime<Utc>,
    started: Instant,
    pub warnings: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn new(cli: &'a Cli) -> Self {
        Run {
            cli,
            started_at: Utc::now(),
            started: Instant::now(),
            warnings: Vec::new(),
        }
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn meta(&self) -> Value {
        let workers = rayon::current_num_threads();
        json!({
            "tool": "permcover",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.cli,
            "resolved_workers": workers,
            "timestamp": self.started_at.to_rfc3339_opts(SecondsFormat::Millis, true),
            "wall_time_ms": self.started.elapsed().as_millis() as u64,
            "warnings": self.warnings,
        })
    }

    /// Human-readable line: stdout when the payload goes to a file, stderr
    /// when stdout carries the payload.
    pub fn say(&self, out: Option<&Path>, text: impl AsRef<str>) {
        if self.cli.global.quiet {
            return;
        }
        if out.is_some() {
            println!("{}", text.as_ref());
        } else {
            eprintln!("{}", text.as_ref());
        }
    }

    pub fn emit_json<T: Serialize>(&self, out: Option<&Path>, payload: &T) -> Result<(), Failure> {
        let mut value = serde_json::to_value(payload).map_err(permcover_core::Error::from)?;
        match value.as_object_mut() {
            Some(obj) => {
                obj.insert("meta".into(), self.meta());
            }
            None => value = json!({ "payload": value, "meta": self.meta() }),
        }
        let text = serde_json::to_string_pretty(&value).map_err(permcover_core::Error::from)?;
        write_text(out, &text)
    }

    pub fn emit_csv<R: Serialize>(&self, out: Option<&Path>, rows: &[R], extra_meta: Value) -> Result<(), Failure> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for r in rows {
            wtr.serialize(r).map_err(csv_failure)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Failure {
            code: crate::EXIT_VIOLATION,
            message: e.to_string(),
        })?;
        let text = String::from_utf8(bytes).expect("csv output is utf-8");
        write_text(out, text.trim_end())?;
        if let Some(path) = out {
            let mut meta = self.meta();
            if let (Some(obj), Value::Object(extra)) = (meta.as_object_mut(), extra_meta) {
                obj.extend(extra);
            }
            let text = serde_json::to_string_pretty(&meta).map_err(permcover_core::Error::from)?;
            write_text(Some(&sidecar(path)), &text)?;
        }
        Ok(())
    }
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure {
        code: crate::EXIT_VIOLATION,
        message: e.to_string(),
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, format!("{text}\n"))?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}
