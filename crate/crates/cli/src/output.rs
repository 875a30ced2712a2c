//! Result tables and their manifests.
//!
//! A JSON document carries its manifest inline. CSV has no place for one,
//! so a CSV written to `--out PATH` gets a sidecar `PATH.manifest.json`,
//! and a CSV on standard output gets its manifest as one JSON line on
//! standard error. The CSV bytes themselves depend only on the inputs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// Text form used in CSV. Floats use the shortest digits that parse
    /// back to the same double.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_f64(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => match i64::try_from(*v) {
                Ok(small) => Value::from(small),
                Err(_) => Value::String(v.to_string()),
            },
            Cell::Float(v) if v.is_finite() => Value::from(*v),
            Cell::Float(v) => Value::String(format_f64(*v)),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(v) => Value::String(v.clone()),
        }
    }
}

pub fn format_f64(v: f64) -> String {
    // `Debug` is the shortest round-trip form, switching to exponent
    // notation for very large and very small magnitudes.
    format!("{v:?}")
}

macro_rules! cell_from {
    ($($t:ty => $variant:ident),* $(,)?) => {
        $(impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::$variant(v.into())
            }
        })*
    };
}

cell_from!(i64 => Int, u64 => Int, u32 => Int, i8 => Int, f64 => Float, bool => Bool, String => Text);

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.to_json()))
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub rng: Option<String>,
    pub threads: usize,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, seed: Option<u64>, rng: Option<&str>) -> Self {
        let params = match params {
            Value::Object(map) => map.into_iter().collect(),
            Value::Null => BTreeMap::new(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        Self {
            command: command.to_string(),
            params,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng: rng.map(str::to_string),
            threads: rayon::current_num_threads(),
            wall_time_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Where a finished table goes.
pub struct Sink<'a> {
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

impl Sink<'_> {
    pub fn emit(&mut self, table: &Table, manifest: &RunManifest) -> CliResult<()> {
        let mut body = Vec::new();
        match self.format {
            OutputFormat::Csv => table.write_csv(&mut body)?,
            OutputFormat::Json => {
                let doc = serde_json::json!({
                    "manifest": manifest,
                    "columns": table.columns,
                    "rows": table.json_rows(),
                });
                serde_json::to_writer_pretty(&mut body, &doc)?;
                body.push(b'\n');
            }
        }
        match &self.out {
            Some(path) => {
                std::fs::write(path, &body)?;
                if self.format == OutputFormat::Csv {
                    let mut side = serde_json::to_vec_pretty(manifest)?;
                    side.push(b'\n');
                    std::fs::write(sidecar_path(path), side)?;
                }
            }
            None => {
                self.stdout.write_all(&body)?;
                self.stdout.flush()?;
                if self.format == OutputFormat::Csv {
                    writeln!(
                        self.stderr,
                        "manifest: {}",
                        serde_json::to_string(manifest)?
                    )?;
                }
            }
        }
        Ok(())
    }
}
