use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use entdecay::Error;

use crate::{svg, Format, GlobalOpts};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_ACCURACY: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::Domain(_) | Error::InvalidState(_) => EXIT_DOMAIN,
            Error::Accuracy { .. } | Error::Refinement(_) | Error::Resolution(_) | Error::Fit(_) => EXIT_ACCURACY,
            Error::Internal(_) | Error::Io(_) => EXIT_OTHER,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_OTHER, message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError { code: EXIT_OTHER, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A rectangular result: metadata, column names and rows of numbers.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `# key,value...` lines written after the rows.
    pub trailer: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# version,{}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k},{v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for line in &self.trailer {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let meta: serde_json::Map<String, serde_json::Value> =
            self.meta.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let mut columns = serde_json::Map::new();
        for (i, name) in self.columns.iter().enumerate() {
            let col: Vec<serde_json::Value> = self.rows.iter().map(|r| json_number(r[i])).collect();
            columns.insert(name.clone(), serde_json::Value::Array(col));
        }
        serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "meta": meta,
            "columns": columns,
            "notes": self.trailer,
        })
    }
}

fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

/// Writes `table` in the selected format to `--out` or stdout, plus an SVG
/// chart when `--plot` is set.
pub fn emit(global: &GlobalOpts, table: &Table, chart: Option<svg::Chart>) -> CliResult<()> {
    emit_text(global, table.to_csv(), table.to_json(), chart)
}

/// Like [`emit`] for results that are not a plain table.
pub fn emit_text(global: &GlobalOpts, csv: String, json: serde_json::Value, chart: Option<svg::Chart>) -> CliResult<()> {
    let text = match global.format {
        Format::Csv => csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json)?;
            s.push('\n');
            s
        }
    };
    match &global.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if global.plot {
        let chart = chart.ok_or_else(|| CliError::usage("this command has no chart to plot"))?;
        let path = global
            .out
            .as_ref()
            .map(|p| p.with_extension("svg"))
            .ok_or_else(|| CliError::usage("--plot needs --out to name the SVG file"))?;
        fs::write(path, chart.render())?;
    }
    Ok(())
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.svg`.
pub fn write_figure(dir: &Path, stem: &str, table: &Table, chart: &svg::Chart) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));
    fs::write(&csv, table.to_csv())?;
    fs::write(&svg_path, chart.render())?;
    Ok(vec![csv, svg_path])
}
