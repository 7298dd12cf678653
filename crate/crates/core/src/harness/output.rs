use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, SlmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = SlmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(SlmError::Config(format!("unknown output format `{s}`"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Serialize)]
struct Document<'a, S: Serialize, R: Serialize> {
    spec: &'a S,
    results: &'a [R],
    version: &'static str,
}

/// Serializes `rows` as CSV (header row, one record per row) or as a JSON
/// object with `spec`, `results` and `version` keys.
pub fn render<S: Serialize, R: Serialize>(format: OutputFormat, spec: &S, rows: &[R]) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let doc = Document { spec, results: rows, version: env!("CARGO_PKG_VERSION") };
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| SlmError::Serialize(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| SlmError::Serialize(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| SlmError::Serialize(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| SlmError::Serialize(e.to_string()))
        }
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit<S: Serialize, R: Serialize>(path: Option<&Path>, format: OutputFormat, spec: &S, rows: &[R]) -> Result<()> {
    let text = render(format, spec, rows)?;
    match path {
        Some(p) => {
            let io_err = |source| SlmError::Io { path: p.to_path_buf(), source };
            let mut f = File::create(p).map_err(io_err)?;
            f.write_all(text.as_bytes()).map_err(io_err)
        }
        None => {
            io::stdout().write_all(text.as_bytes()).map_err(|source| SlmError::Io { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        name: &'static str,
        value: f64,
        extra: Option<f64>,
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let rows = [Row { name: "a,b", value: 1.5, extra: None }, Row { name: "c", value: 2.0, extra: Some(3.0) }];
        let s = render(OutputFormat::Csv, &(), &rows).unwrap();
        assert_eq!(s, "name,value,extra\n\"a,b\",1.5,\nc,2.0,3.0\n");
    }

    #[test]
    fn json_has_three_keys() {
        let rows = [Row { name: "x", value: 0.25, extra: None }];
        let s = render(OutputFormat::Json, &serde_json::json!({"trials": 3}), &rows).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 3);
        assert_eq!(v["spec"]["trials"], 3);
        assert_eq!(v["results"][0]["value"], 0.25);
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn unwritable_path_reports_it() {
        let err = emit(Some(Path::new("/nonexistent/dir/out.csv")), OutputFormat::Csv, &(), &[1u8]).unwrap_err();
        assert!(matches!(err, SlmError::Io { ref path, .. } if path.ends_with("out.csv")));
    }
}
