//! CSV and JSON persistence of [`ScenarioStats`] rows. Floats are written
//! with 17 significant digits so a read-back reproduces them exactly.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::ScenarioStats;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "scenario", "method", "n_dim", "t", "reps", "seed", "truth", "mean", "bias", "stdev", "rmse",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}'"))),
        }
    }
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn to_csv_string(rows: &[ScenarioStats]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.method.clone(),
            r.n_dim.to_string(),
            r.t.to_string(),
            r.reps.to_string(),
            r.seed.to_string(),
            float(r.truth),
            float(r.mean),
            float(r.bias),
            float(r.stdev),
            float(r.rmse),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json_string(rows: &[ScenarioStats]) -> Result<String> {
    let quote = |s: &str| serde_json::to_string(s).map_err(|e| Error::Parse(e.to_string()));
    let mut out = String::from("[");
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\n  {{\"scenario\": {}, \"method\": {}, \"n_dim\": {}, \"t\": {}, \"reps\": {}, \
             \"seed\": {}, \"truth\": {}, \"mean\": {}, \"bias\": {}, \"stdev\": {}, \"rmse\": {}}}",
            quote(&r.scenario)?,
            quote(&r.method)?,
            r.n_dim,
            r.t,
            r.reps,
            r.seed,
            float(r.truth),
            float(r.mean),
            float(r.bias),
            float(r.stdev),
            float(r.rmse),
        ));
    }
    out.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
    Ok(out)
}

pub fn write_stats(rows: &[ScenarioStats], format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv_string(rows)?,
        Format::Json => to_json_string(rows)?,
    };
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<ScenarioStats>> {
    let text = read(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn read_json(path: &Path) -> Result<Vec<ScenarioStats>> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
