//! Sales data files.
//!
//! ```text
//! # units: thousands
//! year,annual_sales
//! 2010,4.0
//! ```
//!
//! A `# units: vehicles` or `# units: thousands` comment declares the unit;
//! thousands is assumed when absent. Values are returned in thousands.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fitting::ObservationSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SalesUnit {
    Vehicles,
    Thousands,
}

impl SalesUnit {
    fn per_thousand(self) -> f64 {
        match self {
            SalesUnit::Vehicles => 1000.0,
            SalesUnit::Thousands => 1.0,
        }
    }
}

fn declared_unit(text: &str) -> Result<SalesUnit> {
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        let Some(unit) = comment.trim().strip_prefix("units:") else {
            continue;
        };
        return match unit.trim() {
            "vehicles" => Ok(SalesUnit::Vehicles),
            "thousands" => Ok(SalesUnit::Thousands),
            other => Err(Error::Parse {
                line: i + 1,
                reason: format!("unknown unit `{other}`"),
            }),
        };
    }
    Ok(SalesUnit::Thousands)
}

pub fn parse_sales_csv(text: &str) -> Result<ObservationSeries> {
    let unit = declared_unit(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if headers.is_empty() || headers.iter().collect::<Vec<_>>() != ["year", "annual_sales"] {
        return Err(Error::Parse {
            line: 1,
            reason: "expected header `year,annual_sales`".into(),
        });
    }
    let mut points: Vec<(i32, f64, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |reason: String| Error::Parse { line, reason };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", record.len())));
        }
        let year: i32 = record[0]
            .parse()
            .map_err(|_| bad(format!("bad year `{}`", &record[0])))?;
        let sales: f64 = record[1]
            .parse()
            .map_err(|_| bad(format!("bad annual_sales `{}`", &record[1])))?;
        if !sales.is_finite() || sales < 0.0 {
            return Err(bad(format!("annual_sales must be finite and >= 0, got {sales}")));
        }
        if let Some((_, _, first)) = points.iter().find(|(y, _, _)| *y == year) {
            return Err(bad(format!("duplicate year {year} (first on line {first})")));
        }
        points.push((year, sales / unit.per_thousand(), line));
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    ObservationSeries::new(points.into_iter().map(|(y, v, _)| (y, v)).collect())
}

pub fn load_sales_csv(path: &Path) -> Result<ObservationSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line: 1,
            reason: "empty file".into(),
        });
    }
    parse_sales_csv(&text)
}

/// The bundled 2010-2021 China BEV sales sample, in thousands.
pub const SAMPLE_SALES: &str = include_str!("../data/china_bev_sales.csv");
