//! TOML scenario files.
//!
//! ```toml
//! name = "long-range"
//! vehicle_class = "long-range"
//! end_year = 2030
//!
//! [interpolation]
//! "ev_powertrain.battery_unit_cost" = "linear"
//!
//! [[entry]]
//! year = 2010
//! ev_powertrain.battery_unit_cost = 7500
//! subsidy_policy.ev_tax_exempt = false
//! # ...every field in the first entry...
//!
//! [[entry]]
//! year = 2021
//! ev_powertrain.battery_unit_cost = 820
//! ```
//!
//! Keys are the `section.field` paths of [`Field`]. Fields not listed under
//! `[interpolation]` are step functions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use toml::{Table, Value};

use crate::cost_model::{Field, FieldKind};
use crate::error::{Error, Result};
use crate::trajectory::{Interpolation, ScenarioSchedule, ScheduleEntry, VehicleClass};

pub const BUILTIN_SCENARIOS: &[(&str, &str)] = &[
    ("long-range", include_str!("../scenarios/long-range.toml")),
    ("short-range", include_str!("../scenarios/short-range.toml")),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    name: String,
    vehicle_class: VehicleClass,
    end_year: Option<i32>,
    #[serde(default)]
    interpolation: BTreeMap<String, Interpolation>,
    entry: Vec<Table>,
}

fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&path, t, out),
            other => out.push((path, other.clone())),
        }
    }
}

fn numeric(field: Field, year: i32, v: &Value) -> Result<f64> {
    let bad = || Error::Config(format!("entry {year}: `{field}` has the wrong type"));
    match (field.kind(), v) {
        (FieldKind::Flag, Value::Boolean(b)) => Ok(f64::from(u8::from(*b))),
        (FieldKind::Count, Value::Integer(i)) if *i >= 0 => Ok(*i as f64),
        (FieldKind::Real, Value::Integer(i)) => Ok(*i as f64),
        (FieldKind::Real, Value::Float(f)) => Ok(*f),
        _ => Err(bad()),
    }
}

fn entry_from_table(table: &Table) -> Result<ScheduleEntry> {
    let year = match table.get("year") {
        Some(Value::Integer(y)) => i32::try_from(*y).map_err(|_| Error::Config(format!("year {y} out of range")))?,
        _ => return Err(Error::Config("every entry needs an integer `year`".into())),
    };
    let mut rest = table.clone();
    rest.remove("year");
    let mut flat = Vec::new();
    flatten("", &rest, &mut flat);
    let mut overrides = BTreeMap::new();
    for (path, v) in flat {
        let field: Field = path.parse()?;
        overrides.insert(field, numeric(field, year, &v)?);
    }
    Ok(ScheduleEntry { year, overrides })
}

pub fn parse_schedule(text: &str) -> Result<ScenarioSchedule> {
    let raw: RawSchedule = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let entries = raw.entry.iter().map(entry_from_table).collect::<Result<Vec<_>>>()?;
    let interpolation = raw
        .interpolation
        .iter()
        .map(|(k, v)| Ok((k.parse::<Field>()?, *v)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    ScenarioSchedule::new(raw.name, raw.vehicle_class, entries, interpolation, raw.end_year)
}

pub fn builtin_schedule(name: &str) -> Option<ScenarioSchedule> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_schedule(text).expect("built-in scenario parses"))
}

/// Where a scenario reference was found, with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSource {
    pub origin: String,
    pub text: String,
}

/// Resolves a scenario reference: an existing file path, then
/// `<config_dir>/<name>.toml`, then a built-in name.
pub fn find_scenario(reference: &str, config_dir: Option<&Path>) -> Result<ScenarioSource> {
    let direct = Path::new(reference);
    if direct.is_file() {
        return Ok(ScenarioSource {
            origin: direct.display().to_string(),
            text: std::fs::read_to_string(direct)?,
        });
    }
    if let Some(dir) = config_dir {
        let candidate = dir.join(format!("{reference}.toml"));
        if candidate.is_file() {
            return Ok(ScenarioSource {
                origin: candidate.display().to_string(),
                text: std::fs::read_to_string(&candidate)?,
            });
        }
    }
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == reference)
        .map(|(n, text)| ScenarioSource {
            origin: format!("builtin:{n}"),
            text: (*text).to_string(),
        })
        .ok_or_else(|| Error::Config(format!("no scenario named `{reference}`")))
}
