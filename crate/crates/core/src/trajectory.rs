//! Year-indexed parameter schedules and the premium time series they imply.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::cost_model::{
    acquisition_premium, lcod, lifecycle_premium, production_premium, tco_npv, EvPowertrain, Field, FieldKind,
    IcevPowertrain, MarketPrices, Powertrain, ResidualAndFinance, SubsidyPolicy, UsageProfile, VehicleScenario,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Step,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VehicleClass {
    LongRange,
    ShortRange,
}

impl std::fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VehicleClass::LongRange => "long-range",
            VehicleClass::ShortRange => "short-range",
        })
    }
}

/// Field values that take effect from `year` on.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEntry {
    pub year: i32,
    pub overrides: BTreeMap<Field, f64>,
}

/// A validated schedule. The first entry sets every field; later entries
/// override a subset. The span runs from the first entry to `end_year`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSchedule {
    name: String,
    vehicle_class: VehicleClass,
    entries: Vec<ScheduleEntry>,
    interpolation: BTreeMap<Field, Interpolation>,
    end_year: i32,
}

impl ScenarioSchedule {
    pub fn new(
        name: impl Into<String>,
        vehicle_class: VehicleClass,
        entries: Vec<ScheduleEntry>,
        interpolation: BTreeMap<Field, Interpolation>,
        end_year: Option<i32>,
    ) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Config("schedule has no entries".into()))?;
        for pair in entries.windows(2) {
            if pair[1].year <= pair[0].year {
                return Err(Error::Config(format!(
                    "schedule years must be strictly increasing ({} follows {})",
                    pair[1].year, pair[0].year
                )));
            }
        }
        if let Some(missing) = Field::ALL.iter().find(|f| !first.overrides.contains_key(f)) {
            return Err(Error::Config(format!(
                "first schedule entry ({}) does not set `{missing}`",
                first.year
            )));
        }
        for (field, interp) in &interpolation {
            if *interp == Interpolation::Linear && field.kind() != FieldKind::Real {
                return Err(Error::Config(format!(
                    "`{field}` is not continuous and cannot be interpolated linearly"
                )));
            }
        }
        for entry in &entries {
            for (field, v) in &entry.overrides {
                if !v.is_finite() {
                    return Err(Error::Config(format!("`{field}` in {} is not finite", entry.year)));
                }
            }
        }
        let last = entries.last().map_or(first.year, |e| e.year);
        let end_year = end_year.unwrap_or(last);
        if end_year < last {
            return Err(Error::Config(format!(
                "end_year {end_year} precedes the last entry {last}"
            )));
        }
        Ok(ScenarioSchedule {
            name: name.into(),
            vehicle_class,
            entries,
            interpolation,
            end_year,
        })
    }

    /// A schedule with one entry, holding `base` constant over `years`.
    pub fn constant(
        name: impl Into<String>,
        vehicle_class: VehicleClass,
        base: &VehicleScenario,
        years: RangeInclusive<i32>,
    ) -> Self {
        let overrides = Field::ALL.iter().map(|f| (*f, base.get(*f))).collect();
        ScenarioSchedule {
            name: name.into(),
            vehicle_class,
            entries: vec![ScheduleEntry {
                year: *years.start(),
                overrides,
            }],
            interpolation: BTreeMap::new(),
            end_year: *years.end(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vehicle_class(&self) -> VehicleClass {
        self.vehicle_class
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn interpolation(&self, field: Field) -> Interpolation {
        self.interpolation.get(&field).copied().unwrap_or_default()
    }

    pub fn span(&self) -> RangeInclusive<i32> {
        self.entries[0].year..=self.end_year
    }

    fn value(&self, field: Field, year: i32) -> f64 {
        let anchors = self
            .entries
            .iter()
            .filter_map(|e| e.overrides.get(&field).map(|v| (e.year, *v)));
        let mut before = None;
        let mut after = None;
        for (y, v) in anchors {
            if y <= year {
                before = Some((y, v));
            } else {
                after = Some((y, v));
                break;
            }
        }
        // The first entry is complete, so every in-span year has an anchor at or before it.
        let (y0, v0) = before.expect("first entry sets every field");
        match (self.interpolation(field), after) {
            (Interpolation::Linear, Some((y1, v1))) if y0 != year => {
                v0 + (v1 - v0) * f64::from(year - y0) / f64::from(y1 - y0)
            }
            _ => v0,
        }
    }
}

fn blank_scenario(year: i32) -> VehicleScenario {
    VehicleScenario {
        year,
        ev_powertrain: EvPowertrain {
            battery_unit_cost: 0.0,
            battery_capacity: 0.0,
            motor_unit_cost: 0.0,
            motor_power: 0.0,
            other_hv_cost: 0.0,
        },
        icev_powertrain: IcevPowertrain {
            engine_intake_exhaust_cost: 0.0,
            transmission_cost: 0.0,
        },
        subsidy_policy: SubsidyPolicy::none(),
        usage_profile: UsageProfile {
            lifecycle_years: 0,
            annual_km: 0.0,
            ev_consumption: 0.0,
            icev_consumption: 0.0,
            electricity_price: 0.0,
            gasoline_price: 0.0,
            ev_maintenance: 0.0,
            icev_maintenance: 0.0,
            battery_replacements: 0,
        },
        residual_and_finance: ResidualAndFinance {
            ev_residual: 0.0,
            icev_residual: 0.0,
            discount_rate: 0.0,
        },
        market_prices: MarketPrices {
            common_base_cost: 0.0,
            ev_markup: 0.0,
            icev_markup: 0.0,
        },
    }
}

/// The scenario in force in `year`. Step fields hold the last value at or
/// before `year`; linear fields interpolate between the bracketing anchors
/// and hold their last anchor value past it.
pub fn resolve_scenario(sched: &ScenarioSchedule, year: i32) -> Result<VehicleScenario> {
    let span = sched.span();
    if !span.contains(&year) {
        return Err(Error::YearOutOfSpan {
            year,
            start: *span.start(),
            end: *span.end(),
        });
    }
    let mut sc = blank_scenario(year);
    for field in Field::ALL {
        sc.set(*field, sched.value(*field, year));
    }
    sc.validate()?;
    Ok(sc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PremiumKind {
    Production,
    Acquisition,
    Lifecycle,
}

impl PremiumKind {
    pub fn of(self, sc: &VehicleScenario) -> Result<f64> {
        match self {
            PremiumKind::Production => {
                production_premium(sc.production_cost(Powertrain::Ev), sc.production_cost(Powertrain::Icev))
            }
            PremiumKind::Acquisition => acquisition_premium(sc),
            PremiumKind::Lifecycle => lifecycle_premium(sc),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumPoint {
    pub year: i32,
    pub production: f64,
    pub acquisition: f64,
    pub lifecycle: f64,
    pub lcod_ev: f64,
    pub lcod_icev: f64,
}

impl PremiumPoint {
    pub fn evaluate(sc: &VehicleScenario) -> Result<Self> {
        Ok(PremiumPoint {
            year: sc.year,
            production: PremiumKind::Production.of(sc)?,
            acquisition: PremiumKind::Acquisition.of(sc)?,
            lifecycle: PremiumKind::Lifecycle.of(sc)?,
            lcod_ev: lcod(tco_npv(sc, Powertrain::Ev), &sc.usage_profile)?,
            lcod_icev: lcod(tco_npv(sc, Powertrain::Icev), &sc.usage_profile)?,
        })
    }

    pub fn get(&self, kind: PremiumKind) -> f64 {
        match kind {
            PremiumKind::Production => self.production,
            PremiumKind::Acquisition => self.acquisition,
            PremiumKind::Lifecycle => self.lifecycle,
        }
    }
}

/// Premiums for a run of consecutive years.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PremiumSeries {
    points: Vec<PremiumPoint>,
}

impl PremiumSeries {
    pub fn new(points: Vec<PremiumPoint>) -> Result<Self> {
        for pair in points.windows(2) {
            if pair[1].year != pair[0].year + 1 {
                return Err(Error::Config(format!(
                    "premium series years must be contiguous ({} follows {})",
                    pair[1].year, pair[0].year
                )));
            }
        }
        for p in &points {
            let vals = [p.production, p.acquisition, p.lifecycle, p.lcod_ev, p.lcod_icev];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Degenerate(format!("non-finite premium in {}", p.year)));
            }
        }
        Ok(PremiumSeries { points })
    }

    /// A series carrying only lifecycle premiums, for driving the diffusion
    /// model from designed inputs. Other columns are zero.
    pub fn from_lifecycle(start_year: i32, lifecycle: &[f64]) -> Result<Self> {
        let points = lifecycle
            .iter()
            .zip(start_year..)
            .map(|(&l, year)| PremiumPoint {
                year,
                production: 0.0,
                acquisition: 0.0,
                lifecycle: l,
                lcod_ev: 0.0,
                lcod_icev: 0.0,
            })
            .collect();
        PremiumSeries::new(points)
    }

    pub fn points(&self) -> &[PremiumPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn get(&self, year: i32) -> Option<&PremiumPoint> {
        let first = self.points.first()?.year;
        let idx = usize::try_from(year.checked_sub(first)?).ok()?;
        self.points.get(idx)
    }

    pub fn lifecycle(&self, year: i32) -> Result<f64> {
        self.get(year)
            .map(|p| p.lifecycle)
            .ok_or(Error::MissingPremiumYear(year))
    }
}

pub fn premium_series(sched: &ScenarioSchedule, years: RangeInclusive<i32>) -> Result<PremiumSeries> {
    let points = years
        .map(|y| resolve_scenario(sched, y).and_then(|sc| PremiumPoint::evaluate(&sc)))
        .collect::<Result<Vec<_>>>()?;
    PremiumSeries::new(points)
}

/// First year whose selected premium is at or below zero.
pub fn parity_year(series: &PremiumSeries, which: PremiumKind) -> Option<i32> {
    series.points.iter().find(|p| p.get(which) <= 0.0).map(|p| p.year)
}
