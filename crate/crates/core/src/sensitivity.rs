//! One-at-a-time sensitivity of a green premium to individual inputs.

use serde::{Deserialize, Serialize};

use crate::cost_model::{Field, VehicleScenario};
use crate::error::{Error, Result};
use crate::trajectory::PremiumKind;

/// Perturbation sizes, as fractions of the factor's base value.
pub const STEPS: [f64; 4] = [-0.2, -0.1, 0.1, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorGroup {
    Production,
    Subsidy,
    Cost,
    Residual,
}

impl std::fmt::Display for FactorGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FactorGroup::Production => "production",
            FactorGroup::Subsidy => "subsidy",
            FactorGroup::Cost => "cost",
            FactorGroup::Residual => "residual",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub id: String,
    pub field: Field,
    pub base_label: String,
    pub group: FactorGroup,
    /// Replaces the field's value in the base scenario before perturbing.
    pub base_value: Option<f64>,
}

impl FactorSpec {
    pub fn new(id: &str, field: Field, base_label: &str, group: FactorGroup, base_value: Option<f64>) -> Self {
        FactorSpec {
            id: id.to_string(),
            field,
            base_label: base_label.to_string(),
            group,
            base_value,
        }
    }

    fn base(&self, scenario: &VehicleScenario) -> VehicleScenario {
        let mut sc = *scenario;
        if let Some(v) = self.base_value {
            sc.set(self.field, v);
        }
        sc
    }
}

/// The standard factor set: three battery price levels, policy levers,
/// energy and usage inputs, and residual/finance terms.
pub fn default_factors() -> Vec<FactorSpec> {
    use FactorGroup::*;
    vec![
        FactorSpec::new(
            "battery-800",
            Field::BatteryUnitCost,
            "Battery (800)",
            Production,
            Some(800.0),
        ),
        FactorSpec::new(
            "battery-650",
            Field::BatteryUnitCost,
            "Battery (650)",
            Production,
            Some(650.0),
        ),
        FactorSpec::new(
            "battery-500",
            Field::BatteryUnitCost,
            "Battery (500)",
            Production,
            Some(500.0),
        ),
        FactorSpec::new("credit", Field::CreditPrice, "Credit", Subsidy, None),
        FactorSpec::new("tax-rate", Field::PurchaseTaxRate, "Tax Rate (10%)", Subsidy, None),
        FactorSpec::new("subsidy", Field::AcquisitionSubsidy, "Subsidy", Subsidy, None),
        FactorSpec::new("oil-cost-6l", Field::IcevConsumption, "Oil Cost (6L)", Cost, Some(6.0)),
        FactorSpec::new("oil-cost-4l", Field::IcevConsumption, "Oil Cost (4L)", Cost, Some(4.0)),
        FactorSpec::new("elec-cost", Field::EvConsumption, "Elec Cost (13kWh)", Cost, None),
        FactorSpec::new("range", Field::AnnualKm, "Range (15000)", Cost, None),
        FactorSpec::new("elec-price", Field::ElectricityPrice, "Elec Price (1.2)", Cost, None),
        FactorSpec::new("oil-price", Field::GasolinePrice, "Oil Price (7.5)", Cost, None),
        FactorSpec::new("ev-residual", Field::EvResidual, "EV Residual", Residual, None),
        FactorSpec::new("discount-rate", Field::DiscountRate, "Discount Rate", Residual, None),
    ]
}

/// Relative change of the selected premium when `factor` moves by `pct`.
pub fn perturb(base: &VehicleScenario, factor: &FactorSpec, pct: f64, kind: PremiumKind) -> Result<f64> {
    let sc = factor.base(base);
    sc.validate()?;
    let before = kind.of(&sc)?;
    if before.abs() < 1e-9 {
        return Err(Error::Degenerate(format!(
            "{} premium is {before:e} at the base of `{}`",
            kind_name(kind),
            factor.id
        )));
    }
    let mut moved = sc;
    moved.set(factor.field, sc.get(factor.field) * (1.0 + pct));
    moved.validate()?;
    let after = kind.of(&moved)?;
    Ok((after - before) / before.abs())
}

fn kind_name(kind: PremiumKind) -> &'static str {
    match kind {
        PremiumKind::Production => "production",
        PremiumKind::Acquisition => "acquisition",
        PremiumKind::Lifecycle => "lifecycle",
    }
}

/// Least-squares slope through the origin of premium change on factor change.
pub fn coefficient(points: &[(f64, f64)]) -> f64 {
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    points.iter().map(|(x, y)| x * y).sum::<f64>() / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub id: String,
    pub label: String,
    pub group: FactorGroup,
    /// Premium change at each of [`STEPS`].
    pub changes: [f64; 4],
    pub coefficient: f64,
}

pub fn row(base: &VehicleScenario, factor: &FactorSpec, kind: PremiumKind) -> Result<SensitivityRow> {
    let mut changes = [0.0; 4];
    for (c, pct) in changes.iter_mut().zip(STEPS) {
        *c = perturb(base, factor, pct, kind)?;
    }
    let points: Vec<(f64, f64)> = STEPS.iter().copied().zip(changes).collect();
    let coefficient = coefficient(&points);
    if !coefficient.is_finite() {
        return Err(Error::Degenerate(format!("non-finite coefficient for `{}`", factor.id)));
    }
    Ok(SensitivityRow {
        id: factor.id.clone(),
        label: factor.base_label.clone(),
        group: factor.group,
        changes,
        coefficient,
    })
}

/// Rows grouped in [`FactorGroup`] order, by descending |coefficient| within
/// a group. Factors that fail are returned alongside instead of aborting.
pub fn sensitivity_table(
    base: &VehicleScenario,
    factors: &[FactorSpec],
    kind: PremiumKind,
) -> (Vec<SensitivityRow>, Vec<(String, Error)>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for f in factors {
        match row(base, f, kind) {
            Ok(r) => rows.push(r),
            Err(e) => failures.push((f.id.clone(), e)),
        }
    }
    rows.sort_by(|a, b| {
        a.group
            .cmp(&b.group)
            .then(b.coefficient.abs().total_cmp(&a.coefficient.abs()))
            .then(a.id.cmp(&b.id))
    });
    (rows, failures)
}
