use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Battery, motor and high-voltage content of the electric powertrain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvPowertrain {
    /// Currency per kWh.
    pub battery_unit_cost: f64,
    /// kWh.
    pub battery_capacity: f64,
    /// Currency per kW of motor/inverter power.
    pub motor_unit_cost: f64,
    /// kW.
    pub motor_power: f64,
    pub other_hv_cost: f64,
}

impl EvPowertrain {
    pub fn battery_pack_cost(&self) -> f64 {
        self.battery_unit_cost * self.battery_capacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcevPowertrain {
    pub engine_intake_exhaust_cost: f64,
    pub transmission_cost: f64,
}

/// Purchase tax, acquisition subsidy and the dual-credit (CAFC / NEV) regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsidyPolicy {
    pub purchase_tax_rate: f64,
    pub ev_tax_exempt: bool,
    pub acquisition_subsidy: f64,
    /// Currency per credit. Also prices negative CAFC balances.
    pub credit_price: f64,
    /// Actual fleet fuel consumption, L/100km.
    pub cafc_actual: f64,
    /// Regulatory fuel-consumption target, L/100km.
    pub cafc_threshold: f64,
    pub nev_credits_actual: f64,
    pub nev_credits_threshold: f64,
}

impl SubsidyPolicy {
    /// No tax, no subsidy, no credit trading.
    pub fn none() -> Self {
        SubsidyPolicy {
            purchase_tax_rate: 0.0,
            ev_tax_exempt: false,
            acquisition_subsidy: 0.0,
            credit_price: 0.0,
            cafc_actual: 0.0,
            cafc_threshold: 0.0,
            nev_credits_actual: 0.0,
            nev_credits_threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsageProfile {
    pub lifecycle_years: u32,
    pub annual_km: f64,
    /// kWh/100km.
    pub ev_consumption: f64,
    /// L/100km.
    pub icev_consumption: f64,
    /// Currency per kWh, charging service fee included.
    pub electricity_price: f64,
    /// Currency per litre.
    pub gasoline_price: f64,
    /// Currency per year.
    pub ev_maintenance: f64,
    /// Currency per year.
    pub icev_maintenance: f64,
    /// Battery packs the owner pays to replace over the lifecycle. Replacement
    /// is a manufacturer cost under warranty, so this is normally zero.
    #[serde(default)]
    pub battery_replacements: u32,
}

impl UsageProfile {
    pub fn lifetime_km(&self) -> f64 {
        self.annual_km * f64::from(self.lifecycle_years)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualAndFinance {
    pub ev_residual: f64,
    pub icev_residual: f64,
    pub discount_rate: f64,
}

/// Pricing inputs. Market prices are derived from production cost through a
/// fixed gross markup per vehicle type, so component cost changes flow through
/// to what the buyer pays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketPrices {
    /// Non-powertrain production cost shared by both vehicles.
    pub common_base_cost: f64,
    pub ev_markup: f64,
    pub icev_markup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Powertrain {
    Ev,
    Icev,
}

/// All inputs for one EV/ICEV comparison in one calendar year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleScenario {
    pub year: i32,
    pub ev_powertrain: EvPowertrain,
    pub icev_powertrain: IcevPowertrain,
    pub subsidy_policy: SubsidyPolicy,
    pub usage_profile: UsageProfile,
    pub residual_and_finance: ResidualAndFinance,
    pub market_prices: MarketPrices,
}

fn non_negative(field: Field, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::invalid(
            field.path(),
            format!("must be finite and >= 0, got {v}"),
        ));
    }
    Ok(())
}

impl VehicleScenario {
    /// Checks every member invariant.
    pub fn validate(&self) -> Result<()> {
        for field in Field::ALL {
            match field.kind() {
                FieldKind::Flag => {}
                FieldKind::Count | FieldKind::Real => {
                    let v = self.get(*field);
                    if matches!(field, Field::DiscountRate | Field::EvMarkup | Field::IcevMarkup) {
                        if !v.is_finite() || v <= -1.0 {
                            return Err(Error::invalid(
                                field.path(),
                                format!("must be finite and > -1, got {v}"),
                            ));
                        }
                    } else {
                        non_negative(*field, v)?;
                    }
                }
            }
        }
        if self.ev_powertrain.battery_capacity <= 0.0 {
            return Err(Error::invalid(Field::BatteryCapacity.path(), "must be > 0"));
        }
        if self.subsidy_policy.purchase_tax_rate > 1.0 {
            return Err(Error::invalid(Field::PurchaseTaxRate.path(), "must be <= 1"));
        }
        if self.usage_profile.lifecycle_years < 1 {
            return Err(Error::invalid(Field::LifecycleYears.path(), "must be >= 1"));
        }
        Ok(())
    }

    /// Reads any field as a number; flags read as 0/1.
    pub fn get(&self, field: Field) -> f64 {
        use Field::*;
        let ev = &self.ev_powertrain;
        let ic = &self.icev_powertrain;
        let sp = &self.subsidy_policy;
        let up = &self.usage_profile;
        let rf = &self.residual_and_finance;
        let mp = &self.market_prices;
        match field {
            BatteryUnitCost => ev.battery_unit_cost,
            BatteryCapacity => ev.battery_capacity,
            MotorUnitCost => ev.motor_unit_cost,
            MotorPower => ev.motor_power,
            OtherHvCost => ev.other_hv_cost,
            EngineIntakeExhaustCost => ic.engine_intake_exhaust_cost,
            TransmissionCost => ic.transmission_cost,
            PurchaseTaxRate => sp.purchase_tax_rate,
            EvTaxExempt => f64::from(u8::from(sp.ev_tax_exempt)),
            AcquisitionSubsidy => sp.acquisition_subsidy,
            CreditPrice => sp.credit_price,
            CafcActual => sp.cafc_actual,
            CafcThreshold => sp.cafc_threshold,
            NevCreditsActual => sp.nev_credits_actual,
            NevCreditsThreshold => sp.nev_credits_threshold,
            LifecycleYears => f64::from(up.lifecycle_years),
            AnnualKm => up.annual_km,
            EvConsumption => up.ev_consumption,
            IcevConsumption => up.icev_consumption,
            ElectricityPrice => up.electricity_price,
            GasolinePrice => up.gasoline_price,
            EvMaintenance => up.ev_maintenance,
            IcevMaintenance => up.icev_maintenance,
            BatteryReplacements => f64::from(up.battery_replacements),
            EvResidual => rf.ev_residual,
            IcevResidual => rf.icev_residual,
            DiscountRate => rf.discount_rate,
            CommonBaseCost => mp.common_base_cost,
            EvMarkup => mp.ev_markup,
            IcevMarkup => mp.icev_markup,
        }
    }

    /// Writes a field. Counts are rounded to the nearest integer and flags
    /// are true for any non-zero value.
    pub fn set(&mut self, field: Field, value: f64) {
        use Field::*;
        let count = |v: f64| v.round().max(0.0) as u32;
        match field {
            BatteryUnitCost => self.ev_powertrain.battery_unit_cost = value,
            BatteryCapacity => self.ev_powertrain.battery_capacity = value,
            MotorUnitCost => self.ev_powertrain.motor_unit_cost = value,
            MotorPower => self.ev_powertrain.motor_power = value,
            OtherHvCost => self.ev_powertrain.other_hv_cost = value,
            EngineIntakeExhaustCost => self.icev_powertrain.engine_intake_exhaust_cost = value,
            TransmissionCost => self.icev_powertrain.transmission_cost = value,
            PurchaseTaxRate => self.subsidy_policy.purchase_tax_rate = value,
            EvTaxExempt => self.subsidy_policy.ev_tax_exempt = value != 0.0,
            AcquisitionSubsidy => self.subsidy_policy.acquisition_subsidy = value,
            CreditPrice => self.subsidy_policy.credit_price = value,
            CafcActual => self.subsidy_policy.cafc_actual = value,
            CafcThreshold => self.subsidy_policy.cafc_threshold = value,
            NevCreditsActual => self.subsidy_policy.nev_credits_actual = value,
            NevCreditsThreshold => self.subsidy_policy.nev_credits_threshold = value,
            LifecycleYears => self.usage_profile.lifecycle_years = count(value),
            AnnualKm => self.usage_profile.annual_km = value,
            EvConsumption => self.usage_profile.ev_consumption = value,
            IcevConsumption => self.usage_profile.icev_consumption = value,
            ElectricityPrice => self.usage_profile.electricity_price = value,
            GasolinePrice => self.usage_profile.gasoline_price = value,
            EvMaintenance => self.usage_profile.ev_maintenance = value,
            IcevMaintenance => self.usage_profile.icev_maintenance = value,
            BatteryReplacements => self.usage_profile.battery_replacements = count(value),
            EvResidual => self.residual_and_finance.ev_residual = value,
            IcevResidual => self.residual_and_finance.icev_residual = value,
            DiscountRate => self.residual_and_finance.discount_rate = value,
            CommonBaseCost => self.market_prices.common_base_cost = value,
            EvMarkup => self.market_prices.ev_markup = value,
            IcevMarkup => self.market_prices.icev_markup = value,
        }
    }

    /// Multiplies every currency-valued input by `k`.
    pub fn scale_currency(&mut self, k: f64) {
        for field in Field::ALL {
            if field.is_currency() {
                self.set(*field, self.get(*field) * k);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Real,
    Count,
    Flag,
}

/// Addressable scalar inputs of a [`VehicleScenario`], named by their
/// `section.field` path in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    BatteryUnitCost,
    BatteryCapacity,
    MotorUnitCost,
    MotorPower,
    OtherHvCost,
    EngineIntakeExhaustCost,
    TransmissionCost,
    PurchaseTaxRate,
    EvTaxExempt,
    AcquisitionSubsidy,
    CreditPrice,
    CafcActual,
    CafcThreshold,
    NevCreditsActual,
    NevCreditsThreshold,
    LifecycleYears,
    AnnualKm,
    EvConsumption,
    IcevConsumption,
    ElectricityPrice,
    GasolinePrice,
    EvMaintenance,
    IcevMaintenance,
    BatteryReplacements,
    EvResidual,
    IcevResidual,
    DiscountRate,
    CommonBaseCost,
    EvMarkup,
    IcevMarkup,
}

impl Field {
    pub const ALL: &'static [Field] = &[
        Field::BatteryUnitCost,
        Field::BatteryCapacity,
        Field::MotorUnitCost,
        Field::MotorPower,
        Field::OtherHvCost,
        Field::EngineIntakeExhaustCost,
        Field::TransmissionCost,
        Field::PurchaseTaxRate,
        Field::EvTaxExempt,
        Field::AcquisitionSubsidy,
        Field::CreditPrice,
        Field::CafcActual,
        Field::CafcThreshold,
        Field::NevCreditsActual,
        Field::NevCreditsThreshold,
        Field::LifecycleYears,
        Field::AnnualKm,
        Field::EvConsumption,
        Field::IcevConsumption,
        Field::ElectricityPrice,
        Field::GasolinePrice,
        Field::EvMaintenance,
        Field::IcevMaintenance,
        Field::BatteryReplacements,
        Field::EvResidual,
        Field::IcevResidual,
        Field::DiscountRate,
        Field::CommonBaseCost,
        Field::EvMarkup,
        Field::IcevMarkup,
    ];

    pub fn path(self) -> &'static str {
        use Field::*;
        match self {
            BatteryUnitCost => "ev_powertrain.battery_unit_cost",
            BatteryCapacity => "ev_powertrain.battery_capacity",
            MotorUnitCost => "ev_powertrain.motor_unit_cost",
            MotorPower => "ev_powertrain.motor_power",
            OtherHvCost => "ev_powertrain.other_hv_cost",
            EngineIntakeExhaustCost => "icev_powertrain.engine_intake_exhaust_cost",
            TransmissionCost => "icev_powertrain.transmission_cost",
            PurchaseTaxRate => "subsidy_policy.purchase_tax_rate",
            EvTaxExempt => "subsidy_policy.ev_tax_exempt",
            AcquisitionSubsidy => "subsidy_policy.acquisition_subsidy",
            CreditPrice => "subsidy_policy.credit_price",
            CafcActual => "subsidy_policy.cafc_actual",
            CafcThreshold => "subsidy_policy.cafc_threshold",
            NevCreditsActual => "subsidy_policy.nev_credits_actual",
            NevCreditsThreshold => "subsidy_policy.nev_credits_threshold",
            LifecycleYears => "usage_profile.lifecycle_years",
            AnnualKm => "usage_profile.annual_km",
            EvConsumption => "usage_profile.ev_consumption",
            IcevConsumption => "usage_profile.icev_consumption",
            ElectricityPrice => "usage_profile.electricity_price",
            GasolinePrice => "usage_profile.gasoline_price",
            EvMaintenance => "usage_profile.ev_maintenance",
            IcevMaintenance => "usage_profile.icev_maintenance",
            BatteryReplacements => "usage_profile.battery_replacements",
            EvResidual => "residual_and_finance.ev_residual",
            IcevResidual => "residual_and_finance.icev_residual",
            DiscountRate => "residual_and_finance.discount_rate",
            CommonBaseCost => "market_prices.common_base_cost",
            EvMarkup => "market_prices.ev_markup",
            IcevMarkup => "market_prices.icev_markup",
        }
    }

    pub fn from_path(path: &str) -> Option<Field> {
        Field::ALL.iter().copied().find(|f| f.path() == path)
    }

    pub fn kind(self) -> FieldKind {
        match self {
            Field::EvTaxExempt => FieldKind::Flag,
            Field::LifecycleYears | Field::BatteryReplacements => FieldKind::Count,
            _ => FieldKind::Real,
        }
    }

    /// True for inputs denominated in (or per unit of) currency.
    pub fn is_currency(self) -> bool {
        use Field::*;
        matches!(
            self,
            BatteryUnitCost
                | MotorUnitCost
                | OtherHvCost
                | EngineIntakeExhaustCost
                | TransmissionCost
                | AcquisitionSubsidy
                | CreditPrice
                | ElectricityPrice
                | GasolinePrice
                | EvMaintenance
                | IcevMaintenance
                | EvResidual
                | IcevResidual
                | CommonBaseCost
        )
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.path())
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::from_path(s).ok_or_else(|| Error::Config(format!("unknown scenario field `{s}`")))
    }
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.path())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let path = String::deserialize(d)?;
        Field::from_path(&path).ok_or_else(|| serde::de::Error::custom(format!("unknown scenario field `{path}`")))
    }
}
