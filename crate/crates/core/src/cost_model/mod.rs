//! Production, acquisition and life-cycle cost of an EV/ICEV pair, and the
//! three green-premium ratios built on them.
//!
//! Every function here is a pure function of its arguments. Ratios return
//! [`Error::ZeroDenominator`] instead of producing infinities.

mod types;

pub use types::{
    EvPowertrain, Field, FieldKind, IcevPowertrain, MarketPrices, Powertrain, ResidualAndFinance, SubsidyPolicy,
    UsageProfile, VehicleScenario,
};

use crate::error::{Error, Result};

/// Material and manufacturing cost of the EV: `base + x·y + motor + other HV`.
pub fn production_cost_ev(pt: &EvPowertrain, base: f64) -> f64 {
    base + pt.battery_pack_cost() + pt.motor_unit_cost * pt.motor_power + pt.other_hv_cost
}

pub fn production_cost_icev(pt: &IcevPowertrain, base: f64) -> f64 {
    base + pt.engine_intake_exhaust_cost + pt.transmission_cost
}

fn relative_gap(ev: f64, icev: f64, what: &'static str) -> Result<f64> {
    if icev == 0.0 || !icev.is_finite() {
        return Err(Error::ZeroDenominator(what));
    }
    Ok((ev - icev) / icev)
}

/// Δp₁: relative production-cost gap.
pub fn production_premium(ev_cost: f64, icev_cost: f64) -> Result<f64> {
    relative_gap(ev_cost, icev_cost, "production premium")
}

/// Credit revenue, purchase-tax exemption and acquisition subsidy attached to
/// one EV sold at `ev_price`.
pub fn government_subsidy_ev(pol: &SubsidyPolicy, ev_price: f64) -> f64 {
    let credits = (pol.nev_credits_actual - pol.nev_credits_threshold) * pol.credit_price;
    let exemption = if pol.ev_tax_exempt {
        pol.purchase_tax_rate * ev_price
    } else {
        0.0
    };
    credits + exemption + pol.acquisition_subsidy
}

/// Cost of a negative CAFC balance. Positive balances cannot be traded and
/// are worth nothing.
pub fn cafc_compliance_cost(pol: &SubsidyPolicy) -> f64 {
    let deficit = pol.cafc_actual - pol.cafc_threshold;
    deficit.max(0.0) * pol.credit_price
}

impl VehicleScenario {
    pub fn production_cost(&self, kind: Powertrain) -> f64 {
        let base = self.market_prices.common_base_cost;
        match kind {
            Powertrain::Ev => production_cost_ev(&self.ev_powertrain, base),
            Powertrain::Icev => production_cost_icev(&self.icev_powertrain, base),
        }
    }

    /// Pre-tax market price.
    pub fn price(&self, kind: Powertrain) -> f64 {
        let markup = match kind {
            Powertrain::Ev => self.market_prices.ev_markup,
            Powertrain::Icev => self.market_prices.icev_markup,
        };
        self.production_cost(kind) * (1.0 + markup)
    }

    /// What the buyer effectively pays at purchase, after policy transfers.
    pub fn acquisition_cost(&self, kind: Powertrain) -> f64 {
        let pol = &self.subsidy_policy;
        let price = self.price(kind);
        match kind {
            Powertrain::Ev => price - government_subsidy_ev(pol, price),
            Powertrain::Icev => price + cafc_compliance_cost(pol) + pol.purchase_tax_rate * price,
        }
    }
}

/// Δp₂: relative gap in effective acquisition cost.
pub fn acquisition_premium(sc: &VehicleScenario) -> Result<f64> {
    relative_gap(
        sc.acquisition_cost(Powertrain::Ev),
        sc.acquisition_cost(Powertrain::Icev),
        "acquisition premium",
    )
}

/// Energy plus maintenance per year. Consumption intensities are per 100 km.
pub fn annual_operating_cost(kind: Powertrain, up: &UsageProfile) -> f64 {
    match kind {
        Powertrain::Ev => up.annual_km * up.ev_consumption / 100.0 * up.electricity_price + up.ev_maintenance,
        Powertrain::Icev => up.annual_km * up.icev_consumption / 100.0 * up.gasoline_price + up.icev_maintenance,
    }
}

fn discount_factor(rate: f64, years: u32) -> f64 {
    (1.0 + rate).powi(-(years as i32))
}

/// Years (1-based) in which owner-paid pack replacements fall, spread evenly
/// over the lifecycle.
fn replacement_years(count: u32, lifecycle: u32) -> impl Iterator<Item = u32> {
    (1..=count).map(move |i| {
        let y = (f64::from(i) * f64::from(lifecycle) / f64::from(count + 1)).round() as u32;
        y.clamp(1, lifecycle)
    })
}

/// Net present value at purchase of the total cost of ownership.
pub fn tco_npv(sc: &VehicleScenario, kind: Powertrain) -> f64 {
    let up = &sc.usage_profile;
    let r = sc.residual_and_finance.discount_rate;
    let n = up.lifecycle_years;
    let operating = annual_operating_cost(kind, up);
    let running: f64 = (1..=n).map(|t| operating * discount_factor(r, t)).sum();
    let residual = match kind {
        Powertrain::Ev => sc.residual_and_finance.ev_residual,
        Powertrain::Icev => sc.residual_and_finance.icev_residual,
    };
    let replacements: f64 = match kind {
        Powertrain::Ev => replacement_years(up.battery_replacements, n)
            .map(|t| sc.ev_powertrain.battery_pack_cost() * discount_factor(r, t))
            .sum(),
        Powertrain::Icev => 0.0,
    };
    sc.acquisition_cost(kind) + running + replacements - residual * discount_factor(r, n)
}

/// Δp₃: relative gap in life-cycle cost.
pub fn lifecycle_premium(sc: &VehicleScenario) -> Result<f64> {
    relative_gap(
        tco_npv(sc, Powertrain::Ev),
        tco_npv(sc, Powertrain::Icev),
        "lifecycle premium",
    )
}

/// Levelized cost of driving: lifetime cost per lifetime kilometre.
pub fn lcod(tco: f64, up: &UsageProfile) -> Result<f64> {
    let km = up.lifetime_km();
    if km <= 0.0 || !km.is_finite() {
        return Err(Error::ZeroDenominator("levelized cost of driving"));
    }
    Ok(tco / km)
}
