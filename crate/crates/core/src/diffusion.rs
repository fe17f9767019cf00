//! Annual Bass diffusion, optionally scaled by a premium-driven decision
//! coefficient. Quantities are in thousands of vehicles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::PremiumSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BassParams {
    /// Innovation coefficient, 1/year.
    pub p: f64,
    /// Imitation coefficient, 1/year.
    pub q: f64,
    /// Market potential, cumulative adopters.
    pub m: f64,
    /// Price-influence coefficient.
    pub beta: f64,
}

impl BassParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::invalid("p", format!("must be > 0, got {}", self.p)));
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(Error::invalid("q", format!("must be >= 0, got {}", self.q)));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::invalid("m", format!("must be > 0, got {}", self.m)));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdoptionState {
    pub year: i32,
    /// Cumulative adopters at the end of `year`.
    pub cumulative: f64,
    /// Adopters during `year`, after clamping.
    pub new_adopters: f64,
    /// Flow before clamping at zero. Negative when the decision coefficient is.
    pub raw_flow: f64,
    /// Decision coefficient applied in `year`.
    pub x: f64,
}

pub fn decision_coefficient(delta_p3: f64, beta: f64) -> f64 {
    1.0 + delta_p3 * beta
}

/// Unclamped annual flow.
pub fn raw_flow(params: &BassParams, n: f64, x: f64) -> f64 {
    let BassParams { p, q, m, .. } = *params;
    (p * (m - n) + q * (n / m) * (m - n)) * x
}

/// One annual increment, clamped at zero.
pub fn bass_step(params: &BassParams, n: f64, x: f64) -> f64 {
    raw_flow(params, n, x).max(0.0)
}

/// Annual recursion from an empty market.
pub fn simulate(
    params: &BassParams,
    premiums: Option<&PremiumSeries>,
    start_year: i32,
    horizon: usize,
) -> Result<Vec<AdoptionState>> {
    simulate_from(params, premiums, start_year, horizon, 0.0)
}

/// Annual recursion from `initial` cumulative adopters. Without a premium
/// series the decision coefficient is 1 throughout.
pub fn simulate_from(
    params: &BassParams,
    premiums: Option<&PremiumSeries>,
    start_year: i32,
    horizon: usize,
    initial: f64,
) -> Result<Vec<AdoptionState>> {
    params.validate()?;
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be >= 1"));
    }
    if !(0.0..=params.m).contains(&initial) {
        return Err(Error::invalid("initial", "cumulative adopters must lie in [0, m]"));
    }
    let mut n = initial;
    let mut out = Vec::with_capacity(horizon);
    for year in (start_year..).take(horizon) {
        let x = match premiums {
            Some(series) => decision_coefficient(series.lifecycle(year)?, params.beta),
            None => 1.0,
        };
        let raw = raw_flow(params, n, x);
        let next = (n + raw.max(0.0)).min(params.m);
        out.push(AdoptionState {
            year,
            cumulative: next,
            new_adopters: next - n,
            raw_flow: raw,
            x,
        });
        n = next;
    }
    Ok(out)
}

/// Continuous-time cumulative adoption as a fraction of `m`, for x ≡ 1.
pub fn closed_form_cumulative(params: &BassParams, t: f64) -> f64 {
    let s = params.p + params.q;
    let e = (-s * t).exp();
    (1.0 - e) / (1.0 + params.q / params.p * e)
}
