//! Weighted least-squares estimation of Bass parameters against observed
//! annual sales.

mod ga;

use serde::{Deserialize, Serialize};

use crate::diffusion::{simulate, AdoptionState, BassParams};
use crate::error::{Error, Result};
use crate::trajectory::PremiumSeries;

pub use ga::ga_fit;

/// Annual sales keyed by year, strictly increasing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservationSeries {
    points: Vec<(i32, f64)>,
}

impl ObservationSeries {
    /// Sorts by year and rejects duplicates and invalid sales.
    pub fn new(mut points: Vec<(i32, f64)>) -> Result<Self> {
        points.sort_by_key(|(y, _)| *y);
        for pair in points.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::invalid("year", format!("duplicate year {}", pair[0].0)));
            }
        }
        if let Some((y, v)) = points.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "annual_sales",
                format!("{v} in {y} must be finite and >= 0"),
            ));
        }
        Ok(ObservationSeries { points })
    }

    pub fn points(&self) -> &[(i32, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_year(&self) -> Option<i32> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_year(&self) -> Option<i32> {
        self.points.last().map(|p| p.0)
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// Market potential handling during a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MMode {
    Fixed(f64),
    Free(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub p: (f64, f64),
    pub q: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            p: (1e-7, 0.01),
            q: (0.01, 1.5),
            beta: (-5.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub max_generations: usize,
    pub rng_seed: u64,
    pub bounds: Bounds,
    pub m_mode: MMode,
    /// Residual weight for years at or after `late_from`.
    pub late_weight: f64,
    pub late_from: i32,
    /// Weight on squared negative pre-clamp flows.
    pub penalty_weight: f64,
    /// Generations without improvement before stopping. `None` always runs
    /// `max_generations`.
    pub stagnation_generations: Option<usize>,
    pub stagnation_tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            population_size: 800,
            crossover_prob: 0.8,
            mutation_prob: 0.1,
            max_generations: 500,
            rng_seed: 0,
            bounds: Bounds::default(),
            m_mode: MMode::Fixed(210_000.0),
            late_weight: 4.0,
            late_from: 2018,
            penalty_weight: 1000.0,
            stagnation_generations: Some(50),
            stagnation_tolerance: 1e-10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population_size", "must be >= 2"));
        }
        for (name, v) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.max_generations == 0 {
            return Err(Error::invalid("max_generations", "must be >= 1"));
        }
        for (name, v) in [
            ("late_weight", self.late_weight),
            ("penalty_weight", self.penalty_weight),
            ("stagnation_tolerance", self.stagnation_tolerance),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn weight(&self, year: i32) -> f64 {
        if year >= self.late_from {
            self.late_weight
        } else {
            1.0
        }
    }

    /// Whether β is searched over rather than pinned at zero.
    pub fn fits_beta(&self) -> bool {
        self.bounds.beta != (0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BassParams,
    pub objective: f64,
    pub r_squared: f64,
    pub generations_run: usize,
    /// True when the run stopped on stagnation rather than the generation cap.
    pub converged: bool,
    /// Best objective after each generation.
    pub history: Vec<f64>,
}

fn horizon(obs: &ObservationSeries) -> Result<(i32, usize)> {
    match (obs.first_year(), obs.last_year()) {
        (Some(a), Some(b)) => Ok((a, (b - a + 1) as usize)),
        _ => Err(Error::Degenerate("empty observation series".into())),
    }
}

/// Simulated states for every year spanned by `obs`.
pub fn predict(
    params: &BassParams,
    obs: &ObservationSeries,
    premiums: Option<&PremiumSeries>,
) -> Result<Vec<AdoptionState>> {
    let (start, len) = horizon(obs)?;
    let premiums = premiums.filter(|_| params.beta != 0.0);
    simulate(params, premiums, start, len)
}

/// Weighted squared error plus a penalty on negative pre-clamp flows.
pub fn objective(
    params: &BassParams,
    obs: &ObservationSeries,
    premiums: Option<&PremiumSeries>,
    cfg: &FitConfig,
) -> Result<f64> {
    if params.beta != 0.0 && premiums.is_none() {
        return Err(Error::Config(
            "a premium series is required when beta is non-zero".into(),
        ));
    }
    let states = predict(params, obs, premiums)?;
    let start = obs.first_year().unwrap_or_default();
    let mut total = 0.0;
    for &(year, observed) in obs.points() {
        let s = &states[(year - start) as usize];
        let err = s.new_adopters - observed;
        let neg = (-s.raw_flow).max(0.0);
        total += cfg.weight(year) * err * err + cfg.penalty_weight * neg * neg;
    }
    Ok(total)
}

/// Coefficient of determination about the observed mean.
pub fn r_squared(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::invalid("predicted", "length differs from observed"));
    }
    if observed.len() < 2 {
        return Err(Error::Degenerate("r-squared needs at least two points".into()));
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let sst: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::ZeroDenominator("r-squared (observations are constant)"));
    }
    let sse: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o).powi(2)).sum();
    Ok(1.0 - sse / sst)
}

/// R² of `params` against `obs`, using predictions at the observed years.
pub fn fit_r_squared(params: &BassParams, obs: &ObservationSeries, premiums: Option<&PremiumSeries>) -> Result<f64> {
    let states = predict(params, obs, premiums)?;
    let start = obs.first_year().unwrap_or_default();
    let predicted: Vec<f64> = obs
        .points()
        .iter()
        .map(|(y, _)| states[(y - start) as usize].new_adopters)
        .collect();
    r_squared(&predicted, &obs.values())
}

/// Fits the vanilla model (β pinned at 0) and the generalized model with the
/// same seed and bounds.
pub fn compare_models(
    obs: &ObservationSeries,
    premiums: &PremiumSeries,
    cfg: &FitConfig,
) -> Result<(FitResult, FitResult)> {
    if premiums.is_empty() {
        return Err(Error::Config(
            "the generalized model needs a non-empty premium series".into(),
        ));
    }
    let mut vanilla_cfg = *cfg;
    vanilla_cfg.bounds.beta = (0.0, 0.0);
    let vanilla = ga_fit(obs, None, &vanilla_cfg)?;
    let general = ga_fit(obs, Some(premiums), cfg)?;
    Ok((vanilla, general))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(params: &BassParams, premiums: &PremiumSeries) -> ObservationSeries {
        let states = simulate(params, Some(premiums), 2010, 12).unwrap();
        ObservationSeries::new(states.iter().map(|s| (s.year, s.new_adopters)).collect()).unwrap()
    }

    fn designed_premiums() -> PremiumSeries {
        let values: Vec<f64> = (0..12).map(|i| 0.3 - 0.6 * f64::from(i) / 11.0).collect();
        PremiumSeries::from_lifecycle(2010, &values).unwrap()
    }

    fn truth() -> BassParams {
        BassParams {
            p: 0.002,
            q: 0.40,
            m: 10_000.0,
            beta: -2.0,
        }
    }

    /// Straight-line recomputation of the objective, independent of `predict`.
    fn oracle_objective(bp: &BassParams, obs: &ObservationSeries, prem: &PremiumSeries, cfg: &FitConfig) -> f64 {
        let mut n = 0.0f64;
        let mut total = 0.0;
        for &(year, o) in obs.points() {
            let x = 1.0 + bp.beta * prem.lifecycle(year).unwrap();
            let raw = (bp.p * (bp.m - n) + bp.q * n / bp.m * (bp.m - n)) * x;
            let flow = raw.max(0.0).min(bp.m - n);
            n += flow;
            let w = if year >= 2018 { cfg.late_weight } else { 1.0 };
            total += w * (flow - o).powi(2) + cfg.penalty_weight * (-raw).max(0.0).powi(2);
        }
        total
    }

    #[test]
    fn perfect_fit_has_zero_objective() {
        let prem = designed_premiums();
        let obs = synthetic(&truth(), &prem);
        assert_eq!(
            objective(&truth(), &obs, Some(&prem), &FitConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn objective_matches_oracle() {
        let prem = designed_premiums();
        let obs = synthetic(&truth(), &prem);
        let cfg = FitConfig::default();
        let other = BassParams {
            p: 0.004,
            q: 0.3,
            m: 10_000.0,
            beta: -4.0,
        };
        let got = objective(&other, &obs, Some(&prem), &cfg).unwrap();
        let want = oracle_objective(&other, &obs, &prem, &cfg);
        assert!(((got - want) / want).abs() < 1e-12);
    }

    #[test]
    fn late_weight_scales_only_late_residuals() {
        let prem = designed_premiums();
        let obs = synthetic(&truth(), &prem);
        let other = BassParams { q: 0.35, ..truth() };
        let mut cfg = FitConfig {
            penalty_weight: 0.0,
            ..FitConfig::default()
        };
        let early_only = {
            let mut c = cfg;
            c.late_weight = 0.0;
            objective(&other, &obs, Some(&prem), &c).unwrap()
        };
        let base = objective(&other, &obs, Some(&prem), &cfg).unwrap();
        cfg.late_weight *= 2.0;
        let doubled = objective(&other, &obs, Some(&prem), &cfg).unwrap();
        let late = base - early_only;
        assert!(((doubled - early_only) - 2.0 * late).abs() <= 1e-9 * doubled);
    }

    #[test]
    fn nonzero_beta_requires_premiums() {
        let prem = designed_premiums();
        let obs = synthetic(&truth(), &prem);
        assert!(objective(&truth(), &obs, None, &FitConfig::default()).is_err());
    }

    #[test]
    fn r_squared_examples() {
        let obs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r_squared(&obs, &obs).unwrap(), 1.0);
        assert_eq!(r_squared(&[2.5; 4], &obs).unwrap(), 0.0);
        assert!(matches!(
            r_squared(&[1.0, 1.0], &[2.0, 2.0]),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(r_squared(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn observation_series_validation() {
        let s = ObservationSeries::new(vec![(2012, 3.0), (2010, 1.0), (2011, 2.0)]).unwrap();
        assert_eq!(s.points(), &[(2010, 1.0), (2011, 2.0), (2012, 3.0)]);
        assert!(ObservationSeries::new(vec![(2010, 1.0), (2010, 2.0)]).is_err());
        assert!(ObservationSeries::new(vec![(2010, -1.0)]).is_err());
    }

    #[test]
    fn compare_requires_premiums() {
        let prem = designed_premiums();
        let obs = synthetic(&truth(), &prem);
        let cfg = FitConfig {
            m_mode: MMode::Fixed(10_000.0),
            ..FitConfig::default()
        };
        assert!(matches!(
            compare_models(&obs, &PremiumSeries::default(), &cfg),
            Err(Error::Config(_))
        ));
    }

    proptest! {
        #[test]
        fn objective_ignores_observation_order(seed in any::<u64>()) {
            let prem = designed_premiums();
            let obs = synthetic(&truth(), &prem);
            let mut shuffled = obs.points().to_vec();
            let k = (seed % shuffled.len() as u64) as usize;
            shuffled.rotate_left(k);
            shuffled.reverse();
            let reordered = ObservationSeries::new(shuffled).unwrap();
            let other = BassParams { p: 0.003, ..truth() };
            let cfg = FitConfig::default();
            prop_assert_eq!(
                objective(&other, &obs, Some(&prem), &cfg).unwrap().to_bits(),
                objective(&other, &reordered, Some(&prem), &cfg).unwrap().to_bits()
            );
        }
    }
}
