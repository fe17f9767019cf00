//! Shared fixtures for the acceptance gate and the model-level checks in
//! `tests/`.

use green_premium::diffusion::{simulate, BassParams};
use green_premium::fitting::ObservationSeries;
use green_premium::trajectory::PremiumSeries;

/// Forward Euler on the continuous Bass model with x = 1, as a fraction of m.
pub fn euler_fraction(p: f64, q: f64, t: f64, steps_per_year: u32) -> f64 {
    let dt = 1.0 / f64::from(steps_per_year);
    let steps = (t * f64::from(steps_per_year)).round() as u64;
    let mut f = 0.0;
    for _ in 0..steps {
        f += (p + q * f) * (1.0 - f) * dt;
    }
    f
}

/// Lifecycle premiums falling linearly from 0.3 to -0.3 over 2010-2021.
pub fn designed_premiums() -> PremiumSeries {
    let values: Vec<f64> = (0..12).map(|i| 0.3 - 0.6 * f64::from(i) / 11.0).collect();
    PremiumSeries::from_lifecycle(2010, &values).expect("valid premium series")
}

/// Noiseless annual sales generated by `params` over 2010-2021.
pub fn synthetic_sales(params: &BassParams, premiums: &PremiumSeries) -> ObservationSeries {
    let states = simulate(params, Some(premiums), 2010, 12).expect("valid parameters");
    ObservationSeries::new(states.iter().map(|s| (s.year, s.new_adopters)).collect()).expect("valid sales")
}

/// Index of the first maximum.
pub fn peak_index(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::MIN), |best, (i, v)| if v > best.1 { (i, v) } else { best })
        .0
}
