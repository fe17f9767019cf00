use green_premium::config::builtin_schedule;
use green_premium::fitting::{ga_fit, FitConfig};
use green_premium::io::{parse_sales_csv, SAMPLE_SALES};
use green_premium::trajectory::premium_series;

#[test]
fn sample_fit_diffuses_and_responds_to_premium() {
    let obs = parse_sales_csv(SAMPLE_SALES).unwrap();
    let prem = premium_series(&builtin_schedule("long-range").unwrap(), 2010..=2021).unwrap();
    for seed in 0..3 {
        let cfg = FitConfig {
            rng_seed: seed,
            ..FitConfig::default()
        };
        let fit = ga_fit(&obs, Some(&prem), &cfg).unwrap();
        let bp = fit.params;
        assert!(bp.p < bp.q, "seed {seed}: p={} q={}", bp.p, bp.q);
        assert!(bp.beta < 0.0, "seed {seed}: beta={}", bp.beta);
    }
}
