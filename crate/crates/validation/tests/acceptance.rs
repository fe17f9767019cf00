//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use green_premium::config::builtin_schedule;
use green_premium::cost_model::{lcod, lifecycle_premium, production_premium, tco_npv, Powertrain, VehicleScenario};
use green_premium::diffusion::{closed_form_cumulative, simulate, BassParams};
use green_premium::fitting::{compare_models, ga_fit, FitConfig, MMode};
use green_premium::io::{parse_sales_csv, SAMPLE_SALES};
use green_premium::sensitivity::{default_factors, sensitivity_table};
use green_premium::trajectory::{parity_year, premium_series, resolve_scenario, PremiumKind, PremiumSeries};
use green_premium_validation::{designed_premiums, euler_fraction, synthetic_sales};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario(name: &str, year: i32) -> VehicleScenario {
    resolve_scenario(&builtin_schedule(name).expect("built-in scenario"), year).expect("year in span")
}

fn lcods(sc: &VehicleScenario) -> (f64, f64) {
    let ev = lcod(tco_npv(sc, Powertrain::Ev), &sc.usage_profile).expect("positive distance");
    let icev = lcod(tco_npv(sc, Powertrain::Icev), &sc.usage_profile).expect("positive distance");
    (ev, icev)
}

fn lcod_anchor() -> Check {
    let long = scenario("long-range", 2021);
    let short = scenario("short-range", 2021);
    let (ev_long, icev) = lcods(&long);
    let (ev_short, icev_short) = lcods(&short);
    let detail =
        format!("ICEV {icev:.4} (short-range run {icev_short:.4}), EV long {ev_long:.4}, EV short {ev_short:.4}");
    let near = |v: f64, want: f64| (v - want).abs() <= 0.05;
    ensure(
        near(icev, 1.80) && near(icev_short, 1.80) && near(ev_long, 1.52) && near(ev_short, 1.41),
        detail,
    )
}

fn premium_anchors() -> Check {
    let sc = scenario("long-range", 2021);
    let d1 = production_premium(sc.production_cost(Powertrain::Ev), sc.production_cost(Powertrain::Icev))
        .map_err(|e| e.to_string())?;
    let d3 = lifecycle_premium(&sc).map_err(|e| e.to_string())?;
    ensure(
        (d1 - 0.44).abs() <= 0.02 && (d3 + 0.15).abs() <= 0.03,
        format!("production {:.2}%, lifecycle {:.2}%", d1 * 100.0, d3 * 100.0),
    )
}

fn parity_structure() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for name in ["long-range", "short-range"] {
        let sched = builtin_schedule(name).expect("built-in scenario");
        let series = premium_series(&sched, sched.span()).map_err(|e| e.to_string())?;
        let life = parity_year(&series, PremiumKind::Lifecycle);
        let acq = parity_year(&series, PremiumKind::Acquisition);
        let prod = parity_year(&series, PremiumKind::Production);
        detail.push(format!(
            "{name}: lifecycle {life:?}, acquisition {acq:?}, production {prod:?}"
        ));
        let (Some(l), Some(a), Some(p)) = (life, acq, prod) else {
            ok = false;
            continue;
        };
        ok &= (2017..=2019).contains(&l) && l < a && a < p;
        ok &= match name {
            "short-range" => (2025..=2026).contains(&a),
            _ => (2029..=2031).contains(&a) && (2029..=2031).contains(&p),
        };
    }
    ensure(ok, detail.join("; "))
}

fn sensitivity_signs_and_leaders() -> Check {
    let base = scenario("long-range", 2021);
    let (rows, failures) = sensitivity_table(&base, &default_factors(), PremiumKind::Lifecycle);
    if !failures.is_empty() {
        return Err(format!("{} factors failed: {:?}", failures.len(), failures));
    }
    let expected: BTreeMap<&str, f64> = BTreeMap::from([
        ("battery-800", 1.0),
        ("battery-650", 1.0),
        ("battery-500", 1.0),
        ("credit", -1.0),
        ("tax-rate", 1.0),
        ("subsidy", -1.0),
        ("oil-cost-6l", -1.0),
        ("oil-cost-4l", -1.0),
        ("elec-cost", 1.0),
        ("elec-price", 1.0),
        ("oil-price", -1.0),
        ("ev-residual", -1.0),
        ("discount-rate", 1.0),
    ]);
    let coef: BTreeMap<&str, f64> = rows.iter().map(|r| (r.id.as_str(), r.coefficient)).collect();
    let mismatched: Vec<String> = expected
        .iter()
        .filter(|(id, sign)| coef.get(*id).is_none_or(|c| c.signum() != **sign))
        .map(|(id, _)| format!("{id}={:.3}", coef.get(id).copied().unwrap_or(f64::NAN)))
        .collect();
    let mut ranked: Vec<(&str, f64)> = coef.iter().map(|(k, v)| (*k, *v)).collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    let top: Vec<&str> = ranked.iter().take(2).map(|r| r.0).collect();
    let leaders_ok = top.contains(&"tax-rate") && top.contains(&"battery-800");
    let tax = coef.get("tax-rate").copied().unwrap_or(f64::NAN);
    let battery = coef.get("battery-800").copied().unwrap_or(f64::NAN);
    let values_ok = (tax - 1.97).abs() <= 0.25 && (battery - 1.80).abs() <= 0.25;
    ensure(
        mismatched.is_empty() && leaders_ok && values_ok,
        format!(
            "sign mismatches [{}]; top two {:?}; tax-rate {tax:.3}, battery-800 {battery:.3}",
            mismatched.join(", "),
            ranked
                .iter()
                .take(2)
                .map(|(k, v)| format!("{k}={v:.3}"))
                .collect::<Vec<_>>()
        ),
    )
}

fn synthetic_recovery() -> Check {
    let truth = BassParams {
        p: 0.002,
        q: 0.40,
        m: 10_000.0,
        beta: -2.0,
    };
    let premiums = designed_premiums();
    let obs = synthetic_sales(&truth, &premiums);
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut slowest = Duration::ZERO;
    for seed in 0..5 {
        let cfg = FitConfig {
            rng_seed: seed,
            m_mode: MMode::Fixed(truth.m),
            stagnation_generations: None,
            ..FitConfig::default()
        };
        let start = Instant::now();
        let fit = ga_fit(&obs, Some(&premiums), &cfg).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        worst.0 = worst.0.max(rel(fit.params.p, truth.p));
        worst.1 = worst.1.max(rel(fit.params.q, truth.q));
        worst.2 = worst.2.max(rel(fit.params.beta, truth.beta));
        worst.3 = worst.3.min(fit.r_squared);
    }
    ensure(
        worst.0 <= 0.20 && worst.1 <= 0.20 && worst.2 <= 0.30 && worst.3 >= 0.99 && slowest < Duration::from_secs(60),
        format!(
            "5 seeds, 800 x 500: worst rel. error p {:.2e}, q {:.2e}, beta {:.2e}; min R2 {:.6}; slowest run {:.2} s",
            worst.0,
            worst.1,
            worst.2,
            worst.3,
            slowest.as_secs_f64()
        ),
    )
}

fn model_reduction() -> Check {
    let premiums = PremiumSeries::from_lifecycle(
        2010,
        &[
            2.3, 1.6, 0.9, 0.89, 0.74, 0.48, 0.16, 0.08, -0.05, -0.02, -0.11, -0.16, -0.17, -0.06, -0.07,
        ],
    )
    .map_err(|e| e.to_string())?;
    let mut bitwise = true;
    for &p in &[1e-4, 0.002, 0.03] {
        for &q in &[0.0, 0.38, 0.7] {
            for &m in &[1.0, 10_000.0, 210_000.0] {
                let bp = BassParams { p, q, m, beta: 0.0 };
                let vanilla = simulate(&bp, None, 2010, 15).map_err(|e| e.to_string())?;
                let general = simulate(&bp, Some(&premiums), 2010, 15).map_err(|e| e.to_string())?;
                bitwise &= vanilla.iter().zip(&general).all(|(a, b)| {
                    a.cumulative.to_bits() == b.cumulative.to_bits()
                        && a.new_adopters.to_bits() == b.new_adopters.to_bits()
                });
            }
        }
    }
    let mut worst = 0.0f64;
    for &p in &[0.005, 0.01, 0.03, 0.05] {
        for &q in &[0.1, 0.2, 0.38, 0.5, 0.6] {
            let exact = closed_form_cumulative(
                &BassParams {
                    p,
                    q,
                    m: 1.0,
                    beta: 0.0,
                },
                10.0,
            );
            worst = worst.max(((exact - euler_fraction(p, q, 10.0, 365)) / exact).abs());
        }
    }
    ensure(
        bitwise && worst < 1e-3,
        format!("beta=0 bitwise equal: {bitwise}; closed form vs daily Euler at t=10, worst rel. diff {worst:.2e} over 20 (p, q)"),
    )
}

struct ChinaFits {
    vanilla_r2: f64,
    general: BassParams,
    general_r2: f64,
}

fn china_fits() -> Result<ChinaFits, String> {
    let obs = parse_sales_csv(SAMPLE_SALES).map_err(|e| e.to_string())?;
    let sched = builtin_schedule("long-range").expect("built-in scenario");
    let premiums = premium_series(&sched, 2010..=2021).map_err(|e| e.to_string())?;
    let (vanilla, general) = compare_models(&obs, &premiums, &FitConfig::default()).map_err(|e| e.to_string())?;
    Ok(ChinaFits {
        vanilla_r2: vanilla.r_squared,
        general: general.params,
        general_r2: general.r_squared,
    })
}

fn comparative_fit(fits: &Result<ChinaFits, String>) -> Check {
    let f = fits.as_ref().map_err(Clone::clone)?;
    ensure(
        f.general_r2 > f.vanilla_r2,
        format!("generalized R2 {:.4} vs vanilla R2 {:.4}", f.general_r2, f.vanilla_r2),
    )
}

fn forecast_shape(fits: &Result<ChinaFits, String>) -> Check {
    let f = fits.as_ref().map_err(Clone::clone)?;
    let sched = builtin_schedule("long-range").expect("built-in scenario");
    let premiums = premium_series(&sched, 2010..=2030).map_err(|e| e.to_string())?;
    let states = simulate(&f.general, Some(&premiums), 2010, 21).map_err(|e| e.to_string())?;
    let sales: BTreeMap<i32, f64> = states.iter().map(|s| (s.year, s.new_adopters)).collect();
    // A year near 2023 whose sales grow by at most 2% counts as a dip or flat year.
    let stall = (2022..=2024).find(|y| sales[y] <= sales[&(y - 1)] * 1.02);
    let regrowth = stall.is_some_and(|y| ((y + 1)..=2030).any(|later| sales[&later] > sales[&y]));
    let s2030 = sales[&2030];
    let growth: Vec<String> = (2021..=2025)
        .map(|y| format!("{y} {:+.1}%", (sales[&y] / sales[&(y - 1)] - 1.0) * 100.0))
        .collect();
    ensure(
        regrowth && (5_000.0..=20_000.0).contains(&s2030),
        format!(
            "stall year {stall:?}; growth [{}]; 2030 annual sales {:.2}M (smoke band 5M-20M)",
            growth.join(", "),
            s2030 / 1000.0
        ),
    )
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).display().to_string();
    std::env::set_var("SOURCE_DATE_EPOCH", "1700000000");
    let commands: Vec<Vec<String>> = vec![
        vec!["tco".into()],
        vec!["premium-series".into(), "--scenario".into(), "short-range".into()],
        vec!["parity".into()],
        vec!["sensitivity".into(), "--kind".into(), "acquisition".into()],
        vec!["fit".into(), "--seed".into(), "7".into()],
        vec![
            "compare".into(),
            "--seed".into(),
            "7".into(),
            "--generations".into(),
            "60".into(),
        ],
    ];
    let mut runs = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = path(&format!("{i}-{round}.csv"));
            let manifest = path(&format!("{i}-{round}.json"));
            let mut args = vec!["gpremium".to_string()];
            args.extend(cmd.iter().cloned());
            args.extend(["--out".into(), out.clone(), "--manifest".into(), manifest.clone()]);
            let code = green_premium_cli::run(&args, &mut std::io::sink(), &mut std::io::sink());
            if code != 0 {
                return Err(format!("`{}` exited {code}", cmd.join(" ")));
            }
            let bytes = (std::fs::read(&out), std::fs::read(&manifest));
            outputs.push(match bytes {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Err(format!("`{}` wrote no output", cmd.join(" "))),
            });
            runs += 1;
        }
        if outputs[0] != outputs[1] {
            return Err(format!("`{}` output differs between runs", cmd.join(" ")));
        }
        if cmd[0] == "fit" {
            let params = path(&format!("{i}-0.csv"));
            let mut forecasts = Vec::new();
            for round in 0..2 {
                let out = path(&format!("forecast-{round}.csv"));
                let args = ["gpremium", "forecast", "--params", &params, "--out", &out];
                let code = green_premium_cli::run(args, &mut std::io::sink(), &mut std::io::sink());
                if code != 0 {
                    return Err(format!("forecast exited {code}"));
                }
                forecasts.push(std::fs::read(&out).map_err(|e| e.to_string())?);
                runs += 1;
            }
            if forecasts[0] != forecasts[1] {
                return Err("forecast output differs between runs".into());
            }
        }
    }
    Ok(format!(
        "{runs} runs over 7 commands, outputs and manifests byte-identical in pairs"
    ))
}

fn main() {
    let mut passed = 0;
    let mut total = 0;
    let mut report = |n: u32, title: &str, budget: Option<Duration>, run: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = budget.is_none_or(|b| elapsed < b);
        let ok = outcome.is_ok() && in_budget;
        let detail = match &outcome {
            Ok(d) | Err(d) => d.clone(),
        };
        let timing = match budget {
            Some(b) => format!("{:.3} s, budget {} s", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.3} s", elapsed.as_secs_f64()),
        };
        println!(
            "criterion {n} {}: {title}: {detail} ({timing})",
            if ok { "PASS" } else { "FAIL" }
        );
        total += 1;
        if ok {
            passed += 1;
        }
    };

    let second = Some(Duration::from_secs(1));
    report(1, "LCOD anchor", second, &mut lcod_anchor);
    report(2, "premium anchors", second, &mut premium_anchors);
    report(3, "parity structure", second, &mut parity_structure);
    report(
        4,
        "sensitivity signs and leaders",
        Some(Duration::from_secs(5)),
        &mut sensitivity_signs_and_leaders,
    );
    report(5, "GA synthetic recovery", None, &mut synthetic_recovery);
    report(6, "model reduction", None, &mut model_reduction);
    let fits = china_fits();
    report(7, "comparative fit", None, &mut || comparative_fit(&fits));
    report(8, "forecast shape", None, &mut || forecast_shape(&fits));
    report(9, "determinism", None, &mut determinism);

    println!("acceptance: {passed}/{total} criteria passed");
    if passed != total {
        std::process::exit(1);
    }
}
