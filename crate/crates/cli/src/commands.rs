use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use green_premium::config::{find_scenario, parse_schedule, ScenarioSource};
use green_premium::cost_model::{
    acquisition_premium, annual_operating_cost, lcod, lifecycle_premium, production_premium, tco_npv, Powertrain,
};
use green_premium::diffusion::{simulate, BassParams};
use green_premium::fitting::{compare_models, ga_fit, FitConfig, FitResult, MMode, ObservationSeries};
use green_premium::io::{load_sales_csv, parse_sales_csv, SAMPLE_SALES};
use green_premium::sensitivity::{default_factors, sensitivity_table};
use green_premium::trajectory::{
    parity_year, premium_series, resolve_scenario, PremiumKind, PremiumSeries, ScenarioSchedule,
};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::manifest::{now, sha256_hex, RunManifest};
use crate::output::{Cell, Table};
use crate::{Cli, Command, Common, FitArgs, Kind, SeriesArgs, Units};

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let common = &cli.common;
    let (manifest, table) = match &cli.command {
        Command::Tco { scenario, year } => tco(common, scenario, *year)?,
        Command::PremiumSeries(args) => series(common, args)?,
        Command::Parity(args) => parity(common, args)?,
        Command::Fit { fit: args, vanilla } => fit(common, args, *vanilla, stderr)?,
        Command::Compare { fit: args } => compare(common, args, stderr)?,
        Command::Forecast {
            params,
            scenario,
            to,
            units,
        } => forecast(common, params, scenario.as_deref(), *to, *units)?,
        Command::Sensitivity { scenario, year, kind } => sensitivity(common, scenario, *year, *kind)?,
    };
    emit(common, manifest, table, stdout)
}

fn emit(common: &Common, mut manifest: RunManifest, mut table: Table, stdout: &mut dyn Write) -> Result<()> {
    let mut comments = manifest.comment_lines();
    comments.append(&mut table.comments);
    table.comments = comments;
    let bytes = table.render(common.sig_digits.map(usize::from))?;
    match &common.out {
        Some(path) => std::fs::write(path, &bytes)?,
        None => stdout.write_all(&bytes)?,
    }
    if let Some(path) = &common.manifest {
        manifest.finished_at = now();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

struct Scenario {
    reference: String,
    source: ScenarioSource,
    schedule: ScenarioSchedule,
}

impl Scenario {
    fn load(reference: &str, common: &Common) -> Result<Self> {
        let source = find_scenario(reference, common.config_dir.as_deref())?;
        let schedule = parse_schedule(&source.text)?;
        Ok(Scenario {
            reference: reference.to_string(),
            source,
            schedule,
        })
    }

    fn snapshot(&self) -> serde_json::Value {
        json!({
            "reference": self.reference,
            "origin": self.source.origin,
            "sha256": sha256_hex(self.source.text.as_bytes()),
        })
    }

    fn years(&self, from: Option<i32>, to: Option<i32>) -> Result<RangeInclusive<i32>> {
        let span = self.schedule.span();
        let from = from.unwrap_or(*span.start());
        let to = to.unwrap_or(*span.end());
        if from > to {
            return Err(CliError::Input(format!("--from {from} is after --to {to}")));
        }
        Ok(from..=to)
    }

    fn header_comments(&self, table: &mut Table) {
        table.comment(format!(
            "scenario: {} ({}, {})",
            self.schedule.name(),
            self.schedule.vehicle_class(),
            self.source.origin
        ));
    }
}

fn tco(common: &Common, reference: &str, year: i32) -> Result<(RunManifest, Table)> {
    let scen = Scenario::load(reference, common)?;
    let sc = resolve_scenario(&scen.schedule, year)?;
    let manifest = RunManifest::new("tco", None, json!({ "scenario": scen.snapshot(), "year": year }));

    let mut t = Table::new(&["metric", "ev", "icev", "premium"]);
    scen.header_comments(&mut t);
    t.comment(format!("year: {year}"));
    t.comment("units: yuan, except lcod in yuan/km; premium is a fraction of the ICEV value");
    let (ev, icev) = (Powertrain::Ev, Powertrain::Icev);
    let up = &sc.usage_profile;
    let tco = (tco_npv(&sc, ev), tco_npv(&sc, icev));
    let d3 = lifecycle_premium(&sc)?;
    let rows: [(&str, f64, f64, Option<f64>); 6] = [
        (
            "production_cost",
            sc.production_cost(ev),
            sc.production_cost(icev),
            Some(production_premium(sc.production_cost(ev), sc.production_cost(icev))?),
        ),
        ("market_price", sc.price(ev), sc.price(icev), None),
        (
            "acquisition_cost",
            sc.acquisition_cost(ev),
            sc.acquisition_cost(icev),
            Some(acquisition_premium(&sc)?),
        ),
        (
            "annual_operating_cost",
            annual_operating_cost(ev, up),
            annual_operating_cost(icev, up),
            None,
        ),
        ("tco_npv", tco.0, tco.1, Some(d3)),
        ("lcod", lcod(tco.0, up)?, lcod(tco.1, up)?, Some(d3)),
    ];
    for (name, a, b, d) in rows {
        t.push(vec![name.into(), a.into(), b.into(), d.into()]);
    }
    Ok((manifest, t))
}

fn series(common: &Common, args: &SeriesArgs) -> Result<(RunManifest, Table)> {
    let scen = Scenario::load(&args.scenario, common)?;
    let years = scen.years(args.from, args.to)?;
    let s = premium_series(&scen.schedule, years.clone())?;
    let manifest = RunManifest::new(
        "premium-series",
        None,
        json!({ "scenario": scen.snapshot(), "from": years.start(), "to": years.end() }),
    );
    let mut t = Table::new(&[
        "year",
        "production_premium",
        "acquisition_premium",
        "lifecycle_premium",
        "lcod_ev",
        "lcod_icev",
    ]);
    scen.header_comments(&mut t);
    t.comment("units: premiums are fractions of the ICEV value; lcod in yuan/km");
    for p in s.points() {
        t.push(vec![
            p.year.into(),
            p.production.into(),
            p.acquisition.into(),
            p.lifecycle.into(),
            p.lcod_ev.into(),
            p.lcod_icev.into(),
        ]);
    }
    Ok((manifest, t))
}

fn parity(common: &Common, args: &SeriesArgs) -> Result<(RunManifest, Table)> {
    let scen = Scenario::load(&args.scenario, common)?;
    let years = scen.years(args.from, args.to)?;
    let s = premium_series(&scen.schedule, years.clone())?;
    let manifest = RunManifest::new(
        "parity",
        None,
        json!({ "scenario": scen.snapshot(), "from": years.start(), "to": years.end() }),
    );
    let mut t = Table::new(&["premium", "parity_year"]);
    scen.header_comments(&mut t);
    t.comment(format!(
        "parity_year is the first year in {}-{} with premium <= 0; empty if none",
        years.start(),
        years.end()
    ));
    for (name, kind) in [
        ("lifecycle", PremiumKind::Lifecycle),
        ("acquisition", PremiumKind::Acquisition),
        ("production", PremiumKind::Production),
    ] {
        t.push(vec![name.into(), parity_year(&s, kind).into()]);
    }
    Ok((manifest, t))
}

fn sensitivity(common: &Common, reference: &str, year: i32, kind: Kind) -> Result<(RunManifest, Table)> {
    let scen = Scenario::load(reference, common)?;
    let base = resolve_scenario(&scen.schedule, year)?;
    let kind_name = kind_name(kind);
    let premium = match kind {
        Kind::Production => PremiumKind::Production,
        Kind::Acquisition => PremiumKind::Acquisition,
        Kind::Lifecycle => PremiumKind::Lifecycle,
    };
    let (rows, failures) = sensitivity_table(&base, &default_factors(), premium);
    let manifest = RunManifest::new(
        "sensitivity",
        None,
        json!({ "scenario": scen.snapshot(), "year": year, "kind": kind_name }),
    );
    let mut t = Table::new(&[
        "id",
        "label",
        "group",
        "change_minus20",
        "change_minus10",
        "change_plus10",
        "change_plus20",
        "coefficient",
    ]);
    scen.header_comments(&mut t);
    t.comment(format!("base year: {year}; premium: {kind_name}"));
    t.comment("units: relative change of the premium per relative change of the factor");
    for (id, err) in &failures {
        t.comment(format!("skipped {id}: {err}"));
    }
    for r in rows {
        let mut row: Vec<Cell> = vec![r.id.into(), r.label.into(), r.group.to_string().into()];
        row.extend(r.changes.iter().map(|&c| Cell::from(c)));
        row.push(r.coefficient.into());
        t.push(row);
    }
    Ok((manifest, t))
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Production => "production",
        Kind::Acquisition => "acquisition",
        Kind::Lifecycle => "lifecycle",
    }
}

struct FitInputs {
    scen: Scenario,
    obs: ObservationSeries,
    cfg: FitConfig,
    snapshot: serde_json::Value,
}

fn fit_inputs(common: &Common, args: &FitArgs, vanilla: bool, stderr: &mut dyn Write) -> Result<FitInputs> {
    let scen = Scenario::load(&args.scenario, common)?;
    let (obs, data_origin, data_hash) = match &args.data {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            (load_sales_csv(path)?, path.display().to_string(), sha256_hex(&bytes))
        }
        None => (
            parse_sales_csv(SAMPLE_SALES)?,
            "builtin:china-bev-sales".to_string(),
            sha256_hex(SAMPLE_SALES.as_bytes()),
        ),
    };

    let (mut cfg, file_seed) = match &args.fit_config {
        Some(path) => read_fit_config(path)?,
        None => (FitConfig::default(), None),
    };
    if let Some(g) = args.generations {
        cfg.max_generations = g;
    }
    if let Some(n) = args.population {
        cfg.population_size = n;
    }
    if let Some(m) = args.m {
        cfg.m_mode = MMode::Fixed(m);
    }
    if let Some(range) = &args.m_free {
        cfg.m_mode = MMode::Free(range[0], range[1]);
    }
    if args.no_early_stop {
        cfg.stagnation_generations = None;
    }
    if vanilla {
        cfg.bounds.beta = (0.0, 0.0);
    }
    cfg.rng_seed = match args.seed.or(file_seed) {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            writeln!(stderr, "gpremium: no --seed given, using seed {s}")?;
            s
        }
    };
    cfg.validate()?;

    let snapshot = json!({
        "scenario": scen.snapshot(),
        "data": { "origin": data_origin, "sha256": data_hash },
        "fit": cfg,
    });
    Ok(FitInputs {
        scen,
        obs,
        cfg,
        snapshot,
    })
}

/// Parses a GA settings file. The seed is returned separately when the file
/// sets one, so that it can take the place of `--seed`.
fn read_fit_config(path: &Path) -> Result<(FitConfig, Option<u64>)> {
    let bad = |e: &dyn std::fmt::Display| CliError::Input(format!("{}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(&e))?;
    let cfg: FitConfig = toml::from_str(&text).map_err(|e| bad(&e))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| bad(&e))?;
    let seed = table.contains_key("rng_seed").then_some(cfg.rng_seed);
    Ok((cfg, seed))
}

fn training_premiums(inputs: &FitInputs) -> Result<PremiumSeries> {
    let (Some(a), Some(b)) = (inputs.obs.first_year(), inputs.obs.last_year()) else {
        return Err(CliError::Input("no observations".into()));
    };
    Ok(premium_series(&inputs.scen.schedule, a..=b)?)
}

fn fit(common: &Common, args: &FitArgs, vanilla: bool, stderr: &mut dyn Write) -> Result<(RunManifest, Table)> {
    let inputs = fit_inputs(common, args, vanilla, stderr)?;
    let premiums = if inputs.cfg.fits_beta() {
        Some(training_premiums(&inputs)?)
    } else {
        None
    };
    let result = ga_fit(&inputs.obs, premiums.as_ref(), &inputs.cfg)?;
    let manifest = RunManifest::new("fit", Some(inputs.cfg.rng_seed), inputs.snapshot.clone());

    let mut t = Table::new(&["parameter", "value"]);
    t.comment("units: m and sales in thousands of vehicles; p and q per year");
    let model = if inputs.cfg.fits_beta() {
        "generalized"
    } else {
        "vanilla"
    };
    let text_rows: [(&str, Cell); 4] = [
        ("model", model.into()),
        ("scenario", inputs.scen.reference.clone().into()),
        ("start_year", inputs.obs.first_year().into()),
        ("end_year", inputs.obs.last_year().into()),
    ];
    for (k, v) in text_rows {
        t.push(vec![k.into(), v]);
    }
    for (k, v) in result_cells(&result) {
        t.push(vec![k.into(), v]);
    }
    Ok((manifest, t))
}

fn result_cells(r: &FitResult) -> Vec<(&'static str, Cell)> {
    vec![
        ("p", r.params.p.into()),
        ("q", r.params.q.into()),
        ("m", r.params.m.into()),
        ("beta", r.params.beta.into()),
        ("objective", r.objective.into()),
        ("r_squared", r.r_squared.into()),
        ("generations_run", Cell::Int(r.generations_run as i64)),
        ("converged", r.converged.to_string().into()),
    ]
}

fn compare(common: &Common, args: &FitArgs, stderr: &mut dyn Write) -> Result<(RunManifest, Table)> {
    let inputs = fit_inputs(common, args, false, stderr)?;
    if !inputs.cfg.fits_beta() {
        return Err(CliError::Input(
            "beta bounds are pinned at zero; nothing to compare".into(),
        ));
    }
    let premiums = training_premiums(&inputs)?;
    let (vanilla, general) = compare_models(&inputs.obs, &premiums, &inputs.cfg)?;
    let manifest = RunManifest::new("compare", Some(inputs.cfg.rng_seed), inputs.snapshot.clone());

    let mut t = Table::new(&[
        "model",
        "p",
        "q",
        "m",
        "beta",
        "objective",
        "r_squared",
        "generations_run",
        "converged",
    ]);
    t.comment("units: m in thousands of vehicles; p and q per year");
    for (name, r) in [("vanilla", &vanilla), ("generalized", &general)] {
        let mut row: Vec<Cell> = vec![name.into()];
        row.extend(result_cells(r).into_iter().map(|(_, c)| c));
        t.push(row);
    }
    Ok((manifest, t))
}

/// Key/value pairs from a `fit` output file.
fn read_params(path: &Path) -> Result<BTreeMap<String, String>> {
    let bad = |e: &dyn std::fmt::Display| CliError::Input(format!("{}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(&e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(&e))?;
    if headers.iter().collect::<Vec<_>>() != ["parameter", "value"] {
        return Err(bad(&"expected header `parameter,value`"));
    }
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(&e))?;
        out.insert(record[0].to_string(), record[1].to_string());
    }
    Ok(out)
}

fn param<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, path: &Path) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| CliError::Input(format!("{}: missing `{key}`", path.display())))?;
    raw.parse()
        .map_err(|_| CliError::Input(format!("{}: bad `{key}` value `{raw}`", path.display())))
}

fn forecast(
    common: &Common,
    params_path: &Path,
    scenario: Option<&str>,
    to: i32,
    units: Units,
) -> Result<(RunManifest, Table)> {
    let map = read_params(params_path)?;
    let bp = BassParams {
        p: param(&map, "p", params_path)?,
        q: param(&map, "q", params_path)?,
        m: param(&map, "m", params_path)?,
        beta: param(&map, "beta", params_path)?,
    };
    let start: i32 = param(&map, "start_year", params_path)?;
    if to < start {
        return Err(CliError::Input(format!(
            "--to {to} is before the fitted start year {start}"
        )));
    }
    let reference = scenario
        .map(str::to_string)
        .or_else(|| map.get("scenario").cloned())
        .unwrap_or_else(|| "long-range".to_string());
    let scen = Scenario::load(&reference, common)?;
    let premiums = premium_series(&scen.schedule, start..=to)?;
    let horizon = (to - start + 1) as usize;
    let states = simulate(&bp, (bp.beta != 0.0).then_some(&premiums), start, horizon)?;

    let params_bytes = std::fs::read(params_path)?;
    let unit_name = match units {
        Units::Thousands => "thousands",
        Units::Vehicles => "vehicles",
    };
    let manifest = RunManifest::new(
        "forecast",
        None,
        json!({
            "params": { "origin": params_path.display().to_string(), "sha256": sha256_hex(&params_bytes) },
            "scenario": scen.snapshot(),
            "to": to,
            "units": unit_name,
        }),
    );
    let scale = match units {
        Units::Thousands => 1.0,
        Units::Vehicles => 1000.0,
    };
    let mut t = Table::new(&["year", "annual_sales", "cumulative", "lifecycle_premium", "x"]);
    scen.header_comments(&mut t);
    t.comment(format!("units: {unit_name}"));
    t.comment(format!("p={} q={} m={} beta={}", bp.p, bp.q, bp.m, bp.beta));
    for s in &states {
        t.push(vec![
            s.year.into(),
            (s.new_adopters * scale).into(),
            (s.cumulative * scale).into(),
            premiums.lifecycle(s.year)?.into(),
            s.x.into(),
        ]);
    }
    Ok((manifest, t))
}
