//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use restart_ar_core::chain::{simulate_coupled, StationaryMode};
use restart_ar_core::rng::tag;
use restart_ar_core::scenarios::{module_versions, predicted_law, SCHEMA_VERSION};
use restart_ar_core::{
    empirical_moments, estimate_tau_stats, gamma_search, geometric_tail_diagnostic,
    moment_inequality_check, moment_recursion, non_hitting_counterexample, run_criterion,
    run_scenario, scenario_by_name, stationary_sample, tau_divergence_probe, validate_family,
    CriterionOutcome, GammaSearchOptions, LimitLaw, ModelFamily, RandomStream, Scenario, States,
    StationaryOptions, CORE_CRITERIA,
};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{parse_unchecked, Format, ModeName, RunConfig};
use crate::output::{num, Sink};

/// The determinism check needs a second thread pool, so it lives here rather than in the core.
pub const DETERMINISM_CRITERION: u8 = 14;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("{0}")]
    Runtime(String),
}

impl From<restart_ar_core::Error> for CliError {
    fn from(e: restart_ar_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o: {e}"))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "restart-ar",
    version,
    about = "Simulate autoregressive chains with restarts and evaluate their limit laws"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for report files. Without it the JSON report goes to standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads. Changes speed only.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Named scenario supplying the model.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    #[arg(long, global = true)]
    pub m: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Comma-separated direction vector.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the configuration and the model assumptions.
    Validate,
    /// Trace of the chain without restarts.
    SimulateX,
    /// Trace of the restarted chain.
    SimulateY,
    /// Stationary sample of the restarted chain.
    Stationary,
    /// Hitting-time statistics; with an epsilon, also the divergence probe.
    Tau {
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Characteristic function of the limit law along a direction.
    LimitCf,
    /// Density of the limit law.
    LimitPdf,
    /// One-dimensional projection of the limit law.
    Project,
    /// Analytic and empirical moments along a direction.
    Moments,
    /// Run acceptance criteria by number, or all of them.
    Verify {
        #[arg(default_value = "all")]
        criteria: Vec<String>,
    },
    /// Run a catalogued scenario.
    Scenario { name: String },
    /// Find restart thresholds that reach target means.
    GammaSearch {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        targets: Option<Vec<f64>>,
    },
    /// Rademacher recursion that never enters a small interval.
    NonHitting {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long)]
        steps: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::SimulateX => "simulate-x",
            Command::SimulateY => "simulate-y",
            Command::Stationary => "stationary",
            Command::Tau { .. } => "tau",
            Command::LimitCf => "limit-cf",
            Command::LimitPdf => "limit-pdf",
            Command::Project => "project",
            Command::Moments => "moments",
            Command::Verify { .. } => "verify",
            Command::Scenario { .. } => "scenario",
            Command::GammaSearch { .. } => "gamma-search",
            Command::NonHitting { .. } => "non-hitting",
        }
    }
}

/// Report wrapper shared by every command.
#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    versions: std::collections::BTreeMap<String, String>,
    config: &'a RunConfig,
    warnings: &'a [String],
    result: T,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 1;
        }
        // A second call in the same process keeps the first pool; results do not depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let mut cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return e.exit_code();
        }
    };
    let mut sink = match Sink::new(
        cfg.output.path.clone(),
        cfg.output.format.unwrap_or(Format::Both),
    ) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot create output directory: {e}");
            return 2;
        }
    };
    // The echo must not depend on where files go, or reports in two directories would differ.
    cfg.output.path = None;
    match dispatch(&cli.command, &cfg, &mut sink) {
        Ok(code) => code,
        Err(e) => {
            sink.discard();
            report_error(&e);
            e.exit_code()
        }
    }
}

fn report_error(e: &CliError) {
    for line in e.to_string().lines() {
        eprintln!("error: {line}");
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(vec![format!("cannot read {}: {e}", path.display())])
            })?;
            parse_unchecked(&text).map_err(CliError::Config)?
        }
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.scenario.is_some() {
        cfg.scenario.clone_from(&cli.scenario);
    }
    if let Command::Scenario { name } = &cli.command {
        cfg.scenario = Some(name.clone());
    }
    if matches!(cli.command, Command::GammaSearch { .. })
        && cfg.scenario.is_none()
        && cfg.model.is_none()
    {
        cfg.scenario = Some("gamma-config-1".into());
    }
    if let Some(m) = cli.m {
        cfg.run.m = Some(m);
        cfg.run.m_grid = None;
    }
    if cli.samples.is_some() {
        cfg.run.samples = cli.samples;
    }
    if cli.direction.is_some() {
        cfg.options.direction.clone_from(&cli.direction);
    }
    if cli.output.is_some() {
        cfg.output.path.clone_from(&cli.output);
    }
    if cli.format.is_some() {
        cfg.output.format = cli.format;
    }
    match &cli.command {
        Command::Tau { epsilon: Some(e) } => cfg.options.epsilon = Some(*e),
        Command::GammaSearch { targets: Some(t) } => cfg.options.targets = Some(t.clone()),
        Command::NonHitting {
            alpha,
            gamma,
            steps,
        } => {
            if alpha.is_some() {
                cfg.options.alpha = *alpha;
            }
            if gamma.is_some() {
                cfg.options.gamma = *gamma;
            }
            if steps.is_some() {
                cfg.options.steps = *steps;
            }
        }
        _ => {}
    }
    let mut errors = cfg.problems();
    if let Some(u) = &cfg.options.direction {
        if u.is_empty() || u.iter().any(|x| !x.is_finite()) {
            errors.push("options: direction must be a nonempty list of finite numbers".into());
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    cfg.fill_defaults();
    Ok(cfg)
}

fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.expect("checked by RunConfig::problems")
}

fn m(cfg: &RunConfig) -> u64 {
    cfg.run.m.expect("filled by RunConfig::fill_defaults")
}

fn scenario(cfg: &RunConfig) -> Result<Option<Scenario>, CliError> {
    let Some(name) = &cfg.scenario else {
        return Ok(None);
    };
    let mut s = scenario_by_name(name)?;
    if let Some(f) = &cfg.model {
        s.family = f.clone();
    }
    if let Some(grid) = &cfg.run.m_grid {
        s.m_grid.clone_from(grid);
    }
    if let Some(n) = cfg.run.samples {
        s.samples = n;
    }
    Ok(Some(s))
}

fn family(cfg: &RunConfig) -> Result<ModelFamily, CliError> {
    if let Some(f) = &cfg.model {
        return Ok(f.clone());
    }
    match scenario(cfg)? {
        Some(s) => Ok(s.family),
        None => Err(CliError::Config(vec![
            "a model or a scenario is required".into()
        ])),
    }
}

fn limit_law(cfg: &RunConfig) -> Result<LimitLaw, CliError> {
    if let Some(p) = &cfg.limit {
        return Ok(LimitLaw::from_params(p)?);
    }
    match scenario(cfg)? {
        Some(s) => Ok(predicted_law(&s)?),
        None => Err(CliError::Config(vec![
            "a limit law or a scenario is required".into(),
        ])),
    }
}

fn direction(cfg: &RunConfig, dim: usize) -> Result<Vec<f64>, CliError> {
    match &cfg.options.direction {
        Some(u) if u.len() != dim => Err(CliError::Runtime(format!(
            "direction has {} coordinates, the model has {dim}",
            u.len()
        ))),
        Some(u) => Ok(u.clone()),
        None => {
            let mut u = vec![0.0; dim];
            u[0] = 1.0;
            Ok(u)
        }
    }
}

/// `lo, lo + step, ..., hi`.
fn line(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn coordinate_header(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}_{i}")).collect()
}

fn states_rows(states: &States, with_t: bool) -> Vec<Vec<String>> {
    states
        .rows()
        .enumerate()
        .map(|(t, x)| {
            let mut row = Vec::with_capacity(x.len() + 1);
            if with_t {
                row.push(t.to_string());
            }
            row.extend(x.iter().map(|v| num(*v)));
            row
        })
        .collect()
}

fn write_table(
    sink: &mut Sink,
    stem: &str,
    header: &[String],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(sink.csv(stem, &header, rows)?)
}

fn write_report<T: Serialize>(
    sink: &mut Sink,
    stem: &str,
    command: &str,
    cfg: &RunConfig,
    warnings: &[String],
    result: T,
) -> Result<(), CliError> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        seed: seed(cfg),
        versions: versions(),
        config: cfg,
        warnings,
        result,
    };
    Ok(sink.json(stem, &env)?)
}

fn versions() -> std::collections::BTreeMap<String, String> {
    let mut v = module_versions();
    v.insert(
        env!("CARGO_PKG_NAME").into(),
        env!("CARGO_PKG_VERSION").into(),
    );
    v
}

fn dispatch(cmd: &Command, cfg: &RunConfig, sink: &mut Sink) -> Result<i32, CliError> {
    let name = cmd.name();
    match cmd {
        Command::Validate => validate(cfg, sink, name),
        Command::SimulateX => simulate(cfg, sink, name, false),
        Command::SimulateY => simulate(cfg, sink, name, true),
        Command::Stationary => stationary(cfg, sink, name),
        Command::Tau { .. } => tau(cfg, sink, name),
        Command::LimitCf => limit_cf(cfg, sink, name),
        Command::LimitPdf => limit_pdf(cfg, sink, name),
        Command::Project => project(cfg, sink, name),
        Command::Moments => moments(cfg, sink, name),
        Command::Verify { criteria } => verify(cfg, sink, name, criteria),
        Command::Scenario {
            name: scenario_name,
        } => run_named(cfg, sink, scenario_name),
        Command::GammaSearch { .. } => gamma(cfg, sink, name),
        Command::NonHitting { .. } => non_hitting(cfg, sink, name),
    }
}

fn validate(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let grid = cfg.run.m_grid.clone().unwrap_or_else(|| vec![m(cfg)]);
    let verdicts = match (&cfg.model, &cfg.scenario) {
        (None, None) => Vec::new(),
        _ => {
            let f = family(cfg)?;
            grid.iter().map(|&m| validate_family(&f, m)).collect()
        }
    };
    write_report(
        sink,
        name,
        name,
        cfg,
        &[],
        json!({ "validation": verdicts }),
    )?;
    let failures: Vec<String> = verdicts
        .iter()
        .flat_map(|v| {
            v.failures()
                .map(move |c| format!("m = {}: {} ({})", v.m, c.name, c.witness))
        })
        .collect();
    if failures.is_empty() {
        Ok(0)
    } else {
        Err(CliError::Runtime(format!(
            "assumptions violated:\n{}",
            failures.join("\n")
        )))
    }
}

fn simulate(
    cfg: &RunConfig,
    sink: &mut Sink,
    name: &str,
    restarted: bool,
) -> Result<i32, CliError> {
    let f = family(cfg)?;
    let model = f.at(m(cfg))?;
    let horizon = cfg.run.horizon.expect("filled");
    let mut stream = RandomStream::new(seed(cfg), &[tag::COUPLED, model.m]);
    let trace = simulate_coupled(&model, horizon, &mut stream)?;
    let (states, prefix) = if restarted {
        (&trace.states_y, "y")
    } else {
        (&trace.states_x, "x")
    };
    let mut header = vec!["t".to_string()];
    header.extend(coordinate_header(prefix, f.dim));
    write_table(sink, name, &header, &states_rows(states, true))?;
    let warnings: Vec<String> = match trace.tau {
        None => vec![format!(
            "no entry into the restart region within {horizon} steps"
        )],
        Some(_) => Vec::new(),
    };
    let last = states.row(states.len() - 1).to_vec();
    write_report(
        sink,
        name,
        name,
        cfg,
        &warnings,
        json!({ "m": model.m, "steps": horizon, "tau": trace.tau, "final": last }),
    )?;
    Ok(0)
}

fn stationary(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let f = family(cfg)?;
    let model = f.at(m(cfg))?;
    let n = cfg.run.samples.expect("filled");
    let mut opts = StationaryOptions::cycle_pool(n).thinned(cfg.run.thin.expect("filled"));
    if cfg.run.mode == Some(ModeName::LongRun) {
        opts.mode = StationaryMode::LongRun {
            burn_in: cfg.run.burn_in,
            chains: cfg.run.chains.expect("filled"),
        };
    }
    let sample = stationary_sample(&model, &opts, seed(cfg))?;
    write_table(
        sink,
        name,
        &coordinate_header("y", f.dim),
        &states_rows(&sample.states, false),
    )?;
    let warnings = sample.warnings.clone();
    write_report(
        sink,
        name,
        name,
        cfg,
        &warnings,
        json!({
            "m": sample.m,
            "n": sample.states.len(),
            "steps": sample.steps,
            "cycles": sample.cycles,
            "capped_cycles": sample.capped_cycles,
            "min_visited": sample.min_visited,
            "max_visited": sample.max_visited,
        }),
    )?;
    Ok(0)
}

fn tau(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let f = family(cfg)?;
    let model = f.at(m(cfg))?;
    let replicas = cfg.run.replicas.expect("filled");
    let horizon = cfg.run.horizon.expect("filled");
    let stats = estimate_tau_stats(&model, replicas, horizon, seed(cfg))?;
    let mut warnings = Vec::new();
    if stats.censored_fraction > 0.0 {
        warnings.push(format!(
            "{:.4} of replicas censored at {horizon}; the mean is a lower bound",
            stats.censored_fraction
        ));
    }
    let tail_fit = match geometric_tail_diagnostic(&stats) {
        Ok(t) => Some(t),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    let probe = match cfg.options.epsilon {
        Some(eps) => {
            let horizons = cfg
                .options
                .horizons
                .clone()
                .unwrap_or_else(|| vec![100, 1000, 10_000]);
            Some(tau_divergence_probe(
                &f,
                eps,
                &horizons,
                replicas,
                seed(cfg),
            )?)
        }
        None => None,
    };
    let rows: Vec<Vec<String>> = stats
        .tail
        .iter()
        .map(|(j, s)| vec![j.to_string(), num(*s)])
        .collect();
    write_table(sink, name, &["j".into(), "survival".into()], &rows)?;
    write_report(
        sink,
        name,
        name,
        cfg,
        &warnings,
        json!({ "stats": stats, "tail_fit": tail_fit, "probe": probe }),
    )?;
    Ok(0)
}

fn limit_cf(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let law = limit_law(cfg)?;
    let u = direction(cfg, law.dim())?;
    let grid = cfg
        .options
        .t_grid
        .clone()
        .unwrap_or_else(|| line(-10.0, 10.0, 0.25));
    let mut header = coordinate_header("u", law.dim());
    header.extend(["real".to_string(), "imag".to_string()]);
    let mut rows = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    for t in &grid {
        let point: Vec<f64> = u.iter().map(|x| t * x).collect();
        let z = law.cf(&point)?;
        let mut row: Vec<String> = point.iter().map(|v| num(*v)).collect();
        row.extend([num(z.re), num(z.im)]);
        rows.push(row);
        values.push(json!({ "u": point, "real": z.re, "imag": z.im }));
    }
    write_table(sink, name, &header, &rows)?;
    write_report(
        sink,
        name,
        name,
        cfg,
        &[],
        json!({ "law": law.params(), "values": values }),
    )?;
    Ok(0)
}

fn limit_pdf(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let law = limit_law(cfg)?;
    let points = match &cfg.options.points {
        Some(p) => p.clone(),
        None => {
            let u = direction(cfg, law.dim())?;
            line(-4.0, 4.0, 0.1)
                .into_iter()
                .map(|t| u.iter().map(|x| t * x).collect())
                .collect()
        }
    };
    let mut header = coordinate_header("x", law.dim());
    header.push("density".into());
    let mut rows = Vec::with_capacity(points.len());
    let mut values = Vec::with_capacity(points.len());
    for x in &points {
        let v = law.pdf(x)?;
        let mut row: Vec<String> = x.iter().map(|c| num(*c)).collect();
        row.push(num(v));
        rows.push(row);
        values.push(json!({ "x": x, "density": v }));
    }
    write_table(sink, name, &header, &rows)?;
    write_report(
        sink,
        name,
        name,
        cfg,
        &[],
        json!({ "law": law.params(), "values": values }),
    )?;
    Ok(0)
}

fn project(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let law = limit_law(cfg)?;
    let u = direction(cfg, law.dim())?;
    let proj = law.projection(&u)?;
    let span = 5.0 * proj.scale.max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<String>> = line(-1.0, 1.0, 0.01)
        .into_iter()
        .map(|t| {
            let x = t * span;
            vec![num(x), num(proj.cdf(x)), num(proj.continuous_pdf(x))]
        })
        .collect();
    write_table(
        sink,
        name,
        &["x".into(), "cdf".into(), "continuous_density".into()],
        &rows,
    )?;
    write_report(
        sink,
        name,
        name,
        cfg,
        &[],
        json!({ "direction": u, "projection": proj }),
    )?;
    Ok(0)
}

fn moments(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let law = limit_law(cfg)?;
    let u = direction(cfg, law.dim())?;
    let k = cfg.options.max_order.expect("filled");
    let analytic = moment_recursion(&law, &u, k)?;
    let sigma_u: f64 = {
        let s = law.sigma();
        (0..u.len())
            .map(|i| (0..u.len()).map(|j| u[i] * s[(i, j)] * u[j]).sum::<f64>())
            .sum()
    };
    let s = sigma_u / (2.0 * law.a());
    let inequality = moment_inequality_check(analytic.values[1], analytic.values[2], s)?;
    let mut warnings = Vec::new();
    let empirical = if cfg.model.is_some() || cfg.scenario.is_some() {
        let f = family(cfg)?;
        let model = f.at(m(cfg))?;
        let opts = StationaryOptions::cycle_pool(cfg.run.samples.expect("filled"))
            .thinned(cfg.run.thin.expect("filled"));
        let sample = stationary_sample(&model, &opts, seed(cfg))?;
        warnings.extend(sample.warnings.iter().cloned());
        Some(empirical_moments(&sample.states, &u, k)?)
    } else {
        None
    };
    let rows: Vec<Vec<String>> = (0..=k)
        .map(|i| {
            let (e, se) = match &empirical {
                Some(t) => (
                    num(t.values[i]),
                    t.stderr.as_ref().map_or(String::new(), |s| num(s[i])),
                ),
                None => (String::new(), String::new()),
            };
            vec![i.to_string(), num(analytic.values[i]), e, se]
        })
        .collect();
    write_table(
        sink,
        name,
        &[
            "k".into(),
            "analytic".into(),
            "empirical".into(),
            "stderr".into(),
        ],
        &rows,
    )?;
    write_report(
        sink,
        name,
        name,
        cfg,
        &warnings,
        json!({ "analytic": analytic, "empirical": empirical, "inequality": inequality }),
    )?;
    Ok(0)
}

/// Compares serialized reports of `example-1.1` produced under one and eight worker threads.
pub fn determinism_criterion(seed: u64) -> Result<CriterionOutcome, CliError> {
    let s = scenario_by_name("example-1.1")?;
    let report_with = |threads: usize| -> Result<Vec<u8>, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let report = pool.install(|| run_scenario(&s, seed))?;
        serde_json::to_vec(&report).map_err(|e| CliError::Runtime(e.to_string()))
    };
    let one = report_with(1)?;
    let eight = report_with(8)?;
    let differing =
        one.iter().zip(&eight).filter(|(a, b)| a != b).count() + one.len().abs_diff(eight.len());
    Ok(CriterionOutcome {
        id: DETERMINISM_CRITERION,
        name: "thread-count-determinism".into(),
        passed: differing == 0,
        measured: differing as f64,
        tolerance: 0.0,
        detail: format!("{} report bytes, {differing} differ", one.len()),
    })
}

fn parse_criteria(args: &[String], configured: Option<&Vec<u8>>) -> Result<Vec<u8>, CliError> {
    let all: Vec<u8> = CORE_CRITERIA.chain([DETERMINISM_CRITERION]).collect();
    if args.iter().any(|a| a == "all") {
        return Ok(match configured {
            Some(c) if args.len() == 1 && !c.is_empty() => c.clone(),
            _ => all,
        });
    }
    let mut ids = Vec::new();
    let mut errors = Vec::new();
    for a in args.iter().flat_map(|a| a.split(',')) {
        match a.trim().parse::<u8>() {
            Ok(id) if all.contains(&id) => ids.push(id),
            _ => errors.push(format!("unknown criterion '{a}'; expected 1..=14 or all")),
        }
    }
    if errors.is_empty() {
        Ok(ids)
    } else {
        Err(CliError::Config(errors))
    }
}

fn verify(cfg: &RunConfig, sink: &mut Sink, name: &str, args: &[String]) -> Result<i32, CliError> {
    let ids = parse_criteria(args, cfg.options.criteria.as_ref())?;
    let mut outcomes = Vec::with_capacity(ids.len());
    for id in ids {
        let outcome = if id == DETERMINISM_CRITERION {
            determinism_criterion(seed(cfg))?
        } else {
            run_criterion(id, seed(cfg))?
        };
        eprintln!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            vec![
                o.id.to_string(),
                o.name.clone(),
                if o.passed { "pass" } else { "fail" }.to_string(),
                num(o.measured),
                num(o.tolerance),
            ]
        })
        .collect();
    write_table(
        sink,
        name,
        &[
            "id".into(),
            "name".into(),
            "outcome".into(),
            "measured".into(),
            "tolerance".into(),
        ],
        &rows,
    )?;
    let passed = outcomes.iter().all(|o| o.passed);
    write_report(
        sink,
        name,
        name,
        cfg,
        &[],
        json!({ "passed": passed, "criteria": outcomes }),
    )?;
    Ok(if passed { 0 } else { 3 })
}

fn run_named(cfg: &RunConfig, sink: &mut Sink, scenario_name: &str) -> Result<i32, CliError> {
    let s = scenario(cfg)?
        .ok_or_else(|| CliError::Config(vec![format!("unknown scenario '{scenario_name}'")]))?;
    let report = run_scenario(&s, seed(cfg))?;
    let rows: Vec<Vec<String>> = report
        .estimates
        .iter()
        .map(|e| {
            let opt = |x: Option<f64>| x.map_or(String::new(), num);
            vec![
                e.m.to_string(),
                num(e.gamma),
                num(e.beta),
                e.n.to_string(),
                num(e.mean),
                num(e.second_moment),
                num(e.mean_abs),
                num(e.variance),
                num(e.min_visited),
                num(e.max_visited),
                num(e.predicted_mean),
                num(e.predicted_variance),
                opt(e.ks),
                opt(e.tau.as_ref().map(|t| t.mean)),
                opt(e.tau.as_ref().map(|t| t.censored_fraction)),
            ]
        })
        .collect();
    let header = [
        "m",
        "gamma",
        "beta",
        "n",
        "mean",
        "second_moment",
        "mean_abs",
        "variance",
        "min_visited",
        "max_visited",
        "predicted_mean",
        "predicted_variance",
        "ks",
        "tau_mean",
        "tau_censored_fraction",
    ]
    .map(String::from);
    write_table(sink, scenario_name, &header, &rows)?;
    let warnings = report.warnings.clone();
    let passed = report.passed();
    for v in &report.verdicts {
        eprintln!(
            "{} {} value={} threshold={}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            num(v.value),
            num(v.threshold)
        );
    }
    write_report(sink, scenario_name, "scenario", cfg, &warnings, report)?;
    Ok(if passed { 0 } else { 3 })
}

fn gamma(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let f = family(cfg)?;
    let targets = cfg
        .options
        .targets
        .clone()
        .unwrap_or_else(|| vec![0.1, 0.2, 0.3]);
    let grid = cfg.run.m_grid.clone().unwrap_or_else(|| vec![m(cfg)]);
    let opts = GammaSearchOptions {
        samples: cfg.run.samples.expect("filled"),
        ..GammaSearchOptions::default()
    };
    let report = gamma_search(&f, &targets, &grid, &opts, seed(cfg))?;
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            let opt = |x: Option<f64>| x.map_or(String::new(), num);
            vec![
                e.m.to_string(),
                num(e.target),
                opt(e.c),
                opt(e.gamma),
                opt(e.achieved),
                e.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_table(
        sink,
        name,
        &["m", "target", "c", "gamma", "achieved", "error"].map(String::from),
        &rows,
    )?;
    let failures: Vec<String> = report
        .entries
        .iter()
        .filter_map(|e| {
            e.error
                .as_ref()
                .map(|msg| format!("m = {}, target {}: {msg}", e.m, e.target))
        })
        .collect();
    let warnings = report.warnings.clone();
    write_report(sink, name, name, cfg, &warnings, report)?;
    if failures.is_empty() {
        Ok(0)
    } else {
        Err(CliError::Runtime(failures.join("\n")))
    }
}

fn non_hitting(cfg: &RunConfig, sink: &mut Sink, name: &str) -> Result<i32, CliError> {
    let alpha = cfg.options.alpha.unwrap_or(0.3);
    let gamma = cfg.options.gamma.unwrap_or(0.5);
    let steps = cfg.options.steps.unwrap_or(1_000_000);
    let report = non_hitting_counterexample(alpha, gamma, steps, seed(cfg))?;
    let rows = vec![vec![
        num(report.alpha),
        num(report.gamma),
        report.steps.to_string(),
        num(report.min_abs),
        num(report.bound),
        report.hit.to_string(),
    ]];
    write_table(
        sink,
        name,
        &["alpha", "gamma", "steps", "min_abs", "bound", "hit"].map(String::from),
        &rows,
    )?;
    write_report(sink, name, name, cfg, &[], report)?;
    Ok(0)
}
