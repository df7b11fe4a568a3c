//! Named scenarios: the worked examples, the mean-targeting search over `gamma_m / beta_m`,
//! the random-walk hitting-time probe and the non-hitting counterexample.

use std::collections::{BTreeMap, HashMap};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{
    estimate_tau_stats, stationary_sample, stationary_sample_x, StationaryOptions, TauStats,
};
use crate::error::{invalid, Error, Result};
use crate::limitlaw::{make_limit_law, no_truncation_law, LimitLaw};
use crate::model::{
    schedule_ratio_limit, validate_family, AlphaLaw, ModelAtM, ModelFamily, RestartRegion,
    ScalarSchedule, ValidationVerdict,
};
use crate::moments::moment_recursion;
use crate::noise::{NoiseLaw, UniformPiece};
use crate::rng::{tag, RandomStream};
use crate::stats::{ks_distance, mixture_cdf};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Names accepted by [`scenario_by_name`].
pub const CATALOG: &[&str] = &[
    "example-1.1",
    "example-1.2",
    "example-2",
    "no-restart",
    "gamma-config-1",
    "gamma-config-2",
];

/// Expected behaviour of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    /// Symmetric Gaussian limit, `mu = 0`, `p = 1`.
    NormalLimit,
    /// Positive half-normal limit, `mu` on the feasibility boundary, `p = 1`.
    HalfNormalLimit,
    /// Point mass at 0.
    DegenerateZero,
    NonHitting,
    TauDivergent,
    TauBounded,
}

/// Which chain a scenario samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainKind {
    Restarted,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub family: ModelFamily,
    pub prediction: Prediction,
    pub chain: ChainKind,
    pub m_grid: Vec<u64>,
    pub samples: usize,
    /// Keep every `max(1, round(thin_per_m * m))`-th state.
    pub thin_per_m: f64,
    /// KS threshold for limit predictions; second-moment bound for `degenerate-zero`.
    pub threshold: f64,
    pub tau_replicas: u64,
    /// Hitting times are censored at `max(1, round(tau_horizon_per_m * m))`.
    pub tau_horizon_per_m: f64,
}

impl Scenario {
    pub fn thin(&self, m: u64) -> u64 {
        ((self.thin_per_m * m as f64).round() as u64).max(1)
    }

    pub fn tau_horizon(&self, m: u64) -> u64 {
        ((self.tau_horizon_per_m * m as f64).round() as u64).max(1)
    }

    pub fn structural_errors(&self) -> Vec<String> {
        let mut errors = self.family.structural_errors();
        if self.m_grid.is_empty() {
            errors.push("m grid is empty".into());
        }
        if self.m_grid.contains(&0) {
            errors.push("m must be at least 1".into());
        }
        if self.samples == 0 {
            errors.push("samples must be at least 1".into());
        }
        if !(self.thin_per_m.is_finite() && self.thin_per_m >= 0.0) {
            errors.push("thin_per_m must be nonnegative".into());
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            errors.push("threshold must be positive".into());
        }
        if !(self.tau_horizon_per_m.is_finite() && self.tau_horizon_per_m >= 0.0) {
            errors.push("tau_horizon_per_m must be nonnegative".into());
        }
        if !matches!(
            self.prediction,
            Prediction::NormalLimit | Prediction::HalfNormalLimit | Prediction::DegenerateZero
        ) {
            errors.push(format!(
                "prediction {:?} cannot be checked by a stationary run",
                self.prediction
            ));
        }
        if self.prediction == Prediction::HalfNormalLimit && self.family.dim != 1 {
            errors.push("half-normal prediction needs d = 1".into());
        }
        errors
    }
}

fn inv_sqrt_family(a: f64, alpha: AlphaLaw, noise: NoiseLaw, region: RestartRegion) -> ModelFamily {
    ModelFamily {
        dim: 1,
        a,
        alpha,
        beta: ScalarSchedule::InvSqrtM,
        gamma: ScalarSchedule::InvSqrtM,
        noise,
        region,
    }
}

fn uniform_pm1() -> NoiseLaw {
    NoiseLaw::UniformInterval { lo: -1.0, hi: 1.0 }
}

/// Heavy-traffic family with `a = 1`, `xi ~ U(-1, 1)` and the given interval as `A`.
pub fn example_one_family(lo: f64, hi: f64) -> ModelFamily {
    inv_sqrt_family(
        1.0,
        AlphaLaw::HeavyTraffic { a: 1.0 },
        uniform_pm1(),
        RestartRegion::Interval { lo, hi },
    )
}

/// `alpha_m = alpha~ - 1/(2m)` with `alpha~` uniform on `{5/4, 3/4}`.
pub fn example_two_family() -> ModelFamily {
    inv_sqrt_family(
        0.5,
        AlphaLaw::TwoPointShifted {
            values: vec![1.25, 0.75],
            probs: vec![0.5, 0.5],
            shift: 0.5,
        },
        uniform_pm1(),
        RestartRegion::Interval { lo: -0.5, hi: 0.5 },
    )
}

/// First mean-targeting configuration with unit noise variance:
/// `xi ~ U(-L, L)`, `A = (-2L, L)`, `L = sqrt(3)`.
pub fn gamma_config_one() -> ModelFamily {
    let l = 3f64.sqrt();
    inv_sqrt_family(
        1.0,
        AlphaLaw::HeavyTraffic { a: 1.0 },
        NoiseLaw::UniformInterval { lo: -l, hi: l },
        RestartRegion::Interval {
            lo: -2.0 * l,
            hi: l,
        },
    )
}

/// Second configuration with unit noise variance: `xi` has density `2/3` on `(-L/2, 0)`
/// and `1/3` on `(0, L)` (times `1/L`), `A = (-L, L)`, `L = sqrt(6)`.
pub fn gamma_config_two() -> ModelFamily {
    let l = 6f64.sqrt();
    inv_sqrt_family(
        1.0,
        AlphaLaw::HeavyTraffic { a: 1.0 },
        NoiseLaw::PiecewiseUniform {
            pieces: vec![
                UniformPiece {
                    lo: -0.5 * l,
                    hi: 0.0,
                    weight: 2.0 / 3.0,
                },
                UniformPiece {
                    lo: 0.0,
                    hi: l,
                    weight: 1.0 / 3.0,
                },
            ],
        },
        RestartRegion::Interval { lo: -l, hi: l },
    )
}

/// Looks up a catalog entry.
pub fn scenario_by_name(name: &str) -> Result<Scenario> {
    let base = |family: ModelFamily, prediction, chain, m_grid: Vec<u64>| Scenario {
        name: name.to_string(),
        family,
        prediction,
        chain,
        m_grid,
        samples: 100_000,
        thin_per_m: 1.0,
        threshold: 0.02,
        tau_replicas: 1000,
        tau_horizon_per_m: 1.0,
    };
    let s = match name {
        "example-1.1" => base(
            example_one_family(-0.5, 0.5),
            Prediction::NormalLimit,
            ChainKind::Restarted,
            vec![10_000],
        ),
        "example-1.2" => base(
            example_one_family(-1.0, 0.5),
            Prediction::HalfNormalLimit,
            ChainKind::Restarted,
            vec![10_000],
        ),
        "example-2" => Scenario {
            thin_per_m: 0.0,
            threshold: 0.01,
            ..base(
                example_two_family(),
                Prediction::DegenerateZero,
                ChainKind::Restarted,
                vec![100, 1000, 10_000],
            )
        },
        "no-restart" => Scenario {
            tau_replicas: 0,
            ..base(
                example_one_family(-0.5, 0.5),
                Prediction::NormalLimit,
                ChainKind::Plain,
                vec![10_000],
            )
        },
        "gamma-config-1" => base(
            gamma_config_one(),
            Prediction::NormalLimit,
            ChainKind::Restarted,
            vec![10_000],
        ),
        "gamma-config-2" => base(
            gamma_config_two(),
            Prediction::NormalLimit,
            ChainKind::Restarted,
            vec![10_000],
        ),
        _ => {
            return Err(invalid(format!(
                "unknown scenario '{name}'; known: {}",
                CATALOG.join(", ")
            )))
        }
    };
    Ok(s)
}

/// The limit law a scenario predicts, built from the live family.
pub fn predicted_law(s: &Scenario) -> Result<LimitLaw> {
    let f = &s.family;
    let sigma = f.noise.covariance()?;
    if s.chain == ChainKind::Plain {
        return no_truncation_law(f.a, sigma);
    }
    match s.prediction {
        Prediction::NormalLimit => make_limit_law(f.a, sigma, vec![0.0; f.dim], 1.0),
        Prediction::HalfNormalLimit => {
            let mu = (sigma[(0, 0)] / (std::f64::consts::PI * f.a)).sqrt();
            make_limit_law(f.a, sigma, vec![mu], 1.0)
        }
        Prediction::DegenerateZero => make_limit_law(f.a, sigma, vec![0.0; f.dim], 0.0),
        other => Err(Error::Precondition(format!(
            "no limit law for prediction {other:?}"
        ))),
    }
}

/// Estimates at one `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerMEstimate {
    pub m: u64,
    pub gamma: f64,
    pub beta: f64,
    pub n: usize,
    pub thin: u64,
    pub mean: f64,
    pub second_moment: f64,
    pub mean_abs: f64,
    pub variance: f64,
    pub min_visited: f64,
    pub max_visited: f64,
    pub predicted_mean: f64,
    pub predicted_variance: f64,
    pub ks: Option<f64>,
    pub steps: u64,
    pub cycles: u64,
    pub tau: Option<TauStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Everything a scenario run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub validation: Vec<ValidationVerdict>,
    pub estimates: Vec<PerMEstimate>,
    pub verdicts: Vec<Verdict>,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Crate versions embedded in reports.
pub fn module_versions() -> BTreeMap<String, String> {
    BTreeMap::from([(
        env!("CARGO_PKG_NAME").to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    )])
}

/// Runs a scenario. Results depend only on the scenario and `seed`.
pub fn run_scenario(s: &Scenario, seed: u64) -> Result<SimulationReport> {
    let errors = s.structural_errors();
    if !errors.is_empty() {
        return Err(invalid(errors.join("; ")));
    }
    let law = predicted_law(s)?;
    let mut direction = vec![0.0; s.family.dim];
    direction[0] = 1.0;
    let table = moment_recursion(&law, &direction, 2)?;
    let predicted_mean = table.values[1];
    let predicted_variance = table.values[2] - predicted_mean * predicted_mean;
    let cdf = if s.prediction == Prediction::DegenerateZero {
        None
    } else {
        Some(mixture_cdf(&law.projection(&direction)?))
    };

    let validation: Vec<ValidationVerdict> = s
        .m_grid
        .iter()
        .map(|&m| validate_family(&s.family, m))
        .collect();
    let mut warnings: Vec<String> = validation
        .iter()
        .flat_map(|v| {
            v.failures()
                .map(move |c| format!("assumption {} failed at m = {}: {}", c.name, v.m, c.witness))
        })
        .collect();

    let runs: Vec<Result<(PerMEstimate, Vec<String>)>> = s
        .m_grid
        .par_iter()
        .map(|&m| {
            let model = s.family.at(m)?;
            let thin = s.thin(m);
            let sample = match s.chain {
                ChainKind::Restarted => stationary_sample(
                    &model,
                    &StationaryOptions::cycle_pool(s.samples).thinned(thin),
                    seed,
                )?,
                ChainKind::Plain => stationary_sample_x(
                    &model,
                    &StationaryOptions::long_run(s.samples).thinned(thin),
                    seed,
                )?,
            };
            let xs = sample.states.project(&direction);
            let n = xs.len();
            let nf = n as f64;
            let mean = xs.iter().sum::<f64>() / nf;
            let second_moment = xs.iter().map(|x| x * x).sum::<f64>() / nf;
            let mean_abs = xs.iter().map(|x| x.abs()).sum::<f64>() / nf;
            let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
            let ks = cdf.as_ref().map(|c| ks_distance(&xs, c));
            let tau = if s.tau_replicas > 0 {
                Some(estimate_tau_stats(
                    &model,
                    s.tau_replicas,
                    s.tau_horizon(m),
                    seed,
                )?)
            } else {
                None
            };
            let mut w = sample.warnings.clone();
            if n < s.samples {
                w.push(format!(
                    "m = {m}: only {n} of {} states collected",
                    s.samples
                ));
            }
            Ok((
                PerMEstimate {
                    m,
                    gamma: model.gamma,
                    beta: model.beta,
                    n,
                    thin,
                    mean,
                    second_moment,
                    mean_abs,
                    variance,
                    min_visited: sample.min_visited[0],
                    max_visited: sample.max_visited[0],
                    predicted_mean,
                    predicted_variance,
                    ks,
                    steps: sample.steps,
                    cycles: sample.cycles,
                    tau,
                },
                w,
            ))
        })
        .collect();

    let mut estimates = Vec::with_capacity(runs.len());
    for r in runs {
        let (e, w) = r?;
        warnings.extend(w);
        estimates.push(e);
    }
    let verdicts = verdicts_for(s, &estimates);
    Ok(SimulationReport {
        schema_version: SCHEMA_VERSION,
        scenario: s.clone(),
        seed,
        versions: module_versions(),
        warnings,
        validation,
        estimates,
        verdicts,
    })
}

fn verdicts_for(s: &Scenario, estimates: &[PerMEstimate]) -> Vec<Verdict> {
    let mut out = Vec::new();
    let last = estimates.last().expect("nonempty m grid");
    match s.prediction {
        Prediction::NormalLimit | Prediction::HalfNormalLimit => {
            let ks = last.ks.unwrap_or(1.0);
            out.push(Verdict {
                name: format!("ks-to-limit-at-m-{}", last.m),
                value: ks,
                threshold: s.threshold,
                passed: ks < s.threshold,
            });
            if s.prediction == Prediction::HalfNormalLimit {
                for e in estimates {
                    let slack = e.min_visited + e.gamma;
                    out.push(Verdict {
                        name: format!("min-at-least-minus-gamma-at-m-{}", e.m),
                        value: slack,
                        threshold: 0.0,
                        passed: slack >= 0.0,
                    });
                }
            }
        }
        Prediction::DegenerateZero => {
            let decreasing = |f: fn(&PerMEstimate) -> f64| {
                estimates
                    .windows(2)
                    .map(|w| f(&w[1]) - f(&w[0]))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let step = decreasing(|e| e.second_moment);
            out.push(Verdict {
                name: "second-moment-strictly-decreasing".into(),
                value: step,
                threshold: 0.0,
                passed: estimates.len() < 2 || step < 0.0,
            });
            let step = decreasing(|e| e.mean_abs);
            out.push(Verdict {
                name: "mean-abs-strictly-decreasing".into(),
                value: step,
                threshold: 0.0,
                passed: estimates.len() < 2 || step < 0.0,
            });
            out.push(Verdict {
                name: format!("second-moment-at-m-{}", last.m),
                value: last.second_moment,
                threshold: s.threshold,
                passed: last.second_moment < s.threshold,
            });
        }
        _ => {}
    }
    out
}

/// Settings for [`gamma_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSearchOptions {
    pub samples: usize,
    /// Cycle-pool thinning stride is `max(1, m / thin_divisor)`.
    pub thin_divisor: u64,
    /// Increasing scan points for `c = gamma_m / beta_m` in `(0, 3/4]`.
    pub grid: Vec<f64>,
    pub tolerance: f64,
    pub max_bisections: usize,
}

impl Default for GammaSearchOptions {
    fn default() -> Self {
        let mut grid = vec![0.01];
        grid.extend((1..=15).map(|i| 0.05 * i as f64));
        Self {
            samples: 100_000,
            thin_divisor: 20,
            grid,
            tolerance: 0.02,
            max_bisections: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEvaluation {
    pub m: u64,
    pub c: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSearchEntry {
    pub m: u64,
    pub target: f64,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub achieved: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSearchReport {
    pub schema_version: u32,
    pub seed: u64,
    pub options: GammaSearchOptions,
    pub entries: Vec<GammaSearchEntry>,
    pub evaluations: Vec<GammaEvaluation>,
    pub warnings: Vec<String>,
}

/// Checks that `f` is one of the two interval configurations, up to scale.
fn check_gamma_config(f: &ModelFamily) -> Result<()> {
    let fail = |why: &str| Err(Error::Precondition(format!("mean-targeting search: {why}")));
    if f.dim != 1 {
        return fail("needs d = 1");
    }
    if !matches!(f.alpha, AlphaLaw::HeavyTraffic { .. }) {
        return fail("needs alpha_m = 1 - a/m");
    }
    if !f.noise.is_continuous() {
        return fail("noise must have a density");
    }
    let var = f.noise.covariance()?[(0, 0)];
    if (var - 1.0).abs() > 1e-9 {
        return fail(&format!("noise variance must be 1, got {var}"));
    }
    let (Some((lo, hi)), RestartRegion::Interval { lo: rlo, hi: rhi }) =
        (f.noise.support_interval(), &f.region)
    else {
        return fail("needs bounded noise and an interval region");
    };
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1.0);
    let first = close(lo, -hi) && close(*rlo, -2.0 * hi) && close(*rhi, hi);
    let second = close(lo, -0.5 * hi) && close(*rlo, -hi) && close(*rhi, hi);
    if first || second {
        Ok(())
    } else {
        fail("region and noise support match neither configuration")
    }
}

struct MeanOracle<'a> {
    base: &'a ModelFamily,
    opts: &'a GammaSearchOptions,
    seed: u64,
    cache: HashMap<(u64, u64), f64>,
    log: Vec<GammaEvaluation>,
}

impl MeanOracle<'_> {
    fn model(&self, m: u64, c: f64) -> Result<ModelAtM> {
        let mut model = self.base.at(m)?;
        model.gamma = c * model.beta;
        Ok(model)
    }

    fn stationary_mean(&self, m: u64, c: f64) -> Result<f64> {
        let model = self.model(m, c)?;
        let opts = StationaryOptions::cycle_pool(self.opts.samples)
            .thinned((m / self.opts.thin_divisor.max(1)).max(1));
        let sample = stationary_sample(&model, &opts, self.seed)?;
        let xs = sample.states.first_coordinate();
        Ok(xs.iter().sum::<f64>() / xs.len() as f64)
    }

    fn prefetch(&mut self, m: u64, cs: &[f64]) -> Result<()> {
        let missing: Vec<f64> = cs
            .iter()
            .copied()
            .filter(|c| !self.cache.contains_key(&(m, c.to_bits())))
            .collect();
        let values: Vec<Result<f64>> = missing
            .par_iter()
            .map(|&c| self.stationary_mean(m, c))
            .collect();
        for (c, v) in missing.into_iter().zip(values) {
            let v = v?;
            self.cache.insert((m, c.to_bits()), v);
            self.log.push(GammaEvaluation { m, c, mean: v });
        }
        Ok(())
    }

    fn eval(&mut self, m: u64, c: f64) -> Result<f64> {
        self.prefetch(m, &[c])?;
        Ok(self.cache[&(m, c.to_bits())])
    }
}

/// For each `m` and target, finds `c = gamma_m / beta_m` with `|E Y - target| < tolerance`.
///
/// The stationary mean is estimated from a cycle pool whose random streams do not depend
/// on `c`, so evaluations at different `c` share their noise. The grid is scanned first;
/// bisection runs on the increasing branch up to the largest mean.
pub fn gamma_search(
    base: &ModelFamily,
    targets: &[f64],
    m_grid: &[u64],
    opts: &GammaSearchOptions,
    seed: u64,
) -> Result<GammaSearchReport> {
    check_gamma_config(base)?;
    let upper = (base.noise.covariance()?[(0, 0)] / (std::f64::consts::PI * base.a)).sqrt();
    if let Some(t) = targets
        .iter()
        .find(|t| !(**t >= 0.0 && **t <= upper * (1.0 + 1e-12)))
    {
        return Err(invalid(format!("target {t} outside [0, {upper}]")));
    }
    if opts.grid.is_empty() || opts.grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("search grid must be nonempty and increasing"));
    }
    if opts.grid.iter().any(|c| !(*c > 0.0 && *c <= 0.75)) {
        return Err(invalid("search grid must lie in (0, 3/4]"));
    }
    if !opts.tolerance.is_finite()
        || opts.tolerance <= 0.0
        || opts.samples == 0
        || m_grid.contains(&0)
    {
        return Err(invalid("tolerance, samples and m must be positive"));
    }
    let sub_seed = RandomStream::new(seed, &[tag::GAMMA_SEARCH]).next_u64();
    let mut oracle = MeanOracle {
        base,
        opts,
        seed: sub_seed,
        cache: HashMap::new(),
        log: Vec::new(),
    };
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for &m in m_grid {
        oracle.prefetch(m, &opts.grid)?;
        let values: Vec<f64> = opts
            .grid
            .iter()
            .map(|c| oracle.cache[&(m, c.to_bits())])
            .collect();
        let peak = values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
        for i in 1..=peak {
            if values[i] < values[i - 1] {
                warnings.push(format!(
                    "m = {m}: estimated mean decreases from c = {} to c = {} below the peak",
                    opts.grid[i - 1],
                    opts.grid[i]
                ));
            }
        }
        for &target in targets {
            let entry = search_one(&mut oracle, m, target, peak, &values)?;
            entries.push(GammaSearchEntry {
                gamma: entry
                    .0
                    .map(|c| c * crate::model::schedule_value(&base.beta, m).unwrap_or(f64::NAN)),
                m,
                target,
                c: entry.0,
                achieved: entry.1,
                error: entry.2,
            });
        }
        let mut branch: Vec<(f64, f64)> = oracle
            .log
            .iter()
            .filter(|e| e.m == m && e.c <= opts.grid[peak])
            .map(|e| (e.c, e.mean))
            .collect();
        branch.sort_by(|a, b| a.0.total_cmp(&b.0));
        if branch.windows(2).any(|w| w[1].1 < w[0].1) {
            warnings.push(format!("m = {m}: bisection points are not monotone in c"));
        }
    }
    Ok(GammaSearchReport {
        schema_version: SCHEMA_VERSION,
        seed,
        options: opts.clone(),
        entries,
        evaluations: oracle.log,
        warnings,
    })
}

/// Smallest `c` tried when extending the search below the grid.
const MIN_SEARCH_C: f64 = 1e-4;

type SearchOutcome = (Option<f64>, Option<f64>, Option<String>);

fn search_one(
    oracle: &mut MeanOracle,
    m: u64,
    target: f64,
    peak: usize,
    values: &[f64],
) -> Result<SearchOutcome> {
    let grid = &oracle.opts.grid;
    let tol = oracle.opts.tolerance;
    let mut best = (grid[0], values[0]);
    let consider = |c: f64, v: f64, best: &mut (f64, f64)| {
        if (v - target).abs() < (best.1 - target).abs() {
            *best = (c, v);
        }
    };
    for i in 0..=peak {
        consider(grid[i], values[i], &mut best);
    }
    let mut bracket = (0..peak)
        .find(|&i| values[i] <= target && target <= values[i + 1])
        .map(|i| (grid[i], grid[i + 1]));
    if bracket.is_none() && target < values[0] {
        // Halve c below the grid until the mean drops under the target.
        let mut hi = grid[0];
        while (best.1 - target).abs() > 0.25 * tol && hi > MIN_SEARCH_C {
            let lo = 0.5 * hi;
            let v = oracle.eval(m, lo)?;
            consider(lo, v, &mut best);
            if v <= target {
                bracket = Some((lo, hi));
                break;
            }
            hi = lo;
        }
    }
    if let Some((mut lo, mut hi)) = bracket {
        for _ in 0..oracle.opts.max_bisections {
            if (best.1 - target).abs() <= 0.25 * tol || hi - lo < 1e-6 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let v = oracle.eval(m, mid)?;
            consider(mid, v, &mut best);
            if v < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    if (best.1 - target).abs() < tol {
        Ok((Some(best.0), Some(best.1), None))
    } else if bracket.is_none() {
        let range = (values[0], values[peak]);
        Ok((
            None,
            Some(best.1),
            Some(format!(
                "target {target} outside the achieved range [{}, {}] at m = {m}",
                range.0, range.1
            )),
        ))
    } else {
        Ok((
            Some(best.0),
            Some(best.1),
            Some(format!("tolerance {tol} not reached at m = {m}")),
        ))
    }
}

/// Classification of a hitting-time probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    /// Some walks were still outside at the largest horizon and the truncated mean kept growing.
    DivergenceConsistent,
    /// Every walk hit before the largest horizon.
    TauBounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeHorizon {
    pub horizon: u64,
    pub truncated_mean: f64,
    pub stderr: f64,
    pub censored_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProbe {
    pub schema_version: u32,
    pub seed: u64,
    pub rho: f64,
    pub epsilon: f64,
    pub replicas: u64,
    /// `P(theta > 1)`.
    pub survival_at_one: f64,
    pub horizons: Vec<ProbeHorizon>,
    pub tail: Vec<(u64, f64)>,
    pub verdict: ProbeVerdict,
}

/// Minimum relative growth of the truncated mean over the last horizon step
/// for a divergence-consistent verdict.
const PROBE_GROWTH: f64 = 0.25;

fn distance_to_scaled(region: &RestartRegion, rho: f64, x: &[f64]) -> f64 {
    match region {
        RestartRegion::Interval { lo, hi } => (rho * lo - x[0]).max(x[0] - rho * hi).max(0.0),
        RestartRegion::Ball { radius, .. } => {
            (crate::noise::dot(x, x).sqrt() - rho * radius).max(0.0)
        }
        RestartRegion::CenteredBox { half_widths } => x
            .iter()
            .zip(half_widths)
            .map(|(xi, h)| (xi.abs() - rho * h).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt(),
    }
}

/// Compares `tau` with the hitting time `theta` of `rho A + B(0, eps)` by the limiting
/// walk `W_t = alpha~_t W_(t-1) + xi_t`, where `alpha~` is the limit law of `alpha_m`
/// (identically 1 in heavy traffic, so `W` is the random walk `S_t`) and
/// `rho = lim gamma_m / beta_m`.
pub fn tau_divergence_probe(
    f: &ModelFamily,
    epsilon: f64,
    horizons: &[u64],
    replicas: u64,
    seed: u64,
) -> Result<DivergenceProbe> {
    let errors = f.structural_errors();
    if !errors.is_empty() {
        return Err(invalid(errors.join("; ")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if horizons.is_empty() || horizons.contains(&0) || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("horizons must be positive and increasing"));
    }
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    let rho = schedule_ratio_limit(&f.gamma, &f.beta)?.ok_or_else(|| {
        Error::Precondition("random-walk comparison inapplicable: gamma_m / beta_m diverges".into())
    })?;
    let alpha = f.alpha.limit_sampler();
    let max_h = *horizons.last().expect("nonempty");
    let thetas: Vec<Option<u64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut s = RandomStream::new(seed, &[tag::RANDOM_WALK, r]);
            let mut w = vec![0.0; f.dim];
            let mut xi = vec![0.0; f.dim];
            for t in 1..=max_h {
                let a = alpha.draw(&mut s);
                f.noise.sample_into(&mut s, &mut xi);
                for (wi, x) in w.iter_mut().zip(&xi) {
                    *wi = a * *wi + x;
                }
                if distance_to_scaled(&f.region, rho, &w) < epsilon {
                    return Some(t);
                }
            }
            None
        })
        .collect();
    let per_h: Vec<ProbeHorizon> = horizons
        .iter()
        .map(|&h| {
            let capped: Vec<Option<u64>> = thetas.iter().map(|t| t.filter(|&v| v <= h)).collect();
            let stats = crate::chain::summarize_taus(0, &capped, h);
            ProbeHorizon {
                horizon: h,
                truncated_mean: stats.mean,
                stderr: stats.stderr,
                censored_fraction: stats.censored_fraction,
            }
        })
        .collect();
    let full = crate::chain::summarize_taus(0, &thetas, max_h);
    let survival_at_one =
        thetas.iter().filter(|t| t.is_none_or(|v| v > 1)).count() as f64 / replicas as f64;
    let last = per_h.last().expect("nonempty");
    let verdict = if last.censored_fraction == 0.0 {
        ProbeVerdict::TauBounded
    } else if per_h.len() >= 2
        && last.truncated_mean >= (1.0 + PROBE_GROWTH) * per_h[per_h.len() - 2].truncated_mean
    {
        ProbeVerdict::DivergenceConsistent
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(DivergenceProbe {
        schema_version: SCHEMA_VERSION,
        seed,
        rho,
        epsilon,
        replicas,
        survival_at_one,
        horizons: per_h,
        tail: full.tail,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonHittingReport {
    pub alpha: f64,
    pub gamma: f64,
    pub steps: u64,
    pub seed: u64,
    /// `min_{1 <= t <= steps} |Z_t|`.
    pub min_abs: f64,
    /// `(1 - 2 alpha) / (1 - alpha)`.
    pub bound: f64,
    /// Whether some `Z_t` fell in `[-gamma, gamma]`.
    pub hit: bool,
    pub bound_holds: bool,
}

/// Runs `Z_t = alpha Z_(t-1) + xi_t`, `Z_0 = 0`, with Rademacher `xi` and tracks `min |Z_t|`.
pub fn non_hitting_counterexample(
    alpha: f64,
    gamma: f64,
    steps: u64,
    seed: u64,
) -> Result<NonHittingReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Precondition(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    if steps == 0 {
        return Err(invalid("steps must be at least 1"));
    }
    if gamma.is_nan() {
        return Err(invalid("gamma must be a number"));
    }
    let mut s = RandomStream::new(seed, &[tag::NON_HITTING]);
    let mut z = 0.0f64;
    let mut min_abs = f64::INFINITY;
    for _ in 0..steps {
        z = alpha * z + s.sign();
        min_abs = min_abs.min(z.abs());
    }
    let bound = (1.0 - 2.0 * alpha) / (1.0 - alpha);
    Ok(NonHittingReport {
        alpha,
        gamma,
        steps,
        seed,
        min_abs,
        bound,
        hit: min_abs <= gamma,
        bound_holds: min_abs >= bound - 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_resolves() {
        for name in CATALOG {
            let s = scenario_by_name(name).unwrap();
            assert!(
                s.structural_errors().is_empty() || name.starts_with("gamma"),
                "{name}"
            );
        }
        assert!(scenario_by_name("example-9").is_err());
    }

    #[test]
    fn predictions_come_from_live_modules() {
        let s = scenario_by_name("example-1.1").unwrap();
        let law = predicted_law(&s).unwrap();
        let var = s.family.noise.covariance().unwrap()[(0, 0)] / (2.0 * s.family.a);
        assert!((law.gaussian_covariance()[(0, 0)] - var).abs() < 1e-15);
        assert!((var - 1.0 / 6.0).abs() < 1e-15);
        let half = predicted_law(&scenario_by_name("example-1.2").unwrap()).unwrap();
        let proj = half.projection(&[1.0]).unwrap();
        assert!((proj.prob_plus - 1.0).abs() < 1e-12);
        assert!((proj.scale - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gamma_configs_have_unit_variance() {
        for f in [gamma_config_one(), gamma_config_two()] {
            assert!((f.noise.covariance().unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
            assert!(f.noise.mean()[0].abs() < 1e-15);
            check_gamma_config(&f).unwrap();
        }
        assert!(check_gamma_config(&example_one_family(-0.5, 0.5)).is_err());
    }

    #[test]
    fn small_scenario_is_thread_independent() {
        let mut s = scenario_by_name("example-1.2").unwrap();
        s.m_grid = vec![50, 100];
        s.samples = 2000;
        s.tau_replicas = 50;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_scenario(&s, 9)).unwrap();
        let b = four.install(|| run_scenario(&s, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimates.len(), 2);
        assert!(a.estimates.iter().all(|e| e.min_visited >= -e.gamma));
    }

    #[test]
    fn non_hitting_bounds() {
        for (alpha, bound) in [(0.3, 4.0 / 7.0), (0.25, 2.0 / 3.0), (0.49, 0.02 / 0.51)] {
            let r = non_hitting_counterexample(alpha, 0.5 * bound, 20_000, 3).unwrap();
            assert!((r.bound - bound).abs() < 1e-15);
            assert!(r.bound_holds && !r.hit);
        }
        assert!(matches!(
            non_hitting_counterexample(0.5, 0.1, 10, 0),
            Err(Error::Precondition(_))
        ));
        assert!(non_hitting_counterexample(0.0, 0.1, 10, 0).is_err());
    }

    #[test]
    fn probe_example_one_first_step() {
        let f = example_one_family(-0.5, 0.5);
        let p = tau_divergence_probe(&f, 0.05, &[10, 100], 4000, 1).unwrap();
        assert_eq!(p.rho, 1.0);
        // P(|xi| >= 1/2 + eps) for xi ~ U(-1, 1).
        assert!((p.survival_at_one - 0.45).abs() < 3.0 * (0.25f64 / 4000.0).sqrt());
    }

    #[test]
    fn probe_shrinking_target_grows() {
        let f = example_one_family(-0.5, 0.5).with_gamma(ScalarSchedule::Power {
            c: 1.0,
            exponent: -1.0,
        });
        let p = tau_divergence_probe(&f, 0.05, &[100, 1000, 10_000], 500, 2).unwrap();
        assert_eq!(p.rho, 0.0);
        assert!(p
            .horizons
            .windows(2)
            .all(|w| w[1].truncated_mean > w[0].truncated_mean));
        assert_eq!(p.verdict, ProbeVerdict::DivergenceConsistent);
    }

    #[test]
    fn probe_example_two_is_bounded() {
        let p = tau_divergence_probe(&example_two_family(), 0.05, &[1000, 10_000], 500, 4).unwrap();
        assert_eq!(p.verdict, ProbeVerdict::TauBounded);
    }

    #[test]
    fn probe_rejects_diverging_ratio() {
        let f = example_one_family(-0.5, 0.5).with_gamma(ScalarSchedule::Power {
            c: 1.0,
            exponent: -0.25,
        });
        let err = tau_divergence_probe(&f, 0.05, &[10], 10, 0).unwrap_err();
        assert!(err.to_string().contains("inapplicable"));
    }

    #[test]
    fn gamma_search_rejects_bad_input() {
        let f = gamma_config_one();
        let opts = GammaSearchOptions::default();
        assert!(gamma_search(&f, &[0.7], &[100], &opts, 0).is_err());
        assert!(gamma_search(&example_two_family(), &[0.1], &[100], &opts, 0).is_err());
    }

    #[test]
    fn gamma_search_small_m() {
        let opts = GammaSearchOptions {
            samples: 4000,
            tolerance: 0.05,
            ..GammaSearchOptions::default()
        };
        let target = 0.25 / std::f64::consts::PI.sqrt();
        let r = gamma_search(&gamma_config_one(), &[target], &[400], &opts, 5).unwrap();
        let e = &r.entries[0];
        assert!(e.error.is_none(), "{:?}", e.error);
        assert!((e.achieved.unwrap() - target).abs() < 0.05);
        let again = gamma_search(&gamma_config_one(), &[target], &[400], &opts, 5).unwrap();
        assert_eq!(r, again);
    }
}
