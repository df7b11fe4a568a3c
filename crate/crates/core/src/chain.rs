//! Simulation of the AR chain `X`, the restarted chain `Y`, hitting times and
//! stationary samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{ModelAtM, RestartRegion};
use crate::noise::dot;
use crate::rng::{tag, RandomStream};

/// Default cap on the length of one regenerative cycle.
pub const DEFAULT_CYCLE_CAP: u64 = 10_000_000;

/// Number of independent batches a cycle pool is split into.
const POOL_BATCHES: u64 = 64;

/// Capped cycles tolerated per batch before the batch gives up.
const MAX_CAPPED_PER_BATCH: u64 = 8;

/// A sequence of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct States {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl States {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(n * dim),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.data.extend_from_slice(x);
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// `<u, x>` for every row.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        self.rows().map(|x| dot(u, x)).collect()
    }

    /// The first coordinate of every row.
    pub fn first_coordinate(&self) -> Vec<f64> {
        self.rows().map(|x| x[0]).collect()
    }

    fn truncate(&mut self, n: usize) {
        self.data.truncate(n * self.dim);
    }
}

/// `alpha * state * 1{state not in gamma A} + beta * noise`.
pub fn step_y(
    state: &[f64],
    alpha: f64,
    noise: &[f64],
    beta: f64,
    gamma: f64,
    region: &RestartRegion,
) -> Vec<f64> {
    let restart = region.contains_scaled(state, gamma);
    state
        .iter()
        .zip(noise)
        .map(|(x, e)| {
            if restart {
                beta * e
            } else {
                alpha * x + beta * e
            }
        })
        .collect()
}

/// In-place chain driver shared by all simulators.
struct Walker<'a> {
    model: &'a ModelAtM,
    noise: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(model: &'a ModelAtM) -> Self {
        Self {
            model,
            noise: vec![0.0; model.dim],
        }
    }

    /// Draws `(alpha, xi)` in a fixed order, so coupled chains see identical inputs.
    #[inline]
    fn draw(&mut self, s: &mut RandomStream) -> f64 {
        let alpha = self.model.alpha.draw(s);
        if self.model.dim == 1 {
            self.noise[0] = self.model.noise.sample_scalar(s);
        } else {
            self.model.noise.sample_into(s, &mut self.noise);
        }
        alpha
    }

    #[inline]
    fn inside(&self, x: &[f64]) -> bool {
        self.model.region.contains_scaled(x, self.model.gamma)
    }

    #[inline]
    fn advance(&self, x: &mut [f64], alpha: f64, restart: bool) {
        let beta = self.model.beta;
        for (v, e) in x.iter_mut().zip(&self.noise) {
            *v = if restart {
                beta * e
            } else {
                alpha * *v + beta * e
            };
        }
    }

    /// One step of `Y`.
    #[inline]
    fn step_y(&mut self, x: &mut [f64], s: &mut RandomStream) {
        let restart = self.inside(x);
        let alpha = self.draw(s);
        self.advance(x, alpha, restart);
    }

    /// One step of `X`.
    #[inline]
    fn step_x(&mut self, x: &mut [f64], s: &mut RandomStream) {
        let alpha = self.draw(s);
        self.advance(x, alpha, false);
    }
}

/// `X` and `Y` driven by the same draws from `X_0 = Y_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledTrace {
    pub m: u64,
    /// `X_0, ..., X_horizon`.
    pub states_x: States,
    /// `Y_0, ..., Y_horizon`.
    pub states_y: States,
    /// First `t >= 1` with `X_t ∈ gamma A`; `None` if censored at the horizon.
    pub tau: Option<u64>,
}

pub fn simulate_coupled(
    model: &ModelAtM,
    horizon: u64,
    stream: &mut RandomStream,
) -> Result<CoupledTrace> {
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    let d = model.dim;
    let mut walker = Walker::new(model);
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut states_x = States::with_capacity(d, horizon as usize + 1);
    let mut states_y = States::with_capacity(d, horizon as usize + 1);
    states_x.push(&x);
    states_y.push(&y);
    let mut tau = None;
    for t in 1..=horizon {
        let restart = walker.inside(&y);
        let alpha = walker.draw(stream);
        walker.advance(&mut x, alpha, false);
        walker.advance(&mut y, alpha, restart);
        states_x.push(&x);
        states_y.push(&y);
        if tau.is_none() && walker.inside(&x) {
            tau = Some(t);
        }
    }
    Ok(CoupledTrace {
        m: model.m,
        states_x,
        states_y,
        tau,
    })
}

/// A single path of `X` (`restart = false`) or `Y` (`restart = true`), including the start at 0.
pub fn simulate_path(
    model: &ModelAtM,
    steps: u64,
    restart: bool,
    stream: &mut RandomStream,
) -> States {
    let d = model.dim;
    let mut walker = Walker::new(model);
    let mut x = vec![0.0; d];
    let mut out = States::with_capacity(d, steps as usize + 1);
    out.push(&x);
    for _ in 0..steps {
        if restart {
            walker.step_y(&mut x, stream);
        } else {
            walker.step_x(&mut x, stream);
        }
        out.push(&x);
    }
    out
}

/// One regenerative cycle of `Y`: from a restart at 0 until the first entry into `gamma A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub states: States,
    pub capped: bool,
}

pub fn simulate_cycle(model: &ModelAtM, stream: &mut RandomStream, cap: u64) -> Result<Cycle> {
    if cap == 0 {
        return Err(invalid("cycle cap must be at least 1"));
    }
    let d = model.dim;
    let mut walker = Walker::new(model);
    let mut x = vec![0.0; d];
    let mut states = States::new(d);
    // The chain sits at the restart point, so the first step is a pure innovation.
    walker.step_y(&mut x, stream);
    states.push(&x);
    let mut len = 1;
    while !walker.inside(&x) {
        if len >= cap {
            return Ok(Cycle {
                states,
                capped: true,
            });
        }
        walker.step_y(&mut x, stream);
        states.push(&x);
        len += 1;
    }
    Ok(Cycle {
        states,
        capped: false,
    })
}

/// How stationary states are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StationaryMode {
    /// Independent regenerative cycles, concatenated (cycle-average measure).
    CyclePool,
    /// Time average along trajectories after a burn-in (default `10 m`).
    LongRun {
        burn_in: Option<u64>,
        #[serde(default = "one")]
        chains: u64,
    },
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    pub n: usize,
    pub mode: StationaryMode,
    /// Keep every `thin`-th visited state.
    pub thin: u64,
    pub cap: u64,
}

impl StationaryOptions {
    pub fn cycle_pool(n: usize) -> Self {
        Self {
            n,
            mode: StationaryMode::CyclePool,
            thin: 1,
            cap: DEFAULT_CYCLE_CAP,
        }
    }

    pub fn long_run(n: usize) -> Self {
        Self {
            n,
            mode: StationaryMode::LongRun {
                burn_in: None,
                chains: 1,
            },
            thin: 1,
            cap: DEFAULT_CYCLE_CAP,
        }
    }

    pub fn thinned(self, thin: u64) -> Self {
        Self { thin, ..self }
    }
}

/// Stationary states plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySample {
    pub m: u64,
    pub states: States,
    /// Coordinate-wise minimum over every visited state, kept or not.
    pub min_visited: Vec<f64>,
    /// Coordinate-wise maximum over every visited state.
    pub max_visited: Vec<f64>,
    pub steps: u64,
    pub cycles: u64,
    pub capped_cycles: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
struct Extremes {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Extremes {
    fn new(d: usize) -> Self {
        Self {
            min: vec![f64::INFINITY; d],
            max: vec![f64::NEG_INFINITY; d],
        }
    }

    #[inline]
    fn see(&mut self, x: &[f64]) {
        for ((lo, hi), v) in self.min.iter_mut().zip(self.max.iter_mut()).zip(x) {
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }

    fn merge(&mut self, other: &Extremes) {
        self.see(&other.min);
        self.see(&other.max);
    }
}

struct BatchOutput {
    states: States,
    extremes: Extremes,
    steps: u64,
    cycles: u64,
    capped: u64,
    gave_up: bool,
}

fn pool_batch(
    model: &ModelAtM,
    stream: RandomStream,
    target_steps: u64,
    thin: u64,
    cap: u64,
) -> BatchOutput {
    match model.region.interval_bounds(model.gamma) {
        Some((lo, hi)) => pool_batch_scalar(model, stream, target_steps, thin, cap, lo, hi),
        None => pool_batch_general(model, stream, target_steps, thin, cap),
    }
}

fn pool_batch_general(
    model: &ModelAtM,
    mut stream: RandomStream,
    target_steps: u64,
    thin: u64,
    cap: u64,
) -> BatchOutput {
    let d = model.dim;
    let mut walker = Walker::new(model);
    let mut out = BatchOutput {
        states: States::with_capacity(d, (target_steps / thin) as usize + 1),
        extremes: Extremes::new(d),
        steps: 0,
        cycles: 0,
        capped: 0,
        gave_up: false,
    };
    let mut x = vec![0.0; d];
    let mut pending = States::new(d);
    // Steps left until the next kept state.
    let mut countdown = thin;
    while out.steps < target_steps {
        pending.data.clear();
        let mut pending_extremes = Extremes::new(d);
        let countdown_at_start = countdown;
        let mut len = 0u64;
        let mut capped = false;
        let mut restart = true;
        loop {
            let alpha = walker.draw(&mut stream);
            walker.advance(&mut x, alpha, restart);
            restart = false;
            len += 1;
            pending_extremes.see(&x);
            countdown -= 1;
            if countdown == 0 {
                pending.push(&x);
                countdown = thin;
            }
            if walker.inside(&x) {
                break;
            }
            if len >= cap {
                capped = true;
                break;
            }
        }
        if capped {
            countdown = countdown_at_start;
            out.capped += 1;
            if out.capped >= MAX_CAPPED_PER_BATCH {
                out.gave_up = true;
                break;
            }
            continue;
        }
        out.steps += len;
        out.cycles += 1;
        out.states.data.extend_from_slice(&pending.data);
        out.extremes.merge(&pending_extremes);
    }
    out
}

/// `pool_batch` for `d = 1`, where membership is an interval test.
fn pool_batch_scalar(
    model: &ModelAtM,
    mut stream: RandomStream,
    target_steps: u64,
    thin: u64,
    cap: u64,
    lo: f64,
    hi: f64,
) -> BatchOutput {
    let beta = model.beta;
    let mut out = BatchOutput {
        states: States::with_capacity(1, (target_steps / thin) as usize + 1),
        extremes: Extremes::new(1),
        steps: 0,
        cycles: 0,
        capped: 0,
        gave_up: false,
    };
    let mut pending = Vec::new();
    let mut countdown = thin;
    while out.steps < target_steps {
        pending.clear();
        let countdown_at_start = countdown;
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut x = beta * {
            let _ = model.alpha.draw(&mut stream);
            model.noise.sample_scalar(&mut stream)
        };
        let mut len = 1u64;
        let mut capped = false;
        loop {
            min = min.min(x);
            max = max.max(x);
            countdown -= 1;
            if countdown == 0 {
                pending.push(x);
                countdown = thin;
            }
            if lo < x && x < hi {
                break;
            }
            if len >= cap {
                capped = true;
                break;
            }
            let alpha = model.alpha.draw(&mut stream);
            x = alpha * x + beta * model.noise.sample_scalar(&mut stream);
            len += 1;
        }
        if capped {
            countdown = countdown_at_start;
            out.capped += 1;
            if out.capped >= MAX_CAPPED_PER_BATCH {
                out.gave_up = true;
                break;
            }
            continue;
        }
        out.steps += len;
        out.cycles += 1;
        out.states.data.extend_from_slice(&pending);
        out.extremes.see(&[min]);
        out.extremes.see(&[max]);
    }
    out
}

fn long_run_chain(
    model: &ModelAtM,
    stream: RandomStream,
    burn_in: u64,
    keep: usize,
    thin: u64,
    restart: bool,
) -> (States, Extremes, u64) {
    match model.region.interval_bounds(model.gamma) {
        Some((lo, hi)) => long_run_scalar(model, stream, burn_in, keep, thin, restart, lo, hi),
        None => long_run_general(model, stream, burn_in, keep, thin, restart),
    }
}

fn long_run_general(
    model: &ModelAtM,
    mut stream: RandomStream,
    burn_in: u64,
    keep: usize,
    thin: u64,
    restart: bool,
) -> (States, Extremes, u64) {
    let d = model.dim;
    let mut walker = Walker::new(model);
    let mut x = vec![0.0; d];
    let mut extremes = Extremes::new(d);
    for _ in 0..burn_in {
        if restart {
            walker.step_y(&mut x, &mut stream);
        } else {
            walker.step_x(&mut x, &mut stream);
        }
    }
    let mut states = States::with_capacity(d, keep);
    for _ in 0..keep {
        for _ in 0..thin {
            if restart {
                walker.step_y(&mut x, &mut stream);
            } else {
                walker.step_x(&mut x, &mut stream);
            }
            extremes.see(&x);
        }
        states.push(&x);
    }
    (states, extremes, burn_in + keep as u64 * thin)
}

#[allow(clippy::too_many_arguments)]
fn long_run_scalar(
    model: &ModelAtM,
    mut stream: RandomStream,
    burn_in: u64,
    keep: usize,
    thin: u64,
    restart: bool,
    lo: f64,
    hi: f64,
) -> (States, Extremes, u64) {
    let beta = model.beta;
    let mut x = 0.0f64;
    let step = |x: f64, stream: &mut RandomStream| {
        let reset = restart && lo < x && x < hi;
        let alpha = model.alpha.draw(stream);
        let e = beta * model.noise.sample_scalar(stream);
        if reset {
            e
        } else {
            alpha * x + e
        }
    };
    for _ in 0..burn_in {
        x = step(x, &mut stream);
    }
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut states = States::with_capacity(1, keep);
    for _ in 0..keep {
        for _ in 0..thin {
            x = step(x, &mut stream);
            min = min.min(x);
            max = max.max(x);
        }
        states.data.push(x);
    }
    let mut extremes = Extremes::new(1);
    if keep > 0 {
        extremes.see(&[min]);
        extremes.see(&[max]);
    }
    (states, extremes, burn_in + keep as u64 * thin)
}

fn split_evenly(n: usize, parts: u64) -> Vec<usize> {
    let parts = parts.max(1) as usize;
    (0..parts)
        .map(|i| n / parts + usize::from(i < n % parts))
        .collect()
}

fn long_run(
    model: &ModelAtM,
    seed: u64,
    purpose: u64,
    opts: &StationaryOptions,
    burn_in: Option<u64>,
    chains: u64,
    restart: bool,
) -> StationarySample {
    let burn_in = burn_in.unwrap_or(10 * model.m);
    let counts = split_evenly(opts.n, chains);
    let parts: Vec<_> = counts
        .par_iter()
        .enumerate()
        .map(|(i, &keep)| {
            let stream = RandomStream::new(seed, &[purpose, model.m, i as u64]);
            long_run_chain(model, stream, burn_in, keep, opts.thin, restart)
        })
        .collect();
    let d = model.dim;
    let mut states = States::with_capacity(d, opts.n);
    let mut extremes = Extremes::new(d);
    let mut steps = 0;
    for (s, e, n) in parts {
        states.data.extend_from_slice(&s.data);
        extremes.merge(&e);
        steps += n;
    }
    StationarySample {
        m: model.m,
        states,
        min_visited: extremes.min,
        max_visited: extremes.max,
        steps,
        cycles: 0,
        capped_cycles: 0,
        warnings: Vec::new(),
    }
}

fn validate_options(opts: &StationaryOptions) -> Result<()> {
    if opts.n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    if opts.thin == 0 {
        return Err(invalid("thinning stride must be at least 1"));
    }
    if opts.cap == 0 {
        return Err(invalid("cycle cap must be at least 1"));
    }
    if let StationaryMode::LongRun { chains: 0, .. } = opts.mode {
        return Err(invalid("long-run mode needs at least one chain"));
    }
    Ok(())
}

/// Draws from the stationary law of `Y` at this `m`. Results depend only on `seed`
/// and `opts`, never on the number of worker threads.
pub fn stationary_sample(
    model: &ModelAtM,
    opts: &StationaryOptions,
    seed: u64,
) -> Result<StationarySample> {
    validate_options(opts)?;
    match opts.mode {
        StationaryMode::LongRun { burn_in, chains } => Ok(long_run(
            model,
            seed,
            tag::LONG_RUN,
            opts,
            burn_in,
            chains,
            true,
        )),
        StationaryMode::CyclePool => cycle_pool(model, opts, seed),
    }
}

fn cycle_pool(model: &ModelAtM, opts: &StationaryOptions, seed: u64) -> Result<StationarySample> {
    let d = model.dim;
    let needed = opts.n as u64 * opts.thin;
    let per_batch = needed.div_ceil(POOL_BATCHES).max(1);
    let mut states = States::with_capacity(d, opts.n);
    let mut extremes = Extremes::new(d);
    let (mut steps, mut cycles, mut capped) = (0u64, 0u64, 0u64);
    let mut warnings = Vec::new();
    let mut round = 0u64;
    let mut starved_rounds = 0;
    while states.len() < opts.n {
        let batches: Vec<BatchOutput> = (0..POOL_BATCHES)
            .into_par_iter()
            .map(|b| {
                let stream =
                    RandomStream::new(seed, &[tag::CYCLE, model.m, round * POOL_BATCHES + b]);
                pool_batch(model, stream, per_batch, opts.thin, opts.cap)
            })
            .collect();
        let before = states.len();
        let mut gave_up = false;
        for b in batches {
            states.data.extend_from_slice(&b.states.data);
            extremes.merge(&b.extremes);
            steps += b.steps;
            cycles += b.cycles;
            capped += b.capped;
            gave_up |= b.gave_up;
            if states.len() >= opts.n {
                break;
            }
        }
        round += 1;
        if states.len() == before || gave_up {
            starved_rounds += 1;
        }
        if starved_rounds >= 2 {
            warnings.push(format!(
                "cycle cap {} exhausted repeatedly; returning {} of {} requested states",
                opts.cap,
                states.len(),
                opts.n
            ));
            break;
        }
    }
    states.truncate(opts.n);
    if capped > 0 {
        warnings.push(format!(
            "{capped} cycle(s) reached the cap of {} steps and were excluded",
            opts.cap
        ));
    }
    Ok(StationarySample {
        m: model.m,
        states,
        min_visited: extremes.min,
        max_visited: extremes.max,
        steps,
        cycles,
        capped_cycles: capped,
        warnings,
    })
}

/// Draws from the stationary law of the plain chain `X` (no restarts).
pub fn stationary_sample_x(
    model: &ModelAtM,
    opts: &StationaryOptions,
    seed: u64,
) -> Result<StationarySample> {
    validate_options(opts)?;
    let (burn_in, chains) = match opts.mode {
        StationaryMode::LongRun { burn_in, chains } => (burn_in, chains),
        StationaryMode::CyclePool => {
            return Err(Error::Precondition(
                "the plain chain has no regenerative cycles; use long-run mode".into(),
            ))
        }
    };
    Ok(long_run(
        model,
        seed,
        tag::PLAIN_CHAIN,
        opts,
        burn_in,
        chains,
        false,
    ))
}

/// Summary of simulated hitting times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauStats {
    pub m: u64,
    /// Mean of `min(tau, horizon)`; a lower bound when anything was censored.
    pub mean: f64,
    pub stderr: f64,
    /// `(j, P(tau > j))` on an increasing grid.
    pub tail: Vec<(u64, f64)>,
    pub horizon: u64,
    pub censored_fraction: f64,
    pub replicas: u64,
}

/// Grid `1, 2, ..., 32` followed by roughly geometric steps up to `horizon`.
fn survival_grid(horizon: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=horizon.min(32)).collect();
    let mut j = 32f64;
    while (j as u64) < horizon {
        j *= 1.25;
        let v = (j.round() as u64).min(horizon);
        if grid.last() != Some(&v) {
            grid.push(v);
        }
    }
    grid
}

fn hitting_time(model: &ModelAtM, horizon: u64, stream: &mut RandomStream) -> Option<u64> {
    let mut walker = Walker::new(model);
    let mut x = vec![0.0; model.dim];
    for t in 1..=horizon {
        walker.step_x(&mut x, stream);
        if walker.inside(&x) {
            return Some(t);
        }
    }
    None
}

pub fn estimate_tau_stats(
    model: &ModelAtM,
    replicas: u64,
    horizon: u64,
    seed: u64,
) -> Result<TauStats> {
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    let taus: Vec<Option<u64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut s = RandomStream::new(seed, &[tag::TAU, model.m, r]);
            hitting_time(model, horizon, &mut s)
        })
        .collect();
    Ok(summarize_taus(model.m, &taus, horizon))
}

pub(crate) fn summarize_taus(m: u64, taus: &[Option<u64>], horizon: u64) -> TauStats {
    let n = taus.len() as f64;
    let values: Vec<f64> = taus.iter().map(|t| t.unwrap_or(horizon) as f64).collect();
    let mean = values.iter().sum::<f64>() / n;
    let var = if taus.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let censored = taus.iter().filter(|t| t.is_none()).count() as f64;
    let mut sorted: Vec<u64> = taus.iter().map(|t| t.unwrap_or(u64::MAX)).collect();
    sorted.sort_unstable();
    let tail = survival_grid(horizon)
        .into_iter()
        .map(|j| {
            let at_most = sorted.partition_point(|&t| t <= j);
            (j, (sorted.len() - at_most) as f64 / n)
        })
        .collect();
    TauStats {
        m,
        mean,
        stderr: (var / n).sqrt(),
        tail,
        horizon,
        censored_fraction: censored / n,
        replicas: taus.len() as u64,
    }
}

/// Least-squares fit of `log P(tau > j)` against `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Geometric-tail diagnostic. Uses grid points with `0 < P(tau > j) < 1`.
pub fn geometric_tail_diagnostic(stats: &TauStats) -> Result<TailFit> {
    let pts: Vec<(f64, f64)> = stats
        .tail
        .iter()
        .filter(|(_, p)| *p > 0.0 && *p < 1.0)
        .map(|&(j, p)| (j as f64, p.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientTailData(format!(
            "{} usable survival points, need at least 3",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(TailFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: pts.len(),
    })
}
