//! Simulation and analytic tools for autoregressive sequences with restarts.
//!
//! The restarted chain is `Y_{t+1} = alpha Y_t 1{Y_t not in gamma A} + beta xi`,
//! started at 0. Under heavy-traffic scaling its stationary law converges to
//! `B_1 * Z`, an atom at 0 plus a continuous part whose projections are signed
//! half-normal mixtures. This crate simulates the chains and evaluates that limit.

pub mod chain;
pub mod error;
pub mod limitlaw;
pub mod model;
pub mod moments;
pub mod noise;
pub mod quad;
pub mod rng;
pub mod scenarios;
pub mod special;
pub mod stats;
pub mod verify;

pub use chain::{
    estimate_tau_stats, geometric_tail_diagnostic, simulate_coupled, simulate_cycle, simulate_path,
    stationary_sample, stationary_sample_x, step_y, CoupledTrace, Cycle, States, StationaryMode,
    StationaryOptions, StationarySample, TailFit, TauStats,
};
pub use error::{Error, Result};
pub use limitlaw::{
    limit_cf, limit_pdf, make_limit_law, no_truncation_law, projection_law, sample_projection,
    LimitLaw, LimitLawParams, ProjectionLaw,
};
pub use model::{
    alpha_moments, schedule_value, validate_family, AlphaLaw, AssumptionCheck, ModelAtM,
    ModelFamily, RestartRegion, ScalarSchedule, ValidationVerdict,
};
pub use moments::{
    empirical_moments, empirical_moments_scalar, moment_inequality_check, moment_recursion,
    MomentInequality, MomentSource, MomentTable,
};
pub use noise::{noise_covariance, noise_directional_moment, sample_noise, NoiseLaw, UniformPiece};
pub use rng::RandomStream;
pub use scenarios::{
    gamma_search, non_hitting_counterexample, run_scenario, scenario_by_name, tau_divergence_probe,
    DivergenceProbe, GammaSearchOptions, GammaSearchReport, NonHittingReport, Prediction,
    ProbeVerdict, Scenario, SimulationReport,
};
pub use stats::{
    empirical_cf, ks_distance, ks_two_sample, mixture_cdf, Cdf, EcdfView, MixtureCdf, Normal,
};
pub use verify::{run_criterion, CriterionOutcome, CORE_CRITERIA};
