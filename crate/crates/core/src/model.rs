//! The parametric model family indexed by `m`: coefficient law, scaling schedules and
//! restart region, plus the standing-assumption checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::noise::NoiseLaw;
use crate::rng::RandomStream;

const PROB_TOL: f64 = 1e-9;

/// Law of the autoregressive coefficient `alpha_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaLaw {
    /// `alpha_m = 1 - a/m`.
    HeavyTraffic { a: f64 },
    /// `alpha_m = alpha~ - shift/m` with `alpha~` on two points.
    TwoPointShifted {
        values: Vec<f64>,
        probs: Vec<f64>,
        shift: f64,
    },
    /// `alpha_m` does not depend on `m`.
    FiniteDiscrete { values: Vec<f64>, probs: Vec<f64> },
}

fn check_probs(values: &[f64], probs: &[f64], errors: &mut Vec<String>) {
    if values.is_empty() {
        errors.push("alpha law needs at least one support point".into());
    }
    if values.len() != probs.len() {
        errors.push(format!(
            "alpha law has {} values but {} probabilities",
            values.len(),
            probs.len()
        ));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        errors.push("probabilities must lie in [0, 1]".into());
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        errors.push(format!("probabilities must sum to 1 (got {total})"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        errors.push("alpha support points must be finite".into());
    }
}

impl AlphaLaw {
    /// Structural problems independent of `m`.
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        match self {
            AlphaLaw::HeavyTraffic { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    errors.push(format!("heavy-traffic drift a must be positive, got {a}"));
                }
            }
            AlphaLaw::TwoPointShifted {
                values,
                probs,
                shift,
            } => {
                if values.len() != 2 {
                    errors.push(format!(
                        "two-point alpha law needs exactly 2 values, got {}",
                        values.len()
                    ));
                }
                check_probs(values, probs, &mut errors);
                if values.iter().any(|v| *v <= 0.0) {
                    errors.push("alpha support points must be positive".into());
                }
                if !shift.is_finite() {
                    errors.push("shift must be finite".into());
                }
            }
            AlphaLaw::FiniteDiscrete { values, probs } => {
                check_probs(values, probs, &mut errors);
                if values.iter().any(|v| *v <= 0.0) {
                    errors.push("alpha support points must be positive".into());
                }
            }
        }
        errors
    }

    /// Support points and probabilities of `alpha_m`.
    pub fn support(&self, m: u64) -> (Vec<f64>, Vec<f64>) {
        let mf = m as f64;
        match self {
            AlphaLaw::HeavyTraffic { a } => (vec![1.0 - a / mf], vec![1.0]),
            AlphaLaw::TwoPointShifted {
                values,
                probs,
                shift,
            } => (
                values.iter().map(|v| v - shift / mf).collect(),
                probs.clone(),
            ),
            AlphaLaw::FiniteDiscrete { values, probs } => (values.clone(), probs.clone()),
        }
    }

    /// A sampler for `alpha_m` at a fixed `m`.
    pub fn sampler(&self, m: u64) -> AlphaSampler {
        let (values, probs) = self.support(m);
        AlphaSampler::from_support(values, &probs)
    }

    /// A sampler for the pointwise limit of `alpha_m` as `m -> inf`.
    pub fn limit_sampler(&self) -> AlphaSampler {
        match self {
            AlphaLaw::HeavyTraffic { .. } => AlphaSampler::Constant(1.0),
            AlphaLaw::TwoPointShifted { values, probs, .. }
            | AlphaLaw::FiniteDiscrete { values, probs } => {
                AlphaSampler::from_support(values.clone(), probs)
            }
        }
    }
}

impl AlphaSampler {
    fn from_support(values: Vec<f64>, probs: &[f64]) -> Self {
        if values.len() == 1 {
            return AlphaSampler::Constant(values[0]);
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        AlphaSampler::Discrete { values, cumulative }
    }
}

/// Exact `(E alpha_m, E alpha_m^2)`.
pub fn alpha_moments(law: &AlphaLaw, m: u64) -> (f64, f64) {
    let (values, probs) = law.support(m);
    values
        .iter()
        .zip(&probs)
        .fold((0.0, 0.0), |(m1, m2), (v, p)| (m1 + p * v, m2 + p * v * v))
}

/// Draws `alpha_m` for a fixed `m`. The constant case consumes no randomness.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSampler {
    Constant(f64),
    Discrete {
        values: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

impl AlphaSampler {
    #[inline]
    pub fn draw(&self, stream: &mut RandomStream) -> f64 {
        match self {
            AlphaSampler::Constant(v) => *v,
            AlphaSampler::Discrete { values, cumulative } => {
                let u = stream.uniform();
                let idx = cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(values.len() - 1);
                values[idx]
            }
        }
    }
}

/// A positive sequence indexed by `m`, used for `beta_m` and `gamma_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarSchedule {
    /// `1/sqrt(m)`.
    InvSqrtM,
    /// `c/sqrt(m)`.
    ScaledInvSqrtM { c: f64 },
    /// `c * m^exponent`.
    Power { c: f64, exponent: f64 },
    /// Explicit values per `m`.
    Table { values: BTreeMap<u64, f64> },
}

impl ScalarSchedule {
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        match self {
            ScalarSchedule::InvSqrtM => {}
            ScalarSchedule::ScaledInvSqrtM { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    errors.push(format!("schedule constant must be positive, got {c}"));
                }
            }
            ScalarSchedule::Power { c, exponent } => {
                if !(c.is_finite() && *c > 0.0) {
                    errors.push(format!("schedule constant must be positive, got {c}"));
                }
                if !exponent.is_finite() {
                    errors.push("schedule exponent must be finite".into());
                }
            }
            ScalarSchedule::Table { values } => {
                if values.values().any(|v| !(v.is_finite() && *v > 0.0)) {
                    errors.push("schedule table values must be positive".into());
                }
                if values.contains_key(&0) {
                    errors.push("schedule table indices start at m = 1".into());
                }
            }
        }
        errors
    }

    /// `(c, exponent)` with value `c * m^exponent`, when the schedule is a power law.
    pub fn power_form(&self) -> Option<(f64, f64)> {
        match self {
            ScalarSchedule::InvSqrtM => Some((1.0, -0.5)),
            ScalarSchedule::ScaledInvSqrtM { c } => Some((*c, -0.5)),
            ScalarSchedule::Power { c, exponent } => Some((*c, *exponent)),
            ScalarSchedule::Table { .. } => None,
        }
    }

    /// Whether `m * value(m)^2 -> 1` is guaranteed by the kind.
    pub fn is_unit_heavy_traffic(&self) -> bool {
        matches!(self, ScalarSchedule::InvSqrtM)
    }
}

/// `beta_m` or `gamma_m` at `m`.
pub fn schedule_value(s: &ScalarSchedule, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let mf = m as f64;
    match s {
        ScalarSchedule::InvSqrtM => Ok(1.0 / mf.sqrt()),
        ScalarSchedule::ScaledInvSqrtM { c } => Ok(c / mf.sqrt()),
        ScalarSchedule::Power { c, exponent } => Ok(c * mf.powf(*exponent)),
        ScalarSchedule::Table { values } => {
            values.get(&m).copied().ok_or(Error::ScheduleUndefined(m))
        }
    }
}

/// Limit of `gamma_m / beta_m` as `m -> inf`, for power-law schedules.
/// `Ok(None)` means the ratio diverges.
pub fn schedule_ratio_limit(gamma: &ScalarSchedule, beta: &ScalarSchedule) -> Result<Option<f64>> {
    let (Some((cg, eg)), Some((cb, eb))) = (gamma.power_form(), beta.power_form()) else {
        return Err(Error::Precondition(
            "ratio limit needs power-law schedules; tables have no limit".into(),
        ));
    };
    const EPS: f64 = 1e-12;
    if (eg - eb).abs() <= EPS {
        Ok(Some(cg / cb))
    } else if eg < eb {
        Ok(Some(0.0))
    } else {
        Ok(None)
    }
}

/// The restart set `A`, treated as an open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RestartRegion {
    /// Open ball of the given radius around 0 in `R^dim`.
    Ball { dim: usize, radius: f64 },
    /// Open interval `(lo, hi)` in `R`.
    Interval { lo: f64, hi: f64 },
    /// Open box `prod (-h_i, h_i)`.
    CenteredBox { half_widths: Vec<f64> },
}

impl RestartRegion {
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        match self {
            RestartRegion::Ball { dim, radius } => {
                if *dim == 0 {
                    errors.push("ball dimension must be positive".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    errors.push(format!("ball radius must be positive, got {radius}"));
                }
            }
            RestartRegion::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo < 0.0 && *hi > 0.0) {
                    errors.push(format!(
                        "interval ({lo}, {hi}) must contain 0 in its interior"
                    ));
                }
            }
            RestartRegion::CenteredBox { half_widths } => {
                if half_widths.is_empty() {
                    errors.push("box needs at least one half-width".into());
                }
                if half_widths.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                    errors.push("box half-widths must be positive".into());
                }
            }
        }
        errors
    }

    pub fn dim(&self) -> usize {
        match self {
            RestartRegion::Ball { dim, .. } => *dim,
            RestartRegion::Interval { .. } => 1,
            RestartRegion::CenteredBox { half_widths } => half_widths.len(),
        }
    }

    /// Largest `r` with `B(0, r) ⊆ A`.
    pub fn inner_radius(&self) -> f64 {
        match self {
            RestartRegion::Ball { radius, .. } => *radius,
            RestartRegion::Interval { lo, hi } => (-lo).min(*hi),
            RestartRegion::CenteredBox { half_widths } => {
                half_widths.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Smallest `r` with `A ⊆ B(0, r)`.
    pub fn outer_radius(&self) -> f64 {
        match self {
            RestartRegion::Ball { radius, .. } => *radius,
            RestartRegion::Interval { lo, hi } => (-lo).max(*hi),
            RestartRegion::CenteredBox { half_widths } => {
                half_widths.iter().map(|h| h * h).sum::<f64>().sqrt()
            }
        }
    }

    /// Whether `x ∈ A`.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_scaled(x, 1.0)
    }

    /// Whether `x ∈ gamma * A`.
    #[inline]
    pub fn contains_scaled(&self, x: &[f64], gamma: f64) -> bool {
        match self {
            RestartRegion::Ball { radius, .. } => {
                let r = gamma * radius;
                x.iter().map(|v| v * v).sum::<f64>() < r * r
            }
            RestartRegion::Interval { lo, hi } => gamma * lo < x[0] && x[0] < gamma * hi,
            RestartRegion::CenteredBox { half_widths } => {
                x.iter().zip(half_widths).all(|(v, h)| v.abs() < gamma * h)
            }
        }
    }

    /// Bounds `(lo, hi)` of `gamma * A` for one-dimensional regions.
    pub fn interval_bounds(&self, gamma: f64) -> Option<(f64, f64)> {
        match self {
            RestartRegion::Interval { lo, hi } => Some((gamma * lo, gamma * hi)),
            RestartRegion::Ball { dim: 1, radius } => Some((-gamma * radius, gamma * radius)),
            RestartRegion::CenteredBox { half_widths } if half_widths.len() == 1 => {
                Some((-gamma * half_widths[0], gamma * half_widths[0]))
            }
            _ => None,
        }
    }
}

/// The full family `(d, a, alpha, beta, gamma, xi, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFamily {
    pub dim: usize,
    pub a: f64,
    pub alpha: AlphaLaw,
    pub beta: ScalarSchedule,
    pub gamma: ScalarSchedule,
    pub noise: NoiseLaw,
    pub region: RestartRegion,
}

/// Everything the simulator needs at one value of `m`.
#[derive(Debug, Clone)]
pub struct ModelAtM {
    pub m: u64,
    pub dim: usize,
    pub alpha: AlphaSampler,
    pub beta: f64,
    pub gamma: f64,
    pub noise: NoiseLaw,
    pub region: RestartRegion,
}

impl ModelFamily {
    /// Errors that make the family unusable at any `m`.
    pub fn structural_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.dim == 0 {
            errors.push("dimension must be positive".into());
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            errors.push(format!("drift a must be positive, got {}", self.a));
        }
        errors.extend(self.alpha.structural_errors());
        errors.extend(
            self.beta
                .structural_errors()
                .into_iter()
                .map(|e| format!("beta: {e}")),
        );
        errors.extend(
            self.gamma
                .structural_errors()
                .into_iter()
                .map(|e| format!("gamma: {e}")),
        );
        errors.extend(self.noise.structural_errors());
        errors.extend(self.region.structural_errors());
        if self.noise.dim() != self.dim {
            errors.push(format!(
                "noise dimension {} differs from d = {}",
                self.noise.dim(),
                self.dim
            ));
        }
        if self.region.dim() != self.dim {
            errors.push(format!(
                "region dimension {} differs from d = {}",
                self.region.dim(),
                self.dim
            ));
        }
        errors
    }

    /// Instantiates the family at `m`. Fails on structural errors or undefined schedules.
    pub fn at(&self, m: u64) -> Result<ModelAtM> {
        let errors = self.structural_errors();
        if !errors.is_empty() {
            return Err(invalid(errors.join("; ")));
        }
        Ok(ModelAtM {
            m,
            dim: self.dim,
            alpha: self.alpha.sampler(m),
            beta: schedule_value(&self.beta, m)?,
            gamma: schedule_value(&self.gamma, m)?,
            noise: self.noise.clone(),
            region: self.region.clone(),
        })
    }

    /// Same family with a different `gamma` schedule.
    pub fn with_gamma(&self, gamma: ScalarSchedule) -> Self {
        Self {
            gamma,
            ..self.clone()
        }
    }
}

/// One standing assumption and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

/// Outcome of [`validate_family`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub m: u64,
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationVerdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks the standing assumptions at `m`. Never fails; problems are listed in the verdict.
pub fn validate_family(f: &ModelFamily, m: u64) -> ValidationVerdict {
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, witness: String| {
        checks.push(AssumptionCheck {
            name: name.into(),
            passed,
            witness,
        })
    };

    let structural = f.structural_errors();
    push(
        "well-formed",
        structural.is_empty(),
        if structural.is_empty() {
            "ok".into()
        } else {
            structural.join("; ")
        },
    );
    push("m-positive", m >= 1, format!("m = {m}"));
    if m == 0 {
        return ValidationVerdict { m, checks };
    }

    let (values, probs) = f.alpha.support(m);
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    push(
        "alpha-support-positive",
        min_value > 0.0,
        format!("min support point of alpha_m = {min_value}"),
    );
    let (mean, second) = alpha_moments(&f.alpha, m);
    push(
        "alpha-mean-below-one",
        mean < 1.0,
        format!("E alpha_m = {mean}, E alpha_m^2 = {second}"),
    );
    let d = f.dim as f64;
    let lower = d / (d + 1.0);
    let mass: f64 = values
        .iter()
        .zip(&probs)
        .filter(|(v, _)| **v >= lower && **v < 1.0)
        .map(|(_, p)| p)
        .sum();
    push(
        "alpha-mass-near-one",
        mass > 0.0,
        format!("P(alpha_m in [{lower}, 1)) = {mass}"),
    );

    for (label, schedule) in [("beta", &f.beta), ("gamma", &f.gamma)] {
        match schedule_value(schedule, m) {
            Ok(v) => push(
                &format!("{label}-positive"),
                v > 0.0 && v.is_finite(),
                format!("{label}_m = {v}"),
            ),
            Err(e) => push(&format!("{label}-positive"), false, e.to_string()),
        }
    }

    push(
        "noise-dimension",
        f.noise.dim() == f.dim,
        format!("noise dim {} vs d = {}", f.noise.dim(), f.dim),
    );
    push(
        "region-dimension",
        f.region.dim() == f.dim,
        format!("region dim {} vs d = {}", f.region.dim(), f.dim),
    );
    let noise_errors = f.noise.structural_errors();
    let mean_vec = f.noise.mean();
    let mean_norm = mean_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
    push(
        "noise-mean-zero",
        noise_errors.is_empty() && mean_norm <= 1e-12,
        format!("|E xi| = {mean_norm:e}"),
    );
    match f.noise.covariance() {
        Ok(cov) => {
            let full_rank = nalgebra::Cholesky::new(cov.clone()).is_some();
            push(
                "covariance-full-rank",
                full_rank,
                format!("Sigma = {:?}", cov.as_slice()),
            );
        }
        Err(e) => push("covariance-full-rank", false, e.to_string()),
    }
    let (r_in, r_out) = (f.region.inner_radius(), f.region.outer_radius());
    push(
        "region-sandwich",
        f.region.structural_errors().is_empty() && r_in > 0.0 && r_in <= r_out && r_out.is_finite(),
        format!("inner radius {r_in}, outer radius {r_out}"),
    );
    ValidationVerdict { m, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heavy(a: f64) -> ModelFamily {
        ModelFamily {
            dim: 1,
            a,
            alpha: AlphaLaw::HeavyTraffic { a },
            beta: ScalarSchedule::InvSqrtM,
            gamma: ScalarSchedule::InvSqrtM,
            noise: NoiseLaw::UniformInterval { lo: -1.0, hi: 1.0 },
            region: RestartRegion::Interval { lo: -0.5, hi: 0.5 },
        }
    }

    fn example_two() -> AlphaLaw {
        AlphaLaw::TwoPointShifted {
            values: vec![1.25, 0.75],
            probs: vec![0.5, 0.5],
            shift: 0.5,
        }
    }

    #[test]
    fn heavy_traffic_verdicts() {
        let v = validate_family(&heavy(1.0), 10);
        assert!(v.passed(), "{v:?}");
        let v = validate_family(&heavy(2.0), 1);
        assert!(!v.passed());
        let failed: Vec<_> = v.failures().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"alpha-support-positive"));
    }

    #[test]
    fn two_point_shifted_verdict() {
        let f = ModelFamily {
            a: 0.5,
            alpha: example_two(),
            ..heavy(0.5)
        };
        let v = validate_family(&f, 4);
        assert!(v.passed(), "{v:?}");
        let (mean, _) = alpha_moments(&f.alpha, 4);
        assert!((mean - 0.875).abs() < 1e-15);
        let (values, _) = f.alpha.support(4);
        assert!(values.contains(&0.625));
    }

    #[test]
    fn moments_examples() {
        let (m1, m2) = alpha_moments(&AlphaLaw::HeavyTraffic { a: 1.0 }, 100);
        assert!((m1 - 0.99).abs() < 1e-15 && (m2 - 0.9801).abs() < 1e-15);
        // Support {1, 1/2} at m = 2.
        let (m1, m2) = alpha_moments(&example_two(), 2);
        assert!((m1 - 0.75).abs() < 1e-15 && (m2 - 0.625).abs() < 1e-15);
        let fd = AlphaLaw::FiniteDiscrete {
            values: vec![0.5, 1.0],
            probs: vec![0.5, 0.5],
        };
        assert_eq!(alpha_moments(&fd, 7), (0.75, 0.625));
    }

    #[test]
    fn heavy_traffic_rates() {
        let a = 1.7;
        let law = AlphaLaw::HeavyTraffic { a };
        for m in [10u64, 50, 1000, 100_000] {
            let (m1, m2) = alpha_moments(&law, m);
            let mf = m as f64;
            assert!((mf * (1.0 - m1) - a).abs() < a / mf);
            assert!((mf * (1.0 - m2) - 2.0 * a).abs() < 2.0 * a * a / mf + 1e-9);
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(schedule_value(&ScalarSchedule::InvSqrtM, 4).unwrap(), 0.5);
        assert_eq!(
            schedule_value(&ScalarSchedule::ScaledInvSqrtM { c: 0.75 }, 4).unwrap(),
            0.375
        );
        let p = ScalarSchedule::Power {
            c: 1.0,
            exponent: -1.0,
        };
        assert!((schedule_value(&p, 10).unwrap() - 0.1).abs() < 1e-16);
        let t = ScalarSchedule::Table {
            values: BTreeMap::from([(3, 0.2)]),
        };
        assert_eq!(schedule_value(&t, 3).unwrap(), 0.2);
        assert_eq!(schedule_value(&t, 4), Err(Error::ScheduleUndefined(4)));
        assert_eq!(schedule_value(&p, 10), schedule_value(&p, 10));
    }

    #[test]
    fn ratio_limits() {
        let inv = ScalarSchedule::InvSqrtM;
        assert_eq!(schedule_ratio_limit(&inv, &inv).unwrap(), Some(1.0));
        let faster = ScalarSchedule::Power {
            c: 1.0,
            exponent: -1.0,
        };
        assert_eq!(schedule_ratio_limit(&faster, &inv).unwrap(), Some(0.0));
        assert_eq!(schedule_ratio_limit(&inv, &faster).unwrap(), None);
    }

    #[test]
    fn region_radii_and_membership() {
        let r = RestartRegion::Interval { lo: -1.0, hi: 0.5 };
        assert_eq!((r.inner_radius(), r.outer_radius()), (0.5, 1.0));
        assert!(!r.contains(&[0.5]));
        assert!(r.contains(&[0.4999]));
        assert!(r.contains_scaled(&[-1.9], 2.0));
        let b = RestartRegion::CenteredBox {
            half_widths: vec![3.0, 4.0],
        };
        assert_eq!((b.inner_radius(), b.outer_radius()), (3.0, 5.0));
        let ball = RestartRegion::Ball {
            dim: 2,
            radius: 1.0,
        };
        assert!(!ball.contains(&[1.0, 0.0]));
        assert!(ball.contains(&[0.6, 0.6]));
    }

    #[test]
    fn alpha_sampler_frequencies() {
        let s = example_two().sampler(1000);
        let mut stream = RandomStream::new(3, &[0]);
        let n = 100_000;
        let high = (0..n).filter(|_| s.draw(&mut stream) > 1.0).count();
        assert!((high as f64 / n as f64 - 0.5).abs() < 0.01);
        assert_eq!(
            AlphaLaw::HeavyTraffic { a: 1.0 }.sampler(10),
            AlphaSampler::Constant(0.9)
        );
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let law = AlphaLaw::TwoPointShifted {
            values: vec![1.25, 0.75],
            probs: vec![0.5, 0.4],
            shift: 0.5,
        };
        let errors = law.structural_errors();
        assert!(errors
            .iter()
            .any(|e| e.contains("probabilities must sum to 1")));
    }

    #[test]
    fn json_round_trip() {
        let f = heavy(1.0);
        let text = serde_json::to_string(&f).unwrap();
        let back: ModelFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
        let bad = text.replace("\"dim\":1", "\"dim\":1,\"extra\":0");
        assert!(serde_json::from_str::<ModelFamily>(&bad).is_err());
    }
}
