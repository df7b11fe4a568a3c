//! Limiting moments of projections, the first-versus-second moment inequality,
//! and empirical moment tables with jackknife errors.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::chain::States;
use crate::error::{invalid, Error, Result};
use crate::limitlaw::LimitLaw;

/// Default highest order.
pub const DEFAULT_MAX_ORDER: usize = 12;

/// Blocks used by the jackknife.
pub const JACKKNIFE_BLOCKS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MomentSource {
    AnalyticRecursion,
    Empirical { n: usize },
}

/// Moments `mu_0, ..., mu_K` of `<u, Y>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub direction: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-order standard errors (empirical tables only).
    pub stderr: Option<Vec<f64>>,
    pub source: MomentSource,
}

impl MomentTable {
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }
}

/// Limiting moments from `mu_k = (k - 1) s mu_(k-2)`, `s = u' Sigma u / (2a)`,
/// seeded with `mu_1 = <u, mu>` and `mu_2 = p s`.
pub fn moment_recursion(law: &LimitLaw, u: &[f64], max_order: usize) -> Result<MomentTable> {
    if max_order < 2 {
        return Err(invalid("moment recursion needs K >= 2"));
    }
    if u.len() != law.dim() {
        return Err(Error::DimensionMismatch {
            expected: law.dim(),
            got: u.len(),
        });
    }
    let sigma = law.sigma();
    let quad: f64 = (0..u.len())
        .flat_map(|i| (0..u.len()).map(move |j| (i, j)))
        .map(|(i, j)| u[i] * sigma[(i, j)] * u[j])
        .sum();
    let s = quad / (2.0 * law.a());
    let mut values = vec![
        1.0,
        law.mu().iter().zip(u).map(|(m, v)| m * v).sum(),
        law.p() * s,
    ];
    for k in 3..=max_order {
        values.push((k as f64 - 1.0) * s * values[k - 2]);
    }
    Ok(MomentTable {
        direction: u.to_vec(),
        values,
        stderr: None,
        source: MomentSource::AnalyticRecursion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentInequality {
    /// `|mu_1| - sqrt(2) / sqrt(pi s) * mu_2`.
    pub slack: f64,
    pub passed: bool,
}

/// Checks `|E Z| <= sqrt(2) / (sqrt(pi) sqrt(s)) E Z^2`.
///
/// `passed` allows a relative rounding margin of `1e-12`, the same margin the
/// limit-law constructor grants the equivalent feasibility bound.
pub fn moment_inequality_check(mu1: f64, mu2: f64, s: f64) -> Result<MomentInequality> {
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid(format!("s must be positive, got {s}")));
    }
    if mu2 < 0.0 {
        return Err(invalid(format!(
            "second moment must be nonnegative, got {mu2}"
        )));
    }
    let bound = SQRT_2 / (PI * s).sqrt() * mu2;
    let slack = mu1.abs() - bound;
    Ok(MomentInequality {
        slack,
        passed: slack <= 1e-12 * bound.max(mu1.abs()),
    })
}

/// Sample moments of `<u, x>` for orders `0..=max_order` with jackknife standard errors
/// over [`JACKKNIFE_BLOCKS`] contiguous blocks.
pub fn empirical_moments(samples: &States, u: &[f64], max_order: usize) -> Result<MomentTable> {
    if u.len() != samples.dim {
        return Err(Error::DimensionMismatch {
            expected: samples.dim,
            got: u.len(),
        });
    }
    let projected = samples.project(u);
    empirical_moments_scalar(&projected, u, max_order)
}

/// [`empirical_moments`] for already projected values.
pub fn empirical_moments_scalar(xs: &[f64], u: &[f64], max_order: usize) -> Result<MomentTable> {
    let n = xs.len();
    if n < 2 {
        return Err(invalid("empirical moments need at least 2 samples"));
    }
    let blocks = JACKKNIFE_BLOCKS.min(n);
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * n / blocks).collect();
    let orders = max_order + 1;

    let mut means = vec![0.0; orders];
    let mut block_sums = vec![vec![0.0; orders]; blocks];
    for (b, w) in bounds.windows(2).enumerate() {
        for (i, &x) in xs[w[0]..w[1]].iter().enumerate() {
            let count = (w[0] + i + 1) as f64;
            let mut power = 1.0;
            for k in 0..orders {
                means[k] += (power - means[k]) / count;
                block_sums[b][k] += power;
                power *= x;
            }
        }
    }

    let nf = n as f64;
    let bf = blocks as f64;
    let stderr = (0..orders)
        .map(|k| {
            let total: f64 = block_sums.iter().map(|s| s[k]).sum();
            let loo: Vec<f64> = bounds
                .windows(2)
                .zip(&block_sums)
                .map(|(w, s)| (total - s[k]) / (nf - (w[1] - w[0]) as f64))
                .collect();
            let mean = loo.iter().sum::<f64>() / bf;
            ((bf - 1.0) / bf * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
        })
        .collect();

    Ok(MomentTable {
        direction: u.to_vec(),
        values: means,
        stderr: Some(stderr),
        source: MomentSource::Empirical { n },
    })
}
