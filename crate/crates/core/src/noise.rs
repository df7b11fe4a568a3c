//! Noise laws for `xi`: sampling and exact moments.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

const MEAN_TOL: f64 = 1e-12;

/// One piece of a piecewise-uniform law on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformPiece {
    pub lo: f64,
    pub hi: f64,
    pub weight: f64,
}

/// Distribution of the innovation `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseLaw {
    StandardGaussian {
        dim: usize,
    },
    /// Uniform on `(lo, hi)`; must have mean zero.
    UniformInterval {
        lo: f64,
        hi: f64,
    },
    /// Independent uniforms on `(-h_i, h_i)`.
    UniformBox {
        half_widths: Vec<f64>,
    },
    /// Independent signs.
    RademacherProduct {
        dim: usize,
    },
    FiniteDiscrete {
        points: Vec<Vec<f64>>,
        probs: Vec<f64>,
    },
    /// Mixture of uniforms on the line; must have mean zero.
    PiecewiseUniform {
        pieces: Vec<UniformPiece>,
    },
}

/// `E U^k` for `U` uniform on `(lo, hi)`.
fn uniform_moment(lo: f64, hi: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kp = (k + 1) as i32;
    (hi.powi(kp) - lo.powi(kp)) / ((k + 1) as f64 * (hi - lo))
}

fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        crate::special::double_factorial(k.saturating_sub(1))
    }
}

fn binomial_row(k: u32) -> Vec<f64> {
    let mut row = vec![1.0];
    for n in 1..=k as usize {
        let mut next = vec![1.0; n + 1];
        for j in 1..n {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row
}

/// Raw moments `0..=k` of a sum of independent terms, given each term's moment vector.
fn convolve_moments(parts: &[Vec<f64>], k: u32) -> Vec<f64> {
    let mut acc = vec![0.0; k as usize + 1];
    acc[0] = 1.0;
    for part in parts {
        let mut next = vec![0.0; k as usize + 1];
        for (n, slot) in next.iter_mut().enumerate() {
            let binom = binomial_row(n as u32);
            *slot = (0..=n).map(|j| binom[j] * acc[j] * part[n - j]).sum();
        }
        acc = next;
    }
    acc
}

impl NoiseLaw {
    pub fn dim(&self) -> usize {
        match self {
            NoiseLaw::StandardGaussian { dim } | NoiseLaw::RademacherProduct { dim } => *dim,
            NoiseLaw::UniformInterval { .. } | NoiseLaw::PiecewiseUniform { .. } => 1,
            NoiseLaw::UniformBox { half_widths } => half_widths.len(),
            NoiseLaw::FiniteDiscrete { points, .. } => points.first().map_or(0, Vec::len),
        }
    }

    pub fn structural_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        match self {
            NoiseLaw::StandardGaussian { dim } | NoiseLaw::RademacherProduct { dim } => {
                if *dim == 0 {
                    errors.push("noise dimension must be positive".into());
                }
            }
            NoiseLaw::UniformInterval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    errors.push(format!("uniform interval ({lo}, {hi}) is empty"));
                } else if (lo + hi).abs() > MEAN_TOL * (hi - lo) {
                    errors.push(format!(
                        "uniform interval ({lo}, {hi}) has nonzero mean {}",
                        0.5 * (lo + hi)
                    ));
                }
            }
            NoiseLaw::UniformBox { half_widths } => {
                if half_widths.is_empty()
                    || half_widths.iter().any(|h| !(h.is_finite() && *h > 0.0))
                {
                    errors.push("uniform box half-widths must be positive".into());
                }
            }
            NoiseLaw::FiniteDiscrete { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    errors.push("finite-discrete noise needs one probability per point".into());
                } else {
                    let d = points[0].len();
                    if d == 0 || points.iter().any(|p| p.len() != d) {
                        errors
                            .push("finite-discrete points must share a positive dimension".into());
                    }
                    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                        errors.push("probabilities must lie in [0, 1]".into());
                    }
                    let total: f64 = probs.iter().sum();
                    if (total - 1.0).abs() > 1e-9 {
                        errors.push(format!("probabilities must sum to 1 (got {total})"));
                    }
                    if errors.is_empty() {
                        let mean = self.mean();
                        if mean.iter().any(|v| v.abs() > 1e-12) {
                            errors.push(format!("finite-discrete noise has nonzero mean {mean:?}"));
                        }
                    }
                }
            }
            NoiseLaw::PiecewiseUniform { pieces } => {
                if pieces.is_empty() {
                    errors.push("piecewise-uniform noise needs at least one piece".into());
                }
                if pieces
                    .iter()
                    .any(|p| !(p.lo < p.hi && p.lo.is_finite() && p.hi.is_finite()))
                {
                    errors.push("piecewise-uniform pieces must be nonempty intervals".into());
                }
                if pieces.iter().any(|p| !(0.0..=1.0).contains(&p.weight)) {
                    errors.push("piece weights must lie in [0, 1]".into());
                }
                let total: f64 = pieces.iter().map(|p| p.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    errors.push(format!("probabilities must sum to 1 (got {total})"));
                }
                if errors.is_empty() {
                    let mean = self.mean()[0];
                    if mean.abs() > 1e-12 {
                        errors.push(format!("piecewise-uniform noise has nonzero mean {mean}"));
                    }
                }
            }
        }
        errors
    }

    /// Exact mean vector (zero for every valid law).
    pub fn mean(&self) -> Vec<f64> {
        match self {
            NoiseLaw::UniformInterval { lo, hi } => vec![0.5 * (lo + hi)],
            NoiseLaw::FiniteDiscrete { points, probs } => {
                let d = self.dim();
                let mut mean = vec![0.0; d];
                for (x, p) in points.iter().zip(probs) {
                    for (slot, v) in mean.iter_mut().zip(x) {
                        *slot += p * v;
                    }
                }
                mean
            }
            NoiseLaw::PiecewiseUniform { pieces } => {
                vec![pieces.iter().map(|p| p.weight * 0.5 * (p.lo + p.hi)).sum()]
            }
            _ => vec![0.0; self.dim()],
        }
    }

    /// `Sigma = E xi xi'`.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let cov = match self {
            NoiseLaw::StandardGaussian { .. } | NoiseLaw::RademacherProduct { .. } => {
                DMatrix::identity(d, d)
            }
            NoiseLaw::UniformInterval { lo, hi } => {
                DMatrix::from_element(1, 1, uniform_moment(*lo, *hi, 2))
            }
            NoiseLaw::UniformBox { half_widths } => DMatrix::from_diagonal(
                &DVector::from_iterator(d, half_widths.iter().map(|h| h * h / 3.0)),
            ),
            NoiseLaw::FiniteDiscrete { points, probs } => {
                let mut cov = DMatrix::zeros(d, d);
                for (x, p) in points.iter().zip(probs) {
                    let v = DVector::from_column_slice(x);
                    cov += *p * &v * v.transpose();
                }
                cov
            }
            NoiseLaw::PiecewiseUniform { pieces } => DMatrix::from_element(
                1,
                1,
                pieces
                    .iter()
                    .map(|p| p.weight * uniform_moment(p.lo, p.hi, 2))
                    .sum(),
            ),
        };
        if d == 0 || nalgebra::Cholesky::new(cov.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(cov)
    }

    /// `E <u, xi>^k`, exact.
    pub fn directional_moment(&self, u: &[f64], k: u32) -> Result<f64> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.len(),
            });
        }
        if k == 0 {
            return Ok(1.0);
        }
        let value = match self {
            NoiseLaw::FiniteDiscrete { points, probs } => points
                .iter()
                .zip(probs)
                .map(|(x, p)| p * dot(u, x).powi(k as i32))
                .sum(),
            NoiseLaw::UniformInterval { lo, hi } => {
                u[0].powi(k as i32) * uniform_moment(*lo, *hi, k)
            }
            NoiseLaw::PiecewiseUniform { pieces } => {
                u[0].powi(k as i32)
                    * pieces
                        .iter()
                        .map(|p| p.weight * uniform_moment(p.lo, p.hi, k))
                        .sum::<f64>()
            }
            _ => {
                let parts: Vec<Vec<f64>> = u
                    .iter()
                    .enumerate()
                    .map(|(i, &ui)| {
                        (0..=k)
                            .map(|j| {
                                let base = match self {
                                    NoiseLaw::StandardGaussian { .. } => gaussian_moment(j),
                                    NoiseLaw::RademacherProduct { .. } => {
                                        if j % 2 == 0 {
                                            1.0
                                        } else {
                                            0.0
                                        }
                                    }
                                    NoiseLaw::UniformBox { half_widths } => {
                                        uniform_moment(-half_widths[i], half_widths[i], j)
                                    }
                                    _ => unreachable!("handled above"),
                                };
                                ui.powi(j as i32) * base
                            })
                            .collect()
                    })
                    .collect();
                convolve_moments(&parts, k)[k as usize]
            }
        };
        Ok(value)
    }

    /// `sup |xi|` in Euclidean norm, `None` for unbounded laws.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            NoiseLaw::StandardGaussian { .. } => None,
            NoiseLaw::UniformInterval { lo, hi } => Some(lo.abs().max(hi.abs())),
            NoiseLaw::UniformBox { half_widths } => {
                Some(half_widths.iter().map(|h| h * h).sum::<f64>().sqrt())
            }
            NoiseLaw::RademacherProduct { dim } => Some((*dim as f64).sqrt()),
            NoiseLaw::FiniteDiscrete { points, .. } => Some(
                points
                    .iter()
                    .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
                    .fold(0.0, f64::max),
            ),
            NoiseLaw::PiecewiseUniform { pieces } => Some(
                pieces
                    .iter()
                    .map(|p| p.lo.abs().max(p.hi.abs()))
                    .fold(0.0, f64::max),
            ),
        }
    }

    /// Convex hull `[lo, hi]` of the support for one-dimensional laws.
    pub fn support_interval(&self) -> Option<(f64, f64)> {
        match self {
            NoiseLaw::UniformInterval { lo, hi } => Some((*lo, *hi)),
            NoiseLaw::UniformBox { half_widths } if half_widths.len() == 1 => {
                Some((-half_widths[0], half_widths[0]))
            }
            NoiseLaw::RademacherProduct { dim: 1 } => Some((-1.0, 1.0)),
            NoiseLaw::FiniteDiscrete { points, .. } if self.dim() == 1 => Some(
                points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                        (lo.min(x[0]), hi.max(x[0]))
                    }),
            ),
            NoiseLaw::PiecewiseUniform { pieces } => Some(
                pieces
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p.lo), hi.max(p.hi))
                    }),
            ),
            _ => None,
        }
    }

    /// Whether the law has a Lebesgue density.
    pub fn is_continuous(&self) -> bool {
        !matches!(
            self,
            NoiseLaw::RademacherProduct { .. } | NoiseLaw::FiniteDiscrete { .. }
        )
    }

    /// Whether `xi` and `-xi` have the same law.
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            NoiseLaw::StandardGaussian { .. }
                | NoiseLaw::UniformInterval { .. }
                | NoiseLaw::UniformBox { .. }
                | NoiseLaw::RademacherProduct { .. }
        )
    }

    /// One draw for one-dimensional laws.
    #[inline]
    pub fn sample_scalar(&self, s: &mut RandomStream) -> f64 {
        match self {
            NoiseLaw::UniformInterval { lo, hi } => s.uniform_in(*lo, *hi),
            NoiseLaw::StandardGaussian { .. } => s.standard_normal(),
            NoiseLaw::RademacherProduct { .. } => s.sign(),
            NoiseLaw::UniformBox { half_widths } => s.uniform_in(-half_widths[0], half_widths[0]),
            NoiseLaw::FiniteDiscrete { points, probs } => points[pick(probs, s.uniform())][0],
            NoiseLaw::PiecewiseUniform { pieces } => {
                let u = s.uniform();
                let mut acc = 0.0;
                let piece = pieces
                    .iter()
                    .find(|p| {
                        acc += p.weight;
                        u < acc
                    })
                    .unwrap_or(&pieces[pieces.len() - 1]);
                s.uniform_in(piece.lo, piece.hi)
            }
        }
    }

    /// One draw written into `out` (length `d`).
    pub fn sample_into(&self, s: &mut RandomStream, out: &mut [f64]) {
        match self {
            NoiseLaw::StandardGaussian { .. } => {
                out.iter_mut().for_each(|v| *v = s.standard_normal())
            }
            NoiseLaw::RademacherProduct { .. } => out.iter_mut().for_each(|v| *v = s.sign()),
            NoiseLaw::UniformBox { half_widths } => {
                for (v, h) in out.iter_mut().zip(half_widths) {
                    *v = s.uniform_in(-h, *h);
                }
            }
            NoiseLaw::FiniteDiscrete { points, probs } => {
                out.copy_from_slice(&points[pick(probs, s.uniform())]);
            }
            NoiseLaw::UniformInterval { .. } | NoiseLaw::PiecewiseUniform { .. } => {
                out[0] = self.sample_scalar(s);
            }
        }
    }
}

fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `n` i.i.d. draws of `xi`.
pub fn sample_noise(law: &NoiseLaw, stream: &mut RandomStream, n: usize) -> Vec<Vec<f64>> {
    let d = law.dim();
    (0..n)
        .map(|_| {
            let mut x = vec![0.0; d];
            law.sample_into(stream, &mut x);
            x
        })
        .collect()
}

/// `Sigma = E xi xi'`.
pub fn noise_covariance(law: &NoiseLaw) -> Result<DMatrix<f64>> {
    law.covariance()
}

/// `E <u, xi>^k`.
pub fn noise_directional_moment(law: &NoiseLaw, u: &[f64], k: u32) -> Result<f64> {
    law.directional_moment(u, k)
}
