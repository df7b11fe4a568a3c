//! Special functions used by the limit law.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Dawson's integral `D(x) = exp(-x^2) * int_0^x exp(t^2) dt`.
///
/// For `|x| <= 10` the positive series `int_0^x exp(t^2) dt = sum x^(2n+1) / (n! (2n+1))`
/// is summed without cancellation and then damped by `exp(-x^2)`; beyond that the
/// asymptotic series `1/(2x) * sum (2n-1)!! / (2x^2)^n` is truncated at its smallest
/// term, which is below `1e-40` there. Absolute error is a few ulps throughout.
pub fn dawson(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let value = if ax <= 10.0 {
        dawson_series(ax)
    } else if ax.is_infinite() {
        0.0
    } else {
        dawson_asymptotic(ax)
    };
    value.copysign(x)
}

fn dawson_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut power = x; // x^(2n+1) / n!
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        power *= x2 / f64::from(n);
        let term = power / f64::from(2 * n + 1);
        sum += term;
        if term < sum * 1e-18 && f64::from(n) > x2 {
            break;
        }
    }
    (-x2).exp() * sum
}

fn dawson_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1u32;
    loop {
        let next = term * f64::from(2 * n - 1) * inv;
        if next >= term || next < 1e-18 * sum {
            if next < term {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        n += 1;
    }
    sum / (2.0 * x)
}

/// `exp(-T^2/2) * int_0^T exp(t^2/2) dt`, the damped integral that appears in the
/// characteristic function of a signed half-normal, written as `sqrt(2) * D(T/sqrt(2))`.
pub fn damped_gauss_integral(t: f64) -> f64 {
    std::f64::consts::SQRT_2 * dawson(t * FRAC_1_SQRT_2)
}

/// Coefficients `c_j` with `h^(k)(s) = exp(-s) * sum_j c_j s^(-1/2-j)` for `h(s) = exp(-s)/sqrt(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HDerivative {
    order: usize,
    coefficients: Vec<f64>,
}

impl HDerivative {
    pub fn new(order: usize) -> Self {
        let mut c = vec![1.0];
        for _ in 0..order {
            let mut next = vec![0.0; c.len() + 1];
            for (j, slot) in next.iter_mut().enumerate() {
                let keep = c.get(j).copied().unwrap_or(0.0);
                let lowered = if j >= 1 {
                    c[j - 1] * (j as f64 - 0.5)
                } else {
                    0.0
                };
                *slot = -keep - lowered;
            }
            c = next;
        }
        Self {
            order,
            coefficients: c,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluates `h^(k)(s)`; `s` must be positive.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s <= 0.0 {
            return Err(Error::Domain(format!("h^(k) needs s > 0, got {s}")));
        }
        Ok(self.eval_unchecked(s))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        let inv = 1.0 / s;
        let poly = self
            .coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * inv + c);
        (-s).exp() * poly / s.sqrt()
    }
}

/// The `k`-th derivative of `h(s) = exp(-s)/sqrt(s)`.
pub fn h_derivative(k: usize, s: f64) -> Result<f64> {
    HDerivative::new(k).eval(s)
}

/// `n!!` with `0!! = 1`.
pub fn double_factorial(n: u32) -> f64 {
    let mut acc = 1.0;
    let mut i = n;
    while i > 1 {
        acc *= f64::from(i);
        i -= 2;
    }
    acc
}

/// Volume of the unit ball in `R^d`: `pi^(d/2) / Gamma(d/2 + 1)`, via `kappa_d = 2 pi / d * kappa_(d-2)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let (mut kappa, start) = if d.is_multiple_of(2) {
        (1.0, 2)
    } else {
        (2.0, 3)
    };
    let mut k = start;
    while k <= d {
        kappa *= 2.0 * PI / k as f64;
        k += 2;
    }
    kappa
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    let tail = 0.5 * libm::erfc(x.abs() * FRAC_1_SQRT_2);
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// `erf(x)`.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `erfc(x)`.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
