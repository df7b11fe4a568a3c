//! The limiting law `Y = B_1 * Z`: characteristic function, density of `Z`,
//! one-dimensional projections and the no-restart Gaussian limit.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};
use crate::rng::RandomStream;
use crate::special::{damped_gauss_integral, double_factorial, unit_ball_volume, HDerivative};

/// Slack allowed on the feasibility ratio before a law is rejected.
const FEASIBILITY_TOL: f64 = 1e-12;

/// Plain parameters of a limit law, as read from or written to configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitLawParams {
    pub a: f64,
    /// Row-major `d x d` matrix.
    pub sigma: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub p: f64,
}

/// The limit law with parameters `(a, Sigma, mu, p)`.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    dim: usize,
    a: f64,
    sigma: DMatrix<f64>,
    mu: DVector<f64>,
    p: f64,
    chol: Cholesky<f64, Dyn>,
    /// `Sigma^-1 mu`.
    w: DVector<f64>,
    sqrt_det: f64,
    ratio: f64,
}

impl PartialEq for LimitLaw {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.sigma == other.sigma && self.mu == other.mu && self.p == other.p
    }
}

/// Builds a law after checking `pi a mu' Sigma^-1 mu <= p^2`.
pub fn make_limit_law(a: f64, sigma: DMatrix<f64>, mu: Vec<f64>, p: f64) -> Result<LimitLaw> {
    let d = sigma.nrows();
    if d == 0 || sigma.ncols() != d {
        return Err(invalid(format!(
            "Sigma must be a nonempty square matrix, got {}x{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if mu.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: mu.len(),
        });
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(invalid(format!("a must be positive, got {a}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    if sigma.iter().any(|v| !v.is_finite()) || mu.iter().any(|v| !v.is_finite()) {
        return Err(invalid("Sigma and mu must be finite"));
    }
    let scale = sigma.amax().max(f64::MIN_POSITIVE);
    if (&sigma - sigma.transpose()).amax() > 1e-12 * scale {
        return Err(invalid("Sigma must be symmetric"));
    }
    let chol = Cholesky::new(sigma.clone()).ok_or(Error::NotPositiveDefinite)?;
    let mu = DVector::from_vec(mu);
    let w = chol.solve(&mu);
    let quad = mu.dot(&w).max(0.0);
    let sqrt_det = chol.l().diagonal().iter().product::<f64>();
    let root = (PI * a * quad).sqrt();
    let ratio = if p > 0.0 {
        root / p
    } else if quad == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    if ratio > 1.0 + FEASIBILITY_TOL {
        return Err(Error::Infeasible {
            ratio,
            witness: w.iter().copied().collect(),
        });
    }
    Ok(LimitLaw {
        dim: d,
        a,
        sigma,
        mu,
        p,
        chol,
        w,
        sqrt_det,
        ratio,
    })
}

/// `N(0, Sigma / (2a))`, the limit without restarts.
pub fn no_truncation_law(a: f64, sigma: DMatrix<f64>) -> Result<LimitLaw> {
    let d = sigma.nrows();
    make_limit_law(a, sigma, vec![0.0; d], 1.0)
}

impl LimitLaw {
    pub fn from_params(params: &LimitLawParams) -> Result<Self> {
        let d = params.sigma.len();
        if params.sigma.iter().any(|row| row.len() != d) {
            return Err(invalid("Sigma must be square"));
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| params.sigma[i][j]);
        make_limit_law(params.a, sigma, params.mu.clone(), params.p)
    }

    pub fn params(&self) -> LimitLawParams {
        LimitLawParams {
            a: self.a,
            sigma: (0..self.dim)
                .map(|i| (0..self.dim).map(|j| self.sigma[(i, j)]).collect())
                .collect(),
            mu: self.mu.iter().copied().collect(),
            p: self.p,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mu(&self) -> &[f64] {
        self.mu.as_slice()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `sqrt(pi a mu' Sigma^-1 mu) / p`; at most 1 for every constructed law.
    pub fn feasibility_ratio(&self) -> f64 {
        self.ratio
    }

    /// Covariance `Sigma / (2a)` of the Gaussian that `Z` reduces to when `mu = 0`.
    pub fn gaussian_covariance(&self) -> DMatrix<f64> {
        &self.sigma / (2.0 * self.a)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn quad_form(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        (v.transpose() * &self.sigma * &v)[(0, 0)]
    }

    fn inv_quad_form(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&self.chol.solve(&v)).max(0.0)
    }

    /// `phi_Y(u) = E exp(i <u, Y>)`.
    pub fn cf(&self, u: &[f64]) -> Result<Complex64> {
        self.check_dim(u)?;
        let q = self.quad_form(u);
        if q <= 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let t = (q / (2.0 * self.a)).sqrt();
        let mu_u: f64 = self.mu.iter().zip(u).map(|(m, v)| m * v).sum();
        let re = (1.0 - self.p) + self.p * (-0.5 * t * t).exp();
        let im = (2.0 * self.a).sqrt() * mu_u / q.sqrt() * damped_gauss_integral(t);
        Ok(Complex64::new(re, im))
    }

    /// Density of the continuous part `Z` at `x`.
    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        if self.p == 0.0 {
            return Err(Error::NoDensity);
        }
        let d = self.dim as f64;
        let q = self.inv_quad_form(x);
        let gauss = (self.a / PI).powf(0.5 * d) / self.sqrt_det * (-self.a * q).exp();
        Ok(gauss + self.correction(x, q)?)
    }

    /// The odd part of the density, which vanishes when `mu = 0`.
    fn correction(&self, x: &[f64], q: f64) -> Result<f64> {
        let wx: f64 = self.w.iter().zip(x).map(|(w, v)| w * v).sum();
        if wx == 0.0 || q <= 0.0 {
            return Ok(0.0);
        }
        let d = self.dim;
        let a = self.a;
        if d % 2 == 1 {
            let k = (d - 1) / 2;
            let coef = (-2.0f64).powi(k as i32) * a.powf((d as f64 + 2.0) / 2.0)
                / (self.sqrt_det
                    * unit_ball_volume(d - 1)
                    * double_factorial((d - 1) as u32)
                    * self.p);
            let h = HDerivative::new(k).eval(a * q)?;
            Ok(coef * wx * h)
        } else {
            let k = d / 2;
            let coef = (-2.0f64).powi(k as i32) * a.powf((d as f64 + 3.0) / 2.0)
                / (self.sqrt_det * unit_ball_volume(d) * double_factorial(d as u32) * self.p);
            Ok(coef * wx * even_line_integral(k, a, q)?)
        }
    }

    /// Law of `<v, Y>`.
    pub fn projection(&self, v: &[f64]) -> Result<ProjectionLaw> {
        self.check_dim(v)?;
        let q = self.quad_form(v);
        if q <= 0.0 {
            return Err(invalid("projection direction must be nonzero"));
        }
        let scale = (q / (2.0 * self.a)).sqrt();
        let prob_plus = if self.p > 0.0 {
            let mu_v: f64 = self.mu.iter().zip(v).map(|(m, x)| m * x).sum();
            (0.5 + (PI * self.a).sqrt() * mu_v / (2.0 * self.p * q.sqrt())).clamp(0.0, 1.0)
        } else {
            0.5
        };
        Ok(ProjectionLaw {
            scale,
            prob_plus,
            prob_minus: 1.0 - prob_plus,
            atom: 1.0 - self.p,
        })
    }
}

/// `int_R h^(k)(a (q + z^2)) dz` for `q > 0`.
///
/// With `z = sqrt(q) t` this is `2 sqrt(q) int_0^inf h^(k)(a q (1 + t^2)) dt`; the peak at
/// `t = 0` has unit width whatever `q` is, and the tail is handled on `[1, inf)`.
fn even_line_integral(k: usize, a: f64, q: f64) -> Result<f64> {
    let hk = HDerivative::new(k);
    let b = a * q;
    let f = |t: f64| hk.eval_unchecked(b * (1.0 + t * t));
    // Relative accuracy: the integrand has one sign, so no cancellation hides here.
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let head = integrate(f, 0.0, 1.0, opts)?;
    let tail = integrate_to_infinity(f, 1.0, opts)?;
    Ok(2.0 * q.sqrt() * (head.value + tail.value))
}

/// Law of a projection `<v, Y>`: an atom at 0 of mass `1 - p`, otherwise `scale * B * |N|`
/// with `P(B = 1) = prob_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionLaw {
    pub scale: f64,
    pub prob_plus: f64,
    pub prob_minus: f64,
    pub atom: f64,
}

impl ProjectionLaw {
    pub fn p(&self) -> f64 {
        1.0 - self.atom
    }

    /// `E exp(i t <v, Y>)`, from the signed half-normal mixture.
    pub fn cf(&self, t: f64) -> Complex64 {
        let y = self.scale * t;
        // E exp(i y |N|) = exp(-y^2/2) (1 + i sqrt(2/pi) int_0^y exp(x^2/2) dx)
        let half_normal_im = SQRT_2 / PI.sqrt() * damped_gauss_integral(y);
        let re = (-0.5 * y * y).exp();
        let im = (self.prob_plus - self.prob_minus) * half_normal_im;
        Complex64::new(self.atom + self.p() * re, self.p() * im)
    }

    /// Density of the continuous part (conditioned on leaving the atom), at `x != 0`.
    pub fn continuous_pdf(&self, x: f64) -> f64 {
        let z = x / self.scale;
        let folded = 2.0 / (self.scale * (2.0 * PI).sqrt()) * (-0.5 * z * z).exp();
        if x > 0.0 {
            self.prob_plus * folded
        } else if x < 0.0 {
            self.prob_minus * folded
        } else {
            0.5 * folded
        }
    }

    /// `P(<v, Y> <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let z = x / (self.scale * SQRT_2);
        let continuous = if x >= 0.0 {
            self.prob_minus + self.prob_plus * crate::special::erf(z)
        } else {
            self.prob_minus * crate::special::erfc(-z)
        };
        let atom = if x >= 0.0 { self.atom } else { 0.0 };
        atom + self.p() * continuous
    }

    /// One draw.
    pub fn sample(&self, s: &mut RandomStream) -> f64 {
        let u = s.uniform();
        let sign_u = s.uniform();
        let n = s.standard_normal().abs();
        if u < self.atom {
            return 0.0;
        }
        let sign = if sign_u < self.prob_plus { 1.0 } else { -1.0 };
        sign * self.scale * n
    }
}

/// `phi_Y(u)`.
pub fn limit_cf(law: &LimitLaw, u: &[f64]) -> Result<Complex64> {
    law.cf(u)
}

/// Density of `Z` at `x`.
pub fn limit_pdf(law: &LimitLaw, x: &[f64]) -> Result<f64> {
    law.pdf(x)
}

pub fn projection_law(law: &LimitLaw, v: &[f64]) -> Result<ProjectionLaw> {
    law.projection(v)
}

/// `n` draws of `<v, Y>`.
pub fn sample_projection(
    law: &LimitLaw,
    v: &[f64],
    n: usize,
    stream: &mut RandomStream,
) -> Result<Vec<f64>> {
    let proj = law.projection(v)?;
    Ok((0..n).map(|_| proj.sample(stream)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(a: f64, sigma: f64, mu: f64, p: f64) -> Result<LimitLaw> {
        make_limit_law(a, DMatrix::from_element(1, 1, sigma), vec![mu], p)
    }

    #[test]
    fn feasibility_examples() {
        assert!(one_d(1.0, 1.0, 0.0, 0.3).is_ok());
        assert!(one_d(1.0, 1.0, 0.0, 0.0).is_ok());
        let boundary = one_d(1.0, 1.0, 1.0 / PI.sqrt(), 1.0).unwrap();
        assert!((boundary.feasibility_ratio() - 1.0).abs() < 1e-15);
        match one_d(1.0, 1.0, 0.6, 1.0) {
            Err(Error::Infeasible { ratio, witness }) => {
                assert!((ratio - PI.sqrt() * 0.6).abs() < 1e-12);
                assert_eq!(witness, vec![0.6]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            one_d(1.0, 1.0, 0.1, 0.0),
            Err(Error::Infeasible { .. })
        ));
        assert!(matches!(
            one_d(1.0, -1.0, 0.0, 1.0),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn infeasible_message_cites_ratio() {
        let msg = one_d(1.0, 1.0, 0.6, 1.0).unwrap_err().to_string();
        assert!(msg.contains("sqrt(pi*a*mu'Sigma^-1 mu)/p"), "{msg}");
        assert!(msg.contains("1.063"), "{msg}");
    }

    #[test]
    fn cf_examples() {
        let law = one_d(0.5, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(law.cf(&[0.0]).unwrap(), Complex64::new(1.0, 0.0));
        let v = law.cf(&[1.0]).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15 && v.im == 0.0);
    }

    /// Direct quadrature of `int_0^T exp(t^2/2) dt` against the Dawson form.
    #[test]
    fn cf_matches_quadrature_of_raw_integral() {
        let (a, mu, u) = (0.5, 0.5, 1.0);
        let law = one_d(a, 1.0, mu, 1.0).unwrap();
        let q: f64 = u * u;
        let t = (q / (2.0 * a)).sqrt();
        let raw = integrate(|x: f64| (0.5 * x * x).exp(), 0.0, t, QuadOptions::default())
            .unwrap()
            .value;
        let e = (-q / (4.0 * a)).exp();
        let want = Complex64::new(e, (2.0 * a).sqrt() * mu * u / q.sqrt() * raw * e);
        assert!((law.cf(&[u]).unwrap() - want).norm() < 1e-10);
    }

    #[test]
    fn cf_symmetries() {
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let law = make_limit_law(0.7, sigma, vec![0.2, -0.1], 0.8).unwrap();
        for (u1, u2) in [(0.3, 1.0), (-2.0, 5.0), (40.0, -30.0)] {
            let v = law.cf(&[u1, u2]).unwrap();
            let w = law.cf(&[-u1, -u2]).unwrap();
            assert!((v - w.conj()).norm() < 1e-15);
            assert!(v.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn pdf_examples() {
        let law = one_d(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((law.pdf(&[0.0]).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        let boundary = one_d(1.0, 1.0, 1.0 / PI.sqrt(), 1.0).unwrap();
        let x: f64 = 0.3;
        let mixture = (0.5 + x.signum() * PI.sqrt() * boundary.mu()[0] / 2.0)
            * (SQRT_2 / PI.sqrt())
            * SQRT_2
            * (-x * x).exp();
        assert!((boundary.pdf(&[x]).unwrap() - mixture).abs() < 1e-12);
        assert!(boundary.pdf(&[-x]).unwrap().abs() < 1e-15);
        let atom_only = one_d(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(atom_only.pdf(&[0.1]), Err(Error::NoDensity));
    }

    #[test]
    fn pdf_matches_projection_density_in_one_dimension() {
        let law = one_d(0.8, 0.5, 0.2, 0.9).unwrap();
        let proj = law.projection(&[1.0]).unwrap();
        for x in [-2.0, -0.4, 0.01, 0.7, 1.9] {
            let got = law.pdf(&[x]).unwrap();
            assert!((got - proj.continuous_pdf(x)).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn projection_examples() {
        let sym = one_d(1.0, 1.0, 0.0, 1.0)
            .unwrap()
            .projection(&[1.0])
            .unwrap();
        assert_eq!((sym.prob_plus, sym.prob_minus), (0.5, 0.5));
        let boundary = one_d(1.0, 1.0 / 3.0, (1.0f64 / 3.0).sqrt() / PI.sqrt(), 1.0).unwrap();
        assert!((boundary.projection(&[1.0]).unwrap().prob_plus - 1.0).abs() < 1e-12);
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let law = make_limit_law(1.0, sigma, vec![0.1, 0.2], 0.9).unwrap();
        let v = law.projection(&[1.0, -0.5]).unwrap();
        let v2 = law.projection(&[2.0, -1.0]).unwrap();
        let vm = law.projection(&[-1.0, 0.5]).unwrap();
        assert!((v.prob_plus - v2.prob_plus).abs() < 1e-15);
        assert!((v.prob_plus - vm.prob_minus).abs() < 1e-15);
        assert!((v.atom - 0.1).abs() < 1e-15);
    }

    #[test]
    fn projection_sampling() {
        let mut s = RandomStream::new(1, &[crate::rng::tag::PROJECTION]);
        let atom = one_d(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(sample_projection(&atom, &[1.0], 100, &mut s)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let half = one_d(1.0, 1.0, 1.0 / PI.sqrt(), 1.0).unwrap();
        assert!(sample_projection(&half, &[1.0], 10_000, &mut s)
            .unwrap()
            .iter()
            .all(|&v| v >= 0.0));
        let sym = one_d(1.0, 2.0, 0.0, 1.0).unwrap();
        let n = 1_000_000;
        let xs = sample_projection(&sym, &[1.0], n, &mut s).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let var_target = 2.0 / 2.0;
        assert!(mean.abs() < 4.0 * (var_target / n as f64).sqrt());
        // Var(X^2) = 2 s^4 for a centred normal.
        assert!((m2 - var_target).abs() < 4.0 * (2.0 * var_target * var_target / n as f64).sqrt());
    }

    #[test]
    fn no_truncation_examples() {
        let l = no_truncation_law(0.5, DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(l.gaussian_covariance()[(0, 0)], 1.0);
        let l = no_truncation_law(1.0, DMatrix::from_element(1, 1, 1.0 / 3.0)).unwrap();
        assert!((l.gaussian_covariance()[(0, 0)] - 1.0 / 6.0).abs() < 1e-16);
        let l = no_truncation_law(1.0, DMatrix::identity(2, 2)).unwrap();
        assert_eq!(l.gaussian_covariance(), DMatrix::identity(2, 2) / 2.0);
        assert_eq!(l.p(), 1.0);
        assert_eq!(l.mu(), &[0.0, 0.0]);
    }

    #[test]
    fn mixture_cdf_values() {
        let sym = one_d(1.0, 1.0, 0.0, 1.0)
            .unwrap()
            .projection(&[1.0])
            .unwrap();
        assert!((sym.cdf(0.0) - 0.5).abs() < 1e-15);
        let half = one_d(1.0, 1.0, 1.0 / PI.sqrt(), 1.0)
            .unwrap()
            .projection(&[1.0])
            .unwrap();
        assert!(half.cdf(-1e-300) < 1e-12);
        let atom = one_d(1.0, 1.0, 0.0, 0.0)
            .unwrap()
            .projection(&[1.0])
            .unwrap();
        assert_eq!((atom.cdf(-1e-9), atom.cdf(0.0)), (0.0, 1.0));
    }

    /// `int_R g(z) dz` by the trapezoid rule after `z = c sinh(t)`.
    fn sinh_trapezoid(g: impl Fn(f64) -> f64, c: f64) -> f64 {
        let h = 0.01;
        (-3000..=3000)
            .map(|i| {
                let t = i as f64 * h;
                g(c * t.sinh()) * c * t.cosh()
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn even_density_is_marginal_of_odd_density() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 0.8]);
        let mu = vec![0.12, -0.2];
        let law2 = make_limit_law(0.9, sigma.clone(), mu.clone(), 0.95).unwrap();
        let mut sigma3 = DMatrix::zeros(3, 3);
        sigma3.view_mut((0, 0), (2, 2)).copy_from(&sigma);
        sigma3[(2, 2)] = 0.7;
        let law3 = make_limit_law(0.9, sigma3, vec![mu[0], mu[1], 0.0], 0.95).unwrap();
        for x in [[0.5, 0.5], [-0.1, 0.03], [1.2, -2.0], [0.004, 0.001]] {
            let direct = law2.pdf(&x).unwrap();
            let c = (x[0] * x[0] + x[1] * x[1]).sqrt().min(1.0);
            let marginal = sinh_trapezoid(|z| law3.pdf(&[x[0], x[1], z]).unwrap(), c);
            assert!(
                (direct - marginal).abs() < 1e-8,
                "x={x:?}: {direct} vs {marginal}"
            );
        }
    }

    #[test]
    fn params_round_trip() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let law = make_limit_law(1.0, sigma, vec![0.1, 0.2], 0.9).unwrap();
        assert_eq!(LimitLaw::from_params(&law.params()).unwrap(), law);
    }
}
