//! Empirical distribution tools: ECDF, Kolmogorov-Smirnov distance with atoms,
//! empirical characteristic function.

use num_complex::Complex64;

use crate::limitlaw::ProjectionLaw;
use crate::special::normal_cdf;

/// A distribution function on the line with a finite list of jump points.
pub trait Cdf {
    /// `F(x) = P(X <= x)`.
    fn cdf(&self, x: f64) -> f64;

    /// `F(x-) = P(X < x)`. Equals `cdf` away from jumps.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    /// Points where `F` jumps.
    fn jumps(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `N(mean, sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
}

impl Cdf for Normal {
    fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.sd)
    }
}

/// Distribution function of a projection of the limit law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureCdf(pub ProjectionLaw);

impl Cdf for MixtureCdf {
    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x == 0.0 {
            self.0.p() * self.0.prob_minus
        } else {
            self.0.cdf(x)
        }
    }

    fn jumps(&self) -> Vec<f64> {
        if self.0.atom > 0.0 {
            vec![0.0]
        } else {
            Vec::new()
        }
    }
}

/// `(1 - p) 1{x >= 0} + p [P(-scale |N| <= x) prob_minus + P(scale |N| <= x) prob_plus]`.
pub fn mixture_cdf(proj: &ProjectionLaw) -> MixtureCdf {
    MixtureCdf(*proj)
}

/// Empirical distribution function of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfView {
    sorted: Vec<f64>,
}

impl EcdfView {
    /// NaN values are rejected by sorting them to the end and dropping them.
    pub fn new(sample: &[f64]) -> Self {
        let mut sorted: Vec<f64> = sample.iter().copied().filter(|x| !x.is_nan()).collect();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    fn count_lt(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }
}

impl Cdf for EcdfView {
    fn cdf(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.count_le(x) as f64 / self.sorted.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.count_lt(x) as f64 / self.sorted.len() as f64
    }

    fn jumps(&self) -> Vec<f64> {
        let mut out = self.sorted.clone();
        out.dedup();
        out
    }
}

/// `sup_x |F_n(x) - F(x)|`, evaluated on both sides of every sample point and every
/// jump of `F`. Returns 1 for an empty sample.
pub fn ks_distance<C: Cdf + ?Sized>(sample: &[f64], cdf: &C) -> f64 {
    let ecdf = EcdfView::new(sample);
    ks_distance_sorted(&ecdf, cdf)
}

fn ks_distance_sorted<C: Cdf + ?Sized>(ecdf: &EcdfView, cdf: &C) -> f64 {
    if ecdf.is_empty() {
        return 1.0;
    }
    let n = ecdf.len() as f64;
    let xs = ecdf.sorted();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let left = i as f64 / n;
        let right = j as f64 / n;
        d = d.max((right - cdf.cdf(x)).abs());
        d = d.max((left - cdf.cdf_left(x)).abs());
        i = j;
    }
    for y in cdf.jumps() {
        let f_hat = ecdf.cdf(y);
        let f_hat_left = ecdf.cdf_left(y);
        d = d.max((f_hat - cdf.cdf(y)).abs());
        d = d.max((f_hat_left - cdf.cdf_left(y)).abs());
    }
    d.min(1.0)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let ea = EcdfView::new(a);
    let eb = EcdfView::new(b);
    if ea.is_empty() || eb.is_empty() {
        return 1.0;
    }
    ks_distance_sorted(&ea, &eb)
}

/// `(1/n) sum_j exp(i t x_j)` for each `t`.
pub fn empirical_cf(sample: &[f64], grid: &[f64]) -> Vec<Complex64> {
    let n = sample.len() as f64;
    grid.iter()
        .map(|&t| {
            let (c, s) = sample.iter().fold((0.0, 0.0), |(c, s), &x| {
                let (sin, cos) = (t * x).sin_cos();
                (c + cos, s + sin)
            });
            Complex64::new(c / n, s / n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitlaw::make_limit_law;
    use crate::rng::RandomStream;
    use nalgebra::DMatrix;

    fn standard_normal_quantile(p: f64) -> f64 {
        // Bisection on the distribution function.
        let (mut lo, mut hi) = (-40.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_sample_distance() {
        let n = 1000;
        let sample: Vec<f64> = (1..=n)
            .map(|i| standard_normal_quantile((i as f64 - 0.5) / n as f64))
            .collect();
        let d = ks_distance(&sample, &Normal { mean: 0.0, sd: 1.0 });
        assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
    }

    #[test]
    fn atom_only_matches_zero_sample() {
        let law = make_limit_law(1.0, DMatrix::from_element(1, 1, 1.0), vec![0.0], 0.0).unwrap();
        let cdf = mixture_cdf(&law.projection(&[1.0]).unwrap());
        assert_eq!(ks_distance(&[0.0; 50], &cdf), 0.0);
        assert_eq!(ks_distance(&[1e-3; 50], &cdf), 1.0);
    }

    #[test]
    fn atom_is_seen_from_both_sides() {
        let law = make_limit_law(1.0, DMatrix::from_element(1, 1, 1.0), vec![0.0], 0.5).unwrap();
        let cdf = mixture_cdf(&law.projection(&[1.0]).unwrap());
        // No zeros in the sample: the gap at the atom is at least half its mass.
        let mut s = RandomStream::new(2, &[0]);
        let sample: Vec<f64> = (0..20_000)
            .map(|_| s.standard_normal() / 2f64.sqrt())
            .collect();
        assert!(ks_distance(&sample, &cdf) > 0.24);
        let proj = law.projection(&[1.0]).unwrap();
        let good: Vec<f64> = (0..20_000).map(|_| proj.sample(&mut s)).collect();
        assert!(ks_distance(&good, &cdf) < 0.02);
    }

    #[test]
    fn inverse_transform_sample_passes_threshold() {
        let n = 100_000;
        let mut passes = 0;
        for seed in 0..20 {
            let mut s = RandomStream::new(seed, &[0]);
            let sample: Vec<f64> = (0..n)
                .map(|_| standard_normal_quantile(s.uniform()))
                .collect();
            if ks_distance(&sample, &Normal { mean: 0.0, sd: 1.0 }) < 1.36 / (n as f64).sqrt() {
                passes += 1;
            }
        }
        assert!(passes >= 16, "{passes}/20");
    }

    #[test]
    fn self_distance_is_zero_and_affine_invariant() {
        let mut s = RandomStream::new(3, &[0]);
        let sample: Vec<f64> = (0..5000).map(|_| s.uniform_in(-1.0, 2.0)).collect();
        let ecdf = EcdfView::new(&sample);
        assert_eq!(ks_distance(&sample, &ecdf), 0.0);
        let cdf = Normal { mean: 0.3, sd: 0.9 };
        let d = ks_distance(&sample, &cdf);
        let mapped: Vec<f64> = sample.iter().map(|x| 3.0 * x - 2.0).collect();
        let mapped_cdf = Normal {
            mean: 3.0 * 0.3 - 2.0,
            sd: 3.0 * 0.9,
        };
        assert!((ks_distance(&mapped, &mapped_cdf) - d).abs() < 1e-12);
    }

    #[test]
    fn two_sample_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0], &[2.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixture_cdf_examples() {
        let boundary = make_limit_law(
            1.0,
            DMatrix::from_element(1, 1, 1.0),
            vec![1.0 / std::f64::consts::PI.sqrt()],
            1.0,
        )
        .unwrap();
        let c = mixture_cdf(&boundary.projection(&[1.0]).unwrap());
        assert!(c.cdf_left(0.0).abs() < 1e-12);
        assert!(c.jumps().is_empty());
        let sym = make_limit_law(1.0, DMatrix::from_element(1, 1, 1.0), vec![0.0], 1.0).unwrap();
        assert_eq!(mixture_cdf(&sym.projection(&[1.0]).unwrap()).cdf(0.0), 0.5);
    }

    #[test]
    fn empirical_cf_examples() {
        let grid = [0.0, 0.5, 1.0, 3.0];
        assert!(empirical_cf(&[0.0], &grid)
            .iter()
            .all(|z| *z == Complex64::new(1.0, 0.0)));
        for (z, t) in empirical_cf(&[-1.0, 1.0], &grid).iter().zip(grid) {
            assert!((z.re - t.cos()).abs() < 1e-15 && z.im.abs() < 1e-15);
        }
        let mut s = RandomStream::new(1, &[0]);
        let xs: Vec<f64> = (0..1000).map(|_| s.standard_normal()).collect();
        assert_eq!(empirical_cf(&xs, &[0.0])[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn empirical_cf_tracks_limit_cf() {
        let law = make_limit_law(0.7, DMatrix::from_element(1, 1, 1.3), vec![0.0], 1.0).unwrap();
        let mut s = RandomStream::new(4, &[crate::rng::tag::PROJECTION]);
        let n = 1_000_000;
        let xs = crate::limitlaw::sample_projection(&law, &[1.0], n, &mut s).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let emp = empirical_cf(&xs, &grid);
        for (z, t) in emp.iter().zip(&grid) {
            let want = law.cf(&[*t]).unwrap();
            assert!((z - want).norm() < 5.0 / (n as f64).sqrt(), "t={t}");
        }
    }
}
