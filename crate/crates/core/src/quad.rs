//! Adaptive 21-point Gauss-Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

/// Tolerances and subdivision limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 21-point Kronrod rule with its embedded 10-point Gauss estimate.
fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += wg * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let h = half.abs();
    Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error(err, res_abs * h, res_asc * h),
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates over `[points[0], points[last]]`, starting from the given subdivision.
/// Useful when `f` has kinks or near-singular behaviour at known locations.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "quadrature needs at least two break points".into(),
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "quadrature limits must be finite".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    for w in points.windows(2) {
        if w[0] != w[1] {
            heap.push(qk21(&f, w[0], w[1]));
        }
    }
    let mut intervals = heap.len();
    loop {
        let (value, error) = heap.iter().fold((frozen_value, frozen_error), |(v, e), s| {
            (v + s.value, e + s.error)
        });
        if !value.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || heap.is_empty() {
            return Ok(QuadResult {
                value,
                abs_error: error,
                intervals,
            });
        }
        if intervals >= opts.max_intervals {
            return Err(Error::Quadrature {
                abs_error: error,
                intervals,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        let too_small = mid <= worst.a.min(worst.b)
            || mid >= worst.a.max(worst.b)
            || (worst.b - worst.a).abs() < 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if too_small {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        heap.push(qk21(&f, worst.a, mid));
        heap.push(qk21(&f, mid, worst.b));
        intervals += 1;
    }
}

/// Integrates `f` over `[a, inf)` through `x = a + t/(1-t)`, `t in [0, 1)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let x = a + t / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x| x.powi(7) - 3.0 * x * x,
            -1.0,
            2.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn endpoint_singularity() {
        // int_0^1 x^(-1/2) dx = 2
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::abs(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn gaussian_to_infinity() {
        let r =
            integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, QuadOptions::abs(1e-13)).unwrap();
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn breaks_handle_kinks() {
        let r = integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 3.0], QuadOptions::default())
            .unwrap();
        assert!((r.value - 5.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_change_sign() {
        let r = integrate(|x: f64| x.cos(), 1.0, 0.0, QuadOptions::default()).unwrap();
        assert!((r.value + 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn subdivision_limit_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
