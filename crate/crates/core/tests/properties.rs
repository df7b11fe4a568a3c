use proptest::prelude::*;
use restart_ar_core::{
    ks_distance, mixture_cdf, moment_inequality_check, moment_recursion, EcdfView, LimitLaw,
    LimitLawParams, Normal, RandomStream,
};

/// A feasible law in dimension 1 or 2: `ratio` is the fraction of the feasibility bound used by `mu`.
fn law(
    a: f64,
    var: (f64, f64),
    corr: f64,
    dir: (f64, f64),
    ratio: f64,
    p: f64,
    d: usize,
) -> LimitLaw {
    let sigma = if d == 1 {
        vec![vec![var.0]]
    } else {
        let c = corr * (var.0 * var.1).sqrt();
        vec![vec![var.0, c], vec![c, var.1]]
    };
    let w = if d == 1 {
        vec![dir.0.signum()]
    } else {
        vec![dir.0, dir.1]
    };
    // mu = t Sigma w with pi a t^2 w' Sigma w = (ratio p)^2.
    let sw: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| sigma[i][j] * w[j]).sum())
        .collect();
    let q: f64 = sw.iter().zip(&w).map(|(x, y)| x * y).sum();
    let t = if q > 0.0 {
        ratio * p / (std::f64::consts::PI * a * q).sqrt()
    } else {
        0.0
    };
    let mu = sw.iter().map(|x| t * x).collect();
    LimitLaw::from_params(&LimitLawParams { a, sigma, mu, p }).unwrap()
}

fn any_law() -> impl Strategy<Value = LimitLaw> {
    (
        0.2f64..3.0,
        (0.2f64..3.0, 0.2f64..3.0),
        -0.8f64..0.8,
        (-1.0f64..1.0, -1.0f64..1.0),
        0.0f64..0.999,
        0.05f64..1.0,
        1usize..=2,
    )
        .prop_map(|(a, var, corr, dir, ratio, p, d)| law(a, var, corr, dir, ratio, p, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cf_is_hermitian_and_bounded(law in any_law(), t in (-6.0f64..6.0, -6.0f64..6.0)) {
        let u: Vec<f64> = [t.0, t.1][..law.dim()].to_vec();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let z = law.cf(&u).unwrap();
        let w = law.cf(&neg).unwrap();
        prop_assert!(z.norm() <= 1.0 + 1e-12);
        prop_assert!((z - w.conj()).norm() < 1e-12);
        let zero = vec![0.0; law.dim()];
        prop_assert!((law.cf(&zero).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_cdf_is_a_distribution_function(law in any_law(), xs in prop::collection::vec(-5.0f64..5.0, 2..20)) {
        let mut u = vec![0.0; law.dim()];
        u[0] = 1.0;
        let proj = law.projection(&u).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let values: Vec<f64> = xs.iter().map(|x| proj.cdf(*x)).collect();
        prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        prop_assert!((proj.cdf(0.0) - proj.cdf(-1e-300) - proj.atom).abs() < 1e-12);
    }

    #[test]
    fn moment_inequality_holds_for_feasible_laws(law in any_law()) {
        let mut u = vec![0.0; law.dim()];
        u[0] = 1.0;
        let table = moment_recursion(&law, &u, 4).unwrap();
        let s = law.sigma()[(0, 0)] / (2.0 * law.a());
        prop_assert!(moment_inequality_check(table.values[1], table.values[2], s).unwrap().passed);
    }

    #[test]
    fn ks_distance_is_a_probability(xs in prop::collection::vec(-10.0f64..10.0, 1..200), mean in -2.0f64..2.0) {
        let d = ks_distance(&xs, &Normal { mean, sd: 1.0 });
        prop_assert!((0.0..=1.0).contains(&d));
        let ecdf = EcdfView::new(&xs);
        prop_assert_eq!(ks_distance(&xs, &ecdf), 0.0);
    }

    #[test]
    fn streams_depend_only_on_seed_and_path(seed in any::<u64>(), path in prop::collection::vec(any::<u64>(), 0..4)) {
        let mut a = RandomStream::new(seed, &path);
        let mut b = RandomStream::new(seed, &path);
        for _ in 0..8 {
            let x = a.uniform();
            prop_assert_eq!(x, b.uniform());
            prop_assert!((0.0..1.0).contains(&x));
        }
    }
}

#[test]
fn projected_samples_match_their_cdf() {
    let l = law(0.8, (1.2, 0.7), 0.3, (0.6, -0.4), 0.9, 0.8, 2);
    let proj = l.projection(&[0.5, 1.0]).unwrap();
    let mut s = RandomStream::new(11, &[1]);
    let xs: Vec<f64> = (0..50_000).map(|_| proj.sample(&mut s)).collect();
    assert!(ks_distance(&xs, &mixture_cdf(&proj)) < 1.36 / (50_000f64).sqrt() * 1.5);
}
