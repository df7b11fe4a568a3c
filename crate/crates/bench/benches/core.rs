use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use laws::law;
use restart_ar_core::chain::simulate_path;
use restart_ar_core::scenarios::example_one_family;
use restart_ar_core::special::dawson;
use restart_ar_core::{stationary_sample, RandomStream, StationaryOptions};

mod laws {
    use restart_ar_core::{LimitLaw, LimitLawParams};

    pub fn law(mu: Vec<f64>) -> LimitLaw {
        let d = mu.len();
        let sigma = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.2 }).collect())
            .collect();
        LimitLaw::from_params(&LimitLawParams {
            a: 1.0,
            sigma,
            mu,
            p: 0.9,
        })
        .unwrap()
    }
}

fn chain(c: &mut Criterion) {
    let model = example_one_family(-0.5, 0.5).at(10_000).unwrap();
    c.bench_function("restarted chain, 10^5 steps", |b| {
        let mut s = RandomStream::new(1, &[0]);
        b.iter(|| black_box(simulate_path(&model, 100_000, true, &mut s)))
    });
    let small = example_one_family(-0.5, 0.5).at(100).unwrap();
    c.bench_function("cycle pool, m = 100, n = 10^4", |b| {
        b.iter(|| {
            black_box(stationary_sample(&small, &StationaryOptions::cycle_pool(10_000), 3).unwrap())
        })
    });
}

fn limit(c: &mut Criterion) {
    let law2 = law(vec![0.05, -0.02]);
    let law3 = law(vec![0.05, -0.02, 0.01]);
    c.bench_function("limit cf, d = 3", |b| {
        b.iter(|| black_box(law3.cf(black_box(&[0.7, -1.2, 2.0])).unwrap()))
    });
    c.bench_function("limit pdf, d = 2", |b| {
        b.iter(|| black_box(law2.pdf(black_box(&[0.4, -0.3])).unwrap()))
    });
    c.bench_function("limit pdf, d = 3", |b| {
        b.iter(|| black_box(law3.pdf(black_box(&[0.4, -0.3, 0.2])).unwrap()))
    });
}

fn special(c: &mut Criterion) {
    c.bench_function("dawson", |b| b.iter(|| black_box(dawson(black_box(2.7)))));
}

criterion_group!(benches, chain, limit, special);
criterion_main!(benches);
