use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ks_core::kp::kp_norm;
use ks_core::{Exponent, Interval, KpConfig, KpIntegrand};

fn step(c: &mut Criterion) {
    let cfg = KpConfig::new(vec![Interval::new(0.0, 1.0).unwrap()]).unwrap();
    let f = KpIntegrand::scalar(|x| if x < 0.5 { 1.0 } else { -1.0 }).with_breakpoints([0.5]);
    let p = Exponent::new(2.0).unwrap();
    c.bench_function("kp_norm p=2 step K=64", |b| {
        b.iter(|| kp_norm(black_box(&f), p, &cfg).unwrap())
    });
}

fn truncation(c: &mut Criterion) {
    let f = KpIntegrand::scalar(|x| (7.0 * x).sin() + x);
    let p = Exponent::new(3.0).unwrap();
    let mut g = c.benchmark_group("kp_norm truncation");
    for k in [16usize, 64, 256] {
        let cfg = KpConfig::new(vec![Interval::new(0.0, 1.0).unwrap()])
            .unwrap()
            .with_truncation(k);
        g.bench_function(format!("K={k}"), |b| {
            b.iter(|| kp_norm(black_box(&f), p, &cfg).unwrap())
        });
    }
    g.finish();
}

fn plane(c: &mut Criterion) {
    let cfg = KpConfig::new(vec![Interval::new(0.0, 1.0).unwrap(); 2])
        .unwrap()
        .with_truncation(32);
    let f = KpIntegrand::new(|x| x[0] * x[1]);
    let p = Exponent::new(2.0).unwrap();
    c.bench_function("kp_norm p=2 x1*x2 on the square", |b| {
        b.iter(|| kp_norm(black_box(&f), p, &cfg).unwrap())
    });
}

criterion_group!(benches, step, truncation, plane);
criterion_main!(benches);
