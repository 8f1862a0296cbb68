//! Seeded property suites behind `ks verify`.
//!
//! Each row is one invariant. `value` is the worst observed excess over the
//! invariant and `error_bound` the allowed excess; a row passes when
//! `value <= error_bound`, and its quantity reads `suite.invariant:pass` or
//! `suite.invariant:fail`.

use std::f64::consts::PI;
use std::time::Instant;

use ks_core::box_measure::{j_interval, mu_B, mu_B_disjoint, vjn_measure};
use ks_core::fourier::{fourier_bound_check, fourier_tame, sinc_tail};
use ks_core::gauge::{
    cousin_partition, gauge_riemann_integrate, hk_integrate, is_delta_fine, riemann_sum,
};
use ks_core::kp::{kp_norm, verify_embedding, weighted_holder};
use ks_core::{
    BoxSet, ElementaryProduct, Exponent, FrequencyPoint, Gauge, HkOptions, Interval, KpConfig,
    KpIntegrand, NdOptions, Result, TailFamily, TameFunction, WeightSequence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Gauge,
    Measure,
    Embeddings,
    Minkowski,
    Parallelogram,
    WeakStrong,
    Fourier,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Gauge,
        Suite::Measure,
        Suite::Embeddings,
        Suite::Minkowski,
        Suite::Parallelogram,
        Suite::WeakStrong,
        Suite::Fourier,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::Gauge => "gauge",
            Suite::Measure => "measure",
            Suite::Embeddings => "embeddings",
            Suite::Minkowski => "minkowski",
            Suite::Parallelogram => "parallelogram",
            Suite::WeakStrong => "weak-strong",
            Suite::Fourier => "fourier",
        }
    }
}

pub struct Report {
    pub rows: Vec<Row>,
    pub failed: usize,
}

struct Recorder {
    suite: &'static str,
    timing: bool,
    clock: Instant,
    report: Report,
}

impl Recorder {
    fn check(&mut self, name: &str, excess: f64, allowed: f64, evaluations: usize) {
        let pass = excess <= allowed;
        if !pass {
            self.report.failed += 1;
        }
        let mut row = Row::new(
            format!(
                "{}.{name}:{}",
                self.suite,
                if pass { "pass" } else { "fail" }
            ),
            excess,
        )
        .error(allowed)
        .evals(evaluations);
        if self.timing {
            row.wall_ms = self.clock.elapsed().as_millis() as u64;
        }
        self.clock = Instant::now();
        self.report.rows.push(row);
    }
}

pub fn run_suite(suite: Suite, seed: u64, timing: bool) -> Result<Report> {
    let mut rec = Recorder {
        suite: suite.name(),
        timing,
        clock: Instant::now(),
        report: Report {
            rows: Vec::new(),
            failed: 0,
        },
    };
    // each suite draws from its own stream so it can run alone
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ suite as u64);
    match suite {
        Suite::Gauge => gauge(&mut rec, &mut rng)?,
        Suite::Measure => measure(&mut rec, &mut rng)?,
        Suite::Embeddings => embeddings(&mut rec, &mut rng)?,
        Suite::Minkowski => minkowski(&mut rec, &mut rng)?,
        Suite::Parallelogram => parallelogram(&mut rec, &mut rng)?,
        Suite::WeakStrong => weak_strong(&mut rec)?,
        Suite::Fourier => fourier(&mut rec, &mut rng)?,
    }
    Ok(rec.report)
}

fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).expect("ordered endpoints")
}

/// Piecewise-constant function on `[0, 1]` with at most 16 dyadic pieces.
#[derive(Clone)]
struct Step(Vec<f64>);

impl Step {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let level = rng.gen_range(0..=4u32);
        Step(
            (0..1usize << level)
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect(),
        )
    }

    fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let n = self.0.len();
        self.0[((x * n as f64) as usize).min(n - 1)]
    }

    fn combine(&self, a: f64, other: &Step, b: f64) -> Step {
        let n = self.0.len().max(other.0.len());
        Step(
            (0..n)
                .map(|i| {
                    let m = (i as f64 + 0.5) / n as f64;
                    a * self.eval(m) + b * other.eval(m)
                })
                .collect(),
        )
    }

    fn integrand(&self) -> KpIntegrand {
        let n = self.0.len();
        let s = self.clone();
        KpIntegrand::scalar(move |x| s.eval(x))
            .with_breakpoints((1..n).map(|i| i as f64 / n as f64))
    }

    fn tame(&self) -> TameFunction {
        let s = self.clone();
        TameFunction::new(
            move |x| s.eval(x[0]),
            vec![Interval::unit()],
            TailFamily::CanonicalJ,
        )
        .expect("order one")
    }

    fn l1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum::<f64>() / self.0.len() as f64
    }
}

fn unit_cfg() -> KpConfig {
    KpConfig::new(vec![Interval::unit()]).expect("unit window")
}

fn random_gauge(rng: &mut ChaCha8Rng) -> Gauge {
    let (a, b, c) = (
        rng.gen_range(0.005..0.2),
        rng.gen_range(0.0..0.3),
        rng.gen_range(0.5..20.0),
    );
    Gauge::new(move |t: f64| a + b * (c * t).sin().powi(2))
}

fn gauge(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let domain = iv(-1.0, 2.0);
    let (mut not_fine, mut not_coarse, mut cells) = (0.0, 0.0, 0);
    for _ in 0..32 {
        let g = random_gauge(rng);
        let shrink = rng.gen_range(0.05..1.0);
        let finer = {
            let g = g.clone();
            Gauge::new(move |t| shrink * g.eval(t))
        };
        let p = cousin_partition(&g, domain)?;
        cells += p.len();
        if !is_delta_fine(&p, &g) {
            not_fine += 1.0;
        }
        let q = cousin_partition(&finer, domain)?;
        cells += q.len();
        if !is_delta_fine(&q, &g) {
            not_coarse += 1.0;
        }
    }
    rec.check("cousin_partition_is_fine", not_fine, 0.0, cells);
    rec.check("refinement_is_fine_for_coarser", not_coarse, 0.0, 0);

    let mut excess = f64::NEG_INFINITY;
    let mut evals = 0;
    for _ in 0..16 {
        let (a, w, c) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.5..6.0),
            rng.gen_range(-1.0..1.0),
        );
        let f = move |x: f64| a * (w * x).sin() + c * x * x;
        let (r, g) = gauge_riemann_integrate(f, iv(0.0, 1.5), rng.gen_range(1e-6..1e-3))?;
        let finer = Gauge::new(move |t| 0.37 * g.eval(t));
        let p = cousin_partition(&finer, iv(0.0, 1.5))?;
        let r2 = riemann_sum(f, &p)?;
        evals += r.evaluations + p.len();
        excess = excess.max((r.value - r2).abs() - 2.0 * r.error_estimate);
    }
    rec.check("riemann_sums_agree", excess, 0.0, evals);

    let opts = HkOptions::with_tol(1e-10);
    let (mut lin, mut add, mut evals) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
    for _ in 0..16 {
        let (a, b, w) = (
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.1..8.0),
        );
        let f = move |x: f64| (w * x).cos();
        let g = |x: f64| (-x * x).exp();
        let d = iv(-1.0, 2.0);
        let rf = hk_integrate(f, d, &opts)?;
        let rg = hk_integrate(g, d, &opts)?;
        let rh = hk_integrate(|x| a * f(x) + b * g(x), d, &opts)?;
        let budget = rh.error_estimate + a.abs() * rf.error_estimate + b.abs() * rg.error_estimate;
        lin = lin.max((rh.value - a * rf.value - b * rg.value).abs() - budget);
        let m = rng.gen_range(-0.9..1.9);
        let l = hk_integrate(f, iv(-1.0, m), &opts)?;
        let r = hk_integrate(f, iv(m, 2.0), &opts)?;
        add = add.max(
            (rf.value - l.value - r.value).abs()
                - rf.error_estimate
                - l.error_estimate
                - r.error_estimate,
        );
        evals += rf.evaluations + rg.evaluations + rh.evaluations + l.evaluations + r.evaluations;
    }
    rec.check("hk_linearity", lin, 1e-14, evals);
    rec.check("hk_additivity", add, 1e-14, 0);

    let fprime = |x: f64| {
        let u = (x * x).recip();
        2.0 * x * u.sin() - 2.0 / x * u.cos()
    };
    let r = hk_integrate(
        fprime,
        iv(0.0, 1.0),
        &HkOptions::with_tol(1e-3).singular([0.0]),
    )?;
    rec.check(
        "hk_conditionally_integrable",
        (r.value - 1f64.sin()).abs(),
        1e-3,
        r.evaluations,
    );
    Ok(())
}

fn random_box(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Interval> {
    (0..dim)
        .map(|_| {
            let lo = rng.gen_range(-10.0..10.0);
            iv(lo, lo + rng.gen_range(0.01..5.0))
        })
        .collect()
}

fn measure(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let (mut add, mut trans, mut promo) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let dim = rng.gen_range(1..=4);
        let base = random_box(rng, dim);
        let cuts: Vec<f64> = base.iter().map(|b| rng.gen_range(b.lo()..b.hi())).collect();
        let parts = (0..1usize << dim)
            .map(|mask| {
                let sides = base.iter().zip(&cuts).enumerate().map(|(i, (b, &c))| {
                    let (l, r) = b.split_at(c);
                    if mask >> i & 1 == 0 {
                        l
                    } else {
                        r
                    }
                });
                BoxSet::canonical(sides.collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let whole = BoxSet::canonical(base)?;
        let v = mu_B(&whole)?.value();
        add = add.max((mu_B_disjoint(&parts)?.value() - v).abs() / v.max(1.0));
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1e3..1e3)).collect();
        trans = trans.max((mu_B(&whole.translate(&shift))?.value() - v).abs() / v.max(1.0));
        promo = promo.max((mu_B(&whole.promote(dim + rng.gen_range(1..4)))?.value() - v).abs());
    }
    rec.check("finite_additivity", add, 1e-12, 0);
    rec.check("translation_invariance", trans, 1e-12, 0);
    rec.check("promotion_consistency", promo, 0.0, 0);

    let mut grow = f64::NEG_INFINITY;
    for _ in 0..100 {
        let mut ks: Vec<usize> = (0..rng.gen_range(1..5))
            .map(|_| rng.gen_range(1..40))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        let factors: Vec<(usize, Interval)> = ks
            .iter()
            .map(|&k| {
                let j = j_interval(k);
                let w = rng.gen_range(0.05..1.0);
                let lo = j.lo() + rng.gen_range(0.0..1.0) * (1.0 - w) * j.len();
                (k, iv(lo, lo + w * j.len()))
            })
            .collect();
        let a = ElementaryProduct::new(factors.clone(), 64)?;
        let (k, f) = factors[rng.gen_range(0..factors.len())];
        let shrunk = a.with_factor(k, iv(f.lo(), f.lo() + rng.gen_range(0.0..1.0) * f.len()));
        let n = rng.gen_range(0..45);
        grow = grow.max(vjn_measure(&shrunk, n)?.value() - vjn_measure(&a, n)?.value());
    }
    rec.check("vjn_monotone_under_shrinkage", grow, 0.0, 0);

    let jk = (1..=1_000_000usize).fold(0.0f64, |m, k| {
        let exact = 1.0 / ((k + 1) as f64).ln();
        m.max((j_interval(k).len() - exact).abs() / exact)
    });
    rec.check("j_k_closed_form", jk, 2.0 * f64::EPSILON, 0);
    Ok(())
}

fn embeddings(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let cfg = unit_cfg();
    let steps: Vec<Step> = (0..20).map(|_| Step::random(rng)).collect();
    for p in [1.0, 2.0, 4.0] {
        for q in [
            Exponent::Finite(1.0),
            Exponent::Finite(2.0),
            Exponent::Infinity,
        ] {
            let (mut excess, mut evals) = (f64::NEG_INFINITY, 0);
            for s in &steps {
                let r = verify_embedding(&s.integrand(), q, Exponent::Finite(p), &cfg)?;
                evals += r.evaluations;
                excess = excess.max(r.kp_norm - r.lq_norm - r.tail_bound);
            }
            rec.check(&format!("kp_below_lq[p={p};q={q}]"), excess, 1e-8, evals);
        }
    }
    Ok(())
}

fn norm(s: &Step, p: Exponent, cfg: &KpConfig) -> Result<(f64, usize)> {
    kp_norm(&s.integrand(), p, cfg).map(|r| (r.value, r.evaluations))
}

fn minkowski(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let cfg = unit_cfg();
    let pairs: Vec<(Step, Step)> = (0..20)
        .map(|_| (Step::random(rng), Step::random(rng)))
        .collect();
    for p in [1.0, 2.0, 4.0] {
        let p = Exponent::Finite(p);
        let (mut excess, mut evals) = (f64::NEG_INFINITY, 0);
        for (f, g) in &pairs {
            let (nf, e1) = norm(f, p, &cfg)?;
            let (ng, e2) = norm(g, p, &cfg)?;
            let (ns, e3) = norm(&f.combine(1.0, g, 1.0), p, &cfg)?;
            evals += e1 + e2 + e3;
            excess = excess.max(ns - nf - ng);
        }
        rec.check(&format!("triangle[p={p}]"), excess, 1e-9, evals);
    }
    let (mut hom, mut evals) = (0.0f64, 0);
    for (f, _) in &pairs {
        let alpha = rng.gen_range(-4.0..4.0);
        let (nf, e1) = norm(f, Exponent::Finite(2.0), &cfg)?;
        let (na, e2) = norm(&f.combine(alpha, f, 0.0), Exponent::Finite(2.0), &cfg)?;
        evals += e1 + e2;
        hom = hom.max((na - alpha.abs() * nf).abs());
    }
    rec.check("homogeneity", hom, 1e-12, evals);
    Ok(())
}

fn parallelogram(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let cfg = unit_cfg();
    let two = Exponent::Finite(2.0);
    let (mut defect, mut evals) = (0.0f64, 0);
    for _ in 0..20 {
        let (f, g) = (Step::random(rng), Step::random(rng));
        let mut sq = |h: &Step| -> Result<f64> {
            let (v, e) = norm(h, two, &cfg)?;
            evals += e;
            Ok(v * v)
        };
        let lhs = sq(&f.combine(1.0, &g, 1.0))? + sq(&f.combine(1.0, &g, -1.0))?;
        let rhs = 2.0 * sq(&f)? + 2.0 * sq(&g)?;
        defect = defect.max((lhs - rhs).abs());
    }
    rec.check("parallelogram_law", defect, 1e-9, evals);

    let w = WeightSequence::default();
    let mut holder = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(1..=64);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let (lhs, rhs) = weighted_holder(&a, &b, Exponent::Finite(rng.gen_range(1.0..8.0)), &w);
        holder = holder.max(lhs - rhs);
    }
    rec.check("weighted_holder", holder, 1e-12, 0);

    let ps = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0].map(Exponent::Finite);
    let (mut chain, mut evals) = (f64::NEG_INFINITY, 0);
    for _ in 0..20 {
        let f = Step::random(rng);
        let mut prev = 0.0;
        for p in ps.iter().copied().chain([Exponent::Infinity]) {
            let (v, e) = norm(&f, p, &cfg)?;
            evals += e;
            chain = chain.max(prev - v);
            prev = v;
        }
    }
    rec.check("monotone_in_p", chain, 1e-12, evals);
    Ok(())
}

fn weak_strong(rec: &mut Recorder) -> Result<()> {
    let cfg = KpConfig::new(vec![iv(0.0, 2.0 * PI)])?;
    let mut values = Vec::new();
    let mut evals = 0;
    for j in 0..=6 {
        let m = (1u32 << j) as f64;
        let f = KpIntegrand::scalar(move |x| (m * x).sin()).with_abs_bound(2.0 * PI);
        let r = kp_norm(&f, Exponent::Finite(2.0), &cfg)?;
        evals += r.evaluations;
        values.push(r.value);
    }
    rec.check(
        "sixteenfold_decay",
        values[6] - values[0] / 16.0,
        0.0,
        evals,
    );
    let rise = values[2..]
        .windows(2)
        .fold(f64::NEG_INFINITY, |m, w| m.max(w[1] - w[0]));
    rec.check("non_increasing_from_m4", rise, 1e-15, 0);
    Ok(())
}

fn fourier(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let opts = NdOptions::default();
    let chi = TameFunction::indicator(vec![Interval::canonical_j()], TailFamily::CanonicalJ)?;
    let (mut err, mut evals) = (0.0f64, 0);
    for i in 0..64 {
        let y = -4.0 + 8.0 * i as f64 / 63.0;
        let exact = if y == 0.0 {
            1.0
        } else {
            (PI * y).sin() / (PI * y)
        };
        let v = fourier_tame(&chi, &FrequencyPoint::new(vec![y]), &opts)?;
        evals += v.evaluations;
        err = err.max((v.value.re - exact).abs()).max(v.value.im.abs());
    }
    rec.check("sinc_transform", err, 1e-10, evals);

    let grid: Vec<FrequencyPoint> = (0..33)
        .map(|i| FrequencyPoint::new(vec![-4.0 + 0.25 * i as f64]))
        .collect();
    let steps: Vec<Step> = (0..20).map(|_| Step::random(rng)).collect();
    let (mut bound, mut evals) = (f64::NEG_INFINITY, 0);
    for s in &steps {
        let r = fourier_bound_check(&s.tame(), &grid, &opts)?;
        evals += r.evaluations;
        bound = bound.max(r.max_abs - r.l1_norm).max(r.max_abs - s.l1());
    }
    rec.check("bounded_by_l1", bound, 1e-9, evals);

    let (mut lin, mut conj, mut evals) = (0.0f64, 0.0f64, 0);
    for pair in steps.chunks(2) {
        let (f, g) = (&pair[0], &pair[1]);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let y = FrequencyPoint::new(
            (0..rng.gen_range(1..4))
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect(),
        );
        let ff = fourier_tame(&f.tame(), &y, &opts)?;
        let fg = fourier_tame(&g.tame(), &y, &opts)?;
        let fh = fourier_tame(&f.combine(a, g, b).tame(), &y, &opts)?;
        let neg = fourier_tame(&f.tame(), &y.negate(), &opts)?;
        evals += ff.evaluations + fg.evaluations + fh.evaluations + neg.evaluations;
        lin = lin.max((fh.value - (ff.value * a + fg.value * b)).norm());
        conj = conj.max((neg.value - ff.value.conj()).norm());
    }
    rec.check("linearity", lin, 1e-9, evals);
    rec.check("conjugate_symmetry", conj, 1e-9, 0);

    let mut tail = f64::NEG_INFINITY;
    for _ in 0..200 {
        let y: Vec<f64> = (0..rng.gen_range(0..8))
            .map(|_| rng.gen_range(-50.0..50.0))
            .collect();
        tail = tail.max(sinc_tail(&FrequencyPoint::new(y), rng.gen_range(0..8)).abs() - 1.0);
    }
    rec.check("sinc_tail_bounded", tail, 0.0, 0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_for_some_seeds() {
        for seed in [0, 7] {
            for s in Suite::ALL {
                let r = run_suite(s, seed, false).unwrap();
                assert_eq!(r.failed, 0, "{s:?}: {:?}", r.rows);
                assert!(!r.rows.is_empty());
            }
        }
    }

    #[test]
    fn suites_are_reproducible() {
        let a = run_suite(Suite::Minkowski, 3, false).unwrap();
        let b = run_suite(Suite::Minkowski, 3, false).unwrap();
        assert_eq!(a.rows, b.rows);
    }
}
