mod common;

use common::{corpus, dyadic_cell, oracle_kp_norm, unit_window, DyadicStep};
use ks_core::box_measure::{
    box_intersect, box_union, j_interval, mu_B, mu_B_disjoint, vjn_measure,
};
use ks_core::fourier::{fourier_tame, sinc, sinc_tail};
use ks_core::gauge::{
    cousin_partition, gauge_riemann_integrate, hk_integrate, is_delta_fine, riemann_sum,
};
use ks_core::infinite::{integrate_limit, integrate_tame};
use ks_core::kp::{functional, k2_inner, kp_norm, weighted_holder};
use ks_core::tame::{bjn_norm, sup_norm, tame_eval, LpBasis};
use ks_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

fn cfg() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn step() -> impl Strategy<Value = DyadicStep> {
    any::<u64>().prop_map(|s| DyadicStep::random(&mut ChaCha8Rng::seed_from_u64(s)))
}

fn interval(lo: f64, hi: f64) -> impl Strategy<Value = Interval> {
    (lo..hi, 0.01..(hi - lo)).prop_map(|(a, w)| iv(a, a + w))
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn finer_gauge_partitions_are_fine_for_the_coarser(
        a in 0.005..0.2f64, b in 0.0..0.3f64, c in 0.5..20.0f64, shrink in 0.05..1.0f64
    ) {
        let coarse = Gauge::new(move |t| a + b * (c * t).sin().powi(2));
        let fine = Gauge::new(move |t| shrink * (a + b * (c * t).sin().powi(2)) * (0.5 + 0.5 * (t * 3.0).cos().abs()));
        let fine = fine.min(&coarse);
        let p = cousin_partition(&fine, iv(-1.0, 2.0)).unwrap();
        prop_assert!(is_delta_fine(&p, &fine));
        prop_assert!(is_delta_fine(&p, &coarse));
        prop_assert_eq!(p.span(), iv(-1.0, 2.0));
    }

    #[test]
    fn riemann_sums_of_fine_partitions_agree(
        a in -2.0..2.0f64, w in 0.5..6.0f64, c in -1.0..1.0f64, eps in 1e-6..1e-3f64
    ) {
        let f = move |x: f64| a * (w * x).sin() + c * x * x;
        let domain = iv(0.0, 1.5);
        let (r, g) = gauge_riemann_integrate(f, domain, eps).unwrap();
        let half = Gauge::new({
            let g = g.clone();
            move |t| 0.37 * g.eval(t)
        });
        let p = cousin_partition(&half, domain).unwrap();
        prop_assert!(is_delta_fine(&p, &g));
        let r2 = riemann_sum(f, &p).unwrap();
        prop_assert!((r.value - r2).abs() <= 2.0 * r.error_estimate);
    }

    #[test]
    fn hk_is_linear_and_additive(
        a in -3.0..3.0f64, b in -3.0..3.0f64, w in 0.1..8.0f64, split in 0.05..0.95f64
    ) {
        let opts = HkOptions::with_tol(1e-10);
        let f = move |x: f64| (w * x).cos();
        let g = |x: f64| (-x * x).exp();
        let d = iv(-1.0, 2.0);
        let rf = hk_integrate(f, d, &opts).unwrap();
        let rg = hk_integrate(g, d, &opts).unwrap();
        let rh = hk_integrate(|x| a * f(x) + b * g(x), d, &opts).unwrap();
        let bound = rh.error_estimate + a.abs() * rf.error_estimate + b.abs() * rg.error_estimate;
        prop_assert!((rh.value - a * rf.value - b * rg.value).abs() <= bound + 1e-14);

        let m = -1.0 + 3.0 * split;
        let left = hk_integrate(f, iv(-1.0, m), &opts).unwrap();
        let right = hk_integrate(f, iv(m, 2.0), &opts).unwrap();
        let bound = rf.error_estimate + left.error_estimate + right.error_estimate;
        prop_assert!((rf.value - left.value - right.value).abs() <= bound + 1e-14);
    }

    #[test]
    fn measure_is_finitely_additive(
        base in prop::collection::vec(interval(-5.0, 5.0), 1..5),
        cuts in prop::collection::vec(0.0..1.0f64, 4)
    ) {
        let whole = BoxSet::canonical(base.clone()).unwrap();
        // cut every axis once: 2^d disjoint pieces
        let d = base.len();
        let mut parts = Vec::new();
        for mask in 0..1usize << d {
            let sides = base.iter().enumerate().map(|(i, b)| {
                let (l, r) = b.split_at(b.lo() + cuts[i] * b.len());
                if mask >> i & 1 == 0 { l } else { r }
            });
            parts.push(BoxSet::canonical(sides.collect()).unwrap());
        }
        let total = mu_B_disjoint(&parts).unwrap().value();
        let v = mu_B(&whole).unwrap().value();
        prop_assert!((total - v).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn union_measure_is_inclusion_exclusion(
        a in prop::collection::vec(interval(-2.0, 2.0), 2),
        b in prop::collection::vec(interval(-2.0, 2.0), 2)
    ) {
        let (a, b) = (BoxSet::canonical(a).unwrap(), BoxSet::canonical(b).unwrap());
        let parts = box_union(&a, &b).unwrap();
        let lhs = mu_B_disjoint(&parts).unwrap().value();
        let both = box_intersect(&a, &b).unwrap().map_or(0.0, |c| mu_B(&c).unwrap().value());
        let rhs = mu_B(&a).unwrap().value() + mu_B(&b).unwrap().value() - both;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn measure_is_translation_and_promotion_invariant(
        base in prop::collection::vec(interval(-3.0, 3.0), 1..5),
        shift in prop::collection::vec(-100.0..100.0f64, 4),
        extra in 0usize..4
    ) {
        let a = BoxSet::canonical(base.clone()).unwrap();
        let v = mu_B(&a).unwrap().value();
        let moved = mu_B(&a.translate(&shift[..base.len()])).unwrap().value();
        prop_assert!((moved - v).abs() <= 1e-12 * v.max(1.0));
        let promoted = a.promote(base.len() + extra);
        prop_assert_eq!(mu_B(&promoted).unwrap().value(), v);
    }

    #[test]
    fn vjn_never_grows_when_a_factor_shrinks(
        ks in prop::collection::btree_set(1usize..40, 1..5),
        fracs in prop::collection::vec((0.0..1.0f64, 0.05..1.0f64), 5),
        pick in 0usize..5, keep in 0.0..1.0f64, n in 0usize..45
    ) {
        let factors: Vec<(usize, Interval)> = ks.iter().zip(&fracs).map(|(&k, &(s, w))| {
            let j = j_interval(k);
            let lo = j.lo() + s * (1.0 - w) * j.len();
            (k, iv(lo, lo + w * j.len()))
        }).collect();
        let a = ElementaryProduct::new(factors.clone(), 64).unwrap();
        let (k, f) = factors[pick % factors.len()];
        let shrunk = a.with_factor(k, iv(f.lo(), f.lo() + keep * f.len()));
        let before = vjn_measure(&a, n).unwrap().value();
        let after = vjn_measure(&shrunk, n).unwrap().value();
        prop_assert!(after <= before);
    }

    #[test]
    fn bjn_is_a_monotone_norm(
        x in prop::collection::vec(-10.0..10.0f64, 0..12),
        y in prop::collection::vec(-10.0..10.0f64, 0..12),
        alpha in -5.0..5.0f64
    ) {
        for oracle in [LpBasis::l1(), LpBasis::l2()] {
            let (x, y) = (CoordinateVector::new(x.clone()), CoordinateVector::new(y.clone()));
            let mut prev = 0.0;
            for n in 1..=14 {
                let v = bjn_norm(&x, n, &oracle);
                prop_assert!(v >= prev);
                prev = v;
                let scaled = bjn_norm(&x.scale(alpha), n, &oracle);
                prop_assert!((scaled - alpha.abs() * v).abs() <= 1e-12 * (1.0 + scaled));
                let sum = bjn_norm(&x.add(&y), n, &oracle);
                prop_assert!(sum <= v + bjn_norm(&y, n, &oracle) + 1e-12);
            }
            prop_assert_eq!(sup_norm(&x, &oracle), bjn_norm(&x, x.support_len(), &oracle));
        }
    }

    #[test]
    fn tame_functions_vanish_off_their_cylinder(
        head in prop::collection::vec(-0.5..0.5f64, 2),
        k in 3usize..10, out in 0.01..5.0f64, scaled in any::<bool>()
    ) {
        let tail = if scaled { TailFamily::ScaledJ } else { TailFamily::CanonicalJ };
        let f = TameFunction::new(|x| 1.0 + x[0] * x[0] + x[1], vec![Interval::canonical_j(); 2], tail).unwrap();
        let mut x = head.clone();
        x.resize(k, 0.0);
        let inside = CoordinateVector::new(x.clone());
        prop_assert!(tame_eval(&f, &inside).unwrap() != 0.0);
        x[k - 1] = tail.factor(k).hi() + out;
        prop_assert_eq!(tame_eval(&f, &CoordinateVector::new(x)).unwrap(), 0.0);
    }

    #[test]
    fn functionals_match_exact_cell_integrals(f in step(), k in 1usize..200) {
        let cfg = unit_window();
        let (lo, hi) = dyadic_cell(k);
        let a = functional(k, &f.integrand(), &cfg).unwrap().value;
        prop_assert!((a - f.exact_integral(lo, hi)).abs() < 1e-13);
    }

    #[test]
    fn kp_norm_matches_oracle_and_is_homogeneous(f in step(), alpha in -4.0..4.0f64, p in 1.0..6.0f64) {
        let cfg = unit_window();
        let p = Exponent::new(p).unwrap();
        let Exponent::Finite(pv) = p else { unreachable!() };
        let n = kp_norm(&f.integrand(), p, &cfg).unwrap();
        prop_assert!((n.value - oracle_kp_norm(&f, pv, 64)).abs() < 1e-12);
        let scaled = f.combine(alpha, &f, 0.0);
        let ns = kp_norm(&scaled.integrand(), p, &cfg).unwrap();
        prop_assert!((ns.value - alpha.abs() * n.value).abs() < 1e-12);
        prop_assert!(n.value >= 0.0 && n.tail_bound >= 0.0);
    }

    #[test]
    fn minkowski_and_parallelogram(f in step(), g in step()) {
        let cfg = unit_window();
        for p in [1.0, 2.0, 4.0] {
            let p = Exponent::Finite(p);
            let nf = kp_norm(&f.integrand(), p, &cfg).unwrap().value;
            let ng = kp_norm(&g.integrand(), p, &cfg).unwrap().value;
            let ns = kp_norm(&f.combine(1.0, &g, 1.0).integrand(), p, &cfg).unwrap().value;
            prop_assert!(ns <= nf + ng + 1e-12);
        }
        let two = Exponent::Finite(2.0);
        let sq = |h: &DyadicStep| kp_norm(&h.integrand(), two, &cfg).unwrap().value.powi(2);
        let lhs = sq(&f.combine(1.0, &g, 1.0)) + sq(&f.combine(1.0, &g, -1.0));
        let rhs = 2.0 * sq(&f) + 2.0 * sq(&g);
        prop_assert!((lhs - rhs).abs() < 1e-9);
        let inner = k2_inner(&f.integrand(), &g.integrand(), &cfg).unwrap().value;
        let polar = 0.25 * (sq(&f.combine(1.0, &g, 1.0)) - sq(&f.combine(1.0, &g, -1.0)));
        prop_assert!((inner - polar).abs() < 1e-9);
    }

    #[test]
    fn weighted_holder_holds(
        a in prop::collection::vec(-5.0..5.0f64, 1..64),
        b in prop::collection::vec(-5.0..5.0f64, 64),
        p in 1.0..8.0f64
    ) {
        let w = WeightSequence::geometric(0.5).unwrap();
        let (lhs, rhs) = weighted_holder(&a, &b[..a.len()], Exponent::Finite(p), &w);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn kp_norm_is_monotone_in_p(f in step(), p in 1.0..4.0f64, dp in 0.0..4.0f64) {
        let cfg = unit_window();
        let lo = kp_norm(&f.integrand(), Exponent::Finite(p), &cfg).unwrap().value;
        let hi = kp_norm(&f.integrand(), Exponent::Finite(p + dp), &cfg).unwrap().value;
        let inf = kp_norm(&f.integrand(), Exponent::Infinity, &cfg).unwrap().value;
        prop_assert!(lo <= hi + 1e-12);
        prop_assert!(hi <= inf + 1e-12);
    }

    #[test]
    fn constant_sequence_limit_equals_tame_integral(f in step()) {
        let tcfg = TailMeasureConfig::canonical();
        let s = f.clone();
        let tame = TameFunction::new(move |x| s.eval(x[0]), vec![Interval::unit()], TailFamily::CanonicalJ).unwrap();
        let direct = integrate_tame(&tame, &tcfg).unwrap().value;
        let t = tame.clone();
        let r = integrate_limit(move |_| t.clone(), &tcfg, 1e-9, 10).unwrap();
        prop_assert_eq!(r.value, direct);
        // promotion by one full J coordinate leaves the integral unchanged
        let promoted = integrate_tame(&tame.promote(), &tcfg).unwrap().value;
        prop_assert!((promoted - direct).abs() < 1e-8);
    }

    #[test]
    fn monotone_sequences_have_monotone_integrals(c in 0.1..3.0f64, w in 0.5..5.0f64) {
        let tcfg = TailMeasureConfig::canonical();
        let g = move |x: f64| c * (1.0 + (w * x).sin()) ;
        let seq = move |n: usize| {
            let cap = n as f64 * 0.25;
            TameFunction::new(move |x| g(x[0]).min(cap), vec![Interval::unit()], TailFamily::CanonicalJ).unwrap()
        };
        let mut prev = f64::NEG_INFINITY;
        for n in 0..20 {
            let v = integrate_tame(&seq(n), &tcfg).unwrap().value;
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn fourier_is_linear_bounded_and_conjugate_symmetric(
        f in step(), g in step(), a in -2.0..2.0f64, b in -2.0..2.0f64,
        y in prop::collection::vec(-3.0..3.0f64, 1..4)
    ) {
        let opts = NdOptions::default();
        let tame = |h: &DyadicStep| {
            let h = h.clone();
            TameFunction::new(move |x| h.eval(x[0]), vec![Interval::unit()], TailFamily::CanonicalJ).unwrap()
        };
        let y = FrequencyPoint::new(y);
        let ff = fourier_tame(&tame(&f), &y, &opts).unwrap();
        let fg = fourier_tame(&tame(&g), &y, &opts).unwrap();
        let fh = fourier_tame(&tame(&f.combine(a, &g, b)), &y, &opts).unwrap();
        prop_assert!((fh.value - (ff.value * a + fg.value * b)).norm() < 1e-9);

        prop_assert!(ff.value.norm() <= f.lq_norm(1.0) + 1e-9);
        prop_assert!(ff.tail_factor.abs() <= 1.0);

        let neg = fourier_tame(&tame(&f), &y.negate(), &opts).unwrap();
        prop_assert!((neg.value - ff.value.conj()).norm() < 1e-9);
    }

    #[test]
    fn sinc_tail_is_bounded_and_ignores_zero_coordinates(
        y in prop::collection::vec(-50.0..50.0f64, 0..8), n in 0usize..8, zeros in 0usize..5
    ) {
        let t = sinc_tail(&FrequencyPoint::new(y.clone()), n);
        prop_assert!(t.abs() <= 1.0);
        let mut padded = y.clone();
        padded.extend(std::iter::repeat_n(0.0, zeros));
        prop_assert_eq!(sinc_tail(&FrequencyPoint::new(padded), n), t);
        let head: Vec<f64> = y.iter().take(n).copied().collect();
        prop_assert_eq!(sinc_tail(&FrequencyPoint::new(head), n), 1.0);
    }
}

#[test]
fn functionals_are_bitwise_reproducible() {
    let cfg = unit_window();
    for f in corpus(7, 10) {
        let a = kp_norm(&f.integrand(), Exponent::Finite(2.0), &cfg).unwrap();
        let b = kp_norm(&f.integrand(), Exponent::Finite(2.0), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn sinc_matches_series_near_zero() {
    for i in 1..100 {
        let x = i as f64 * 1e-7;
        let px = std::f64::consts::PI * x;
        assert!((sinc(x) - px.sin() / px).abs() < 1e-15);
    }
}

/// Rotated boxes in two and three dimensions have the axis-aligned volume,
/// estimated by Monte Carlo.
#[test]
fn rotated_box_volume_matches_mu_b() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for dim in 2..=3 {
        for _ in 0..3 {
            let base: Vec<Interval> = (0..dim)
                .map(|_| {
                    let lo = rng.gen_range(-1.0..0.0);
                    iv(lo, lo + rng.gen_range(0.3..1.0))
                })
                .collect();
            let b = BoxSet::canonical(base.clone()).unwrap();
            let rot = random_rotation(dim, &mut rng);
            // sample in the axis-aligned hull of the rotated corners
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for mask in 0..1usize << dim {
                let corner: Vec<f64> = (0..dim)
                    .map(|i| {
                        if mask >> i & 1 == 0 {
                            base[i].lo()
                        } else {
                            base[i].hi()
                        }
                    })
                    .collect();
                for j in 0..dim {
                    let v: f64 = (0..dim).map(|i| rot[j][i] * corner[i]).sum();
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
            let hull: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
            let samples = 1_000_000;
            let mut hits = 0usize;
            let mut x = vec![0.0; dim];
            let mut back = vec![0.0; dim];
            for _ in 0..samples {
                for (j, c) in x.iter_mut().enumerate() {
                    *c = rng.gen_range(lo[j]..hi[j]);
                }
                // back-rotate with the transpose and test membership
                for (i, v) in back.iter_mut().enumerate() {
                    *v = (0..dim).map(|j| rot[j][i] * x[j]).sum();
                }
                if b.contains(&back) {
                    hits += 1;
                }
            }
            let est = hits as f64 / samples as f64 * hull;
            let exact = mu_B(&b).unwrap().value();
            assert!(
                ((est - exact) / exact).abs() < 1e-2,
                "dim {dim}: {est} vs {exact}"
            );
        }
    }
}

fn random_rotation(dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    // Gram-Schmidt on a random matrix
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 {
            q.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    q
}
