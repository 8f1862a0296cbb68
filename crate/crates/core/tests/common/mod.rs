#![allow(dead_code)]

use ks_core::{Interval, KpConfig, KpIntegrand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Piecewise-constant function on `[0, 1]` with `2^level` equal pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicStep {
    pub values: Vec<f64>,
}

impl DyadicStep {
    pub fn random(rng: &mut impl Rng) -> Self {
        let level = rng.gen_range(0..=4u32);
        let values = (0..1usize << level)
            .map(|_| rng.gen_range(-2.0..2.0))
            .collect();
        Self { values }
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let n = self.pieces();
        let i = ((x * n as f64) as usize).min(n - 1);
        self.values[i]
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let n = self.pieces();
        (1..n).map(|i| i as f64 / n as f64).collect()
    }

    pub fn integrand(&self) -> KpIntegrand {
        let s = self.clone();
        KpIntegrand::scalar(move |x| s.eval(x)).with_breakpoints(self.breakpoints())
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let n = self.pieces().max(other.pieces());
        let values = (0..n)
            .map(|i| {
                let mid = (i as f64 + 0.5) / n as f64;
                a * self.eval(mid) + b * other.eval(mid)
            })
            .collect();
        Self { values }
    }

    /// Exact `∫_lo^hi` by summing piece overlaps.
    pub fn exact_integral(&self, lo: f64, hi: f64) -> f64 {
        let n = self.pieces() as f64;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (a, b) = (i as f64 / n, (i + 1) as f64 / n);
                v * (hi.min(b) - lo.max(a)).max(0.0)
            })
            .sum()
    }

    /// Exact `(∫_0^1 |f|^q)^(1/q)`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let n = self.pieces() as f64;
        (self.values.iter().map(|v| v.abs().powf(q)).sum::<f64>() / n).powf(1.0 / q)
    }
}

pub fn corpus(seed: u64, count: usize) -> Vec<DyadicStep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| DyadicStep::random(&mut rng)).collect()
}

pub fn unit_window() -> KpConfig {
    KpConfig::new(vec![Interval::unit()]).unwrap()
}

/// Breadth-first dyadic cell `k` of `[0, 1]`, computed independently of the
/// library enumeration.
pub fn dyadic_cell(k: usize) -> (f64, f64) {
    let level = usize::BITS - 1 - k.leading_zeros();
    let offset = k - (1 << level);
    let w = 1.0 / (1u64 << level) as f64;
    (offset as f64 * w, (offset + 1) as f64 * w)
}

/// `(sum_{k<=K} 2^-k |a_k|^p)^(1/p)` of a step function from exact cell
/// integrals.
pub fn oracle_kp_norm(f: &DyadicStep, p: f64, truncation: usize) -> f64 {
    let a = (1..=truncation).map(|k| {
        let (lo, hi) = dyadic_cell(k);
        f.exact_integral(lo, hi)
    });
    if p.is_infinite() {
        return a.fold(0.0f64, |m, x| m.max(x.abs()));
    }
    let s: f64 = a
        .enumerate()
        .map(|(i, x)| 0.5f64.powi(i as i32 + 1) * x.abs().powf(p))
        .sum();
    s.powf(1.0 / p)
}
