//! Fourier transform of tame functions.
//!
//! The kernel is `exp(-2πi <x, y>)`, under which the transform of the
//! indicator of `J = [-1/2, 1/2]` is the normalized sinc `sin(πy)/(πy)`. The
//! transform of an order-`n` tame function is therefore the finite-dimensional
//! transform of its core times the sinc tail over coordinates `k > n`. Only
//! explicit frequency coordinates enter the tail product; implicit zeros
//! contribute a factor of exactly 1.

use num_complex::Complex64;

use crate::box_measure::TailFamily;
use crate::error::{Error, Result};
use crate::gauge::{integrate_nd, NdOptions};
use crate::tame::TameFunction;

/// Frequency with finitely many explicit coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrequencyPoint(Vec<f64>);

impl FrequencyPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Coordinate `k` (1-based); zero beyond the explicit entries.
    pub fn get(&self, k: usize) -> f64 {
        self.0.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn negate(&self) -> Self {
        Self(self.0.iter().map(|y| -y).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierValue {
    pub value: Complex64,
    pub tail_factor: f64,
    pub head_dim: usize,
    pub error_bound: f64,
    pub evaluations: usize,
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // reduce to r in [-1, 1] with sin(πx) = sin(πr)
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    let s = r.signum();
    let a = r.abs();
    let a = if a > 0.5 { 1.0 - a } else { a };
    s * (std::f64::consts::PI * a).sin()
}

/// Normalized sinc, `sin(πx)/(πx)` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    let px = std::f64::consts::PI * x;
    if px.abs() < 1e-4 {
        let p2 = px * px;
        1.0 - p2 / 6.0 + p2 * p2 / 120.0
    } else {
        sin_pi(x) / px
    }
}

/// `prod_{k>n, explicit} sinc(y_k)`.
pub fn sinc_tail(y: &FrequencyPoint, n: usize) -> f64 {
    y.coords().iter().skip(n).map(|&v| sinc(v)).product()
}

/// Transform of `f` at `y`: real and imaginary parts of the core transform
/// are integrated separately over the core's domain.
pub fn fourier_tame(
    f: &TameFunction,
    y: &FrequencyPoint,
    opts: &NdOptions,
) -> Result<FourierValue> {
    if f.tail() != TailFamily::CanonicalJ {
        return Err(Error::Unsupported(
            "the sinc tail is the transform of the canonical J tail only".into(),
        ));
    }
    let n = f.order();
    let head: Vec<f64> = (1..=n).map(|k| y.get(k)).collect();
    let tau = 2.0 * std::f64::consts::PI;
    let phase = |x: &[f64]| -> f64 { tau * x.iter().zip(&head).map(|(a, b)| a * b).sum::<f64>() };
    let core = f.core();
    let re = integrate_nd(|x| core(x) * phase(x).cos(), f.domain(), opts)?;
    let im = integrate_nd(|x| -core(x) * phase(x).sin(), f.domain(), opts)?;
    let tail = sinc_tail(y, n);
    Ok(FourierValue {
        value: Complex64::new(re.value, im.value) * tail,
        tail_factor: tail,
        head_dim: n,
        error_bound: (re.error_estimate + im.error_estimate) * tail.abs(),
        evaluations: re.evaluations + im.evaluations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierBoundReport {
    pub max_abs: f64,
    pub argmax: Option<FrequencyPoint>,
    pub l1_norm: f64,
    pub slack: f64,
    pub pass: bool,
    pub evaluations: usize,
}

/// Checks `max_y |F f(y)| <= ∫|core|` over a grid of frequencies.
pub fn fourier_bound_check(
    f: &TameFunction,
    grid: &[FrequencyPoint],
    opts: &NdOptions,
) -> Result<FourierBoundReport> {
    let core = f.core();
    let l1 = integrate_nd(|x| core(x).abs(), f.domain(), opts)?;
    let mut max_abs = 0.0f64;
    let mut argmax = None;
    let mut worst_err = 0.0f64;
    let mut evaluations = l1.evaluations;
    for y in grid {
        let v = fourier_tame(f, y, opts)?;
        evaluations += v.evaluations;
        worst_err = worst_err.max(v.error_bound);
        let a = v.value.norm();
        if a > max_abs || argmax.is_none() {
            max_abs = a;
            argmax = Some(y.clone());
        }
    }
    let slack = l1.error_estimate + worst_err + 1e-12;
    Ok(FourierBoundReport {
        max_abs,
        argmax,
        l1_norm: l1.value,
        slack,
        pass: max_abs <= l1.value + slack,
        evaluations,
    })
}
