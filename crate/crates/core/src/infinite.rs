//! Integration over the infinite product as a limit of tame approximants.

use crate::box_measure::{j_interval, TailFamily};
use crate::error::{Error, Result};
use crate::gauge::{integrate_nd, IntegralResult, NdOptions};
use crate::tame::TameFunction;

/// How the finite-dimensional integral of a tame function is scaled by the
/// measures of its first `n` tail intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMeasureConfig {
    pub family: TailFamily,
    /// Multiply by `prod_{i<=n} mu(J_i)`. With `false` the plain
    /// finite-dimensional integral is returned.
    pub normalize: bool,
    pub quad: NdOptions,
}

impl TailMeasureConfig {
    pub fn canonical() -> Self {
        Self {
            family: TailFamily::CanonicalJ,
            normalize: true,
            quad: NdOptions::default(),
        }
    }

    pub fn scaled() -> Self {
        Self {
            family: TailFamily::ScaledJ,
            ..Self::canonical()
        }
    }

    pub fn without_normalization(mut self) -> Self {
        self.normalize = false;
        self
    }
}

/// `prod_{i=1}^n mu(J_i)`, accumulated in log space for the scaled family.
pub fn tail_measure_product(family: TailFamily, n: usize) -> f64 {
    match family {
        TailFamily::CanonicalJ => 1.0,
        TailFamily::ScaledJ => {
            let log: f64 =
                crate::summation::compensated_sum((1..=n).map(|i| j_interval(i).len().ln()));
            log.exp()
        }
    }
}

/// `∫ core dμ x prod_{i<=n} mu(J_i)` for an order-`n` tame function.
pub fn integrate_tame(f: &TameFunction, cfg: &TailMeasureConfig) -> Result<IntegralResult> {
    if f.tail() != cfg.family {
        return Err(Error::TailFamilyMismatch);
    }
    let core = f.core().clone();
    let r = integrate_nd(|x| core(x), f.domain(), &cfg.quad)?;
    let scale = if cfg.normalize {
        tail_measure_product(cfg.family, f.order())
    } else {
        1.0
    };
    Ok(IntegralResult {
        value: r.value * scale,
        error_estimate: r.error_estimate * scale,
        evaluations: r.evaluations,
    })
}

/// Number of consecutive small differences that signals convergence.
pub const CAUCHY_RUN: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub value: f64,
    /// `(n, integral of the n-th term)` for every term evaluated.
    pub terms: Vec<(usize, f64)>,
    pub converged: bool,
    pub criterion: String,
}

fn pattern(partials: &[f64], tol: f64) -> String {
    let diffs: Vec<f64> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &diffs[diffs.len().saturating_sub(8)..];
    let alternating = tail.len() >= 2
        && tail.windows(2).all(|w| w[0] * w[1] < 0.0)
        && tail.iter().all(|d| d.abs() >= tol);
    if alternating {
        let amp = tail.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        format!("oscillating differences of magnitude up to {amp:e}")
    } else if tail.iter().all(|d| d.abs() >= tol) {
        let last = tail.last().copied().unwrap_or(f64::NAN);
        format!("differences have not dropped below tol; last {last:e}")
    } else {
        "differences below tol but not for 3 consecutive terms".into()
    }
}

/// Integrates `seq(0), seq(1), ...` until three consecutive successive
/// differences fall below `tol`; the value is the last partial integral.
///
/// Terms are indexed from 0, so a constant sequence converges at `n = 3`.
pub fn integrate_limit<S>(
    mut seq: S,
    cfg: &TailMeasureConfig,
    tol: f64,
    max_n: usize,
) -> Result<ConvergenceReport>
where
    S: FnMut(usize) -> TameFunction,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let mut terms = Vec::new();
    let mut partials = Vec::new();
    let mut run = 0usize;
    let mut last_order = 0usize;
    for n in 0..=max_n {
        let f = seq(n);
        if f.order() < last_order {
            return Err(Error::InvalidInput(format!(
                "term {n} has order {} below the previous order {last_order}",
                f.order()
            )));
        }
        last_order = f.order();
        let v = integrate_tame(&f, cfg)?.value;
        if let Some(&prev) = partials.last() {
            let d: f64 = v - prev;
            run = if d.abs() < tol { run + 1 } else { 0 };
        }
        partials.push(v);
        terms.push((n, v));
        if run >= CAUCHY_RUN {
            return Ok(ConvergenceReport {
                value: v,
                terms,
                converged: true,
                criterion: format!("{CAUCHY_RUN} consecutive differences below {tol:e}"),
            });
        }
    }
    Err(Error::NotCauchy {
        terms: terms.len(),
        pattern: pattern(&partials, tol),
        partials,
    })
}
