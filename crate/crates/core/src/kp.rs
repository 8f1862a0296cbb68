//! Kuelbs-Steadman `K^p` norms and the `K^2` inner product.
//!
//! The duality family is the breadth-first enumeration of dyadic sub-boxes of
//! a working window `W`: level `l` splits `W` into `2^(l d)` congruent cells,
//! listed in row-major order, so in one dimension level `l` holds indices
//! `2^l ..= 2^(l+1) - 1`. Each `E_k` is the indicator of its cell, which gives
//! `0 <= E_k <= 1` and `E_k^q <= E_k` exactly. (Indicators of dyadic cells are
//! not dense in the unit ball of `L^1`; only the two properties above are
//! relied upon.)
//!
//! With weights `t_k > 0`, `sum t_k = 1`, and cell integrals
//! `a_k = ∫ E_k f`, the norm is `(sum t_k |a_k|^p)^(1/p)` (or `sup |a_k|`).
//! The sum is truncated at `K` terms; the neglected tail is reported as
//! `tail_bound`, never dropped.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::box_measure::BoxSet;
use crate::error::{Error, Result};
use crate::gauge::{hk_integrate, integrate_nd, HkOptions, IntegralResult, NdOptions};
use crate::interval::Interval;
use crate::summation::{compensated_sum, CompensatedSum};

/// Dyadic indicator family on a working window.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityFamily {
    window: Vec<Interval>,
}

impl DualityFamily {
    pub fn new(window: Vec<Interval>) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::InvalidInput("window needs at least one axis".into()));
        }
        if window.iter().any(Interval::is_degenerate) {
            return Err(Error::InvalidInput(
                "window axes must have positive length".into(),
            ));
        }
        Ok(Self { window })
    }

    pub fn window(&self) -> &[Interval] {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.len()
    }

    /// `(level, offset within level)` of index `k >= 1`.
    pub fn locate(&self, k: usize) -> (u32, u64) {
        assert!(k >= 1, "E_k is indexed from 1");
        let d = self.dim() as u32;
        let mut first: u64 = 1;
        let mut level = 0u32;
        loop {
            let count = 1u64 << (level * d);
            if (k as u64) < first + count {
                return (level, k as u64 - first);
            }
            first += count;
            level += 1;
        }
    }

    /// Support of `E_k`.
    pub fn cell(&self, k: usize) -> Vec<Interval> {
        let (level, mut offset) = self.locate(k);
        let per_axis = 1u64 << level;
        let mut idx = vec![0u64; self.dim()];
        for slot in idx.iter_mut().rev() {
            *slot = offset % per_axis;
            offset /= per_axis;
        }
        self.window
            .iter()
            .zip(idx)
            .map(|(w, i)| {
                let h = w.len() / per_axis as f64;
                let lo = w.lo() + h * i as f64;
                let hi = if i + 1 == per_axis {
                    w.hi()
                } else {
                    w.lo() + h * (i + 1) as f64
                };
                Interval::new(lo, hi).expect("dyadic cell")
            })
            .collect()
    }
}

/// Positive weights summing to one.
#[derive(Clone)]
pub enum WeightSequence {
    /// `t_k = (1 - r) r^(k-1)`; `r = 1/2` gives `t_k = 2^-k`.
    Geometric { ratio: f64 },
    /// `t_k = w(k) / total`, with `tail(K) = sum_{k>K} w(k)` known in closed form.
    Normalized {
        weight: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        total: f64,
        tail: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Geometric { ratio } => write!(f, "Geometric {{ ratio: {ratio} }}"),
            WeightSequence::Normalized { total, .. } => {
                write!(f, "Normalized {{ total: {total}, .. }}")
            }
        }
    }
}

impl Default for WeightSequence {
    fn default() -> Self {
        WeightSequence::Geometric { ratio: 0.5 }
    }
}

impl WeightSequence {
    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput(format!(
                "geometric ratio must lie in (0, 1), got {ratio}"
            )));
        }
        Ok(WeightSequence::Geometric { ratio })
    }

    pub fn weight(&self, k: usize) -> f64 {
        match self {
            WeightSequence::Geometric { ratio } => (1.0 - ratio) * ratio.powi(k as i32 - 1),
            WeightSequence::Normalized { weight, total, .. } => weight(k) / total,
        }
    }

    /// `sum_{k > n} t_k`.
    pub fn tail_sum(&self, n: usize) -> f64 {
        match self {
            WeightSequence::Geometric { ratio } => ratio.powi(n as i32),
            WeightSequence::Normalized { total, tail, .. } => tail(n) / total,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KpConfig {
    pub family: DualityFamily,
    pub weights: WeightSequence,
    pub truncation: usize,
    pub quad_tol: f64,
}

pub const DEFAULT_TRUNCATION: usize = 64;
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

impl KpConfig {
    /// Dyadic family on `window`, `t_k = 2^-k`, `K = 64`.
    pub fn new(window: Vec<Interval>) -> Result<Self> {
        Ok(Self {
            family: DualityFamily::new(window)?,
            weights: WeightSequence::default(),
            truncation: DEFAULT_TRUNCATION,
            quad_tol: DEFAULT_QUAD_TOL,
        })
    }

    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation = k;
        self
    }

    pub fn with_weights(mut self, w: WeightSequence) -> Self {
        self.weights = w;
        self
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.truncation == 0 {
            return Err(Error::InvalidInput(
                "truncation K must be at least 1".into(),
            ));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::InvalidInput(
                "quadrature tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidInput(format!(
                "exponent must be >= 1, got {p}"
            )))
        }
    }

    /// Hölder conjugate.
    pub fn conjugate(&self) -> Exponent {
        match *self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse exponent {t:?}")))
                .and_then(Exponent::new),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real integrand on the window plus what is known about its integrability.
#[derive(Clone)]
pub struct KpIntegrand {
    f: RealFn,
    abs_bound: Option<f64>,
    conditional: bool,
    singular_points: Vec<f64>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for KpIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KpIntegrand")
            .field("abs_bound", &self.abs_bound)
            .field("conditional", &self.conditional)
            .field("singular_points", &self.singular_points)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl KpIntegrand {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            abs_bound: None,
            conditional: false,
            singular_points: Vec::new(),
            breakpoints: Vec::new(),
        }
    }

    /// Convenience for one-dimensional integrands.
    pub fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(move |x: &[f64]| f(x[0]))
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0)
    }

    /// Upper bound on `∫_W |f|`.
    pub fn with_abs_bound(mut self, bound: f64) -> Self {
        self.abs_bound = Some(bound);
        self
    }

    /// Mark `f` as only conditionally integrable; a tail bound then requires
    /// [`with_abs_bound`](Self::with_abs_bound).
    pub fn conditionally_integrable(mut self) -> Self {
        self.conditional = true;
        self
    }

    /// One-dimensional singular points, forwarded to the gauge integrator.
    pub fn with_singular_points(mut self, pts: impl IntoIterator<Item = f64>) -> Self {
        self.singular_points.extend(pts);
        self
    }

    /// One-dimensional jump locations.
    pub fn with_breakpoints(mut self, pts: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(pts);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn abs_bound(&self) -> Option<f64> {
        self.abs_bound
    }

    pub fn is_conditional(&self) -> bool {
        self.conditional
    }

    /// `a f + b g`, carrying over singular points and breakpoints of both.
    pub fn combine(a: f64, f: &KpIntegrand, b: f64, g: &KpIntegrand) -> KpIntegrand {
        let (ff, gf) = (f.f.clone(), g.f.clone());
        let abs_bound = match (f.abs_bound, g.abs_bound) {
            (Some(x), Some(y)) => Some(a.abs() * x + b.abs() * y),
            _ => None,
        };
        KpIntegrand {
            f: Arc::new(move |x: &[f64]| a * ff(x) + b * gf(x)),
            abs_bound,
            conditional: f.conditional || g.conditional,
            singular_points: f
                .singular_points
                .iter()
                .chain(&g.singular_points)
                .copied()
                .collect(),
            breakpoints: f
                .breakpoints
                .iter()
                .chain(&g.breakpoints)
                .copied()
                .collect(),
        }
    }

    /// `|f|^q`, used for the Lebesgue side of the embedding check.
    fn abs_pow(&self, q: f64) -> KpIntegrand {
        let f = self.f.clone();
        KpIntegrand {
            f: Arc::new(move |x: &[f64]| f(x).abs().powf(q)),
            abs_bound: None,
            conditional: false,
            singular_points: self.singular_points.clone(),
            breakpoints: self.breakpoints.clone(),
        }
    }
}

/// Support of `E_k` as a canonical box set.
pub fn family_ek(k: usize, cfg: &KpConfig) -> BoxSet {
    BoxSet::canonical(cfg.family.cell(k)).expect("non-empty window")
}

fn integrate_over(f: &KpIntegrand, cell: &[Interval], tol: f64) -> Result<IntegralResult> {
    if cell.len() == 1 {
        let iv = cell[0];
        let inside = |v: &[f64]| {
            v.iter()
                .copied()
                .filter(|&s| iv.contains(s))
                .collect::<Vec<_>>()
        };
        let opts = HkOptions::with_tol(tol)
            .singular(inside(&f.singular_points))
            .breakpoints(inside(&f.breakpoints));
        hk_integrate(|x| f.eval(&[x]), iv, &opts)
    } else {
        integrate_nd(|x| f.eval(x), cell, &NdOptions::with_tol(tol))
    }
}

/// `a_k = ∫ E_k f dμ`, by gauge quadrature over the cell of `E_k`.
pub fn functional(k: usize, f: &KpIntegrand, cfg: &KpConfig) -> Result<IntegralResult> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidInput("E_k is indexed from 1".into()));
    }
    integrate_over(f, &cfg.family.cell(k), cfg.quad_tol)
}

/// `a_1 ..= a_K`, computed in parallel and returned in index order.
pub fn functionals(f: &KpIntegrand, cfg: &KpConfig) -> Result<Vec<IntegralResult>> {
    cfg.validate()?;
    (1..=cfg.truncation)
        .into_par_iter()
        .map(|k| integrate_over(f, &cfg.family.cell(k), cfg.quad_tol))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: f64,
    /// Upper bound on the contribution of the indices `k > K`.
    pub tail_bound: f64,
    /// Propagated quadrature error.
    pub error_bound: f64,
    pub evaluations: usize,
    pub functionals: Vec<(usize, f64)>,
}

/// Truncated weighted `l^p` norm of a functional sequence `a_1, a_2, ...`,
/// summed in ascending index order.
pub fn weighted_norm(a: &[f64], p: Exponent, weights: &WeightSequence) -> f64 {
    match p {
        Exponent::Infinity => a.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        Exponent::Finite(p) => {
            let s = compensated_sum(
                a.iter()
                    .enumerate()
                    .map(|(i, x)| weights.weight(i + 1) * x.abs().powf(p)),
            );
            s.powf(1.0 / p)
        }
    }
}

fn tail_constant(f: &KpIntegrand, computed: &[f64]) -> Result<f64> {
    if f.conditional && f.abs_bound.is_none() {
        return Err(Error::MissingAbsoluteBound);
    }
    let max_a = computed.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(f.abs_bound.map_or(max_a, |b| b.max(max_a)))
}

/// `||f||_{K^p}` truncated at `K` terms.
///
/// `tail_bound = (sum_{k>K} t_k)^(1/p) M` with `M` the larger of the computed
/// `|a_k|` and the caller's bound on `∫|f|`. For `p = inf` the tail can only
/// raise the supremum to `M`, so `tail_bound = M - value` (clamped at 0).
pub fn kp_norm(f: &KpIntegrand, p: Exponent, cfg: &KpConfig) -> Result<NormResult> {
    if f.conditional && f.abs_bound.is_none() {
        return Err(Error::MissingAbsoluteBound);
    }
    let results = functionals(f, cfg)?;
    norm_from_results(f, p, cfg, &results)
}

fn norm_from_results(
    f: &KpIntegrand,
    p: Exponent,
    cfg: &KpConfig,
    results: &[IntegralResult],
) -> Result<NormResult> {
    let a: Vec<f64> = results.iter().map(|r| r.value).collect();
    let errs: Vec<f64> = results.iter().map(|r| r.error_estimate).collect();
    let value = weighted_norm(&a, p, &cfg.weights);
    let error_bound = weighted_norm(&errs, p, &cfg.weights);
    let m = tail_constant(f, &a)?;
    let tail_bound = match p {
        Exponent::Finite(p) => cfg.weights.tail_sum(cfg.truncation).powf(1.0 / p) * m,
        Exponent::Infinity => (m - value).max(0.0),
    };
    Ok(NormResult {
        value,
        tail_bound,
        error_bound,
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        functionals: a
            .iter()
            .copied()
            .enumerate()
            .map(|(i, x)| (i + 1, x))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerResult {
    pub value: f64,
    pub tail_bound: f64,
    pub error_bound: f64,
    pub evaluations: usize,
}

/// `(f, g) = sum_{k<=K} t_k a_k(f) a_k(g)`. Conjugation is the identity for
/// real integrands; see [`k2_inner_complex`].
pub fn k2_inner(f: &KpIntegrand, g: &KpIntegrand, cfg: &KpConfig) -> Result<InnerResult> {
    let af = functionals(f, cfg)?;
    let ag = functionals(g, cfg)?;
    let mf = tail_constant(f, &af.iter().map(|r| r.value).collect::<Vec<_>>())?;
    let mg = tail_constant(g, &ag.iter().map(|r| r.value).collect::<Vec<_>>())?;
    let mut value = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    for (k, (x, y)) in af.iter().zip(&ag).enumerate() {
        let t = cfg.weights.weight(k + 1);
        value.add(t * x.value * y.value);
        error.add(
            t * (x.error_estimate * y.value.abs()
                + y.error_estimate * x.value.abs()
                + x.error_estimate * y.error_estimate),
        );
    }
    Ok(InnerResult {
        value: value.value(),
        tail_bound: cfg.weights.tail_sum(cfg.truncation) * mf * mg,
        error_bound: error.value(),
        evaluations: af.iter().chain(&ag).map(|r| r.evaluations).sum(),
    })
}

/// Inner product of complex integrands given by real and imaginary parts:
/// `sum t_k A_k conj(B_k)`.
pub fn k2_inner_complex(
    f: (&KpIntegrand, &KpIntegrand),
    g: (&KpIntegrand, &KpIntegrand),
    cfg: &KpConfig,
) -> Result<Complex64> {
    let to_c = |re: &KpIntegrand, im: &KpIntegrand| -> Result<Vec<Complex64>> {
        let r = functionals(re, cfg)?;
        let i = functionals(im, cfg)?;
        Ok(r.iter()
            .zip(&i)
            .map(|(a, b)| Complex64::new(a.value, b.value))
            .collect())
    };
    let a = to_c(f.0, f.1)?;
    let b = to_c(g.0, g.1)?;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        let z = cfg.weights.weight(k + 1) * x * y.conj();
        re.add(z.re);
        im.add(z.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Both sides of `|sum t_k a_k b_k| <= ||a||_p ||b||_q`, `1/p + 1/q = 1`.
pub fn weighted_holder(a: &[f64], b: &[f64], p: Exponent, weights: &WeightSequence) -> (f64, f64) {
    let lhs = compensated_sum(
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| weights.weight(i + 1) * x * y),
    )
    .abs();
    let q = p.conjugate();
    // for p = inf the pairing is bounded by sup|a| * sum t_k |b_k|
    let rhs = weighted_norm(a, p, weights) * weighted_norm(b, q, weights);
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    pub p: Exponent,
    pub q: Exponent,
    pub kp_norm: f64,
    pub tail_bound: f64,
    /// `sup_{k<=K} (∫ E_k |f|^q)^(1/q)`, the middle link of the chain.
    pub local_sup: f64,
    pub lq_norm: f64,
    pub slack: f64,
    pub pass: bool,
    pub evaluations: usize,
}

/// Number of sample points used for an essential-supremum estimate.
const ESS_SUP_SAMPLES: usize = 1 << 14;

fn ess_sup(f: &KpIntegrand, cell: &[Interval]) -> f64 {
    let d = cell.len();
    let per_axis = ((ESS_SUP_SAMPLES as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let total = per_axis.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut best = 0.0f64;
    for idx in 0..total {
        let mut rem = idx;
        for (axis, iv) in cell.iter().enumerate().rev() {
            let i = rem % per_axis;
            rem /= per_axis;
            x[axis] = iv.lo() + iv.len() * (i as f64 + 0.5) / per_axis as f64;
        }
        let y = f.eval(&x).abs();
        if y.is_finite() {
            best = best.max(y);
        }
    }
    best
}

/// Absolute allowance added to the embedding comparison.
pub const EMBEDDING_SLACK: f64 = 1e-8;

/// Checks `||f||_{K^p} <= sup_k (∫ E_k |f|^q)^(1/q) <= ||f||_{L^q(W)}`.
///
/// The `q = inf` sides are estimated by sampling on a regular grid. The
/// report passes when `||f||_{K^p} <= ||f||_q + slack`, where the slack is the
/// tail bound, the quadrature error and [`EMBEDDING_SLACK`].
pub fn verify_embedding(
    f: &KpIntegrand,
    q: Exponent,
    p: Exponent,
    cfg: &KpConfig,
) -> Result<EmbeddingReport> {
    let norm = kp_norm(f, p, cfg)?;
    let window = cfg.family.window();
    let mut evaluations = norm.evaluations;
    let (local_sup, lq_norm, lq_err) = match q {
        Exponent::Infinity => {
            let lq = ess_sup(f, window);
            // E_k sits inside W, so each local sup is at most the global one
            let local = (1..=cfg.truncation)
                .map(|k| ess_sup(f, &cfg.family.cell(k)))
                .fold(0.0f64, f64::max);
            evaluations += ESS_SUP_SAMPLES * (cfg.truncation + 1);
            (local, lq, 0.0)
        }
        Exponent::Finite(q) => {
            let g = f.abs_pow(q);
            let whole = integrate_over(&g, window, cfg.quad_tol)?;
            let locals = functionals(&g, cfg)?;
            evaluations += whole.evaluations + locals.iter().map(|r| r.evaluations).sum::<usize>();
            let local = locals
                .iter()
                .fold(0.0f64, |m, r| m.max(r.value.max(0.0).powf(1.0 / q)));
            let lq = whole.value.max(0.0).powf(1.0 / q);
            // d(v^(1/q)) <= err^(1/q) for q >= 1
            (local, lq, whole.error_estimate.powf(1.0 / q))
        }
    };
    let slack = norm.tail_bound + norm.error_bound + lq_err + EMBEDDING_SLACK;
    Ok(EmbeddingReport {
        p,
        q,
        kp_norm: norm.value,
        tail_bound: norm.tail_bound,
        local_sup,
        lq_norm,
        slack,
        pass: norm.value <= lq_norm + slack,
        evaluations,
    })
}
