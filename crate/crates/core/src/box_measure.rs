//! Box sets `A x J_n` in the infinite product, the product measure on them,
//! the shrinking interval family `j_k` and the normalized measures of
//! elementary products.
//!
//! Every tail factor of a canonical box has measure one, so the product
//! measure of `A x J_n` is the Lebesgue volume of `A`. Boxes of different
//! order are compared after promoting the smaller one with full tail
//! factors, mirroring the nesting `R^n x J_n ⊂ R^{n+1} x J_{n+1}`.

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Which intervals make up the infinite tail of a box or tame function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailFamily {
    /// Every tail factor is `J = [-1/2, 1/2]`.
    CanonicalJ,
    /// Tail factor `k` is `j_k`.
    ScaledJ,
}

impl TailFamily {
    /// The tail interval used for coordinate `k` (1-based).
    pub fn factor(&self, k: usize) -> Interval {
        match self {
            TailFamily::CanonicalJ => Interval::canonical_j(),
            TailFamily::ScaledJ => j_interval(k),
        }
    }
}

/// Non-negative measure value; `+inf` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeasureValue(f64);

impl MeasureValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidInput(format!(
                "measure must be non-negative, got {value}"
            )));
        }
        Ok(Self(value))
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

/// `A x tail`, where `A` is an axis-aligned box in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    base: Vec<Interval>,
    tail: TailFamily,
}

impl BoxSet {
    pub fn new(base: Vec<Interval>, tail: TailFamily) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidInput(
                "box set needs at least one base axis".into(),
            ));
        }
        Ok(Self { base, tail })
    }

    pub fn canonical(base: Vec<Interval>) -> Result<Self> {
        Self::new(base, TailFamily::CanonicalJ)
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[Interval] {
        &self.base
    }

    pub fn tail(&self) -> TailFamily {
        self.tail
    }

    /// Append full tail factors until the base has `dim` axes.
    pub fn promote(&self, dim: usize) -> BoxSet {
        let mut base = self.base.clone();
        while base.len() < dim {
            let k = base.len() + 1;
            base.push(self.tail.factor(k));
        }
        BoxSet {
            base,
            tail: self.tail,
        }
    }

    pub fn translate(&self, shift: &[f64]) -> BoxSet {
        let base = self
            .base
            .iter()
            .enumerate()
            .map(|(i, iv)| iv.translate(shift.get(i).copied().unwrap_or(0.0)))
            .collect();
        BoxSet {
            base,
            tail: self.tail,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.base
            .iter()
            .enumerate()
            .all(|(i, iv)| iv.contains(x.get(i).copied().unwrap_or(0.0)))
    }

    /// Lebesgue volume of the base.
    pub fn volume(&self) -> f64 {
        self.base.iter().map(Interval::len).product()
    }
}

fn aligned(a: &BoxSet, b: &BoxSet) -> Result<(BoxSet, BoxSet)> {
    if a.tail != b.tail {
        return Err(Error::TailFamilyMismatch);
    }
    let n = a.dim().max(b.dim());
    Ok((a.promote(n), b.promote(n)))
}

/// Coordinatewise intersection; `None` when some axis is empty.
pub fn box_intersect(a: &BoxSet, b: &BoxSet) -> Result<Option<BoxSet>> {
    let (a, b) = aligned(a, b)?;
    let base: Option<Vec<Interval>> = a
        .base
        .iter()
        .zip(&b.base)
        .map(|(x, y)| x.intersect(y))
        .collect();
    Ok(base.map(|base| BoxSet { base, tail: a.tail }))
}

/// `b \ a` as boxes whose interiors are pairwise disjoint and disjoint from `a`.
fn difference(b: &BoxSet, a: &BoxSet) -> Vec<BoxSet> {
    let Some(overlap) = box_intersect(a, b).expect("aligned operands") else {
        return vec![b.clone()];
    };
    if overlap.volume() == 0.0 {
        return vec![b.clone()];
    }
    let mut out = Vec::new();
    let mut rest = b.base.clone();
    for axis in 0..rest.len() {
        let (r, o) = (rest[axis], overlap.base[axis]);
        if r.lo() < o.lo() {
            let mut piece = rest.clone();
            piece[axis] = Interval::new(r.lo(), o.lo()).expect("ordered");
            out.push(BoxSet {
                base: piece,
                tail: b.tail,
            });
        }
        if o.hi() < r.hi() {
            let mut piece = rest.clone();
            piece[axis] = Interval::new(o.hi(), r.hi()).expect("ordered");
            out.push(BoxSet {
                base: piece,
                tail: b.tail,
            });
        }
        rest[axis] = o;
    }
    out
}

/// Decomposition of `(A ∪ B) x tail` into boxes with disjoint interiors.
pub fn box_union(a: &BoxSet, b: &BoxSet) -> Result<Vec<BoxSet>> {
    let (a, b) = aligned(a, b)?;
    let mut out = vec![a.clone()];
    out.extend(difference(&b, &a));
    Ok(out)
}

/// Product measure of a canonical box: the n-dimensional volume of its base.
#[allow(non_snake_case)]
pub fn mu_B(a: &BoxSet) -> Result<MeasureValue> {
    if a.tail != TailFamily::CanonicalJ {
        return Err(Error::TailFamilyMismatch);
    }
    MeasureValue::new(a.volume())
}

/// Total product measure of a list of boxes with disjoint interiors.
#[allow(non_snake_case)]
pub fn mu_B_disjoint(parts: &[BoxSet]) -> Result<MeasureValue> {
    let mut acc = crate::summation::CompensatedSum::new();
    for p in parts {
        acc.add(mu_B(p)?.value());
    }
    MeasureValue::new(acc.value())
}

/// `j_k = [-1/(2 ln(k+1)), 1/(2 ln(k+1))]`, for `k >= 1`.
pub fn j_interval(k: usize) -> Interval {
    assert!(k >= 1, "j_k is indexed from 1");
    let half = 1.0 / (2.0 * ((k + 1) as f64).ln());
    Interval::new(-half, half).expect("finite symmetric interval")
}

/// Countable product whose factor `k` is given explicitly up to
/// `resolved_up_to` and defaults to `j_k` everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryProduct {
    factors: Vec<(usize, Interval)>,
    resolved_up_to: usize,
}

impl ElementaryProduct {
    pub fn new(factors: Vec<(usize, Interval)>, resolved_up_to: usize) -> Result<Self> {
        if factors.iter().any(|(k, _)| *k == 0) {
            return Err(Error::InvalidInput("factor indices start at 1".into()));
        }
        if factors.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput(
                "factor indices must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            factors,
            resolved_up_to,
        })
    }

    /// Builds a product from raw bounds; infinite bounds are reported as a
    /// divergent normalized length rather than accepted.
    pub fn from_bounds(bounds: &[(usize, f64, f64)], resolved_up_to: usize) -> Result<Self> {
        let factors = bounds
            .iter()
            .map(|&(k, lo, hi)| {
                if lo.is_infinite() || hi.is_infinite() {
                    Err(Error::UnboundedFactor { index: k })
                } else {
                    Interval::new(lo, hi).map(|iv| (k, iv))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, resolved_up_to)
    }

    /// All factors default to `j_k`.
    pub fn full(resolved_up_to: usize) -> Self {
        Self {
            factors: Vec::new(),
            resolved_up_to,
        }
    }

    pub fn factors(&self) -> &[(usize, Interval)] {
        &self.factors
    }

    pub fn resolved_up_to(&self) -> usize {
        self.resolved_up_to
    }

    pub fn factor(&self, k: usize) -> Interval {
        self.factors
            .iter()
            .find(|(i, _)| *i == k)
            .map(|(_, iv)| *iv)
            .unwrap_or_else(|| j_interval(k))
    }

    /// Replace (or insert) factor `k`.
    pub fn with_factor(&self, k: usize, iv: Interval) -> Self {
        let mut factors: Vec<(usize, Interval)> = self
            .factors
            .iter()
            .copied()
            .filter(|(i, _)| *i != k)
            .collect();
        factors.push((k, iv));
        factors.sort_by_key(|(i, _)| *i);
        Self {
            factors,
            resolved_up_to: self.resolved_up_to.max(k),
        }
    }
}

/// `prod_{k<=n} mu(a_k)/mu(j_k) x prod_{k>n} mu(a_k ∩ j_k)/mu(j_k)`.
///
/// Only explicit factors can differ from one, so the infinite product
/// reduces to a finite one.
pub fn vjn_measure(a: &ElementaryProduct, n: usize) -> Result<MeasureValue> {
    let mut value = 1.0;
    for &(k, iv) in &a.factors {
        let jk = j_interval(k);
        let ratio = if k <= n {
            iv.len() / jk.len()
        } else {
            iv.intersect(&jk).map_or(0.0, |x| x.len()) / jk.len()
        };
        if k > a.resolved_up_to && ratio != 1.0 {
            return Err(Error::UnresolvedTail {
                index: k,
                resolved_up_to: a.resolved_up_to,
            });
        }
        value *= ratio;
    }
    MeasureValue::new(value)
}
