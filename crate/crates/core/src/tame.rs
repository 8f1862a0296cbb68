//! Essentially tame functions and Schauder-basis coordinates.
//!
//! An order-`n` tame function is `f(x) = core(x_1..x_n) * h_n(x_{n+1}, ...)`
//! where `h_n` is the indicator that every tail coordinate lies in its tail
//! interval. Coordinates are stored with an implicit zero tail; since every
//! tail interval contains 0, only explicit coordinates can leave the tail.

use std::fmt;
use std::sync::Arc;

use crate::box_measure::TailFamily;
use crate::error::{Error, Result};
use crate::interval::Interval;

pub type Core = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `core(x̄) ⊗ h_n(x̂)`. The core is taken to vanish outside `domain`.
#[derive(Clone)]
pub struct TameFunction {
    core: Core,
    domain: Vec<Interval>,
    tail: TailFamily,
}

impl fmt::Debug for TameFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TameFunction")
            .field("order", &self.order())
            .field("domain", &self.domain)
            .field("tail", &self.tail)
            .finish_non_exhaustive()
    }
}

impl TameFunction {
    pub fn new(
        core: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        domain: Vec<Interval>,
        tail: TailFamily,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidInput(
                "tame function order must be at least 1".into(),
            ));
        }
        Ok(Self {
            core: Arc::new(core),
            domain,
            tail,
        })
    }

    /// Indicator of `domain x tail`.
    pub fn indicator(domain: Vec<Interval>, tail: TailFamily) -> Result<Self> {
        Self::new(|_| 1.0, domain, tail)
    }

    pub fn order(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn tail(&self) -> TailFamily {
        self.tail
    }

    /// Evaluate the core at a head point (no support or tail check).
    pub fn core_at(&self, head: &[f64]) -> f64 {
        (self.core)(head)
    }

    pub fn core(&self) -> &Core {
        &self.core
    }

    /// The same function written with order `n + 1`: the new head coordinate
    /// carries the tail indicator for index `n + 1`.
    pub fn promote(&self) -> TameFunction {
        let n = self.order();
        let extra = self.tail.factor(n + 1);
        let core = self.core.clone();
        let mut domain = self.domain.clone();
        domain.push(extra);
        TameFunction {
            core: Arc::new(move |x: &[f64]| {
                if extra.contains(x[n]) {
                    core(&x[..n])
                } else {
                    0.0
                }
            }),
            domain,
            tail: self.tail,
        }
    }

    /// `a f + b g`; both must share the domain and tail family.
    pub fn linear_combination(
        a: f64,
        f: &TameFunction,
        b: f64,
        g: &TameFunction,
    ) -> Result<TameFunction> {
        if f.tail != g.tail {
            return Err(Error::TailFamilyMismatch);
        }
        if f.domain != g.domain {
            return Err(Error::InvalidInput(
                "linear combination needs a common domain".into(),
            ));
        }
        let (cf, cg) = (f.core.clone(), g.core.clone());
        Ok(TameFunction {
            core: Arc::new(move |x: &[f64]| a * cf(x) + b * cg(x)),
            domain: f.domain.clone(),
            tail: f.tail,
        })
    }
}

/// Finitely supported coefficient sequence `(x_1, ..., x_m, 0, 0, ...)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoordinateVector(Vec<f64>);

impl CoordinateVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    /// The `k`-th unit vector (1-based).
    pub fn unit(k: usize) -> Self {
        assert!(k >= 1);
        let mut v = vec![0.0; k];
        v[k - 1] = 1.0;
        Self(v)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Coordinate `i` (1-based); zero beyond the explicit entries.
    pub fn get(&self, i: usize) -> f64 {
        self.0.get(i - 1).copied().unwrap_or(0.0)
    }

    /// Index of the last nonzero coordinate, or 0 for the zero vector.
    pub fn support_len(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(self.0.iter().map(|c| a * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self((1..=n).map(|i| self.get(i) + other.get(i)).collect())
    }
}

/// `f(x) = core(x_1..x_n)` if every explicit tail coordinate lies in its tail
/// interval and the head lies in the domain, else 0.
pub fn tame_eval(f: &TameFunction, x: &CoordinateVector) -> Result<f64> {
    let n = f.order();
    let head: Vec<f64> = (1..=n).map(|i| x.get(i)).collect();
    let in_tail = (n + 1..=x.coeffs().len()).all(|k| f.tail.factor(k).contains(x.get(k)));
    let in_domain = f.domain.iter().zip(&head).all(|(iv, &h)| iv.contains(h));
    if !(in_tail && in_domain) {
        return Ok(0.0);
    }
    let y = f.core_at(&head);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::EvaluationError { at: head })
    }
}

/// Norm of the partial sum `P_k x = sum_{i<=k} x_i e_i` in a concrete Banach
/// space with Schauder basis `(e_i)`.
pub trait BasisOracle: Send + Sync {
    fn partial_sum_norm(&self, coeffs: &[f64], k: usize) -> f64;
}

/// `l^p` with its coordinate basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpBasis {
    p: f64,
}

impl LpBasis {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidInput(format!("l^p needs p >= 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn l1() -> Self {
        Self { p: 1.0 }
    }

    pub fn l2() -> Self {
        Self { p: 2.0 }
    }
}

impl BasisOracle for LpBasis {
    fn partial_sum_norm(&self, coeffs: &[f64], k: usize) -> f64 {
        let head = &coeffs[..k.min(coeffs.len())];
        if self.p.is_infinite() {
            return head.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        }
        if self.p == 1.0 {
            return crate::summation::compensated_sum(head.iter().map(|c| c.abs()));
        }
        let scale = head.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let s =
            crate::summation::compensated_sum(head.iter().map(|c| (c.abs() / scale).powf(self.p)));
        scale * s.powf(1.0 / self.p)
    }
}

/// `max_{1<=k<=n} ||P_k x||`.
pub fn bjn_norm(x: &CoordinateVector, n: usize, oracle: &dyn BasisOracle) -> f64 {
    (1..=n).fold(0.0f64, |m, k| m.max(oracle.partial_sum_norm(x.coeffs(), k)))
}

/// `sup_n ||P_n x||`; the partial sums are constant past the support.
pub fn sup_norm(x: &CoordinateVector, oracle: &dyn BasisOracle) -> f64 {
    bjn_norm(x, x.support_len(), oracle)
}

/// The canonical embedding `x ↦ (x_k)`; an isometry for [`sup_norm`].
pub fn embed_t(x: &CoordinateVector, _oracle: &dyn BasisOracle) -> CoordinateVector {
    x.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = TameFunction::new(|x| x[0], vec![iv(-1.0, 1.0)], TailFamily::CanonicalJ).unwrap();
        assert_eq!(
            tame_eval(&f, &CoordinateVector::new(vec![0.3, 0.1])).unwrap(),
            0.3
        );
        assert_eq!(
            tame_eval(&f, &CoordinateVector::new(vec![0.3, 0.9])).unwrap(),
            0.0
        );

        let g = TameFunction::new(
            |x| x[0] * x[1],
            vec![iv(0.0, 1.0); 2],
            TailFamily::CanonicalJ,
        )
        .unwrap();
        assert_eq!(
            tame_eval(&g, &CoordinateVector::new(vec![0.5, 0.5])).unwrap(),
            0.25
        );
        // missing head coordinates are zero
        assert_eq!(
            tame_eval(&g, &CoordinateVector::new(vec![0.5])).unwrap(),
            0.0
        );
    }

    #[test]
    fn scaled_tail_uses_j_k() {
        let f = TameFunction::indicator(vec![iv(0.0, 1.0)], TailFamily::ScaledJ).unwrap();
        // j_2 has half-width 1/(2 ln 3) ≈ 0.455
        assert_eq!(
            tame_eval(&f, &CoordinateVector::new(vec![0.5, 0.45])).unwrap(),
            1.0
        );
        assert_eq!(
            tame_eval(&f, &CoordinateVector::new(vec![0.5, 0.46])).unwrap(),
            0.0
        );
    }

    #[test]
    fn eval_error_from_core() {
        let f =
            TameFunction::new(|x| 1.0 / x[0], vec![iv(-1.0, 1.0)], TailFamily::CanonicalJ).unwrap();
        assert!(matches!(
            tame_eval(&f, &CoordinateVector::new(vec![0.0])),
            Err(Error::EvaluationError { .. })
        ));
    }

    #[test]
    fn promotion_preserves_values() {
        let f =
            TameFunction::new(|x| x[0] + 1.0, vec![iv(0.0, 1.0)], TailFamily::CanonicalJ).unwrap();
        let g = f.promote();
        assert_eq!(g.order(), 2);
        for x in [
            vec![0.2],
            vec![0.2, 0.4],
            vec![0.2, 0.6],
            vec![0.7, -0.5, 0.1],
        ] {
            let x = CoordinateVector::new(x);
            assert_eq!(tame_eval(&f, &x).unwrap(), tame_eval(&g, &x).unwrap());
        }
    }

    #[test]
    fn bjn_examples() {
        let l1 = LpBasis::l1();
        let x = CoordinateVector::new(vec![1.0, -1.0]);
        assert_eq!(bjn_norm(&x, 2, &l1), 2.0);
        assert_eq!(bjn_norm(&x, 1, &l1), 1.0);
        assert_eq!(bjn_norm(&CoordinateVector::default(), 3, &l1), 0.0);
        for n in 1..6 {
            assert_eq!(bjn_norm(&CoordinateVector::unit(1), n, &l1), 1.0);
        }
    }

    #[test]
    fn sup_and_embedding_examples() {
        let l1 = LpBasis::l1();
        let x = CoordinateVector::new(vec![1.0, -1.0, 0.0, 0.0]);
        assert_eq!(sup_norm(&x, &l1), 2.0);
        assert_eq!(sup_norm(&CoordinateVector::default(), &l1), 0.0);
        let inc = CoordinateVector::new(vec![0.5, 0.25, 0.125]);
        assert_eq!(sup_norm(&inc, &l1), l1.partial_sum_norm(inc.coeffs(), 3));
        assert_eq!(embed_t(&x, &l1), x);
        let e3 = CoordinateVector::unit(3);
        assert_eq!(sup_norm(&embed_t(&e3, &l1), &l1), 1.0);
    }

    #[test]
    fn l2_oracle() {
        let l2 = LpBasis::l2();
        assert!((l2.partial_sum_norm(&[3.0, 4.0, 12.0], 2) - 5.0).abs() < 1e-15);
        assert!((l2.partial_sum_norm(&[3.0, 4.0, 12.0], 3) - 13.0).abs() < 1e-14);
        assert!(LpBasis::new(0.5).is_err());
    }
}
