use crate::error::{Error, Result};

/// Closed, bounded interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "interval endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidInput(format!(
                "interval is reversed: [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The canonical tail interval `J = [-1/2, 1/2]`.
    pub const fn canonical_j() -> Self {
        Self { lo: -0.5, hi: 0.5 }
    }

    pub const fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn translate(&self, v: f64) -> Interval {
        Interval {
            lo: self.lo + v,
            hi: self.hi + v,
        }
    }

    /// Split at `x`, which must lie strictly inside.
    pub fn split_at(&self, x: f64) -> (Interval, Interval) {
        debug_assert!(self.lo < x && x < self.hi);
        (
            Interval { lo: self.lo, hi: x },
            Interval { lo: x, hi: self.hi },
        )
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
