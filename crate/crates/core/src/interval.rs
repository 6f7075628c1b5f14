use serde::{Deserialize, Serialize};

use crate::decimal;

/// Closed interval `[lo, hi]` of reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "decimal")]
    pub lo: f64,
    #[serde(with = "decimal")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn scale(&self, k: f64) -> Self {
        if k >= 0.0 {
            Interval::new(k * self.lo, k * self.hi)
        } else {
            Interval::new(k * self.hi, k * self.lo)
        }
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        Interval::new(self.lo + c, self.hi + c)
    }
}

/// Three-valued outcome of comparing an interval against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tri {
    Pass,
    Fail,
    Indeterminate,
}

impl Tri {
    /// `value >= 0` where the value is only known to lie in `[lo, hi]`.
    pub fn nonneg(margin: Interval) -> Tri {
        if margin.lo >= 0.0 {
            Tri::Pass
        } else if margin.hi < 0.0 {
            Tri::Fail
        } else {
            Tri::Indeterminate
        }
    }

    /// `value > 0` where the value is only known to lie in `[lo, hi]`.
    pub fn positive(margin: Interval) -> Tri {
        if margin.lo > 0.0 {
            Tri::Pass
        } else if margin.hi <= 0.0 {
            Tri::Fail
        } else {
            Tri::Indeterminate
        }
    }

    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::Fail, _) | (_, Tri::Fail) => Tri::Fail,
            (Tri::Pass, Tri::Pass) => Tri::Pass,
            _ => Tri::Indeterminate,
        }
    }

    pub fn is_pass(self) -> bool {
        self == Tri::Pass
    }
}
