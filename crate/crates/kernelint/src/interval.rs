use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounded interval with explicit endpoint inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed_left: bool,
    pub closed_right: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, closed_left: bool, closed_right: bool) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi, closed_left, closed_right })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    /// `[lo, hi)`
    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, false)
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0, closed_left: true, closed_right: true }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi && !(self.closed_left && self.closed_right)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.closed_left { x >= self.lo } else { x > self.lo };
        let below = if self.closed_right { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Membership in the closure `[lo, hi]`.
    pub fn closure_contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// True when `other` is a subset of `self` (up to endpoint flags).
    pub fn covers(&self, other: &Interval) -> bool {
        let left_ok = other.lo > self.lo || (other.lo == self.lo && (self.closed_left || !other.closed_left));
        let right_ok = other.hi < self.hi || (other.hi == self.hi && (self.closed_right || !other.closed_right));
        left_ok && right_ok
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, closed_left) = match self.lo.partial_cmp(&other.lo)? {
            std::cmp::Ordering::Greater => (self.lo, self.closed_left),
            std::cmp::Ordering::Less => (other.lo, other.closed_left),
            std::cmp::Ordering::Equal => (self.lo, self.closed_left && other.closed_left),
        };
        let (hi, closed_right) = match self.hi.partial_cmp(&other.hi)? {
            std::cmp::Ordering::Less => (self.hi, self.closed_right),
            std::cmp::Ordering::Greater => (other.hi, other.closed_right),
            std::cmp::Ordering::Equal => (self.hi, self.closed_right && other.closed_right),
        };
        if lo > hi {
            return None;
        }
        let out = Interval { lo, hi, closed_left, closed_right };
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }

    /// Splits at `c` into `[lo, c)` and `[c, hi]` keeping the outer flags.
    pub fn split_at(&self, c: f64) -> Result<(Interval, Interval)> {
        if !(c >= self.lo && c <= self.hi) {
            return Err(Error::InvalidParameter(format!("split point {c} outside [{}, {}]", self.lo, self.hi)));
        }
        Ok((
            Interval { lo: self.lo, hi: c, closed_left: self.closed_left, closed_right: false },
            Interval { lo: c, hi: self.hi, closed_left: true, closed_right: self.closed_right },
        ))
    }

    /// Half-open cells of the dyadic partition at `depth`; outer flags are kept.
    pub fn dyadic(&self, depth: u32) -> Vec<Interval> {
        let count = 1usize << depth;
        let width = self.len() / count as f64;
        (0..count)
            .map(|j| {
                let lo = if j == 0 { self.lo } else { self.lo + width * j as f64 };
                let hi = if j + 1 == count { self.hi } else { self.lo + width * (j + 1) as f64 };
                Interval {
                    lo,
                    hi,
                    closed_left: if j == 0 { self.closed_left } else { true },
                    closed_right: if j + 1 == count { self.closed_right } else { false },
                }
            })
            .collect()
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.closed_left { '[' } else { '(' };
        let r = if self.closed_right { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}
