//! Closed real intervals with outward rounding.
//!
//! Every inexact operation widens its result by one ulp on each side (two for
//! `exp` and `ln`, whose library implementations are not correctly rounded), so
//! the true value of any expression evaluated on contained inputs stays inside.
//! Sums and products that are exact in floating point are not widened, which
//! lets exact identities such as `δ_1/δ = 1` be decided.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Round-to-nearest sum, widened only if the error term is nonzero.
fn sum_bounds(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err == 0.0 || !s.is_finite() {
        (s, s)
    } else {
        (s.next_down(), s.next_up())
    }
}

fn prod_bounds(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    // Near the subnormal range the FMA residual can itself underflow.
    let tiny = p != 0.0 && p.abs() < f64::MIN_POSITIVE * 2f64.powi(53);
    if !p.is_finite() || !tiny && a.mul_add(b, -p) == 0.0 && (p != 0.0 || a == 0.0 || b == 0.0) {
        (p, p)
    } else {
        (p.next_down(), p.next_up())
    }
}

fn down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_down())
}

fn up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

impl Interval {
    /// Panics if `lo > hi` or either bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// Enclosure of a decimal constant that may not be representable.
    pub fn around(x: f64) -> Self {
        Self::new(x.next_down(), x.next_up())
    }

    fn outward(lo: f64, hi: f64, ulps: u32) -> Self {
        Self::new(down(lo, ulps), up(hi, ulps))
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other`.
    pub fn subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(self, other: Interval) -> Self {
        Self::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn exp(self) -> Self {
        if self.lo == 0.0 && self.hi == 0.0 {
            return Self::point(1.0);
        }
        Self::outward(self.lo.exp(), self.hi.exp(), 2).clamp_nonneg()
    }

    /// Natural log; the interval must be strictly positive.
    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "log of non-positive interval [{}, {}]", self.lo, self.hi);
        if self.lo == 1.0 && self.hi == 1.0 {
            return Self::point(0.0);
        }
        Self::outward(self.lo.ln(), self.hi.ln(), 2)
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Self::new(0.0, self.hi.max(-self.lo))
        }
    }

    fn clamp_nonneg(self) -> Self {
        Self::new(self.lo.max(0.0), self.hi)
    }

    pub fn scale(self, c: f64) -> Self {
        self * Interval::point(c)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Self::point(x)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, r: Interval) -> Interval {
        Interval::new(sum_bounds(self.lo, r.lo).0, sum_bounds(self.hi, r.hi).1)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, r: Interval) -> Interval {
        self + (-r)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, r: Interval) -> Interval {
        let p = [
            prod_bounds(self.lo, r.lo),
            prod_bounds(self.lo, r.hi),
            prod_bounds(self.hi, r.lo),
            prod_bounds(self.hi, r.hi),
        ];
        let lo = p.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
        let hi = p.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}
