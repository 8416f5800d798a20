use std::fmt;

use crate::scalar::{Rational, Scalar};

/// Closed, non-empty interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    /// Builds `[lo, hi]`, or `None` when `lo > hi`.
    pub fn new(lo: S, hi: S) -> Option<Self> {
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn point(v: S) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    /// `[-1, 1]`, the range of a fresh noise symbol.
    pub fn unit() -> Self {
        Interval { lo: -S::one(), hi: S::one() }
    }

    pub fn mid(&self) -> S {
        (self.lo.clone() + self.hi.clone()) * S::half()
    }

    /// Radius.
    pub fn dev(&self) -> S {
        (self.hi.clone() - self.lo.clone()) * S::half()
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    /// `max |v|` over the interval.
    pub fn mag(&self) -> S {
        self.lo.abs().max_of(self.hi.abs())
    }

    pub fn contains(&self, v: &S) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn contains_with(&self, v: &S, tol: &S) -> bool {
        self.lo.clone() - tol.clone() <= *v && *v <= self.hi.clone() + tol.clone()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Interval {
            lo: self.lo.clone().min_of(other.lo.clone()),
            hi: self.hi.clone().max_of(other.hi.clone()),
        }
    }

    pub fn meet(&self, other: &Self) -> Option<Self> {
        Interval::new(
            self.lo.clone().max_of(other.lo.clone()),
            self.hi.clone().min_of(other.hi.clone()),
        )
    }

    /// `{ k * v : v in self }`.
    pub fn scale(&self, k: &S) -> Self {
        let a = self.lo.clone() * k.clone();
        let b = self.hi.clone() * k.clone();
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Interval {
            lo: self.lo.clone() + other.lo.clone(),
            hi: self.hi.clone() + other.hi.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let products = [
            self.lo.clone() * other.lo.clone(),
            self.lo.clone() * other.hi.clone(),
            self.hi.clone() * other.lo.clone(),
            self.hi.clone() * other.hi.clone(),
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            lo = lo.min_of(p.clone());
            hi = hi.max_of(p.clone());
        }
        Interval { lo, hi }
    }

    /// `{ v * v : v in self }`, tighter than `self.mul(self)`.
    pub fn square(&self) -> Self {
        let a = self.lo.clone() * self.lo.clone();
        let b = self.hi.clone() * self.hi.clone();
        let top = a.clone().max_of(b.clone());
        if self.contains(&S::zero()) {
            Interval { lo: S::zero(), hi: top }
        } else {
            Interval { lo: a.min_of(b), hi: top }
        }
    }

    /// Widens by one rounding step on each side.
    pub fn outward(self) -> Self {
        Interval { lo: self.lo.round_down(), hi: self.hi.round_up() }
    }

    pub fn to_f64(&self) -> Interval<f64> {
        Interval { lo: self.lo.to_f64_lossy(), hi: self.hi.to_f64_lossy() }
    }

    /// Smallest `r` with `[c - r, c + r] ⊇ self`, rounded up only when the
    /// float arithmetic lost something.
    pub fn radius_about(&self, c: &S) -> S {
        let r = (self.hi.clone() - c.clone()).max_of(c.clone() - self.lo.clone());
        if S::EXACT {
            return r;
        }
        let q = |v: &S| Rational::of_f64(v.to_f64_lossy());
        let exact = (q(&self.hi) - q(c)).max(q(c) - q(&self.lo));
        if q(&r) >= exact {
            r
        } else {
            r.round_up()
        }
    }

    /// Nearest `f64` enclosure.
    pub fn to_f64_outward(&self) -> Interval<f64> {
        let Interval { mut lo, mut hi } = self.to_f64();
        if S::of_f64(lo) > self.lo {
            lo = lo.next_down();
        }
        if S::of_f64(hi) < self.hi {
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn itv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn mid_dev_and_mag() {
        let i = itv(0.5, 1.0);
        assert_eq!(i.mid(), 0.75);
        assert_eq!(i.dev(), 0.25);
        assert_eq!(itv(-3.0, 1.0).mag(), 3.0);
    }

    #[test]
    fn products_and_squares() {
        assert_eq!(itv(-1.0, 2.0).mul(&itv(3.0, 4.0)), itv(-4.0, 8.0));
        assert_eq!(itv(-1.0, 2.0).square(), itv(0.0, 4.0));
        assert_eq!(itv(-3.0, -2.0).square(), itv(4.0, 9.0));
    }

    #[test]
    fn reversed_bounds_rejected() {
        assert!(Interval::new(1.0, 0.0).is_none());
        assert!(itv(0.0, 1.0).meet(&itv(2.0, 3.0)).is_none());
    }
}
