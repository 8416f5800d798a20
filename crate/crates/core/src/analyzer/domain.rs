use std::collections::BTreeSet;

use crate::affine::{AffineForm, ConstrainedAffineSet};
use crate::ast::{CmpOp, Cond, Expr, Number};
use crate::error::{Error, Result};
use crate::guards::test_cond;
use crate::interval::Interval;
use crate::noise::NoiseBox;
use crate::order::{leq_set_sufficient, Verdict};
use crate::scalar::Scalar;
use crate::state::AbstractState;
use crate::transfer::{assign_expr, assign_interval, MulMode};

use super::{ExactPoint, VarState};

/// What the engine needs from an abstraction.
pub trait Domain: Clone {
    type Scalar: Scalar;

    fn declare_range(&mut self, name: &str, lo: &Number, hi: &Number) -> Result<()>;
    fn assign(&mut self, name: &str, e: &Expr) -> Result<()>;
    /// `None` when the condition cannot hold.
    fn guard(&self, cond: &Cond) -> Result<Option<Self>>;
    fn join(&self, other: &Self) -> Result<Self>;
    /// Whether `other` is contained in `self`. May answer `false` wrongly.
    fn includes(&self, other: &Self) -> bool;
    /// Collapses every variable to a box around the hull of `self` and
    /// `next`, pushing moving bounds to the next threshold.
    fn widen(&self, next: &Self, thresholds: &[Self::Scalar]) -> Result<Self>;
    fn ranges(&self) -> Result<Vec<(String, Interval<Self::Scalar>)>>;
    fn symbol_count(&self) -> usize;
    /// Drops dead symbols. Renumbers, so only valid where no sibling state
    /// shares the numbering.
    fn compact(&self) -> Self;
    /// Reserves the symbols of `other` so that symbols created from now on
    /// cannot collide with it.
    fn align(&self, other: &Self) -> Self;
    fn snapshot(&self) -> Result<Vec<VarState>>;
    fn noise(&self) -> Option<NoiseBox<f64>>;
    /// Exact bounds, for exact scalars only.
    fn exact(&self) -> Result<Option<ExactPoint>> {
        if !Self::Scalar::EXACT {
            return Ok(None);
        }
        Ok(Some(ExactPoint {
            vars: self.ranges()?.into_iter().map(|(n, i)| (n, i.lo.to_string(), i.hi.to_string())).collect(),
            ..ExactPoint::default()
        }))
    }
}

fn exact_box<S: Scalar>(list: &[Interval<S>]) -> Vec<(String, String)> {
    list.iter().map(|i| (i.lo.to_string(), i.hi.to_string())).collect()
}

/// Bounds at or beyond `±UNBOUNDED` stand for infinity.
pub const UNBOUNDED: f64 = 1e38;

fn absorbs<S: Scalar>(outer: &Interval<S>, inner: &Interval<S>) -> bool {
    let cap = S::of_f64(UNBOUNDED);
    (outer.lo <= inner.lo || outer.lo <= -cap.clone()) && (inner.hi <= outer.hi || outer.hi >= cap)
}

/// Next bound outward from `v`: the largest threshold `≤ v` (or smallest
/// `≥ v` when `up`). Past the last threshold the bound is unbounded.
pub(crate) fn step<S: Scalar>(v: &S, thresholds: &[S], up: bool) -> S {
    let pick = if up {
        thresholds.iter().filter(|t| *t >= v).min_by(|a, b| a.partial_cmp(b).unwrap())
    } else {
        thresholds.iter().filter(|t| *t <= v).max_by(|a, b| a.partial_cmp(b).unwrap())
    };
    let cap = S::of_f64(UNBOUNDED);
    pick.cloned().unwrap_or(if up { cap } else { -cap })
}

/// Moves below this (relative) are rounding noise and do not trigger a step.
const JITTER: f64 = 1e-9;

fn widen_interval<S: Scalar>(old: &Interval<S>, new: &Interval<S>, thresholds: &[S]) -> Interval<S> {
    let jitter = |v: &S| S::of_f64(JITTER) * S::one().max_of(v.abs());
    let lo = if new.lo >= old.lo {
        old.lo.clone()
    } else if old.lo.clone() - new.lo.clone() <= jitter(&old.lo) {
        new.lo.clone()
    } else {
        step(&new.lo, thresholds, false)
    };
    let hi = if new.hi <= old.hi {
        old.hi.clone()
    } else if new.hi.clone() - old.hi.clone() <= jitter(&old.hi) {
        new.hi.clone()
    } else {
        step(&new.hi, thresholds, true)
    };
    Interval { lo, hi }
}

fn to_f64_box<S: Scalar>(phi: &NoiseBox<S>) -> Option<NoiseBox<f64>> {
    if phi.is_empty() {
        return None;
    }
    let conv = |list: &[Interval<S>]| list.iter().map(|i| i.to_f64_outward()).collect();
    NoiseBox::from_intervals(conv(phi.central()), conv(phi.perturbation())).ok()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineDomain<S> {
    pub set: ConstrainedAffineSet<S>,
    pub mode: MulMode,
}

impl<S: Scalar> AffineDomain<S> {
    pub fn new(mode: MulMode) -> Self {
        AffineDomain { set: ConstrainedAffineSet::new(NoiseBox::full(0, 0)), mode }
    }

    /// Every symbol is used by at most one column, so the set is the
    /// product of its ranges.
    fn is_box(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.set.forms().iter().all(|f| f.terms().all(|(id, _)| seen.insert(id)))
    }
}

impl<S: Scalar> Domain for AffineDomain<S> {
    type Scalar = S;

    fn declare_range(&mut self, name: &str, lo: &Number, hi: &Number) -> Result<()> {
        let (a, b) = (lo.enclosure::<S>().lo, hi.enclosure::<S>().hi);
        self.set = assign_interval(&self.set, name, a, b)?;
        Ok(())
    }

    fn assign(&mut self, name: &str, e: &Expr) -> Result<()> {
        self.set = assign_expr(&self.set, name, e, self.mode)?;
        Ok(())
    }

    fn guard(&self, cond: &Cond) -> Result<Option<Self>> {
        Ok(match test_cond(&self.set, cond, self.mode)? {
            AbstractState::Bottom => None,
            AbstractState::Set(set) if set.phi().is_empty() => None,
            AbstractState::Set(set) => Some(AffineDomain { set, mode: self.mode }),
        })
    }

    fn join(&self, other: &Self) -> Result<Self> {
        Ok(AffineDomain { set: crate::join::join_sets(&self.set, &other.set)?, mode: self.mode })
    }

    fn includes(&self, other: &Self) -> bool {
        if leq_set_sufficient(&other.set, &self.set) == Verdict::Holds {
            return true;
        }
        if !self.is_box() {
            return false;
        }
        self.set.names().iter().all(|name| match (other.set.gamma(name), self.set.gamma(name)) {
            (Ok(inner), Ok(outer)) => absorbs(&outer, &inner),
            _ => false,
        })
    }

    fn widen(&self, next: &Self, thresholds: &[S]) -> Result<Self> {
        let mut set = next.set.clone();
        for name in self.set.names() {
            let hull = widen_interval(&self.set.gamma(name)?, &next.set.gamma(name)?, thresholds);
            let mid = hull.mid();
            let dev = hull.radius_about(&mid);
            let (phi, id) = set.phi().new_central()?;
            set = set.with_phi(phi);
            set.bind(name, AffineForm::from_terms(mid, [(id, dev)]));
        }
        Ok(AffineDomain { set, mode: self.mode })
    }

    fn ranges(&self) -> Result<Vec<(String, Interval<S>)>> {
        self.set.columns().map(|(name, f)| Ok((name.to_string(), f.gamma(self.set.phi())?))).collect()
    }

    fn symbol_count(&self) -> usize {
        self.set.n() + self.set.m()
    }

    fn compact(&self) -> Self {
        AffineDomain { set: self.set.collect_garbage(), mode: self.mode }
    }

    fn align(&self, other: &Self) -> Self {
        AffineDomain { set: self.set.padded(other.set.n(), other.set.m()), mode: self.mode }
    }

    fn snapshot(&self) -> Result<Vec<VarState>> {
        self.set
            .columns()
            .map(|(name, f)| {
                Ok(VarState {
                    name: name.to_string(),
                    range: f.gamma(self.set.phi())?.to_f64_outward(),
                    form: Some(f.to_f64()),
                })
            })
            .collect()
    }

    fn noise(&self) -> Option<NoiseBox<f64>> {
        to_f64_box(self.set.phi())
    }

    fn exact(&self) -> Result<Option<ExactPoint>> {
        if !S::EXACT {
            return Ok(None);
        }
        let phi = self.set.phi();
        Ok(Some(ExactPoint {
            vars: self.ranges()?.into_iter().map(|(n, i)| (n, i.lo.to_string(), i.hi.to_string())).collect(),
            central: exact_box(phi.central()),
            perturbation: exact_box(phi.perturbation()),
        }))
    }
}

/// Non-relational baseline: one interval per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalDomain<S> {
    vars: Vec<(String, Interval<S>)>,
}

impl<S> Default for IntervalDomain<S> {
    fn default() -> Self {
        IntervalDomain { vars: Vec::new() }
    }
}

impl<S: Scalar> IntervalDomain<S> {
    pub fn get(&self, name: &str) -> Result<&Interval<S>> {
        self.vars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, i)| i)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn set(&mut self, name: &str, itv: Interval<S>) {
        match self.vars.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = itv,
            None => self.vars.push((name.to_string(), itv)),
        }
    }

    fn constant(n: &Number) -> Interval<S> {
        n.enclosure()
    }

    pub fn eval(&self, e: &Expr) -> Result<Interval<S>> {
        Ok(match e {
            Expr::Const(n) => Self::constant(n),
            Expr::Var(v) => self.get(v)?.clone(),
            Expr::Neg(inner) => self.eval(inner)?.neg(),
            Expr::Add(l, r) => self.eval(l)?.add(&self.eval(r)?).outward(),
            Expr::Sub(l, r) => self.eval(l)?.sub(&self.eval(r)?).outward(),
            Expr::Mul(l, r) => self.eval(l)?.mul(&self.eval(r)?).outward(),
            Expr::DivConst(inner, n) => {
                let k: S = n.value();
                if k.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                let x = self.eval(inner)?;
                if S::EXACT {
                    x.scale(&(S::one() / k))
                } else {
                    // divide by both ends of the enclosure of k
                    let inv = Self::constant(n);
                    let a = x.scale(&(S::one() / inv.lo.clone()));
                    let b = x.scale(&(S::one() / inv.hi.clone()));
                    a.hull(&b).outward()
                }
            }
        })
    }

    /// Narrows `name` by `name op bound`.
    fn refine(&mut self, name: &str, op: CmpOp, bound: &Interval<S>) -> Result<bool> {
        let cur = self.get(name)?.clone();
        let next = match op {
            CmpOp::Lt | CmpOp::Le => Interval::new(cur.lo.clone(), cur.hi.clone().min_of(bound.hi.clone())),
            CmpOp::Gt | CmpOp::Ge => Interval::new(cur.lo.clone().max_of(bound.lo.clone()), cur.hi.clone()),
            CmpOp::Eq => cur.meet(bound),
            CmpOp::Ne => Some(cur),
        };
        match next {
            Some(itv) => {
                self.set(name, itv);
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}

impl<S: Scalar> Domain for IntervalDomain<S> {
    type Scalar = S;

    fn declare_range(&mut self, name: &str, lo: &Number, hi: &Number) -> Result<()> {
        let itv = Self::constant(lo).hull(&Self::constant(hi));
        self.set(name, itv);
        Ok(())
    }

    fn assign(&mut self, name: &str, e: &Expr) -> Result<()> {
        let itv = self.eval(e)?;
        self.set(name, itv);
        Ok(())
    }

    fn guard(&self, cond: &Cond) -> Result<Option<Self>> {
        let op = cond.op;
        if op == CmpOp::Ne {
            return Ok(Some(self.clone()));
        }
        let diff = self.eval(&cond.lhs)?.sub(&self.eval(&cond.rhs)?).outward();
        let zero = S::zero();
        let feasible = match op {
            CmpOp::Lt | CmpOp::Le => diff.lo <= zero,
            CmpOp::Gt | CmpOp::Ge => diff.hi >= zero,
            _ => diff.contains(&zero),
        };
        if !feasible {
            return Ok(None);
        }
        let mut out = self.clone();
        if let Expr::Var(v) = &cond.lhs {
            let bound = self.eval(&cond.rhs)?;
            if !out.refine(v, op, &bound)? {
                return Ok(None);
            }
        }
        if let Expr::Var(v) = &cond.rhs {
            let bound = out.eval(&cond.lhs)?;
            if !out.refine(v, flip(op), &bound)? {
                return Ok(None);
            }
        }
        Ok(Some(out))
    }

    fn join(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (name, itv) in &other.vars {
            let joined = match self.get(name) {
                Ok(mine) => mine.hull(itv),
                Err(_) => itv.clone(),
            };
            out.set(name, joined);
        }
        Ok(out)
    }

    fn includes(&self, other: &Self) -> bool {
        other.vars.iter().all(|(name, itv)| self.get(name).is_ok_and(|mine| absorbs(mine, itv)))
    }

    fn widen(&self, next: &Self, thresholds: &[S]) -> Result<Self> {
        let mut out = next.clone();
        for (name, old) in &self.vars {
            out.set(name, widen_interval(old, next.get(name)?, thresholds));
        }
        Ok(out)
    }

    fn ranges(&self) -> Result<Vec<(String, Interval<S>)>> {
        Ok(self.vars.clone())
    }

    fn symbol_count(&self) -> usize {
        0
    }

    fn compact(&self) -> Self {
        self.clone()
    }

    fn align(&self, _other: &Self) -> Self {
        self.clone()
    }

    fn snapshot(&self) -> Result<Vec<VarState>> {
        Ok(self
            .vars
            .iter()
            .map(|(name, itv)| VarState { name: name.clone(), range: itv.to_f64_outward(), form: None })
            .collect())
    }

    fn noise(&self) -> Option<NoiseBox<f64>> {
        None
    }
}
