//! Interval sub-domain over noise symbols.
//!
//! A [`NoiseBox`] bounds every central symbol `ε_i` and perturbation symbol
//! `η_j` by an interval inside `[-1, 1]`. The pseudo-symbol `ε_0` is always 1
//! and never stored. Tests on program variables become [`LinearConstraint`]s
//! over the symbols, which [`NoiseBox::contract`] abstracts into tighter
//! bounds.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseKind {
    Central,
    Perturbation,
}

/// A noise symbol. `index` is zero-based within its kind, so `ε_1` is
/// `NoiseId::central(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoiseId {
    pub kind: NoiseKind,
    pub index: usize,
}

impl NoiseId {
    pub fn central(index: usize) -> Self {
        NoiseId { kind: NoiseKind::Central, index }
    }

    pub fn perturbation(index: usize) -> Self {
        NoiseId { kind: NoiseKind::Perturbation, index }
    }
}

impl fmt::Display for NoiseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::Central => write!(f, "ε{}", self.index + 1),
            NoiseKind::Perturbation => write!(f, "η{}", self.index + 1),
        }
    }
}

/// Relation of a [`LinearConstraint`] against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    /// Treated as `Le`: boxes cannot express open bounds.
    Lt,
}

/// `constant + Σ central[i]·ε_i + Σ perturbation[j]·η_j  ⋈  0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint<S> {
    pub constant: S,
    pub central: BTreeMap<usize, S>,
    pub perturbation: BTreeMap<usize, S>,
    pub relation: Relation,
}

impl<S: Scalar> LinearConstraint<S> {
    pub fn new(
        constant: S,
        central: BTreeMap<usize, S>,
        perturbation: BTreeMap<usize, S>,
        relation: Relation,
    ) -> Self {
        let strip = |m: BTreeMap<usize, S>| m.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        LinearConstraint {
            constant,
            central: strip(central),
            perturbation: strip(perturbation),
            relation,
        }
    }

    fn terms(&self) -> Vec<(NoiseId, S)> {
        self.central
            .iter()
            .map(|(&i, w)| (NoiseId::central(i), w.clone()))
            .chain(self.perturbation.iter().map(|(&j, w)| (NoiseId::perturbation(j), w.clone())))
            .collect()
    }
}

/// Product of one interval per noise symbol, or the empty box.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseBox<S> {
    central: Vec<Interval<S>>,
    perturbation: Vec<Interval<S>>,
    empty: bool,
}

impl<S: Scalar> Default for NoiseBox<S> {
    fn default() -> Self {
        Self::full(0, 0)
    }
}

impl<S: Scalar> NoiseBox<S> {
    /// `[-1, 1]^(n+m)`.
    pub fn full(n: usize, m: usize) -> Self {
        NoiseBox {
            central: vec![Interval::unit(); n],
            perturbation: vec![Interval::unit(); m],
            empty: false,
        }
    }

    pub fn bottom() -> Self {
        NoiseBox { central: Vec::new(), perturbation: Vec::new(), empty: true }
    }

    pub fn from_intervals(central: Vec<Interval<S>>, perturbation: Vec<Interval<S>>) -> Result<Self> {
        let unit = Interval::unit();
        if let Some(bad) = central.iter().chain(&perturbation).find(|i| !i.is_subset(&unit)) {
            return Err(Error::SymbolOutOfRange(bad.to_string()));
        }
        Ok(NoiseBox { central, perturbation, empty: false })
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn central_len(&self) -> usize {
        self.central.len()
    }

    pub fn perturbation_len(&self) -> usize {
        self.perturbation.len()
    }

    pub fn len(&self) -> usize {
        self.central.len() + self.perturbation.len()
    }

    pub fn central(&self) -> &[Interval<S>] {
        &self.central
    }

    pub fn perturbation(&self) -> &[Interval<S>] {
        &self.perturbation
    }

    pub fn get(&self, id: NoiseId) -> Option<&Interval<S>> {
        match id.kind {
            NoiseKind::Central => self.central.get(id.index),
            NoiseKind::Perturbation => self.perturbation.get(id.index),
        }
    }

    /// Range of `id`; symbols beyond the stored universe are fresh, `[-1, 1]`.
    pub fn range(&self, id: NoiseId) -> Interval<S> {
        self.get(id).cloned().unwrap_or_else(Interval::unit)
    }

    pub(crate) fn set(&mut self, id: NoiseId, itv: Interval<S>) {
        let list = match id.kind {
            NoiseKind::Central => &mut self.central,
            NoiseKind::Perturbation => &mut self.perturbation,
        };
        if list.len() <= id.index {
            list.resize(id.index + 1, Interval::unit());
        }
        list[id.index] = itv;
    }

    pub fn new_central(&self) -> Result<(Self, NoiseId)> {
        if self.empty {
            return Err(Error::EmptyBox);
        }
        let mut next = self.clone();
        next.central.push(Interval::unit());
        Ok((next, NoiseId::central(self.central.len())))
    }

    pub fn new_perturbation(&self) -> Result<(Self, NoiseId)> {
        if self.empty {
            return Err(Error::EmptyBox);
        }
        let mut next = self.clone();
        next.perturbation.push(Interval::unit());
        Ok((next, NoiseId::perturbation(self.perturbation.len())))
    }

    /// Extends the universe to at least `n` central and `m` perturbation
    /// symbols; added symbols are fresh.
    pub fn padded(&self, n: usize, m: usize) -> Self {
        let mut out = self.clone();
        if out.central.len() < n {
            out.central.resize(n, Interval::unit());
        }
        if out.perturbation.len() < m {
            out.perturbation.resize(m, Interval::unit());
        }
        out
    }

    /// Keeps the symbols whose flag is set; indices are compacted.
    pub(crate) fn retain(&self, keep_central: &[bool], keep_perturbation: &[bool]) -> Self {
        let pick = |list: &[Interval<S>], keep: &[bool]| {
            list.iter()
                .enumerate()
                .filter(|(i, _)| keep.get(*i).copied().unwrap_or(true))
                .map(|(_, v)| v.clone())
                .collect()
        };
        NoiseBox {
            central: pick(&self.central, keep_central),
            perturbation: pick(&self.perturbation, keep_perturbation),
            empty: self.empty,
        }
    }

    /// `(middle, radius)` of the symbol's range.
    pub fn mid_dev(&self, id: NoiseId) -> Result<(S, S)> {
        if self.empty {
            return Err(Error::EmptyBox);
        }
        let itv = self.range(id);
        Ok((itv.mid(), itv.dev()))
    }

    /// Per-symbol hull; missing symbols count as fresh.
    pub fn join(&self, other: &Self) -> Self {
        if self.empty {
            return other.clone();
        }
        if other.empty {
            return self.clone();
        }
        let n = self.central.len().max(other.central.len());
        let m = self.perturbation.len().max(other.perturbation.len());
        let a = self.padded(n, m);
        let b = other.padded(n, m);
        let hull = |x: &[Interval<S>], y: &[Interval<S>]| x.iter().zip(y).map(|(i, j)| i.hull(j)).collect();
        NoiseBox {
            central: hull(&a.central, &b.central),
            perturbation: hull(&a.perturbation, &b.perturbation),
            empty: false,
        }
    }

    /// Per-symbol inclusion; the empty box is below everything.
    pub fn leq(&self, other: &Self) -> bool {
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        let n = self.central.len().max(other.central.len());
        let m = self.perturbation.len().max(other.perturbation.len());
        let a = self.padded(n, m);
        let b = other.padded(n, m);
        a.central.iter().zip(&b.central).all(|(i, j)| i.is_subset(j))
            && a.perturbation.iter().zip(&b.perturbation).all(|(i, j)| i.is_subset(j))
    }

    /// Range of `constant + Σ w·s` over the box.
    pub fn evaluate(&self, constant: &S, terms: &[(NoiseId, S)]) -> Interval<S> {
        terms.iter().fold(Interval::point(constant.clone()), |acc, (id, w)| acc.add(&self.range(*id).scale(w)))
    }

    /// Intersects the box with the interval abstraction of `c`.
    ///
    /// Each symbol is projected through the constraint given the current
    /// ranges of all others, sweeping until nothing moves.
    pub fn contract(&self, c: &LinearConstraint<S>) -> Self {
        if self.empty {
            return self.clone();
        }
        let terms = c.terms();
        let mut out = self.clone();
        let stop = S::tolerance() * S::of_f64(1e-3);
        let max_sweeps = (2 * terms.len()).max(1);
        for _ in 0..max_sweeps {
            let mut moved = S::zero();
            for (pos, (id, w)) in terms.iter().enumerate() {
                let mut rest = Interval::point(c.constant.clone());
                for (other_pos, (other, wo)) in terms.iter().enumerate() {
                    if other_pos != pos {
                        rest = rest.add(&out.range(*other).scale(wo));
                    }
                }
                let inv = S::one() / w.clone();
                let bound = match c.relation {
                    // w·s ∈ -rest
                    Relation::Eq => rest.neg().scale(&inv).outward(),
                    // w·s ≤ -rest.lo
                    Relation::Le | Relation::Lt => {
                        let edge = -rest.lo.clone() * inv;
                        if *w > S::zero() {
                            Interval { lo: -S::one(), hi: edge.round_up() }
                        } else {
                            Interval { lo: edge.round_down(), hi: S::one() }
                        }
                    }
                };
                let current = out.range(*id);
                match current.meet(&bound) {
                    Some(next) => {
                        let delta = (next.lo.clone() - current.lo.clone()).abs().max_of((current.hi.clone() - next.hi.clone()).abs());
                        moved = moved.max_of(delta);
                        out.set(*id, next);
                    }
                    None => return Self::bottom_like(self),
                }
            }
            if moved <= stop {
                break;
            }
        }
        let total = out.evaluate(&c.constant, &terms);
        let feasible = match c.relation {
            Relation::Eq => total.contains(&S::zero()),
            Relation::Le | Relation::Lt => total.lo <= S::zero(),
        };
        if feasible {
            out
        } else {
            Self::bottom_like(self)
        }
    }

    fn bottom_like(shape: &Self) -> Self {
        NoiseBox { central: shape.central.clone(), perturbation: shape.perturbation.clone(), empty: true }
    }
}

impl<S: Scalar> fmt::Display for NoiseBox<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "⊥");
        }
        let mut first = true;
        for (i, itv) in self.central.iter().enumerate() {
            if !first {
                write!(f, " × ")?;
            }
            first = false;
            write!(f, "ε{}:{}", i + 1, itv)?;
        }
        for (j, itv) in self.perturbation.iter().enumerate() {
            if !first {
                write!(f, " × ")?;
            }
            first = false;
            write!(f, "η{}:{}", j + 1, itv)?;
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}
