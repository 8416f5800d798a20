//! Interpretation of tests.
//!
//! Equalities contract the noise box and replace the compared columns by a
//! single form of minimal width; inequalities only contract the box.

use std::cmp::Ordering;

use crate::affine::{AffineForm, ConstrainedAffineSet};
use crate::ast::{CmpOp, Cond, Expr};
use crate::error::Result;
use crate::noise::{NoiseBox, NoiseId, Relation};
use crate::scalar::Scalar;
use crate::state::AbstractState;
use crate::transfer::{Evaluator, MulMode};

/// One term `w·|a + b·θ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsTerm<S> {
    pub a: S,
    pub b: S,
    pub w: S,
}

/// Minimize `Σ w_l·|a_l + b_l·θ|` over a scalar `θ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MinimizeAbsSumProblem<S> {
    pub terms: Vec<AbsTerm<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbsSumMinimum<S> {
    pub theta: S,
    pub value: S,
    /// Term whose breakpoint `-a/b` is the returned `θ`.
    pub breakpoint: Option<usize>,
}

impl<S: Scalar> MinimizeAbsSumProblem<S> {
    pub fn new(terms: Vec<AbsTerm<S>>) -> Self {
        debug_assert!(terms.iter().all(|t| t.w >= S::zero()), "weights must be non-negative");
        MinimizeAbsSumProblem { terms }
    }

    pub fn objective(&self, theta: &S) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, t| acc + t.w.clone() * (t.a.clone() + t.b.clone() * theta.clone()).abs())
    }

    /// Breakpoints `(θ, term)` of the terms that actually depend on `θ`.
    pub fn breakpoints(&self) -> Vec<(S, usize)> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.b.is_zero() && t.w > S::zero())
            .map(|(l, t)| (-t.a.clone() / t.b.clone(), l))
            .collect()
    }
}

/// Weighted median of the breakpoints.
///
/// When the minimum is attained on a whole segment, the segment endpoint
/// owned by the lowest-numbered term is returned.
pub fn minimize_abs_sum<S: Scalar>(p: &MinimizeAbsSumProblem<S>) -> AbsSumMinimum<S> {
    let mut bps = p.breakpoints();
    if bps.is_empty() {
        let theta = S::zero();
        return AbsSumMinimum { value: p.objective(&theta), theta, breakpoint: None };
    }
    bps.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)));
    let weight = |l: usize| p.terms[l].w.clone() * p.terms[l].b.abs();
    let total = bps.iter().fold(S::zero(), |acc, &(_, l)| acc + weight(l));
    let half = total * S::half();
    let mut cum = S::zero();
    let mut median = bps.len() - 1;
    for (q, &(_, l)) in bps.iter().enumerate() {
        cum = cum + weight(l);
        if cum >= half {
            median = q;
            break;
        }
    }
    // the minimizing segment can only touch the median and its neighbours
    let lo = median.saturating_sub(1);
    let hi = (median + 1).min(bps.len() - 1);
    let candidates: Vec<(S, S, usize)> = bps[lo..=hi]
        .iter()
        .map(|(theta, l)| (p.objective(theta), theta.clone(), *l))
        .collect();
    let best = candidates.iter().map(|c| c.0.clone()).fold(candidates[0].0.clone(), S::min_of);
    let tol = S::tolerance() * S::one().max_of(best.abs());
    let (value, theta, l) = candidates
        .into_iter()
        .filter(|c| c.0.clone() <= best.clone() + tol.clone())
        .min_by_key(|c| c.2)
        .expect("at least one candidate attains the minimum");
    AbsSumMinimum { theta, value, breakpoint: Some(l) }
}

/// Outcome of equating two forms over a box.
#[derive(Clone, Debug)]
struct Merge<S> {
    phi: NoiseBox<S>,
    merged: AffineForm<S>,
    /// `b - a`, which vanishes on the constrained set.
    diff: AffineForm<S>,
    /// Symbol absent from `merged` that the equality determines.
    pivot: Option<NoiseId>,
}

fn merge_forms<S: Scalar>(a: &AffineForm<S>, b: &AffineForm<S>, phi: &NoiseBox<S>) -> Option<Merge<S>> {
    let diff = b.sub(a);
    let phi = phi.contract(&diff.to_constraint(Relation::Eq));
    if phi.is_empty() {
        return None;
    }
    if diff.symbol_count() == 0 {
        return Some(Merge { phi, merged: a.clone(), diff, pivot: None });
    }
    // every a + t·diff agrees with a and b where diff = 0; pick the narrowest
    let mut symbols: Vec<NoiseId> = a.terms().chain(diff.terms()).map(|(id, _)| id).collect();
    symbols.sort();
    symbols.dedup();
    let problem = MinimizeAbsSumProblem::new(
        symbols
            .iter()
            .map(|&id| AbsTerm { a: a.coeff(id), b: diff.coeff(id), w: phi.range(id).dev() })
            .collect(),
    );
    let best = minimize_abs_sum(&problem);
    let pivot = match best.breakpoint {
        Some(l) => symbols[l],
        // width does not depend on t: eliminate the best-conditioned symbol
        None => diff
            .terms()
            .fold(None::<(NoiseId, S)>, |acc, (id, v)| match acc {
                Some((_, ref w)) if v.abs() <= *w => acc,
                _ => Some((id, v.abs())),
            })
            .map(|(id, _)| id)
            .expect("diff has at least one symbol"),
    };
    let t = -a.coeff(pivot) / diff.coeff(pivot);
    let mut merged = a.add_scaled(&diff, &t);
    merged.set_coeff(pivot, S::zero());
    Some(Merge { phi, merged, diff, pivot: Some(pivot) })
}

/// `[[xi == xj]]`.
pub fn test_eq_vars<S: Scalar>(x: &ConstrainedAffineSet<S>, xi: &str, xj: &str) -> Result<AbstractState<S>> {
    let (a, b) = (x.form(xi)?, x.form(xj)?);
    let Some(m) = merge_forms(a, b, x.phi()) else {
        return Ok(AbstractState::Bottom);
    };
    let mut out = x.clone().with_phi(m.phi);
    out.bind(xi, m.merged.clone());
    out.bind(xj, m.merged);
    Ok(AbstractState::Set(out))
}

/// `[[e1 == e2]]`: after the call both sides evaluate to the same form.
pub fn test_eq_exprs<S: Scalar>(x: &ConstrainedAffineSet<S>, e1: &Expr, e2: &Expr) -> Result<AbstractState<S>> {
    test_eq_exprs_with(x, e1, e2, MulMode::Centered)
}

pub fn test_eq_exprs_with<S: Scalar>(
    x: &ConstrainedAffineSet<S>,
    e1: &Expr,
    e2: &Expr,
    mode: MulMode,
) -> Result<AbstractState<S>> {
    let mut ev = Evaluator::new(x, mode);
    let f1 = ev.eval(e1)?;
    let f2 = ev.eval(e2)?;
    let Some(m) = merge_forms(&f1, &f2, ev.phi()) else {
        return Ok(AbstractState::Bottom);
    };
    let Some(k) = m.pivot else {
        return Ok(AbstractState::Set(x.clone().with_phi(m.phi)));
    };
    // solve diff = 0 for the pivot
    let dk = m.diff.coeff(k);
    let mut rest = m.diff.clone();
    rest.set_coeff(k, S::zero());
    let by = rest.scale(&(-S::one() / dk));
    let columns = x.columns().map(|(name, f)| (name.to_string(), f.substitute(k, &by)));
    Ok(AbstractState::Set(ConstrainedAffineSet::from_forms(m.phi, columns)))
}

/// `[[e1 op e2]]` for an ordering `op`; only the noise box changes.
pub fn test_ineq<S: Scalar>(x: &ConstrainedAffineSet<S>, e1: &Expr, op: CmpOp, e2: &Expr) -> Result<AbstractState<S>> {
    test_ineq_with(x, e1, op, e2, MulMode::Centered)
}

pub fn test_ineq_with<S: Scalar>(
    x: &ConstrainedAffineSet<S>,
    e1: &Expr,
    op: CmpOp,
    e2: &Expr,
    mode: MulMode,
) -> Result<AbstractState<S>> {
    let mut ev = Evaluator::new(x, mode);
    let f1 = ev.eval(e1)?;
    let f2 = ev.eval(e2)?;
    let (diff, relation) = match op {
        CmpOp::Lt => (f1.sub(&f2), Relation::Lt),
        CmpOp::Le => (f1.sub(&f2), Relation::Le),
        CmpOp::Gt => (f2.sub(&f1), Relation::Lt),
        CmpOp::Ge => (f2.sub(&f1), Relation::Le),
        CmpOp::Eq | CmpOp::Ne => panic!("test_ineq called with {}", op.symbol()),
    };
    let phi = ev.phi().contract(&diff.to_constraint(relation));
    if phi.is_empty() {
        return Ok(AbstractState::Bottom);
    }
    // symbols created while evaluating the operands are referenced by no column
    let keep = |len: usize, total: usize| (0..total).map(|i| i < len).collect::<Vec<_>>();
    let phi = phi.retain(&keep(x.n(), phi.central_len()), &keep(x.m(), phi.perturbation_len()));
    Ok(AbstractState::Set(x.clone().with_phi(phi)))
}

/// Dispatches a condition; `!=` adds no constraint.
pub fn test_cond<S: Scalar>(x: &ConstrainedAffineSet<S>, cond: &Cond, mode: MulMode) -> Result<AbstractState<S>> {
    match cond.op {
        CmpOp::Eq => test_eq_exprs_with(x, &cond.lhs, &cond.rhs, mode),
        CmpOp::Ne => Ok(AbstractState::Set(x.clone())),
        op => test_ineq_with(x, &cond.lhs, op, &cond.rhs, mode),
    }
}
