//! Order relations on constrained affine forms and sets.
//!
//! `X ≤ Y` holds when `Φ^X ⊆ Φ^Y` and, for every direction `t`,
//!
//! ```text
//! sup_{Φ^X} |⟨(C^Y - C^X) t, ε⟩|  ≤  sup_{Φ^Y} |⟨P^Y t, η⟩| - sup_{Φ^X} |⟨P^X t, η⟩|
//! ```
//!
//! Each supremum is the support function of a centrally symmetric polytope,
//! so the condition is a polytope inclusion `A + B ⊆ K`. [`leq_set_exact`]
//! decides it by checking every candidate vertex of `A + B` against `K` with
//! an exact simplex; [`leq_set_sufficient`] is a cheap, sound test.
//!
//! Perturbation symbols are compared about the midpoints of their ranges:
//! a term `p·η` with `η ∈ [a, b]` counts as `p·mid + p·dev·η'`, `η' ∈ [-1, 1]`.

use crate::affine::{AffineForm, ConstrainedAffineSet};
use crate::error::{Error, Result};
use crate::lp::in_convex_hull;
use crate::noise::{NoiseBox, NoiseId};
use crate::scalar::Scalar;

/// Default symbol cap for [`leq_set_exact`].
pub const DEFAULT_EXACT_CAP: usize = 16;

/// Outcome of the sufficient inclusion test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Unknown,
}

fn slack<S: Scalar>(values: &[&S]) -> S {
    let scale = values.iter().fold(S::one(), |acc, v| acc.max_of(v.abs()));
    S::tolerance() * scale
}

/// One-dimensional order: `Φ^a ⊆ Φ^b` and
/// `sup_{Φ^a} |central(b - a)| ≤ sup_{Φ^b}|P^b| + β^b - sup_{Φ^a}|P^a| - β^a`.
///
/// For forms without perturbation terms this is the usual criterion
/// `sup |a - b| ≤ β^b - β^a`.
pub fn leq_form<S: Scalar>(a: &AffineForm<S>, phi_a: &NoiseBox<S>, b: &AffineForm<S>, phi_b: &NoiseBox<S>) -> bool {
    if phi_a.is_empty() {
        return true;
    }
    if !phi_a.leq(phi_b) {
        return false;
    }
    let (a, phi_a) = (&recentre(a, phi_a), unit_perturbations(phi_a));
    let (b, phi_b) = (&recentre(b, phi_b), unit_perturbations(phi_b));
    let (phi_a, phi_b) = (&phi_a, &phi_b);
    let diff = central_part(&b.sub(a));
    let lhs = diff.sup_abs(phi_a) + perturbation_part(a).sup_abs(phi_a) + a.beta().clone();
    let rhs = perturbation_part(b).sup_abs(phi_b) + b.beta().clone();
    let tol = slack(&[&lhs, &rhs]);
    lhs <= rhs + tol
}

fn central_part<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    AffineForm::new(f.center.clone(), f.central().clone(), Default::default())
}

fn perturbation_part<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    AffineForm::new(S::zero(), Default::default(), f.perturbation().clone())
}

/// `f` with every perturbation symbol rescaled to `[-1, 1]`: the midpoint of
/// its range moves into the center.
fn recentre<S: Scalar>(f: &AffineForm<S>, phi: &NoiseBox<S>) -> AffineForm<S> {
    if phi.is_empty() {
        return f.clone();
    }
    let mut out = f.clone();
    for (&j, p) in f.perturbation() {
        let range = phi.range(NoiseId::perturbation(j));
        out.center = out.center.clone() + p.clone() * range.mid();
        out.set_coeff(NoiseId::perturbation(j), p.clone() * range.dev());
    }
    out
}

fn unit_perturbations<S: Scalar>(phi: &NoiseBox<S>) -> NoiseBox<S> {
    if phi.is_empty() {
        return phi.clone();
    }
    let unit = vec![crate::interval::Interval::unit(); phi.perturbation_len()];
    NoiseBox::from_intervals(phi.central().to_vec(), unit).expect("unit ranges are valid")
}

/// Columns of `y` reordered to match `x`, both over a common universe.
fn align<S: Scalar>(
    x: &ConstrainedAffineSet<S>,
    y: &ConstrainedAffineSet<S>,
) -> Result<(ConstrainedAffineSet<S>, Vec<AffineForm<S>>, NoiseBox<S>, NoiseBox<S>)> {
    if x.len() != y.len() {
        return Err(Error::VariableMismatch(format!("{:?} vs {:?}", x.names(), y.names())));
    }
    let y_forms = x
        .names()
        .iter()
        .map(|name| y.form(name).cloned().map_err(|_| Error::VariableMismatch(format!("`{name}` missing"))))
        .collect::<Result<Vec<_>>>()?;
    let n = x.n().max(y.n());
    let m = x.m().max(y.m());
    let (phi_x, phi_y) = (x.phi().padded(n, m), y.phi().padded(n, m));
    if !phi_x.is_empty() && !phi_x.leq(&phi_y) {
        return Ok((x.clone(), y_forms, phi_x, phi_y));
    }
    let x_forms: Vec<(String, AffineForm<S>)> = x.columns().map(|(name, f)| (name.to_string(), recentre(f, &phi_x))).collect();
    let y_forms = y_forms.iter().map(|f| recentre(f, &phi_y)).collect();
    let (phi_x, phi_y) = (unit_perturbations(&phi_x), unit_perturbations(&phi_y));
    Ok((ConstrainedAffineSet::from_forms(phi_x.clone(), x_forms), y_forms, phi_x, phi_y))
}

/// Points `±{ Σ_r row_r · e_r }` over the vertices of the ranges; `base` is
/// added to every point before symmetrization.
fn symmetric_vertices<S: Scalar>(base: Vec<S>, rows: &[(Vec<S>, crate::interval::Interval<S>)]) -> Vec<Vec<S>> {
    let dim = base.len();
    let mut points = vec![base];
    for (row, range) in rows {
        let mut next = Vec::with_capacity(points.len() * 2);
        let choices: Vec<&S> = if range.lo == range.hi { vec![&range.lo] } else { vec![&range.lo, &range.hi] };
        for p in &points {
            for e in &choices {
                next.push(p.iter().zip(row).map(|(v, r)| v.clone() + r.clone() * (*e).clone()).collect::<Vec<S>>());
            }
        }
        points = dedup(next);
        if dim == 1 {
            points = extremes_1d(points);
        }
    }
    let negated: Vec<Vec<S>> = points.iter().map(|p| p.iter().map(|v| -v.clone()).collect()).collect();
    points.extend(negated);
    let points = dedup(points);
    if dim == 1 {
        extremes_1d(points)
    } else {
        points
    }
}

fn dedup<S: Scalar>(mut points: Vec<Vec<S>>) -> Vec<Vec<S>> {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    points.dedup();
    points
}

fn extremes_1d<S: Scalar>(points: Vec<Vec<S>>) -> Vec<Vec<S>> {
    let lo = points.iter().map(|p| p[0].clone()).reduce(|a, b| a.min_of(b));
    let hi = points.iter().map(|p| p[0].clone()).reduce(|a, b| a.max_of(b));
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo == hi => vec![vec![lo]],
        (Some(lo), Some(hi)) => vec![vec![lo], vec![hi]],
        _ => points,
    }
}

/// Rows of the stacked columns for symbols of one kind, skipping zero rows.
fn rows_of<S: Scalar>(
    forms: &[AffineForm<S>],
    ids: impl Iterator<Item = NoiseId>,
    phi: &NoiseBox<S>,
) -> Vec<(Vec<S>, crate::interval::Interval<S>)> {
    ids.filter_map(|id| {
        let row: Vec<S> = forms.iter().map(|f| f.coeff(id)).collect();
        (!row.iter().all(|v| v.is_zero())).then(|| (row, phi.range(id)))
    })
    .collect()
}

/// Exact decision of `X ≤ Y` for sets with at most `cap` symbols.
///
/// Columns are matched by variable name.
pub fn leq_set_exact<S: Scalar>(x: &ConstrainedAffineSet<S>, y: &ConstrainedAffineSet<S>, cap: usize) -> Result<bool> {
    let (x, y_forms, phi_x, phi_y) = align(x, y)?;
    let (n, m) = (phi_x.central_len(), phi_x.perturbation_len());
    if n + m > cap {
        return Err(Error::CapExceeded { count: n + m, cap });
    }
    if phi_x.is_empty() {
        return Ok(true);
    }
    if !phi_x.leq(&phi_y) {
        return Ok(false);
    }
    if x.is_empty() {
        return Ok(true);
    }
    let diffs: Vec<AffineForm<S>> = x.forms().iter().zip(&y_forms).map(|(fx, fy)| fy.sub(fx)).collect();
    let centers: Vec<S> = diffs.iter().map(|d| d.center.clone()).collect();
    let a = symmetric_vertices(centers, &rows_of(&diffs, (0..n).map(NoiseId::central), &phi_x));
    let zeros = vec![S::zero(); x.len()];
    let b = symmetric_vertices(zeros.clone(), &rows_of(x.forms(), (0..m).map(NoiseId::perturbation), &phi_x));
    let k = symmetric_vertices(zeros, &rows_of(&y_forms, (0..m).map(NoiseId::perturbation), &phi_y));
    for pa in &a {
        for pb in &b {
            let target: Vec<S> = pa.iter().zip(pb).map(|(u, v)| u.clone() + v.clone()).collect();
            if !in_convex_hull(&k, &target) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct DirectionClass<S> {
    direction: Vec<S>,
    central: Vec<(NoiseId, S)>,
    center: S,
    perturbation_x: Vec<(NoiseId, S)>,
    budget: S,
}

/// Splits a non-zero row into `(direction, factor)` with the direction's
/// first non-zero entry equal to 1.
fn normalize<S: Scalar>(row: &[S]) -> Option<(Vec<S>, S)> {
    let lead = row.iter().find(|v| !v.is_zero())?.clone();
    Some((row.iter().map(|v| v.clone() / lead.clone()).collect(), lead))
}

/// Sound, incomplete test of `X ≤ Y`.
///
/// Rows of `C^Y - C^X`, `P^X` and `P^Y` are grouped by direction in `R^p`.
/// Within a class, the left-hand side is bounded by the exact suprema of the
/// class's partial forms and the right-hand side from below by the radius of
/// `P^Y` in that class; summing per class bounds the full condition.
pub fn leq_set_sufficient<S: Scalar>(x: &ConstrainedAffineSet<S>, y: &ConstrainedAffineSet<S>) -> Verdict {
    let Ok((x, y_forms, phi_x, phi_y)) = align(x, y) else {
        return Verdict::Unknown;
    };
    if phi_x.is_empty() {
        return Verdict::Holds;
    }
    if !phi_x.leq(&phi_y) {
        return Verdict::Unknown;
    }
    let (n, m) = (phi_x.central_len(), phi_x.perturbation_len());
    let same_central = x.forms().iter().zip(&y_forms).all(|(a, b)| central_part(a) == central_part(b));
    let same_perturbation = x.forms().iter().zip(&y_forms).all(|(a, b)| a.perturbation() == b.perturbation());
    if same_central && same_perturbation {
        return Verdict::Holds;
    }

    let diffs: Vec<AffineForm<S>> = x.forms().iter().zip(&y_forms).map(|(fx, fy)| fy.sub(fx)).collect();
    let tol = S::tolerance();
    let mut classes: Vec<DirectionClass<S>> = Vec::new();
    let class_of = |row: &[S], classes: &mut Vec<DirectionClass<S>>| -> Option<(usize, S)> {
        let (dir, factor) = normalize(row)?;
        let scale = dir.iter().fold(S::one(), |acc, v| acc.max_of(v.abs()));
        let found = classes.iter().position(|c| {
            c.direction.iter().zip(&dir).all(|(u, v)| u.approx_eq(v, &(tol.clone() * scale.clone())))
        });
        let idx = found.unwrap_or_else(|| {
            classes.push(DirectionClass {
                direction: dir,
                central: Vec::new(),
                center: S::zero(),
                perturbation_x: Vec::new(),
                budget: S::zero(),
            });
            classes.len() - 1
        });
        Some((idx, factor))
    };

    let centers: Vec<S> = diffs.iter().map(|d| d.center.clone()).collect();
    if let Some((k, f)) = class_of(&centers, &mut classes) {
        classes[k].center = f;
    }
    for i in 0..n {
        let id = NoiseId::central(i);
        let row: Vec<S> = diffs.iter().map(|d| d.coeff(id)).collect();
        if let Some((k, f)) = class_of(&row, &mut classes) {
            classes[k].central.push((id, f));
        }
    }
    for j in 0..m {
        let id = NoiseId::perturbation(j);
        let row: Vec<S> = x.forms().iter().map(|f| f.coeff(id)).collect();
        if let Some((k, f)) = class_of(&row, &mut classes) {
            classes[k].perturbation_x.push((id, f));
        }
        let row: Vec<S> = y_forms.iter().map(|f| f.coeff(id)).collect();
        if let Some((k, f)) = class_of(&row, &mut classes) {
            let budget = classes[k].budget.clone() + f.abs() * phi_y.range(id).dev();
            classes[k].budget = budget;
        }
    }
    for class in &classes {
        let lhs = phi_x.evaluate(&class.center, &class.central).mag() + phi_x.evaluate(&S::zero(), &class.perturbation_x).mag();
        if lhs.is_zero() {
            continue;
        }
        if lhs > class.budget.clone() + slack(&[&lhs, &class.budget]) {
            return Verdict::Unknown;
        }
    }
    Verdict::Holds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::scalar::Rational;

    fn form(center: f64, central: &[(usize, f64)], pert: &[(usize, f64)]) -> AffineForm<f64> {
        AffineForm::new(center, central.iter().cloned().collect(), pert.iter().cloned().collect())
    }

    fn set(phi: NoiseBox<f64>, cols: &[(&str, AffineForm<f64>)]) -> ConstrainedAffineSet<f64> {
        ConstrainedAffineSet::from_forms(phi, cols.iter().map(|(n, f)| (n.to_string(), f.clone())))
    }

    #[test]
    fn form_order_examples() {
        let phi = NoiseBox::full(1, 0);
        let a = form(1.0, &[(0, 1.0)], &[]);
        let b = AffineForm::constant(1.0).with_beta(1.0);
        assert!(leq_form(&a, &phi, &b, &phi));
        let a2 = form(0.0, &[(0, 2.0)], &[]);
        let b2 = AffineForm::constant(0.0).with_beta(1.0);
        assert!(!leq_form(&a2, &phi, &b2, &phi));
        // x1 = 1 + ε1 against y1 = 1 + η1
        let phi2 = NoiseBox::full(1, 1);
        assert!(leq_form(&form(1.0, &[(0, 1.0)], &[]), &phi2, &form(1.0, &[], &[(0, 1.0)]), &phi2));
    }

    #[test]
    fn global_order_distinguishes_shared_perturbation() {
        let phi = NoiseBox::full(2, 2);
        let x = set(phi.clone(), &[("x1", form(1.0, &[(0, 1.0)], &[])), ("x2", form(1.0, &[(1, 1.0)], &[]))]);
        let y = set(phi.clone(), &[("x1", form(1.0, &[], &[(0, 1.0)])), ("x2", form(1.0, &[], &[(0, 1.0)]))]);
        let z = set(phi, &[("x1", form(1.0, &[], &[(0, 1.0)])), ("x2", form(1.0, &[], &[(1, 1.0)]))]);
        assert!(!leq_set_exact(&x, &y, DEFAULT_EXACT_CAP).unwrap());
        assert!(leq_set_exact(&x, &z, DEFAULT_EXACT_CAP).unwrap());
        assert_eq!(leq_set_sufficient(&x, &z), Verdict::Holds);
        assert_eq!(leq_set_sufficient(&x, &y), Verdict::Unknown);
    }

    #[test]
    fn reflexive_in_both_tests() {
        let phi = NoiseBox::from_intervals(
            vec![Interval::new(-1.0, -0.5).unwrap()],
            vec![Interval::new(-1.0, 0.0).unwrap()],
        )
        .unwrap();
        let x = set(phi, &[("a", form(4.0, &[(0, 2.0)], &[(0, 1.0)])), ("b", form(0.0, &[], &[(0, -3.0)]))]);
        assert!(leq_set_exact(&x, &x, DEFAULT_EXACT_CAP).unwrap());
        assert_eq!(leq_set_sufficient(&x, &x), Verdict::Holds);
    }

    #[test]
    fn cap_is_enforced() {
        let x = set(NoiseBox::full(10, 10), &[("a", AffineForm::constant(0.0))]);
        assert_eq!(leq_set_exact(&x, &x, 16), Err(Error::CapExceeded { count: 20, cap: 16 }));
    }

    #[test]
    fn box_inclusion_is_required() {
        let small = NoiseBox::from_intervals(vec![Interval::new(0.0, 1.0).unwrap()], vec![]).unwrap();
        let x = set(NoiseBox::full(1, 0), &[("a", form(0.0, &[(0, 1.0)], &[]))]);
        let y = set(small, &[("a", form(0.0, &[(0, 1.0)], &[]))]);
        assert!(!leq_set_exact(&x, &y, 16).unwrap());
        assert!(leq_set_exact(&y, &x, 16).unwrap());
    }

    #[test]
    fn exact_order_in_rationals() {
        let q = |v: i64| Rational::from_integer(v.into());
        let phi = NoiseBox::<Rational>::full(1, 1);
        let x = ConstrainedAffineSet::from_forms(
            phi.clone(),
            [("a".to_string(), AffineForm::from_terms(q(1), [(NoiseId::central(0), q(1))]))],
        );
        let y = ConstrainedAffineSet::from_forms(
            phi,
            [("a".to_string(), AffineForm::from_terms(q(1), [(NoiseId::perturbation(0), q(1))]))],
        );
        assert!(leq_set_exact(&x, &y, 16).unwrap());
        assert!(!leq_set_exact(&y, &x, 16).unwrap());
    }

    #[test]
    fn lopsided_perturbation_is_measured_about_its_midpoint() {
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let itv = |lo, hi| Interval::new(lo, hi).unwrap();
        let phi = NoiseBox::from_intervals(vec![itv(q(-3, 4), q(3, 4)), itv(q(-1, 1), q(1, 1))], vec![itv(q(-1, 2), q(-1, 4))])
            .unwrap();
        let a = AffineForm::new(
            q(1, 2),
            [(0, q(3, 2)), (1, q(3, 2))].into_iter().collect(),
            [(0, q(-1, 2))].into_iter().collect(),
        );
        let x = ConstrainedAffineSet::from_forms(phi.clone(), [("v".to_string(), a.clone())]);
        // the hull of x as a single fresh perturbation term
        let g = x.gamma("v").unwrap();
        let hull = AffineForm::new(g.mid(), Default::default(), [(1, g.dev())].into_iter().collect());
        let y = ConstrainedAffineSet::from_forms(phi.join(&NoiseBox::full(2, 2)), [("v".to_string(), hull.clone())]);
        assert!(leq_set_exact(&x, &y, DEFAULT_EXACT_CAP).unwrap());
        assert!(leq_form(&a, &phi, &hull, &NoiseBox::full(2, 2)));
    }
}
