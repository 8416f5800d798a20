//! Upper bounds of constrained affine forms and sets.

use std::collections::BTreeSet;

use crate::affine::{AffineForm, ConstrainedAffineSet};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::noise::{NoiseBox, NoiseId, NoiseKind};
use crate::scalar::Scalar;

/// Containment of one interval in the other forces a shared endpoint.
pub fn generic_position<S: Scalar>(i: &Interval<S>, j: &Interval<S>) -> bool {
    let nested = i.is_subset(j) || j.is_subset(i);
    !nested || i.lo == j.lo || i.hi == j.hi
}

/// Which branch of the one-dimensional join produced the result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinKind {
    /// Shared coefficients were kept; the result is a minimal upper bound.
    Minimal,
    /// Interval hull only.
    Hull,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoinedForm<S> {
    pub form: AffineForm<S>,
    pub phi: NoiseBox<S>,
    pub kind: JoinKind,
}

/// Join of two constrained affine forms; ranges include `±β`.
pub fn join_forms<S: Scalar>(a: &AffineForm<S>, phi_a: &NoiseBox<S>, b: &AffineForm<S>, phi_b: &NoiseBox<S>) -> Result<JoinedForm<S>> {
    let ga = a.gamma(phi_a)?;
    let gb = b.gamma(phi_b)?;
    Ok(join_forms_with_ranges(a, phi_a, &ga, b, phi_b, &gb))
}

/// [`join_forms`] with the operand ranges supplied by the caller.
pub fn join_forms_with_ranges<S: Scalar>(
    a: &AffineForm<S>,
    phi_a: &NoiseBox<S>,
    ga: &Interval<S>,
    b: &AffineForm<S>,
    phi_b: &NoiseBox<S>,
    gb: &Interval<S>,
) -> JoinedForm<S> {
    let phi = phi_a.join(phi_b);
    let hull = ga.hull(gb);
    let tol = S::tolerance() * S::one().max_of(hull.mag());
    if generic_position(ga, gb) {
        let (a, phi_a, ga, b, phi_b, gb) = if gb.mid() <= ga.mid() {
            (b, phi_b, gb, a, phi_a, ga)
        } else {
            (a, phi_a, ga, b, phi_b, gb)
        };
        let symbols: BTreeSet<NoiseId> = a.terms().chain(b.terms()).map(|(id, _)| id).collect();
        let mut kept: Vec<(NoiseId, S, Interval<S>, S, S)> = Vec::new();
        for id in symbols {
            let (ia, ib) = (phi_a.range(id), phi_b.range(id));
            if !generic_position(&ia, &ib) {
                continue;
            }
            let u = ia.hull(&ib);
            let (ca, cb) = (a.coeff(id), b.coeff(id));
            let zero = S::zero();
            let coeff = if ca >= zero && cb >= zero && ia.mid() <= u.mid() && ib.mid() >= u.mid() {
                ca.min_of(cb)
            } else if ca <= zero && cb <= zero && ia.mid() >= u.mid() && ib.mid() <= u.mid() {
                ca.max_of(cb)
            } else {
                zero
            };
            if !coeff.is_zero() {
                let (sa, sb) = (u.mid() - ia.mid(), u.mid() - ib.mid());
                kept.push((id, coeff, u, sa, sb));
            }
        }
        let shift_a = kept.iter().fold(S::zero(), |acc, k| acc + k.1.clone() * k.3.clone());
        let shift_b = kept.iter().fold(S::zero(), |acc, k| acc + k.1.clone() * k.4.clone());
        let room_a = hull.mid() - ga.mid();
        let room_b = hull.mid() - gb.mid();
        let zero = S::zero();
        let fits = |slack: &S| {
            -slack.clone() <= shift_a
                && shift_a <= room_a.clone() + slack.clone()
                && room_b <= shift_b.clone() + slack.clone()
                && shift_b <= *slack
        };
        if fits(&tol) {
            let spread = kept.iter().fold(S::zero(), |acc, k| acc + k.1.abs() * k.2.dev());
            let center = kept.iter().fold(hull.mid(), |acc, k| acc - k.1.clone() * k.2.mid());
            // boundary cases accepted only within tolerance pay for the overshoot in β
            let overshoot = [
                -shift_a.clone(),
                shift_a.clone() - room_a.clone(),
                room_b.clone() - shift_b.clone(),
                shift_b.clone(),
            ]
            .into_iter()
            .fold(S::zero(), |acc, v| acc.max_of(v));
            let pad = S::two() * overshoot;
            let beta = (hull.dev() - spread).max_of(zero) + pad;
            let form = AffineForm::from_terms(center, kept.into_iter().map(|k| (k.0, k.1))).with_beta(beta.round_up());
            return JoinedForm { form, phi, kind: JoinKind::Minimal };
        }
    }
    let form = AffineForm::constant(hull.mid()).with_beta(hull.dev().round_up());
    JoinedForm { form, phi, kind: JoinKind::Hull }
}

/// Column `name` of `x` with perturbation symbols read as central ones: `η_j`
/// becomes central symbol `n + j`.
pub fn bang<S: Scalar>(x: &ConstrainedAffineSet<S>, name: &str) -> Result<(AffineForm<S>, NoiseBox<S>)> {
    let form = x.form(name)?;
    let n = x.n();
    let terms = form.terms().map(|(id, v)| {
        let index = match id.kind {
            NoiseKind::Central => id.index,
            NoiseKind::Perturbation => n + id.index,
        };
        (NoiseId::central(index), v.clone())
    });
    let out = AffineForm::from_terms(form.center.clone(), terms);
    let phi = if x.phi().is_empty() {
        NoiseBox::bottom()
    } else {
        let all = x.phi().central().iter().chain(x.phi().perturbation()).cloned().collect();
        NoiseBox::from_intervals(all, Vec::new())?
    };
    Ok((out, phi))
}

/// Embeds forms sharing `phi` into a set: the first `l` symbols stay central,
/// the others become perturbation symbols, and each `β_k` gets a dedicated
/// fresh perturbation symbol on column `k`.
///
/// Symbols are numbered central first, then perturbation.
pub fn quest<S: Scalar>(
    names: &[String],
    forms: &[AffineForm<S>],
    phi: &NoiseBox<S>,
    l: usize,
) -> Result<ConstrainedAffineSet<S>> {
    if names.len() != forms.len() {
        return Err(Error::VariableMismatch(format!("{} names for {} forms", names.len(), forms.len())));
    }
    let nc = phi.central_len();
    let total = forms.iter().fold(phi.len(), |acc, f| {
        let (n, m) = f.universe();
        acc.max(n.max(nc + m))
    });
    let l = l.min(total);
    let unified = |id: NoiseId| match id.kind {
        NoiseKind::Central => id.index,
        NoiseKind::Perturbation => nc + id.index,
    };
    let split = |u: usize| if u < l { NoiseId::central(u) } else { NoiseId::perturbation(u - l) };
    let ranges: Vec<Interval<S>> = (0..total)
        .map(|u| {
            if u < nc {
                phi.range(NoiseId::central(u))
            } else {
                phi.range(NoiseId::perturbation(u - nc))
            }
        })
        .collect();
    let central = ranges[..l].to_vec();
    let mut perturbation = ranges[l..].to_vec();
    perturbation.extend(std::iter::repeat_n(Interval::unit(), forms.len()));
    let new_phi = if phi.is_empty() { NoiseBox::bottom() } else { NoiseBox::from_intervals(central, perturbation)? };
    let columns = forms.iter().enumerate().map(|(k, f)| {
        let mut terms: Vec<(NoiseId, S)> = f.terms().map(|(id, v)| (split(unified(id)), v.clone())).collect();
        terms.push((NoiseId::perturbation(total - l + k), f.beta().clone()));
        (names[k].clone(), AffineForm::from_terms(f.center.clone(), terms))
    });
    let mut out = ConstrainedAffineSet::new(new_phi.clone());
    for (name, form) in columns {
        out.bind(&name, form);
    }
    Ok(out.with_phi(new_phi))
}

/// Upper bound of two sets over the same variables.
///
/// Each column is joined on its own, with the perturbation symbols read as
/// central ones; the resulting deviations become fresh perturbation symbols.
/// Fresh symbols of columns with zero deviation are not created.
pub fn join_sets<S: Scalar>(x: &ConstrainedAffineSet<S>, y: &ConstrainedAffineSet<S>) -> Result<ConstrainedAffineSet<S>> {
    if x.len() != y.len() || x.names().iter().any(|name| y.index_of(name).is_none()) {
        return Err(Error::VariableMismatch(format!("{:?} vs {:?}", x.names(), y.names())));
    }
    let n = x.n().max(y.n());
    let m = x.m().max(y.m());
    let (xp, yp) = (x.padded(n, m), y.padded(n, m));
    let mut forms = Vec::with_capacity(x.len());
    let mut phi = None;
    for name in x.names() {
        let (fa, pa) = bang(&xp, name)?;
        let (fb, pb) = bang(&yp, name)?;
        let joined = join_forms(&fa, &pa, &fb, &pb)?;
        forms.push(joined.form);
        phi = Some(joined.phi);
    }
    let phi = phi.unwrap_or_else(|| xp.phi().join(yp.phi()));
    let phi = if x.is_empty() {
        phi
    } else {
        let all = phi.central().to_vec();
        NoiseBox::from_intervals(all, Vec::new())?
    };
    let set = quest(x.names(), &forms, &phi, n)?;
    // drop the dedicated symbols that carry nothing
    let keep_c = vec![true; set.n()];
    let keep_p: Vec<bool> = (0..set.m()).map(|j| j < m || forms[j - m].beta() > &S::zero()).collect();
    Ok(retain_symbols(&set, &keep_c, &keep_p))
}

fn retain_symbols<S: Scalar>(set: &ConstrainedAffineSet<S>, keep_c: &[bool], keep_p: &[bool]) -> ConstrainedAffineSet<S> {
    let index_map = |keep: &[bool]| {
        let mut next = 0;
        keep.iter()
            .map(|&k| {
                k.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect::<Vec<_>>()
    };
    let (mc, mp) = (index_map(keep_c), index_map(keep_p));
    let phi = set.phi().retain(keep_c, keep_p);
    let columns = set.columns().map(|(name, f)| (name.to_string(), f.remap(&mc, &mp)));
    ConstrainedAffineSet::from_forms(phi, columns)
}
