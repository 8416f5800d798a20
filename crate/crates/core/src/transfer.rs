//! Assignments: fresh intervals, affine combinations and multiplication.

use std::collections::BTreeSet;

use crate::affine::{AffineForm, ConstrainedAffineSet};
use crate::ast::Expr;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::noise::{NoiseBox, NoiseId, NoiseKind};
use crate::scalar::Scalar;

/// Where the product of two forms is linearized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MulMode {
    /// At the middle of the constrained symbol ranges.
    #[default]
    Centered,
    /// At the origin of the noise space, as in unconstrained affine arithmetic.
    AtZero,
}

/// `constant + Σ coeff·var`.
#[derive(Clone, Debug, PartialEq)]
pub struct Combination<S> {
    pub constant: S,
    pub terms: Vec<(String, S)>,
}

impl<S: Scalar> Combination<S> {
    pub fn constant(constant: S) -> Self {
        Combination { constant, terms: Vec::new() }
    }

    pub fn var(name: &str) -> Self {
        Combination { constant: S::zero(), terms: vec![(name.to_string(), S::one())] }
    }

    pub fn plus(mut self, k: S, name: &str) -> Self {
        self.terms.push((name.to_string(), k));
        self
    }

    pub fn div(self, k: &S) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv = S::one() / k.clone();
        Ok(Combination {
            constant: self.constant * inv.clone(),
            terms: self.terms.into_iter().map(|(v, c)| (v, c * inv.clone())).collect(),
        })
    }
}

/// `name = [a, b]`: a fresh central symbol carries the radius.
pub fn assign_interval<S: Scalar>(x: &ConstrainedAffineSet<S>, name: &str, a: S, b: S) -> Result<ConstrainedAffineSet<S>> {
    if a > b {
        return Err(Error::MalformedRange { lo: a.to_string(), hi: b.to_string() });
    }
    let (phi, eps) = x.phi().new_central()?;
    let itv = Interval { lo: a, hi: b };
    let mid = itv.mid();
    let dev = itv.radius_about(&mid);
    let mut form = AffineForm::constant(mid);
    form.set_coeff(eps, dev);
    let mut out = x.clone().with_phi(phi);
    out.bind(name, form);
    Ok(out)
}

/// `name = combo`, exact on the forms.
pub fn assign_affine<S: Scalar>(
    x: &ConstrainedAffineSet<S>,
    name: &str,
    combo: &Combination<S>,
) -> Result<ConstrainedAffineSet<S>> {
    let mut form = AffineForm::constant(combo.constant.clone());
    for (v, k) in &combo.terms {
        form = form.add_scaled(x.form(v)?, k);
    }
    let mut out = x.clone();
    out.bind(name, form);
    Ok(out)
}

/// `name = xi * xj` with centered linearization.
pub fn assign_mul<S: Scalar>(x: &ConstrainedAffineSet<S>, name: &str, xi: &str, xj: &str) -> Result<ConstrainedAffineSet<S>> {
    assign_mul_with(x, name, xi, xj, MulMode::Centered)
}

pub fn assign_mul_with<S: Scalar>(
    x: &ConstrainedAffineSet<S>,
    name: &str,
    xi: &str,
    xj: &str,
    mode: MulMode,
) -> Result<ConstrainedAffineSet<S>> {
    let (form, phi) = mul_forms(x.form(xi)?, x.form(xj)?, x.phi(), mode)?;
    let mut out = x.clone().with_phi(phi);
    out.bind(name, form);
    Ok(out)
}

/// Product of two forms over `phi`.
///
/// Always creates one central and one perturbation symbol: the first carries
/// the deviation of the quadratic terms in central symbols only, the second
/// every quadratic term involving a perturbation symbol.
pub fn mul_forms<S: Scalar>(
    a: &AffineForm<S>,
    b: &AffineForm<S>,
    phi: &NoiseBox<S>,
    mode: MulMode,
) -> Result<(AffineForm<S>, NoiseBox<S>)> {
    let (ua, ub) = (a.universe(), b.universe());
    let phi = phi.padded(ua.0.max(ub.0), ua.1.max(ub.1));
    let (phi, eps) = phi.new_central()?;
    let (phi, eta) = phi.new_perturbation()?;
    let (mut form, dev_eps, dev_eta) = match mode {
        MulMode::Centered => centered_product(a, b, &phi)?,
        MulMode::AtZero => product_at_zero(a, b, &phi),
    };
    form.set_coeff(eps, dev_eps);
    form.set_coeff(eta, dev_eta);
    Ok((form, phi))
}

fn shared_symbols<S: Scalar>(a: &AffineForm<S>, b: &AffineForm<S>) -> BTreeSet<NoiseId> {
    a.terms().chain(b.terms()).map(|(id, _)| id).collect()
}

fn centered_product<S: Scalar>(a: &AffineForm<S>, b: &AffineForm<S>, phi: &NoiseBox<S>) -> Result<(AffineForm<S>, S, S)> {
    let symbols = shared_symbols(a, b);
    let mut ranges = Vec::with_capacity(symbols.len());
    let mut da = a.center.clone();
    let mut db = b.center.clone();
    for &id in &symbols {
        let (m, mu) = phi.mid_dev(id)?;
        da = da + a.coeff(id) * m.clone();
        db = db + b.coeff(id) * m.clone();
        ranges.push((id, m, mu));
    }

    let mut constant = da.clone() * db.clone();
    let mut magnitude = constant.abs();
    let mut out = AffineForm::zero();
    // Σ|a_r|μ_r and Σ|b_r|μ_r split by kind, and Σ|a_r b_r|μ_r² by kind
    let (mut sa_e, mut sb_e, mut sq_e) = (S::zero(), S::zero(), S::zero());
    let (mut sa_h, mut sb_h, mut sq_h) = (S::zero(), S::zero(), S::zero());
    for (id, m, mu) in ranges {
        let (ca, cb) = (a.coeff(id), b.coeff(id));
        let linear = da.clone() * cb.clone() + db.clone() * ca.clone();
        constant = constant - linear.clone() * m.clone();
        magnitude = magnitude + (linear.clone() * m).abs();
        out.set_coeff(id, linear);

        let prod = ca.clone() * cb.clone();
        let mu2 = mu.clone() * mu.clone();
        constant = constant + S::half() * prod.clone() * mu2.clone();
        let sq = prod.abs() * mu2;
        magnitude = magnitude + sq.clone();
        let (wa, wb) = (ca.abs() * mu.clone(), cb.abs() * mu);
        match id.kind {
            NoiseKind::Central => {
                sa_e = sa_e + wa;
                sb_e = sb_e + wb;
                sq_e = sq_e + sq;
            }
            NoiseKind::Perturbation => {
                sa_h = sa_h + wa;
                sb_h = sb_h + wb;
                sq_h = sq_h + sq;
            }
        }
    }
    let dev_eps = sa_e.clone() * sb_e.clone() - S::half() * sq_e;
    let dev_eta = sa_h.clone() * sb_h.clone() - S::half() * sq_h + sa_e * sb_h + sa_h * sb_e;
    magnitude = magnitude + dev_eps.clone() + dev_eta.clone();
    let slack = rounding_slack(magnitude, symbols.len());
    out.center = constant;
    Ok((out, dev_eps.round_up(), (dev_eta + slack).round_up()))
}

fn product_at_zero<S: Scalar>(a: &AffineForm<S>, b: &AffineForm<S>, phi: &NoiseBox<S>) -> (AffineForm<S>, S, S) {
    let symbols = shared_symbols(a, b);
    let mut out = AffineForm::constant(a.center.clone() * b.center.clone());
    let mut magnitude = out.center.abs();
    for &id in &symbols {
        let linear = a.center.clone() * b.coeff(id) + b.center.clone() * a.coeff(id);
        magnitude = magnitude + linear.abs();
        out.set_coeff(id, linear);
    }
    let zero = Interval::point(S::zero());
    let (mut q_e, mut q_h) = (zero.clone(), zero);
    for (r, ca) in a.terms() {
        for (l, cb) in b.terms() {
            let term = if r == l {
                phi.range(r).square()
            } else {
                phi.range(r).mul(&phi.range(l))
            }
            .scale(&(ca.clone() * cb.clone()));
            if r.kind == NoiseKind::Central && l.kind == NoiseKind::Central {
                q_e = q_e.add(&term);
            } else {
                q_h = q_h.add(&term);
            }
        }
    }
    out.center = out.center + q_e.mid() + q_h.mid();
    magnitude = magnitude + q_e.mag() + q_h.mag();
    let slack = rounding_slack(magnitude, symbols.len());
    (out, q_e.dev().round_up(), (q_h.dev() + slack).round_up())
}

/// Bound on the accumulated rounding error of a product; zero for exact scalars.
fn rounding_slack<S: Scalar>(magnitude: S, terms: usize) -> S {
    if S::EXACT || magnitude.is_zero() {
        return S::zero();
    }
    let ulp = magnitude.clone().round_up() - magnitude;
    ulp * S::of_i64(4 * (terms as i64 + 2))
}

/// Evaluates expressions to forms, threading the noise box through
/// multiplications.
#[derive(Clone, Debug)]
pub struct Evaluator<'a, S> {
    set: &'a ConstrainedAffineSet<S>,
    phi: NoiseBox<S>,
    mode: MulMode,
}

impl<'a, S: Scalar> Evaluator<'a, S> {
    pub fn new(set: &'a ConstrainedAffineSet<S>, mode: MulMode) -> Self {
        Evaluator { set, phi: set.phi().clone(), mode }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<AffineForm<S>> {
        Ok(match e {
            Expr::Const(n) => AffineForm::constant(n.value()),
            Expr::Var(v) => self.set.form(v)?.clone(),
            Expr::Neg(inner) => self.eval(inner)?.scale(&-S::one()),
            Expr::Add(l, r) => {
                let l = self.eval(l)?;
                l.add(&self.eval(r)?)
            }
            Expr::Sub(l, r) => {
                let l = self.eval(l)?;
                l.sub(&self.eval(r)?)
            }
            Expr::Mul(l, r) => {
                let l = self.eval(l)?;
                let r = self.eval(r)?;
                if l.is_constant() {
                    r.scale(&l.center)
                } else if r.is_constant() {
                    l.scale(&r.center)
                } else {
                    let (form, phi) = mul_forms(&l, &r, &self.phi, self.mode)?;
                    self.phi = phi;
                    form
                }
            }
            Expr::DivConst(inner, n) => {
                let k: S = n.value();
                if k.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                self.eval(inner)?.scale(&(S::one() / k))
            }
        })
    }

    pub fn phi(&self) -> &NoiseBox<S> {
        &self.phi
    }

    pub fn into_phi(self) -> NoiseBox<S> {
        self.phi
    }
}

/// `name = e`.
pub fn assign_expr<S: Scalar>(x: &ConstrainedAffineSet<S>, name: &str, e: &Expr, mode: MulMode) -> Result<ConstrainedAffineSet<S>> {
    let mut ev = Evaluator::new(x, mode);
    let form = ev.eval(e)?;
    let mut out = x.clone().with_phi(ev.into_phi());
    out.bind(name, form);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{LinearConstraint, Relation};
    use crate::scalar::Rational;
    use std::collections::BTreeMap;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn x_in_0_10() -> ConstrainedAffineSet<f64> {
        assign_interval(&ConstrainedAffineSet::default(), "x", 0.0, 10.0).unwrap()
    }

    /// `x = [0,10]` restricted to the false branch of `x*x - x >= 0`.
    fn false_branch_x() -> ConstrainedAffineSet<f64> {
        let x = x_in_0_10();
        let phi = NoiseBox::from_intervals(vec![Interval::new(-1.0, -4.0 / 9.0).unwrap()], vec![]).unwrap();
        x.with_phi(phi)
    }

    #[test]
    fn interval_assignment() {
        let x = x_in_0_10();
        assert_eq!(x.form("x").unwrap(), &AffineForm::new(5.0, BTreeMap::from([(0, 5.0)]), BTreeMap::new()));
        let c = assign_interval(&x, "c", 3.0, 3.0).unwrap();
        assert!(c.form("c").unwrap().is_constant());
        assert_eq!(c.n(), 2);
        assert_eq!(
            assign_interval(&x, "z", 1.0, 0.0),
            Err(Error::MalformedRange { lo: "1".into(), hi: "0".into() })
        );
    }

    #[test]
    fn affine_assignment_is_exact() {
        let base = ConstrainedAffineSet::from_matrices(
            &["x1", "x2"],
            &[vec![2.0, 2.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![0.0, 1.0]],
            NoiseBox::full(2, 1),
        );
        let s = assign_affine(&base, "x4", &Combination::var("x1").plus(1.0, "x2")).unwrap();
        assert_eq!(
            s.form("x4").unwrap(),
            &AffineForm::new(4.0, BTreeMap::from([(0, 1.0), (1, 1.0)]), BTreeMap::from([(0, 1.0)]))
        );
        let d = assign_affine(&x_in_0_10(), "y", &Combination::var("x").div(&10.0).unwrap()).unwrap();
        assert_eq!(d.form("y").unwrap(), &AffineForm::new(0.5, BTreeMap::from([(0, 0.5)]), BTreeMap::new()));
        let z = assign_affine(&x_in_0_10(), "y", &Combination::var("x").plus(-1.0, "x")).unwrap();
        assert_eq!(z.form("y").unwrap(), &AffineForm::zero());
        assert_eq!(Combination::var("x").div(&0.0), Err(Error::DivisionByZero));
        assert_eq!(
            assign_affine(&base, "y", &Combination::var("nope")),
            Err(Error::UnknownVariable("nope".into()))
        );
    }

    #[test]
    fn square_over_full_range() {
        let e = Expr::sub(Expr::mul(Expr::var("x"), Expr::var("x")), Expr::var("x"));
        let s = assign_expr(&x_in_0_10(), "y", &e, MulMode::Centered).unwrap();
        let y = s.form("y").unwrap();
        assert!(close(y.center, 32.5, 1e-12));
        assert!(close(y.coeff(NoiseId::central(0)), 45.0, 1e-12));
        assert!(close(y.coeff(NoiseId::central(1)), 12.5, 1e-12));
        assert!(y.coeff(NoiseId::perturbation(0)) < 1e-12);
    }

    #[test]
    fn centered_square_on_constrained_range() {
        let x = false_branch_x();
        let e = Expr::add(Expr::mul(Expr::var("x"), Expr::var("x")), Expr::num("2"));
        let s = assign_expr(&x, "y", &e, MulMode::Centered).unwrap();
        let y = s.form("y").unwrap();
        // direct expansion around m = -13/18, μ = 5/18
        let (m, mu) = (-13.0 / 18.0, 5.0 / 18.0);
        let d = 5.0 + 5.0 * m;
        assert!(close(y.center, d * d - 10.0 * d * m + 12.5 * mu * mu + 2.0, 1e-9));
        assert!(close(y.coeff(NoiseId::central(0)), 10.0 * d, 1e-9));
        assert!(close(y.coeff(NoiseId::central(1)), 12.5 * mu * mu, 1e-9));
        let g = s.gamma("y").unwrap();
        let spread = 10.0 * d * mu + 12.5 * mu * mu;
        let mid = y.center + 10.0 * d * m;
        assert!(close(g.lo, mid - spread, 1e-9) && close(g.hi, mid + spread, 1e-9), "{g}");
    }

    #[test]
    fn product_at_zero_bounds_square_over_range() {
        let s = assign_mul_with(&false_branch_x(), "y", "x", "x", MulMode::AtZero).unwrap();
        let y = s.form("y").unwrap();
        let sq = Interval::new(16.0 / 81.0, 1.0).unwrap().scale(&25.0);
        assert!(close(y.center, 25.0 + sq.mid(), 1e-9));
        assert!(close(y.coeff(NoiseId::central(0)), 50.0, 1e-12));
        assert!(close(y.coeff(NoiseId::central(1)), sq.dev(), 1e-9));
    }

    #[test]
    fn product_with_zero_and_of_independent_symbols() {
        let x = assign_interval(&x_in_0_10(), "z", 0.0, 0.0).unwrap();
        let s = assign_mul(&x, "y", "x", "z").unwrap();
        assert_eq!(s.form("y").unwrap(), &AffineForm::zero());
        assert_eq!((s.n(), s.m()), (3, 1));

        let one = Rational::of_i64(1);
        let u = assign_interval(&ConstrainedAffineSet::<Rational>::default(), "u", -one.clone(), one.clone()).unwrap();
        let u = assign_interval(&u, "v", -one.clone(), one.clone()).unwrap();
        let s = assign_mul(&u, "w", "u", "v").unwrap();
        let g = s.gamma("w").unwrap();
        assert_eq!((g.lo, g.hi), (-one.clone(), one));
    }

    #[test]
    fn perturbation_terms_feed_the_fresh_perturbation_symbol() {
        let a = AffineForm::new(1.0, BTreeMap::from([(0, 1.0)]), BTreeMap::from([(0, 1.0)]));
        let (p, phi) = mul_forms(&a, &a, &NoiseBox::full(1, 1), MulMode::Centered).unwrap();
        // (1+ε+η)²: ε² contributes ½±½, η² likewise, 2εη deviates by 2
        assert!(close(p.center, 2.0, 1e-12));
        assert!(close(p.coeff(NoiseId::central(1)), 0.5, 1e-12));
        assert!(close(p.coeff(NoiseId::perturbation(1)), 2.5, 1e-9));
        assert_eq!((phi.central_len(), phi.perturbation_len()), (2, 2));
    }

    #[test]
    fn exact_square_in_rationals() {
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let x = assign_interval(&ConstrainedAffineSet::<Rational>::default(), "x", q(0, 1), q(10, 1)).unwrap();
        let phi = x.phi().contract(&LinearConstraint::new(
            q(4, 9),
            BTreeMap::from([(0, q(1, 1))]),
            BTreeMap::new(),
            Relation::Le,
        ));
        let s = assign_mul(&x.with_phi(phi), "y", "x", "x").unwrap();
        let y = s.form("y").unwrap();
        assert_eq!(y.coeff(NoiseId::central(0)), q(250, 18));
        assert_eq!(y.coeff(NoiseId::central(1)), q(625, 648));
        assert_eq!(y.coeff(NoiseId::perturbation(0)), q(0, 1));
    }
}
