//! Affine forms and constrained affine sets.
//!
//! A [`ConstrainedAffineSet`] holds one [`AffineForm`] per program variable
//! (the columns of the central matrix `C` and perturbation matrix `P`) and a
//! [`NoiseBox`] bounding the noise symbols they share.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::noise::{LinearConstraint, NoiseBox, NoiseId, NoiseKind, Relation};
use crate::scalar::Scalar;

/// `center + Σ central[i]·ε_i + Σ perturbation[j]·η_j  (± beta)`.
///
/// `beta` is only non-zero for one-dimensional forms produced by the join
/// algorithm; inside a [`ConstrainedAffineSet`] it is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm<S> {
    pub center: S,
    central: BTreeMap<usize, S>,
    perturbation: BTreeMap<usize, S>,
    beta: S,
}

impl<S: Scalar> AffineForm<S> {
    pub fn constant(center: S) -> Self {
        AffineForm {
            center,
            central: BTreeMap::new(),
            perturbation: BTreeMap::new(),
            beta: S::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    pub fn new(center: S, central: BTreeMap<usize, S>, perturbation: BTreeMap<usize, S>) -> Self {
        let mut form = Self::constant(center);
        for (i, v) in central {
            form.set_coeff(NoiseId::central(i), v);
        }
        for (j, v) in perturbation {
            form.set_coeff(NoiseId::perturbation(j), v);
        }
        form
    }

    /// Builds a form from `(symbol, coefficient)` pairs; repeated symbols add up.
    pub fn from_terms(center: S, terms: impl IntoIterator<Item = (NoiseId, S)>) -> Self {
        let mut form = Self::constant(center);
        for (id, v) in terms {
            let sum = form.coeff(id) + v;
            form.set_coeff(id, sum);
        }
        form
    }

    pub fn beta(&self) -> &S {
        &self.beta
    }

    pub fn with_beta(mut self, beta: S) -> Self {
        assert!(beta >= S::zero(), "beta must be non-negative");
        self.beta = beta;
        self
    }

    pub fn central(&self) -> &BTreeMap<usize, S> {
        &self.central
    }

    pub fn perturbation(&self) -> &BTreeMap<usize, S> {
        &self.perturbation
    }

    pub fn coeff(&self, id: NoiseId) -> S {
        let map = match id.kind {
            NoiseKind::Central => &self.central,
            NoiseKind::Perturbation => &self.perturbation,
        };
        map.get(&id.index).cloned().unwrap_or_else(S::zero)
    }

    pub fn set_coeff(&mut self, id: NoiseId, value: S) {
        let map = match id.kind {
            NoiseKind::Central => &mut self.central,
            NoiseKind::Perturbation => &mut self.perturbation,
        };
        if value.is_zero() {
            map.remove(&id.index);
        } else {
            map.insert(id.index, value);
        }
    }

    /// Non-zero coefficients, central symbols first.
    pub fn terms(&self) -> impl Iterator<Item = (NoiseId, &S)> + '_ {
        self.central
            .iter()
            .map(|(&i, v)| (NoiseId::central(i), v))
            .chain(self.perturbation.iter().map(|(&j, v)| (NoiseId::perturbation(j), v)))
    }

    pub fn symbol_count(&self) -> usize {
        self.central.len() + self.perturbation.len()
    }

    /// One past the highest index used per kind.
    pub fn universe(&self) -> (usize, usize) {
        (
            self.central.keys().next_back().map_or(0, |i| i + 1),
            self.perturbation.keys().next_back().map_or(0, |j| j + 1),
        )
    }

    pub fn is_constant(&self) -> bool {
        self.central.is_empty() && self.perturbation.is_empty() && self.beta.is_zero()
    }

    pub fn scale(&self, k: &S) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        AffineForm {
            center: self.center.clone() * k.clone(),
            central: self.central.iter().map(|(&i, v)| (i, v.clone() * k.clone())).collect(),
            perturbation: self.perturbation.iter().map(|(&j, v)| (j, v.clone() * k.clone())).collect(),
            beta: self.beta.clone() * k.abs(),
        }
    }

    /// `self + k·other`; betas add as `β + |k|·β'`.
    pub fn add_scaled(&self, other: &Self, k: &S) -> Self {
        let mut out = self.clone();
        out.center = out.center + other.center.clone() * k.clone();
        for (id, v) in other.terms() {
            let sum = out.coeff(id) + v.clone() * k.clone();
            out.set_coeff(id, sum);
        }
        out.beta = out.beta + other.beta.clone() * k.abs();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, &S::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, &-S::one())
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.center = out.center + c.clone();
        out
    }

    /// Range over `phi`, widened by `±beta`.
    pub fn gamma(&self, phi: &NoiseBox<S>) -> Result<Interval<S>> {
        if phi.is_empty() {
            return Err(Error::EmptyBox);
        }
        let mut lo = self.center.clone();
        let mut hi = self.center.clone();
        for (id, v) in self.terms() {
            let r = phi.range(id).scale(v);
            lo = lo + r.lo;
            hi = hi + r.hi;
        }
        lo = lo - self.beta.clone();
        hi = hi + self.beta.clone();
        Ok(Interval { lo, hi }.outward())
    }

    /// `sup |self|` over `phi`, ignoring beta.
    pub fn sup_abs(&self, phi: &NoiseBox<S>) -> S {
        let terms: Vec<_> = self.terms().map(|(id, v)| (id, v.clone())).collect();
        phi.evaluate(&self.center, &terms).mag()
    }

    /// Value at a point; symbols beyond the given slices read as 0.
    pub fn eval(&self, central: &[S], perturbation: &[S]) -> S {
        let mut acc = self.center.clone();
        for (&i, v) in &self.central {
            if let Some(x) = central.get(i) {
                acc = acc + v.clone() * x.clone();
            }
        }
        for (&j, v) in &self.perturbation {
            if let Some(x) = perturbation.get(j) {
                acc = acc + v.clone() * x.clone();
            }
        }
        acc
    }

    /// Replaces symbol `id` by the form `by`.
    pub fn substitute(&self, id: NoiseId, by: &Self) -> Self {
        let k = self.coeff(id);
        if k.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.set_coeff(id, S::zero());
        out.add_scaled(by, &k)
    }

    /// `self ⋈ 0` as a constraint on the noise symbols.
    pub fn to_constraint(&self, relation: Relation) -> LinearConstraint<S> {
        LinearConstraint::new(self.center.clone(), self.central.clone(), self.perturbation.clone(), relation)
    }

    /// Reindexes symbols through the given maps (old index → new index).
    pub(crate) fn remap(&self, central: &[Option<usize>], perturbation: &[Option<usize>]) -> Self {
        let mut out = Self::constant(self.center.clone());
        out.beta = self.beta.clone();
        for (&i, v) in &self.central {
            let ni = central.get(i).copied().flatten().expect("remapped symbol must be kept");
            out.central.insert(ni, v.clone());
        }
        for (&j, v) in &self.perturbation {
            let nj = perturbation.get(j).copied().flatten().expect("remapped symbol must be kept");
            out.perturbation.insert(nj, v.clone());
        }
        out
    }

    pub fn to_f64(&self) -> AffineForm<f64> {
        let conv = |m: &BTreeMap<usize, S>| m.iter().map(|(&k, v)| (k, v.to_f64_lossy())).collect();
        AffineForm {
            center: self.center.to_f64_lossy(),
            central: conv(&self.central),
            perturbation: conv(&self.perturbation),
            beta: self.beta.to_f64_lossy(),
        }
    }
}

impl<S: Scalar> fmt::Display for AffineForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.center)?;
        for (id, v) in self.terms() {
            if *v < S::zero() {
                write!(f, " - {}{}", v.abs(), id)?;
            } else {
                write!(f, " + {}{}", v, id)?;
            }
        }
        if !self.beta.is_zero() {
            write!(f, " ± {}", self.beta)?;
        }
        Ok(())
    }
}

/// Named affine forms over a shared, constrained set of noise symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedAffineSet<S> {
    names: Vec<String>,
    forms: Vec<AffineForm<S>>,
    phi: NoiseBox<S>,
}

impl<S: Scalar> Default for ConstrainedAffineSet<S> {
    fn default() -> Self {
        Self::new(NoiseBox::full(0, 0))
    }
}

impl<S: Scalar> ConstrainedAffineSet<S> {
    pub fn new(phi: NoiseBox<S>) -> Self {
        ConstrainedAffineSet { names: Vec::new(), forms: Vec::new(), phi }
    }

    /// Builds a set from named forms. The box is padded to cover every symbol.
    pub fn from_forms(phi: NoiseBox<S>, columns: impl IntoIterator<Item = (String, AffineForm<S>)>) -> Self {
        let mut set = Self::new(phi);
        for (name, form) in columns {
            set.bind(&name, form);
        }
        set
    }

    /// Builds a set from matrices: `central` has `n+1` rows (row 0 holds the
    /// centers) and `perturbation` has `m` rows, each with one entry per name.
    pub fn from_matrices(names: &[&str], central: &[Vec<S>], perturbation: &[Vec<S>], phi: NoiseBox<S>) -> Self {
        let columns = names.iter().enumerate().map(|(k, name)| {
            let center = central.first().map_or_else(S::zero, |row| row[k].clone());
            let terms = central
                .iter()
                .skip(1)
                .enumerate()
                .map(|(i, row)| (NoiseId::central(i), row[k].clone()))
                .chain(perturbation.iter().enumerate().map(|(j, row)| (NoiseId::perturbation(j), row[k].clone())));
            (name.to_string(), AffineForm::from_terms(center, terms))
        });
        Self::from_forms(phi, columns)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn forms(&self) -> &[AffineForm<S>] {
        &self.forms
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &AffineForm<S>)> {
        self.names.iter().map(String::as_str).zip(&self.forms)
    }

    pub fn phi(&self) -> &NoiseBox<S> {
        &self.phi
    }

    /// Number of variables `p`.
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Number of central symbols `n`.
    pub fn n(&self) -> usize {
        self.phi.central_len()
    }

    /// Number of perturbation symbols `m`.
    pub fn m(&self) -> usize {
        self.phi.perturbation_len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn form(&self, name: &str) -> Result<&AffineForm<S>> {
        self.index_of(name).map(|k| &self.forms[k]).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Entry `c_{row,col}`; row 0 is the center.
    pub fn c(&self, row: usize, col: usize) -> S {
        let form = &self.forms[col];
        if row == 0 {
            form.center.clone()
        } else {
            form.coeff(NoiseId::central(row - 1))
        }
    }

    /// Entry `p_{row,col}`, rows counted from 1.
    pub fn p(&self, row: usize, col: usize) -> S {
        self.forms[col].coeff(NoiseId::perturbation(row - 1))
    }

    /// Binds `name` to `form`, replacing an existing column in place.
    pub fn bind(&mut self, name: &str, form: AffineForm<S>) {
        debug_assert!(form.beta().is_zero(), "set columns carry no beta");
        let (n, m) = form.universe();
        if n > self.n() || m > self.m() {
            self.phi = self.phi.padded(n, m);
        }
        match self.index_of(name) {
            Some(k) => self.forms[k] = form,
            None => {
                self.names.push(name.to_string());
                self.forms.push(form);
            }
        }
    }

    pub fn remove(&mut self, name: &str) -> Option<AffineForm<S>> {
        let k = self.index_of(name)?;
        self.names.remove(k);
        Some(self.forms.remove(k))
    }

    pub fn with_phi(mut self, phi: NoiseBox<S>) -> Self {
        self.phi = phi;
        self
    }

    /// Same set over a universe of at least `n` central and `m` perturbation symbols.
    pub fn padded(&self, n: usize, m: usize) -> Self {
        let mut out = self.clone();
        out.phi = out.phi.padded(n, m);
        out
    }

    pub fn gamma(&self, name: &str) -> Result<Interval<S>> {
        self.form(name)?.gamma(&self.phi)
    }

    /// Per-variable ranges, in column order.
    pub fn gamma_set(&self) -> Result<Vec<Interval<S>>> {
        self.forms.iter().map(|f| f.gamma(&self.phi)).collect()
    }

    /// `Cᵀε + Pᵀη` at a point of the noise box.
    pub fn sample_eval(&self, central: &[S], perturbation: &[S]) -> Vec<S> {
        self.forms.iter().map(|f| f.eval(central, perturbation)).collect()
    }

    /// Drops unconstrained symbols no column uses and compacts the indices.
    pub fn collect_garbage(&self) -> Self {
        let unit = Interval::unit();
        let mut keep_c: Vec<bool> = self.phi.central().iter().map(|i| *i != unit).collect();
        let mut keep_p: Vec<bool> = self.phi.perturbation().iter().map(|i| *i != unit).collect();
        for form in &self.forms {
            for &i in form.central().keys() {
                keep_c[i] = true;
            }
            for &j in form.perturbation().keys() {
                keep_p[j] = true;
            }
        }
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
        let map_c = index_map(&keep_c);
        let map_p = index_map(&keep_p);
        ConstrainedAffineSet {
            names: self.names.clone(),
            forms: self.forms.iter().map(|f| f.remap(&map_c, &map_p)).collect(),
            phi: self.phi.retain(&keep_c, &keep_p),
        }
    }
}

impl<S: Scalar> fmt::Display for ConstrainedAffineSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Φ = {}", self.phi)?;
        for (name, form) in self.columns() {
            writeln!(f, "{name} = {form}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn itv(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(lo, hi).unwrap()
    }

    fn form(center: f64, central: &[(usize, f64)], pert: &[(usize, f64)]) -> AffineForm<f64> {
        AffineForm::new(center, central.iter().cloned().collect(), pert.iter().cloned().collect())
    }

    #[test]
    fn gamma_over_full_box() {
        let x = form(4.0, &[(0, 1.0), (1, 1.0)], &[(0, 1.0)]);
        let g = x.gamma(&NoiseBox::full(2, 1)).unwrap();
        assert!((g.lo - 1.0).abs() < 1e-12 && (g.hi - 7.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_over_contracted_box() {
        let z = form(2.0, &[(1, 2.0)], &[(0, 0.5)]);
        let phi = NoiseBox::from_intervals(vec![itv(-1.0, -0.5), itv(0.5, 1.0)], vec![itv(-1.0, 0.0)]).unwrap();
        let g = z.gamma(&phi).unwrap();
        assert!((g.lo - 2.5).abs() < 1e-12 && (g.hi - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_of_constant_and_empty_box() {
        let g = AffineForm::constant(3.0).gamma(&NoiseBox::full(0, 0)).unwrap();
        assert!(g.contains(&3.0) && g.width() < 1e-12);
        assert_eq!(AffineForm::constant(3.0).gamma(&NoiseBox::bottom()), Err(Error::EmptyBox));
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut f = form(1.0, &[(0, 0.0), (1, 2.0)], &[]);
        assert_eq!(f.symbol_count(), 1);
        f.set_coeff(NoiseId::central(1), 0.0);
        assert!(f.is_constant());
        assert_eq!(form(0.0, &[(0, 1.0)], &[]).sub(&form(0.0, &[(0, 1.0)], &[])), AffineForm::zero());
    }

    #[test]
    fn matrix_view_matches_columns() {
        let set = ConstrainedAffineSet::from_matrices(
            &["x", "y"],
            &[vec![20.0, 10.0], vec![-4.0, -2.0], vec![0.0, 1.0], vec![2.0, 0.0], vec![3.0, -1.0]],
            &[],
            NoiseBox::full(4, 0),
        );
        assert_eq!(set.c(0, 0), 20.0);
        assert_eq!(set.c(4, 1), -1.0);
        assert_eq!(set.n(), 4);
        let g: Vec<Interval<f64>> = set.gamma_set().unwrap();
        assert!((g[0].lo - 11.0).abs() < 1e-9 && (g[0].hi - 29.0).abs() < 1e-9);
        assert!((g[1].lo - 6.0).abs() < 1e-9 && (g[1].hi - 14.0).abs() < 1e-9);
    }

    #[test]
    fn sample_eval_at_midpoints_and_without_symbols() {
        let set = ConstrainedAffineSet::from_forms(
            NoiseBox::from_intervals(vec![itv(0.0, 1.0)], vec![]).unwrap(),
            [("x".to_string(), form(1.0, &[(0, 2.0)], &[]))],
        );
        assert_eq!(set.sample_eval(&[0.5], &[]), vec![2.0]);
        let empty = ConstrainedAffineSet::from_forms(NoiseBox::full(0, 0), [("c".to_string(), AffineForm::constant(7.0))]);
        assert_eq!(empty.sample_eval(&[], &[]), vec![7.0]);
        assert_eq!(ConstrainedAffineSet::<f64>::default().gamma_set().unwrap(), vec![]);
    }

    #[test]
    fn garbage_collection_compacts_unused_symbols() {
        let set = ConstrainedAffineSet::from_forms(
            NoiseBox::from_intervals(vec![itv(-1.0, 1.0), itv(-1.0, 0.0), itv(-1.0, 1.0)], vec![itv(-1.0, 1.0)]).unwrap(),
            [("x".to_string(), form(0.0, &[(2, 1.0)], &[]))],
        );
        let gc = set.collect_garbage();
        assert_eq!(gc.n(), 2);
        assert_eq!(gc.m(), 0);
        assert_eq!(gc.forms()[0], form(0.0, &[(1, 1.0)], &[]));
        assert_eq!(gc.phi().central()[0], itv(-1.0, 0.0));
    }

    #[test]
    fn substitution_replaces_symbol() {
        let x1 = form(2.0, &[(0, 1.0)], &[]);
        let by = form(-2.0, &[(1, 1.0)], &[(0, -0.5)]);
        assert_eq!(x1.substitute(NoiseId::central(0), &by), form(0.0, &[(1, 1.0)], &[(0, -0.5)]));
    }
}
