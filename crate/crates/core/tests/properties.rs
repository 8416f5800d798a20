use std::collections::BTreeMap;

use czono::analyzer::{analyze_source, AnalyzerConfig};
use czono::transfer::{assign_interval, mul_forms};
use czono::{join_forms, leq_form, AffineForm, Interval, LinearConstraint, MulMode, NoiseBox, Rational, Relation};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Sub-range of `[-1, 1]` with endpoints on a grid of eighths.
fn range() -> impl Strategy<Value = (i64, i64)> {
    (-8i64..=8, -8i64..=8).prop_map(|(a, b)| (a.min(b), a.max(b)))
}

fn exact_box(ranges: &[(i64, i64)], m: usize) -> NoiseBox<Rational> {
    let itv = |&(lo, hi): &(i64, i64)| Interval::new(q(lo, 8), q(hi, 8)).unwrap();
    let (c, p) = ranges.split_at(ranges.len() - m);
    NoiseBox::from_intervals(c.iter().map(itv).collect(), p.iter().map(itv).collect()).unwrap()
}

fn float_box(ranges: &[(i64, i64)]) -> NoiseBox<f64> {
    let itv = |&(lo, hi): &(i64, i64)| Interval::new(lo as f64 / 8.0, hi as f64 / 8.0).unwrap();
    NoiseBox::from_intervals(ranges.iter().map(itv).collect(), vec![]).unwrap()
}

fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Eq), Just(Relation::Le), Just(Relation::Lt)]
}

fn holds(value: f64, r: Relation) -> bool {
    match r {
        Relation::Eq => value.abs() <= 1e-12,
        Relation::Le => value <= 1e-12,
        Relation::Lt => value < 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn contraction_keeps_every_solution(
        ranges in prop::collection::vec(range(), 1..=4),
        weights in prop::collection::vec(-4i64..=4, 4),
        constant in -4i64..=4,
        rel in relation(),
        picks in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 4), 64),
    ) {
        let phi = float_box(&ranges);
        let central: BTreeMap<usize, f64> =
            weights.iter().take(ranges.len()).enumerate().map(|(i, &w)| (i, w as f64 / 2.0)).collect();
        let c = LinearConstraint::new(constant as f64 / 4.0, central.clone(), BTreeMap::new(), rel);
        let out = phi.contract(&c);
        prop_assert!(out.leq(&phi));
        for pick in &picks {
            let point: Vec<f64> = phi.central().iter().zip(pick).map(|(i, t)| i.lo + t * (i.hi - i.lo)).collect();
            let value = c.constant + central.iter().map(|(&i, w)| w * point[i]).sum::<f64>();
            if holds(value, rel) {
                prop_assert!(!out.is_empty());
                for (i, v) in point.iter().enumerate() {
                    prop_assert!(out.central()[i].contains(v), "{v} escaped {}", out.central()[i]);
                }
            }
        }
    }

    #[test]
    fn contraction_is_reductive_and_single_terms_idempotent(
        ranges in prop::collection::vec(range(), 1..=4),
        weights in prop::collection::vec(-4i64..=4, 4),
        constant in -4i64..=4,
        rel in relation(),
    ) {
        let phi = exact_box(&ranges, 0);
        let central: BTreeMap<usize, Rational> =
            weights.iter().take(ranges.len()).enumerate().map(|(i, &w)| (i, q(w, 2))).collect();
        let c = LinearConstraint::new(q(constant, 4), central.clone(), BTreeMap::new(), rel);
        let once = phi.contract(&c);
        let twice = once.contract(&c);
        prop_assert!(once.leq(&phi));
        prop_assert!(twice.leq(&once));
        let single = central.into_iter().find(|(_, w)| *w != q(0, 1));
        if let Some((i, w)) = single {
            let c = LinearConstraint::new(q(constant, 4), BTreeMap::from([(i, w)]), BTreeMap::new(), rel);
            let once = phi.contract(&c);
            prop_assert_eq!(once.contract(&c), once);
        }
    }

    #[test]
    fn box_join_is_least_upper_bound(
        a in prop::collection::vec(range(), 3),
        b in prop::collection::vec(range(), 3),
        c in prop::collection::vec(range(), 3),
    ) {
        let (a, b, c) = (exact_box(&a, 1), exact_box(&b, 1), exact_box(&c, 1));
        let j = a.join(&b);
        prop_assert!(a.leq(&j) && b.leq(&j));
        if a.leq(&c) && b.leq(&c) {
            prop_assert!(j.leq(&c));
        }
        prop_assert_eq!(a.join(&a), a.clone());
        prop_assert_eq!(a.join(&b), b.join(&a));
    }

    #[test]
    fn box_order_is_a_partial_order(
        a in prop::collection::vec(range(), 3),
        b in prop::collection::vec(range(), 3),
        c in prop::collection::vec(range(), 3),
    ) {
        let (a, b, c) = (exact_box(&a, 1), exact_box(&b, 1), exact_box(&c, 1));
        prop_assert!(a.leq(&a));
        if a.leq(&b) && b.leq(&a) {
            prop_assert_eq!(&a, &b);
        }
        if a.leq(&b) && b.leq(&c) {
            prop_assert!(a.leq(&c));
        }
    }

    #[test]
    fn gamma_is_monotone(
        small in prop::collection::vec(range(), 3),
        grow in prop::collection::vec((0i64..=4, 0i64..=4), 3),
        coeffs in prop::collection::vec(-6i64..=6, 4),
    ) {
        let big: Vec<(i64, i64)> =
            small.iter().zip(&grow).map(|(&(lo, hi), &(d, u))| ((lo - d).max(-8), (hi + u).min(8))).collect();
        let (phi_small, phi_big) = (exact_box(&small, 1), exact_box(&big, 1));
        let f = AffineForm::new(
            q(coeffs[0], 3),
            BTreeMap::from([(0, q(coeffs[1], 2)), (1, q(coeffs[2], 5))]),
            BTreeMap::from([(0, q(coeffs[3], 7))]),
        );
        prop_assert!(phi_small.leq(&phi_big));
        prop_assert!(f.gamma(&phi_small).unwrap().is_subset(&f.gamma(&phi_big).unwrap()));
    }

    #[test]
    fn form_join_is_an_upper_bound(
        ra in prop::collection::vec(range(), 2),
        rb in prop::collection::vec(range(), 2),
        ca in prop::collection::vec(-6i64..=6, 3),
        cb in prop::collection::vec(-6i64..=6, 3),
        betas in (0i64..=3, 0i64..=3),
    ) {
        let form = |c: &[i64], beta: i64| {
            AffineForm::new(q(c[0], 2), BTreeMap::from([(0, q(c[1], 2)), (1, q(c[2], 2))]), BTreeMap::new())
                .with_beta(q(beta, 4))
        };
        let (a, b) = (form(&ca, betas.0), form(&cb, betas.1));
        let (phi_a, phi_b) = (exact_box(&ra, 0), exact_box(&rb, 0));
        let j = join_forms(&a, &phi_a, &b, &phi_b).unwrap();
        prop_assert!(leq_form(&a, &phi_a, &j.form, &j.phi));
        prop_assert!(leq_form(&b, &phi_b, &j.form, &j.phi));
        let hull = a.gamma(&phi_a).unwrap().hull(&b.gamma(&phi_b).unwrap());
        prop_assert!(hull.is_subset(&j.form.gamma(&j.phi).unwrap()));
    }

    #[test]
    fn products_enclose_concrete_products(
        ranges in prop::collection::vec(range(), 2),
        ca in prop::collection::vec(-6i64..=6, 3),
        cb in prop::collection::vec(-6i64..=6, 3),
        at_zero in any::<bool>(),
        picks in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 32),
    ) {
        let form = |c: &[i64]| {
            AffineForm::new(c[0] as f64 / 2.0, BTreeMap::from([(0, c[1] as f64 / 2.0), (1, c[2] as f64 / 3.0)]), BTreeMap::new())
        };
        let (a, b) = (form(&ca), form(&cb));
        let phi = float_box(&ranges);
        let mode = if at_zero { MulMode::AtZero } else { MulMode::Centered };
        let (p, out) = mul_forms(&a, &b, &phi, mode).unwrap();
        let g = p.gamma(&out).unwrap();
        for (s, t) in picks {
            let e: Vec<f64> = phi.central().iter().zip([s, t]).map(|(i, u)| i.lo + u * (i.hi - i.lo)).collect();
            let exact = a.eval(&e, &[]) * b.eval(&e, &[]);
            prop_assert!(g.contains_with(&exact, &1e-9), "{exact} outside {g}");
        }
    }

    #[test]
    fn interval_assignment_encloses_its_range(lo in -100i64..=100, width in 0i64..=200) {
        let (lo, hi) = (lo as f64 / 7.0, (lo + width) as f64 / 7.0);
        let s = assign_interval(&czono::AffineSet::default(), "x", lo, hi).unwrap();
        let g = s.gamma("x").unwrap();
        prop_assert!(g.lo <= lo && g.hi >= hi);
    }

    #[test]
    fn analysis_is_deterministic(a in -5i64..=5, b in 1i64..=5, k in 1i64..=4) {
        let src = format!(
            "real x = [{a},{}]; real y = x*x; if (y <= {k}) {{ y = y - x; }} else {{ y = x; }}\n\
             while (x < 10) {{ x = x + 1; }}",
            a + b
        );
        let cfg = AnalyzerConfig::default();
        let first = analyze_source(&src, &cfg).unwrap();
        prop_assert_eq!(first, analyze_source(&src, &cfg).unwrap());
    }
}
