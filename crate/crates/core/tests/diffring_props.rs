use num_complex::Complex64;
use proptest::prelude::*;
use vesselkit::diffring::{BetaJet, DiffPoly, GaussianRational, RenderFormat};

fn coeff() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(a, b, c, d)| {
        &GaussianRational::real(a, b) + &GaussianRational::imag(c, d)
    })
}

fn factors() -> impl Strategy<Value = Vec<(u32, u32)>> {
    prop::collection::vec((0u32..5, 1u32..3), 0..3)
}

fn poly() -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((coeff(), factors()), 0..5).prop_map(|terms| {
        terms.iter().fold(DiffPoly::zero(), |acc, (c, f)| &acc + &DiffPoly::monomial(c.clone(), f))
    })
}

fn jet() -> impl Strategy<Value = BetaJet> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 12).prop_map(|v| {
        BetaJet::from_values(&v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect::<Vec<_>>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &DiffPoly::constant(GaussianRational::one()), a.clone());
    }

    #[test]
    fn derivation_rule(a in poly(), b in poly()) {
        prop_assert_eq!((&a * &b).derive(), &(&a.derive() * &b) + &(&a * &b.derive()));
        prop_assert_eq!((&a + &b).derive(), &a.derive() + &b.derive());
    }

    #[test]
    fn integrate_inverts_derive(a in poly()) {
        let d = a.derive();
        let back = d.integrate().unwrap();
        // equal up to the constant of integration
        prop_assert!((&back - &a).max_order().is_none());
    }

    #[test]
    fn eval_is_a_homomorphism(a in poly(), b in poly(), j in jet()) {
        let (va, vb) = (a.eval(&j).unwrap(), b.eval(&j).unwrap());
        let scale = 1.0 + va.norm() * vb.norm() + va.norm() + vb.norm();
        prop_assert!(((&a + &b).eval(&j).unwrap() - (va + vb)).norm() <= 1e-12 * scale);
        prop_assert!(((&a * &b).eval(&j).unwrap() - va * vb).norm() <= 1e-12 * scale);
    }

    #[test]
    fn canonical_form_is_order_independent(terms in prop::collection::vec((coeff(), factors()), 0..6)) {
        let fwd = terms.iter().fold(DiffPoly::zero(), |acc, (c, f)| &acc + &DiffPoly::monomial(c.clone(), f));
        let rev = terms.iter().rev().fold(DiffPoly::zero(), |acc, (c, f)| &acc + &DiffPoly::monomial(c.clone(), f));
        prop_assert_eq!(fwd.render(RenderFormat::Text), rev.render(RenderFormat::Text));
        prop_assert!(fwd.terms().all(|(_, c)| !c.is_zero()));
        prop_assert_eq!(&fwd, &rev);
    }

    #[test]
    fn json_round_trip(a in poly()) {
        let s = a.to_json().to_string();
        prop_assert_eq!(DiffPoly::from_json_str(&s).unwrap(), a);
    }
}
