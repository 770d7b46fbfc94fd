use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use novikov_core::fields::character_split;
use novikov_core::{Coefficient, Cutoff, GradingGroup, Novikov, RatSeries, SeriesBase, Weight, WeightHom};

type Terms = Vec<(i64, i64, i64, i64)>;

/// `Z^2 x Z/3`, first generator of weight 1, second of weight 1/2.
fn weighted() -> Arc<SeriesBase> {
    SeriesBase::new(
        GradingGroup::new(2, vec![3]).unwrap(),
        WeightHom::new(vec![Weight::from_integer(1), Weight::new(1, 2)]),
    )
    .unwrap()
}

/// `Z x Z/6` with zero weight, so projections are rational functions.
fn flat() -> Arc<SeriesBase> {
    SeriesBase::new(GradingGroup::new(1, vec![6]).unwrap(), WeightHom::new(vec![Weight::from_integer(0)])).unwrap()
}

fn series(base: &Arc<SeriesBase>, terms: &Terms) -> RatSeries {
    let g = &base.group;
    Novikov::from_terms(
        base,
        &(),
        terms.iter().map(|&(e1, e2, t, c)| {
            let free = if g.rank() == 2 { vec![e1, e2] } else { vec![e1] };
            let tors = vec![t.rem_euclid(g.torsion_factors()[0])];
            (g.element(free, tors).unwrap(), BigRational::from_integer(BigInt::from(c)))
        }),
        Cutoff::Infinite,
    )
}

fn positive_terms() -> impl Strategy<Value = Terms> {
    proptest::collection::vec((0i64..3, 0i64..3, 0i64..3, -3i64..=3), 0..4)
        .prop_map(|v| v.into_iter().filter(|&(a, b, _, _)| a + b > 0).collect())
}

fn any_terms() -> impl Strategy<Value = Terms> {
    proptest::collection::vec((-1i64..3, -1i64..2, 0i64..6, -3i64..=3), 0..4)
}

fn cap() -> Weight {
    Weight::from_integer(6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(a in any_terms(), b in any_terms(), c in any_terms()) {
        let base = weighted();
        let (a, b, c) = (series(&base, &a), series(&base, &b), series(&base, &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&(&a + &b) - &b).agrees_with(&a));
    }

    #[test]
    fn exp_and_ln_are_inverse(b in positive_terms()) {
        let base = weighted();
        let b = series(&base, &b);
        let one = RatSeries::one(&base, &());
        prop_assert!(b.exp(cap()).unwrap().ln(cap()).unwrap().agrees_with(&b));
        let u = &one + &b;
        prop_assert!(u.ln(cap()).unwrap().exp(cap()).unwrap().agrees_with(&u));
        // exp turns sums into products
        let e2 = (&b + &b).exp(cap()).unwrap();
        let e = b.exp(cap()).unwrap();
        prop_assert!(e2.agrees_with(&(&e * &e).truncate(cap())));
    }

    #[test]
    fn one_plus_positive_is_invertible(b in positive_terms(), e1 in -2i64..3, e2 in -2i64..3, c in 1i64..5) {
        let base = weighted();
        let one = RatSeries::one(&base, &());
        let mono = series(&base, &vec![(e1, e2, 1, c)]);
        let u = &mono * &(&one + &series(&base, &b));
        let inv = u.inverse(cap()).unwrap();
        prop_assert!((&u * &inv).truncate(cap()).agrees_with(&one));
    }

    #[test]
    fn projections_are_multiplicative(a in any_terms(), b in any_terms()) {
        let base = flat();
        let split = character_split(&base).unwrap();
        let (a, b) = (series(&base, &a), series(&base, &b));
        let ab = &a * &b;
        for k in 0..split.len() {
            let lhs = split.project(&ab, k).unwrap();
            let rhs = &split.project(&a, k).unwrap() * &split.project(&b, k).unwrap();
            prop_assert!(lhs.agrees_with(&rhs));
        }
        prop_assert_eq!(split.reassemble(&split.project_all(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn component_values_form_a_field(a in any_terms(), b in any_terms()) {
        let base = flat();
        let split = character_split(&base).unwrap();
        let (a, b) = (series(&base, &a), series(&base, &b));
        for k in 0..split.len() {
            let ctx = split.ctx(k);
            let value = |s: &RatSeries| {
                let p = split.project(s, k).unwrap();
                p.terms().first().map_or_else(|| Coefficient::zero_in(&ctx), |t| t.coeff.clone())
            };
            let (x, y) = (value(&a), value(&b));
            prop_assert_eq!(x.plus(&y).minus(&y), x.clone());
            match y.inverse() {
                Some(inv) => {
                    prop_assert!(y.times(&inv).is_unity());
                    prop_assert_eq!(x.times(&y).times(&inv), x.clone());
                }
                None => prop_assert!(y.vanishes()),
            }
        }
    }
}
