use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use novikov_core::fields::character_split;
use novikov_core::{
    Cutoff, Error, GradedComplex, Grading, GradingGroup, IntSeries, Novikov, SeriesBase, TorsionValue, Weight,
    WeightHom,
};

fn base(rank: usize, torsion: Vec<i64>, weight: Vec<i64>) -> Arc<SeriesBase> {
    SeriesBase::new(
        GradingGroup::new(rank, torsion).unwrap(),
        WeightHom::new(weight.into_iter().map(Weight::from_integer).collect()),
    )
    .unwrap()
}

/// Integer combination of free monomials.
fn poly(b: &Arc<SeriesBase>, terms: &[(&[i64], i64)]) -> IntSeries {
    Novikov::from_terms(
        b,
        &(),
        terms.iter().map(|(e, c)| (b.group.free_element(e.to_vec()), BigInt::from(*c))),
        Cutoff::Infinite,
    )
}

fn complex(kind: Grading, b: &Arc<SeriesBase>, gens: &[(&str, i64)]) -> GradedComplex<BigInt> {
    GradedComplex::new(kind, b, &(), gens.iter().map(|(n, g)| (n.to_string(), *g)).collect()).unwrap()
}

const CAP: i64 = 12;

fn cap() -> Weight {
    Weight::from_integer(CAP)
}

#[test]
fn empty_complex_is_valid_with_unit_torsion() {
    let b = base(1, vec![], vec![1]);
    let c = complex(Grading::Z2, &b, &[]);
    assert_eq!(c.validate_chain().unwrap().verified, Cutoff::Infinite);
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    assert!(tau.agrees_with(&TorsionValue::one(&split)));
}

#[test]
fn circle_cw_torsion() {
    let b = base(1, vec![], vec![0]);
    let mut c = complex(Grading::Z, &b, &[("e1", 1), ("e0", 0)]);
    c.set_entry(1, 0, poly(&b, &[(&[1], 1), (&[0], -1)]));
    c.validate_chain().unwrap();
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    let t_minus_1 = TorsionValue::from_element(&split, &poly(&b, &[(&[1], 1), (&[0], -1)])).unwrap();
    let expected = TorsionValue::one(&split).ratio(&t_minus_1, cap()).unwrap();
    assert!(tau.agrees_with(&expected), "{tau}");
    let w = tau.equal_mod_unit(&expected, cap()).unwrap().unwrap();
    assert_eq!(w.sign, 1);
    assert!(w.element.is_identity());
}

#[test]
fn torus_cw_torsion_is_trivial() {
    let b = base(2, vec![], vec![0, 0]);
    let mut c = complex(Grading::Z, &b, &[("e2", 2), ("a", 1), ("b", 1), ("e0", 0)]);
    let t1 = poly(&b, &[(&[1, 0], 1), (&[0, 0], -1)]);
    let s1 = poly(&b, &[(&[0, 1], 1), (&[0, 0], -1)]);
    c.set_entry(1, 0, s1.clone());
    c.set_entry(2, 0, t1.neg());
    c.set_entry(3, 1, t1);
    c.set_entry(3, 2, s1);
    c.validate_chain().unwrap();
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    let w = tau.equal_mod_unit(&TorsionValue::one(&split), cap()).unwrap();
    assert!(w.is_some(), "{tau}");
}

#[test]
fn floer_type_complex() {
    let b = base(1, vec![], vec![1]);
    let mut c = complex(Grading::Z2, &b, &[("a", 1), ("b", 0)]);
    let one_minus_g = poly(&b, &[(&[0], 1), (&[1], -1)]);
    c.set_entry(1, 0, one_minus_g.clone());
    c.validate_chain().unwrap();
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    // tau * (1 - g) = 1 up to the cap
    let prod = tau.mul(&TorsionValue::from_element(&split, &one_minus_g).unwrap()).unwrap();
    assert!(prod.agrees_with(&TorsionValue::one(&split)));
    assert_eq!(tau.components()[0].terms().len() as i64, CAP + 1);
}

#[test]
fn d_squared_violation_is_reported() {
    let b = base(1, vec![], vec![1]);
    let mut c = complex(Grading::Z2, &b, &[("a", 1), ("b", 0)]);
    c.set_entry(1, 0, IntSeries::one(&b, &()));
    c.set_entry(0, 1, IntSeries::one(&b, &()));
    assert!(matches!(c.validate_chain(), Err(Error::ChainCondition(_))));
}

#[test]
fn grade_mismatch_is_reported() {
    let b = base(1, vec![], vec![1]);
    let mut c = complex(Grading::Z2, &b, &[("a", 1), ("b", 1)]);
    c.set_entry(1, 0, IntSeries::one(&b, &()));
    assert!(matches!(c.validate_chain(), Err(Error::ChainCondition(_))));
}

#[test]
fn non_acyclic_component_is_zero() {
    // a point: H_0 = Q
    let b = base(0, vec![], vec![]);
    let c = complex(Grading::Z, &b, &[("p", 0)]);
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    assert!(tau.components()[0].is_zero());

    // 1 + t over Z/2: the sign component is not acyclic
    let b = base(0, vec![2], vec![]);
    let mut c = complex(Grading::Z, &b, &[("e1", 1), ("e0", 0)]);
    let one_plus_t = Novikov::from_terms(
        &b,
        &(),
        [(b.group.identity(), BigInt::one()), (b.group.element(vec![], vec![1]).unwrap(), BigInt::one())],
        Cutoff::Infinite,
    );
    c.set_entry(1, 0, one_plus_t);
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    assert!(!tau.components()[0].is_zero());
    assert!(tau.components()[1].is_zero());
}

#[test]
fn equal_mod_unit_examples() {
    let b = base(1, vec![], vec![1]);
    let split = Arc::new(character_split(&b).unwrap());
    let tv = |p: IntSeries| TorsionValue::from_element(&split, &p).unwrap();
    let a = tv(poly(&b, &[(&[0], 1), (&[1], -1)]));
    let shifted = tv(poly(&b, &[(&[5], 1), (&[6], -1)]));
    let negated = tv(poly(&b, &[(&[1], 1), (&[0], -1)]));
    let other = tv(poly(&b, &[(&[0], 1), (&[1], 1)]));

    // a = g^-5 * (g^5 (1 - g))
    let w = a.equal_mod_unit(&shifted, cap()).unwrap().unwrap();
    assert_eq!((w.sign, w.element.free.clone()), (1, vec![-5]));
    let w = shifted.equal_mod_unit(&a, cap()).unwrap().unwrap();
    assert_eq!((w.sign, w.element.free.clone()), (1, vec![5]));
    let w = a.equal_mod_unit(&negated, cap()).unwrap().unwrap();
    assert_eq!((w.sign, w.element.free.clone()), (-1, vec![0]));
    assert!(a.equal_mod_unit(&other, cap()).unwrap().is_none());
}

#[test]
fn torsion_witness_finds_torsion_elements() {
    // Z/4 x Z, compare a with t * a
    let b = base(1, vec![4], vec![1]);
    let split = Arc::new(character_split(&b).unwrap());
    let g = |f: i64, t: i64| b.group.element(vec![f], vec![t]).unwrap();
    let a = Novikov::from_terms(&b, &(), [(g(0, 0), BigInt::one()), (g(1, 1), BigInt::from(-2))], Cutoff::Infinite);
    let ta = a.shift(&g(0, 3)).neg();
    let (x, y) = (
        TorsionValue::from_element(&split, &ta).unwrap(),
        TorsionValue::from_element(&split, &a).unwrap(),
    );
    let w = x.equal_mod_unit(&y, cap()).unwrap().unwrap();
    assert_eq!(w.sign, -1);
    assert_eq!(w.element, g(0, 3));
}

#[test]
fn reordering_changes_torsion_by_sign_only() {
    let b = base(2, vec![], vec![0, 0]);
    let t1 = poly(&b, &[(&[1, 0], 1), (&[0, 0], -1)]);
    let s1 = poly(&b, &[(&[0, 1], 1), (&[0, 0], -1)]);
    let mut c = complex(Grading::Z, &b, &[("b", 1), ("e0", 0), ("a", 1), ("e2", 2)]);
    c.set_entry(2, 3, s1.clone());
    c.set_entry(0, 3, t1.neg());
    c.set_entry(1, 2, t1);
    c.set_entry(1, 0, s1);
    c.validate_chain().unwrap();
    let split = Arc::new(character_split(&b).unwrap());
    let tau = c.torsion(&split, cap()).unwrap();
    let w = tau.equal_mod_unit(&TorsionValue::one(&split), cap()).unwrap().unwrap();
    assert!(w.element.is_identity());
}

#[test]
fn rescaling_a_generator_by_a_unit() {
    // multiplying the basis element a (grade 1) by g multiplies tau by g^-1
    let b = base(1, vec![], vec![1]);
    let split = Arc::new(character_split(&b).unwrap());
    let entry = poly(&b, &[(&[0], 1), (&[1], 3)]);
    let mut c = complex(Grading::Z2, &b, &[("a", 1), ("b", 0)]);
    c.set_entry(1, 0, entry.clone());
    let mut d = c.clone();
    d.set_entry(1, 0, entry.shift(&b.group.free_element(vec![1])));
    let (t1, t2) = (c.torsion(&split, cap()).unwrap(), d.torsion(&split, cap()).unwrap());
    let w = t1.equal_mod_unit(&t2, cap()).unwrap().unwrap();
    assert_eq!(w.element.free, vec![1]);
    assert_eq!(w.sign, 1);
}
