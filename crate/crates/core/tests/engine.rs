use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use novikov_core::engine::{apply_birth, apply_death, apply_handleslide, certify, ratio_law, run_script, verify_invariance};
use novikov_core::{
    character_split, Coefficient, Cutoff, EngineOptions, Error, FloerState, GradedComplex, Grading, GradingGroup,
    Move, Novikov, RatSeries, SeriesBase, TorsionValue, Weight, WeightHom,
};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Z = <A>, weight(A) = 1
fn line() -> Arc<SeriesBase> {
    SeriesBase::new(GradingGroup::free(1), WeightHom::new(vec![Weight::one()])).unwrap()
}

fn poly(b: &Arc<SeriesBase>, terms: &[(i64, BigRational)]) -> RatSeries {
    Novikov::from_terms(b, &(), terms.iter().map(|(k, c)| (b.group.free_element(vec![*k]), c.clone())), Cutoff::Infinite)
}

fn state(b: &Arc<SeriesBase>, gens: &[(&str, i64)], entries: &[(&str, &str, RatSeries)], cutoff: i64) -> FloerState {
    let mut c = GradedComplex::new(Grading::Z2, b, &(), gens.iter().map(|(n, g)| (n.to_string(), *g)).collect()).unwrap();
    for (src, tgt, e) in entries {
        let (s, t) = (c.index_of(src).unwrap(), c.index_of(tgt).unwrap());
        c.set_entry(t, s, e.clone());
    }
    let split = Arc::new(character_split(b).unwrap());
    FloerState::new(split, c, RatSeries::zero(b, &()), Weight::from_integer(cutoff)).unwrap()
}

fn opts() -> EngineOptions {
    EngineOptions::default()
}

#[test]
fn type_one_on_zero_boundary_changes_nothing() {
    let b = line();
    let s = state(&b, &[("a", 0), ("c", 0)], &[], 5);
    let chi = poly(&b, &[(1, q(1, 1))]);
    let t = apply_handleslide(&s, "a", "c", &chi, &opts()).unwrap();
    assert_eq!(t.complex(), s.complex());
    assert_eq!(t.eta(), s.eta());
    let report = verify_invariance(&[s, t], &[Move::HandleSlide { x: "a".into(), y: "c".into(), chi }], Weight::from_integer(5)).unwrap();
    assert_eq!(report.records.len(), 1);
}

#[test]
fn type_one_conjugation_oracle() {
    let b = line();
    let one = RatSeries::one(&b, &());
    let s = state(&b, &[("a", 1), ("c", 1), ("p", 0), ("r", 0)], &[("a", "p", one.clone()), ("c", "r", one.clone())], 5);
    let chi = poly(&b, &[(1, q(1, 1))]);
    let t = apply_handleslide(&s, "a", "c", &chi, &opts()).unwrap();
    let cx = t.complex();
    let (a, c, p, r) = ["a", "c", "p", "r"].map(|n| cx.index_of(n).unwrap()).into();
    assert_eq!(cx.entry(p, a).terms(), one.terms());
    // d(c) = r - A p
    assert_eq!(cx.entry(r, c).terms(), one.terms());
    assert_eq!(cx.entry(p, c).terms(), chi.neg().terms());
}

#[test]
fn type_two_shifts_eta_by_a_logarithm() {
    let b = line();
    let s = state(&b, &[("a", 1), ("x", 0)], &[("a", "x", RatSeries::one(&b, &()))], 3);
    let chi = poly(&b, &[(1, q(1, 1))]);
    let t = apply_handleslide(&s, "x", "x", &chi, &opts()).unwrap();
    let expected = poly(&b, &[(1, q(1, 1)), (2, q(-1, 2)), (3, q(1, 3))]);
    assert_eq!(t.eta().terms(), expected.terms());
    let (t0, t1) = (s.torsion().unwrap(), t.torsion().unwrap());
    let inv = TorsionValue::from_element(s.split(), &(&RatSeries::one(&b, &()) + &chi).inverse(Weight::from_integer(3)).unwrap()).unwrap();
    assert!(t1.agrees_with(&t0.mul(&inv).unwrap()));
    let (i0, i1) = (s.invariant().unwrap(), t.invariant().unwrap());
    assert!(i1.value.agrees_with(&i0.value));
}

#[test]
fn type_two_rejects_degree_zero() {
    let b = line();
    let s = state(&b, &[("x", 0)], &[], 3);
    let chi = RatSeries::one(&b, &());
    assert!(matches!(apply_handleslide(&s, "x", "x", &chi, &opts()), Err(Error::Move(_))));
    let s = state(&b, &[("x", 0), ("y", 1)], &[], 3);
    assert!(matches!(apply_handleslide(&s, "x", "y", &poly(&b, &[(1, q(1, 1))]), &opts()), Err(Error::Move(_))));
}

#[test]
fn pure_collapse() {
    let b = line();
    let s = state(&b, &[("a", 1), ("c", 0)], &[("a", "c", RatSeries::one(&b, &()))], 4);
    let t = apply_death(&s, "a", "c", &opts()).unwrap();
    assert!(t.complex().is_empty());
    assert!(t.eta().is_zero());
    let mv = Move::Death { z_plus: "a".into(), z_minus: "c".into() };
    let report = verify_invariance(&[s.clone(), t], &[mv], Weight::from_integer(4)).unwrap();
    let r = &report.records[0];
    assert!(r.before.value.agrees_with(&TorsionValue::one(s.split())));
    assert!(r.after.value.agrees_with(&TorsionValue::one(s.split())));
    assert!(r.tau_ratio_ok && r.zeta_ratio_ok);
}

#[test]
fn death_with_zero_b_is_first_order_schur() {
    // grade 1: z, x ; grade 0: m, y. d z = m + w y, d x = v m + N y
    let b = line();
    let one = RatSeries::one(&b, &());
    let v = poly(&b, &[(1, q(2, 1))]);
    let w = poly(&b, &[(2, q(1, 1))]);
    let n = poly(&b, &[(0, q(1, 1)), (4, q(1, 1))]);
    let s = state(
        &b,
        &[("z", 1), ("x", 1), ("m", 0), ("y", 0)],
        &[("z", "m", one.clone()), ("z", "y", w.clone()), ("x", "m", v.clone()), ("x", "y", n.clone())],
        8,
    );
    let t = apply_death(&s, "z", "m", &opts()).unwrap();
    let cx = t.complex();
    let got = cx.entry(cx.index_of("y").unwrap(), cx.index_of("x").unwrap());
    assert_eq!(got.terms(), (&n - &(&w * &v)).terms());
    assert!(t.eta().is_zero());
}

#[test]
fn death_of_one_plus_a() {
    let b = line();
    let e = poly(&b, &[(0, q(1, 1)), (1, q(1, 1))]);
    // i = grade(z_plus) = 0 in the Z/2 complex
    let s = state(&b, &[("z", 0), ("m", 1)], &[("z", "m", e.clone())], 3);
    let t = apply_death(&s, "z", "m", &opts()).unwrap();
    let ln = poly(&b, &[(1, q(1, 1)), (2, q(-1, 2)), (3, q(1, 3))]);
    assert_eq!(t.eta().terms(), ln.terms());
    let (t0, t1) = (s.torsion().unwrap(), t.torsion().unwrap());
    // tau ratio (1+A)^(-1), zeta ratio (1+A)
    let ratio = t1.ratio(&t0, Weight::from_integer(3)).unwrap();
    let inv = TorsionValue::from_element(s.split(), &e.inverse(Weight::from_integer(3)).unwrap()).unwrap();
    assert!(ratio.agrees_with(&inv));
    let i0 = s.invariant().unwrap();
    let i1 = t.invariant().unwrap();
    assert!(i0.value.agrees_with(&i1.value));
    let law = ratio_law(&s, &Move::Death { z_plus: "z".into(), z_minus: "m".into() }).unwrap();
    assert_eq!(law.tau_exp, -1);
}

#[test]
fn death_needs_unit_entry() {
    let b = line();
    let s = state(&b, &[("z", 1), ("m", 0)], &[("z", "m", poly(&b, &[(0, q(2, 1))]))], 3);
    assert!(matches!(apply_death(&s, "z", "m", &opts()), Err(Error::Move(_))));
}

#[test]
fn birth_with_trivial_data_is_a_direct_sum() {
    let b = line();
    let s = state(&b, &[("a", 1), ("c", 0)], &[("a", "c", poly(&b, &[(0, q(1, 1)), (1, q(-1, 1))]))], 4);
    let zero = RatSeries::zero(&b, &());
    let t = apply_birth(&s, "zp", "zm", 0, 1, &zero, &[], &[], &opts()).unwrap();
    let cx = t.complex();
    assert_eq!(cx.names(), &["zp", "zm", "a", "c"]);
    assert!(cx.entry(1, 0).is_unity_like());
    assert!(t.eta().is_zero());
}

trait UnityLike {
    fn is_unity_like(&self) -> bool;
}

impl UnityLike for RatSeries {
    fn is_unity_like(&self) -> bool {
        self.terms().len() == 1 && self.terms()[0].elem.is_identity() && self.terms()[0].coeff.is_unity()
    }
}

#[test]
fn birth_block_matches_series_oracle() {
    // N = d + C (1+A)^-1 B
    let b = line();
    let d = poly(&b, &[(0, q(1, 1)), (1, q(-1, 1))]);
    let s = state(&b, &[("a", 1), ("c", 0)], &[("a", "c", d.clone())], 6);
    let bb = poly(&b, &[(1, q(1, 1))]);
    let vb = poly(&b, &[(2, q(3, 1))]);
    let wc = poly(&b, &[(1, q(-1, 1))]);
    let t = apply_birth(&s, "zp", "zm", 2, 1, &bb, &[("a".into(), vb.clone())], &[("c".into(), wc.clone())], &opts()).unwrap();
    let cx = t.complex();
    let idx = |n: &str| cx.index_of(n).unwrap();
    let mut oracle = d.clone();
    let mut power = RatSeries::one(&b, &());
    for _ in 0..8 {
        oracle = &oracle + &(&(&wc * &power) * &vb);
        power = &power * &bb.neg();
    }
    assert!(cx.entry(idx("c"), idx("a")).agrees_with(&oracle));
    assert_eq!(cx.entry(idx("zm"), idx("a")).terms(), vb.terms());
    assert_eq!(cx.entry(idx("c"), idx("zp")).terms(), wc.terms());
}

#[test]
fn birth_then_death_round_trips() {
    let b = line();
    let d = poly(&b, &[(0, q(1, 1)), (2, q(-1, 1))]);
    let s = state(&b, &[("a", 1), ("c", 0)], &[("a", "c", d.clone())], 8);
    let bb = poly(&b, &[(1, q(1, 1))]);
    let vb = poly(&b, &[(1, q(1, 2))]);
    let wc = poly(&b, &[(0, q(2, 1))]);
    let mid = apply_birth(&s, "zp", "zm", 1, 1, &bb, &[("a".into(), vb)], &[("c".into(), wc)], &opts()).unwrap();
    let back = apply_death(&mid, "zp", "zm", &opts()).unwrap();
    assert_eq!(back.complex().names(), s.complex().names());
    assert!(back.complex().entry(1, 0).agrees_with(s.complex().entry(1, 0)));
    assert!(back.eta().agrees_with(s.eta()));
}

#[test]
fn empty_script_is_invariant() {
    let b = line();
    let s = state(&b, &[], &[], 3);
    let report = certify(&s, &[], &opts(), Weight::from_integer(3)).unwrap();
    assert!(report.records.is_empty());
}

#[test]
fn disabling_the_type_two_correction_is_detected() {
    let b = line();
    let s = state(&b, &[("a", 1), ("x", 0)], &[("a", "x", RatSeries::one(&b, &()))], 6);
    let mv = Move::HandleSlide { x: "x".into(), y: "x".into(), chi: poly(&b, &[(1, q(1, 1))]) };
    let off = EngineOptions { hs2_eta: false, ..EngineOptions::default() };
    let states = run_script(&s, std::slice::from_ref(&mv), &off).unwrap();
    let err = verify_invariance(&states, &[mv.clone()], Weight::from_integer(3)).unwrap_err();
    assert!(matches!(err, Error::InvarianceViolation { index: 0, .. }));
    assert!(certify(&s, &[mv], &opts(), Weight::from_integer(3)).is_ok());
}

#[test]
fn coefficients_stay_rational() {
    let b = line();
    let s = state(&b, &[("x", 0), ("a", 1)], &[("a", "x", poly(&b, &[(0, q(1, 1)), (1, q(1, 3))]))], 4);
    let chi = poly(&b, &[(1, q(-1, 1)), (2, q(1, 5))]);
    let t = apply_handleslide(&s, "a", "a", &chi, &opts()).unwrap();
    assert!(!t.eta().terms().iter().any(|t| t.coeff.is_zero()));
}
