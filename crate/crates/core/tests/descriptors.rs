use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use novikov_core::descriptor::{
    corollary_compare, cw_torsion, load_flow_text, parse_moves, parse_state, render_move, serialize_state,
    CwDescriptor, FlowDescriptor, Symbols,
};
use novikov_core::engine::{certify, run_script, EngineOptions};
use novikov_core::random::{random_case, RandomConfig};
use novikov_core::{Cutoff, Error, Novikov, RatSeries, TorsionValue, Weight};

const CIRCLE_FLOW: &str = include_str!("../../../data/circle.flow");
const CIRCLE_CW: &str = include_str!("../../../data/circle.cw");
const TORUS_FLOW: &str = include_str!("../../../data/torus.flow");
const TORUS_CW: &str = include_str!("../../../data/torus.cw");
const TORUS_MOVES: &str = include_str!("../../../data/torus.moves");
const POINT_FLOW: &str = include_str!("../../../data/point.flow");
const POINT_CW: &str = include_str!("../../../data/point.cw");

fn w(n: i64) -> Weight {
    Weight::from_integer(n)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `sum_{k in ks} c_k t^k` on a rank-one base, truncated at `cut`.
fn t_series(base: &std::sync::Arc<novikov_core::SeriesBase>, terms: &[(i64, BigRational)], cut: Cutoff) -> RatSeries {
    Novikov::from_terms(base, &(), terms.iter().map(|(k, c)| (base.group.free_element(vec![*k]), c.clone())), cut)
}

#[test]
fn circle_flow_has_log_orbit_series() {
    let loaded = load_flow_text(CIRCLE_FLOW, w(20)).unwrap();
    let st = &loaded.state;
    assert!(st.complex().is_empty());
    // -ln(1 - t) = sum t^k / k
    let expected: Vec<_> = (1..=20).map(|k| (k, q(1, k))).collect();
    let eta = t_series(st.base(), &expected, Cutoff::finite(20));
    assert_eq!(st.eta(), &eta);

    let inv = st.invariant().unwrap();
    assert!(inv.tau.agrees_with(&TorsionValue::one(st.split())));
    let ones: Vec<_> = (0..=20).map(|k| (k, BigRational::one())).collect();
    let geometric = t_series(st.base(), &ones, Cutoff::finite(20));
    let zeta_expected = TorsionValue::from_element(st.split(), &geometric).unwrap();
    assert!(inv.zeta.agrees_with(&zeta_expected));
    assert!(inv.value.agrees_with(&zeta_expected));
}

#[test]
fn single_flow_line_gives_unit_boundary() {
    let text = "[group]\ngenerators t\n[Y]\nt -1\n[generators]\na 1\nb 0\n[flows]\na b + 1\n";
    let st = load_flow_text(text, w(5)).unwrap().state;
    let c = st.complex();
    let (a, b) = (c.index_of("a").unwrap(), c.index_of("b").unwrap());
    assert_eq!(c.entry(b, a), &RatSeries::one(st.base(), &()));
    assert!(c.entry(a, b).is_zero());
}

#[test]
fn flow_entries_sum_projected_classes() {
    // psi(s) = 2, so [s t]_{ker psi} = t and the two lines add up
    let text = "[group]\ngenerators t s\n[psi]\ns 2\n[Y]\nt -1\n[generators]\na 1\nb 0\n[flows]\na b + t\na b + t*s\n";
    let st = load_flow_text(text, w(5)).unwrap().state;
    let c = st.complex();
    let e = c.entry(c.index_of("b").unwrap(), c.index_of("a").unwrap());
    assert_eq!(e.terms().len(), 1);
    assert_eq!(e.terms()[0].coeff, q(2, 1));
    assert_eq!(e.terms()[0].weight, w(1));
}

#[test]
fn lift_admissibility_is_enforced() {
    let bad = "[group]\ngenerators t\n[psi]\nt 2\n[generators]\na 1 t\nb 0\n";
    match load_flow_text(bad, w(5)) {
        Err(Error::Validation(msg)) => assert!(msg.contains("lift admissibility"), "{msg}"),
        other => panic!("expected a validation error, got {other:?}"),
    }
    let good = "[group]\ngenerators t\n[psi]\nt 2\n[generators]\na 1\nb 0\n";
    assert!(load_flow_text(good, w(5)).is_ok());
}

#[test]
fn invariant_violations_are_named() {
    let parity = "[group]\ngenerators t\n[Y]\nt -1\n[generators]\na 1\nb 1\n[flows]\na b + 1\n";
    assert!(matches!(load_flow_text(parity, w(5)), Err(Error::Validation(m)) if m.contains("line 9")));
    let off_kernel = "[group]\ngenerators t s\n[psi]\ns 2\n[Y]\nt -1\n[orbits]\ns + 1\n";
    assert!(matches!(load_flow_text(off_kernel, w(5)), Err(Error::Validation(m)) if m.contains("ker psi")));
    let negative = "[group]\ngenerators t\n[Y]\nt 1\n[orbits]\nt + 1\n";
    assert!(matches!(load_flow_text(negative, w(5)), Err(Error::Validation(m)) if m.contains("weight")));
    let chain = "[group]\ngenerators t\n[Y]\nt -1\n[generators]\na 1\nb 0\nc 1\n[flows]\na b + 1\nb c + 1\n";
    assert!(matches!(load_flow_text(chain, w(5)), Err(Error::ChainCondition(_))));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let cases = [
        ("[group]\ngenerators t\n[bogus]\n", 3),
        ("t 1\n", 1),
        ("[group]\ngenerators t\n[generators]\na 1 u\n", 4),
        ("[group]\ngenerators t\n[flows]\na b * 1\n", 4),
        ("[group]\ngenerators t\n\n[orbits]\nt + 0\n", 5),
        ("[group]\ngenerators t\n[Y]\nt 1/0\n", 4),
    ];
    for (text, line) in cases {
        match FlowDescriptor::parse(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{text}: expected a parse error, got {other:?}"),
        }
    }
}

#[test]
fn flow_descriptor_round_trips() {
    for text in [CIRCLE_FLOW, TORUS_FLOW, POINT_FLOW] {
        let d = FlowDescriptor::parse(text).unwrap();
        let once = d.render();
        let twice = FlowDescriptor::parse(&once).unwrap().render();
        assert_eq!(once, twice);
        let a = load_flow_text(text, w(6)).unwrap().state;
        let b = load_flow_text(&once, w(6)).unwrap().state;
        assert_eq!(serialize_state(&a), serialize_state(&b));
    }
    let cw = CwDescriptor::parse(TORUS_CW).unwrap();
    assert_eq!(CwDescriptor::parse(&cw.render()).unwrap().render(), cw.render());
}

#[test]
fn cw_torsion_of_circle_torus_point() {
    let tau = cw_torsion(&CwDescriptor::parse(CIRCLE_CW).unwrap()).unwrap();
    // tau * (t - 1) = 1
    let split = tau.split().clone();
    let base = split.source().clone();
    let t_minus_1 = t_series(&base, &[(1, q(1, 1)), (0, q(-1, 1))], Cutoff::Infinite);
    let prod = tau.mul(&TorsionValue::from_element(&split, &t_minus_1).unwrap()).unwrap();
    assert!(prod.agrees_with(&TorsionValue::one(&split)), "{tau}");

    let torus = cw_torsion(&CwDescriptor::parse(TORUS_CW).unwrap()).unwrap();
    let w1 = torus.equal_mod_unit(&TorsionValue::one(torus.split()), w(1)).unwrap();
    assert!(w1.is_some(), "{torus}");

    let point = cw_torsion(&CwDescriptor::parse(POINT_CW).unwrap()).unwrap();
    assert!(point.components().iter().all(|c| c.is_zero()));
}

#[test]
fn cw_torsion_ignores_cell_order_up_to_sign() {
    let d = CwDescriptor::parse(TORUS_CW).unwrap();
    let mut r = d.clone();
    r.cells.reverse();
    let (a, b) = (cw_torsion(&d).unwrap(), cw_torsion(&r).unwrap());
    let wit = a.equal_mod_unit(&b, w(1)).unwrap().expect("equal up to a unit");
    assert!(wit.element.is_identity());

    let c = CwDescriptor::parse(CIRCLE_CW).unwrap();
    let mut rc = c.clone();
    rc.cells.swap(0, 1);
    let wit = cw_torsion(&c).unwrap().equal_mod_unit(&cw_torsion(&rc).unwrap(), w(1)).unwrap().unwrap();
    assert!(wit.element.is_identity());
}

#[test]
fn cw_boundary_must_square_to_zero() {
    let bad = "[group]\ngenerators t\n[cells]\ne0 0\ne1 1\ne2 2\n[boundary]\ne1 e0 t - 1\ne2 e1 1\n";
    assert!(matches!(cw_torsion(&CwDescriptor::parse(bad).unwrap()), Err(Error::ChainCondition(_))));
    let frac = "[group]\ngenerators t\n[cells]\ne0 0\ne1 1\n[boundary]\ne1 e0 1/2*t\n";
    assert!(matches!(cw_torsion(&CwDescriptor::parse(frac).unwrap()), Err(Error::Validation(_))));
}

#[test]
fn circle_comparison_holds_up_to_minus_one() {
    let flow = load_flow_text(CIRCLE_FLOW, w(20)).unwrap();
    let cw = CwDescriptor::parse(CIRCLE_CW).unwrap();
    let cmp = corollary_compare(&flow, &cw, &[]).unwrap();
    let wit = cmp.witness.expect("I_F = iota_* tau(S^1) up to a unit");
    // 1/(1-t) against (t-1)^{-1} = -1/(1-t)
    assert_eq!(wit.sign, -1);
    assert!(wit.element.is_identity());
    assert!(wit.verified >= Cutoff::finite(20));
}

#[test]
fn torus_comparison_both_sides_one() {
    let flow = load_flow_text(TORUS_FLOW, w(10)).unwrap();
    let cw = CwDescriptor::parse(TORUS_CW).unwrap();
    let cmp = corollary_compare(&flow, &cw, &[]).unwrap();
    assert!(cmp.equal());
    let one = TorsionValue::one(flow.state.split());
    assert!(cmp.invariant.equal_mod_unit(&one, w(10)).unwrap().is_some(), "{}", cmp.invariant);
    assert!(cmp.pushed.equal_mod_unit(&one, w(10)).unwrap().is_some(), "{}", cmp.pushed);
}

#[test]
fn point_comparison_is_zero_on_both_sides() {
    let flow = load_flow_text(POINT_FLOW, w(5)).unwrap();
    let cmp = corollary_compare(&flow, &CwDescriptor::parse(POINT_CW).unwrap(), &[]).unwrap();
    assert!(cmp.invariant.components().iter().all(|c| c.is_zero()));
    assert!(cmp.pushed.components().iter().all(|c| c.is_zero()));
    assert!(cmp.equal());
}

#[test]
fn comparison_detects_a_wrong_map() {
    // t -> t^2 doubles the torsion's variable
    let flow = load_flow_text(CIRCLE_FLOW, w(10)).unwrap();
    let cw = CwDescriptor::parse(CIRCLE_CW).unwrap();
    let cmp = corollary_compare(&flow, &cw, &[("t".into(), "t^2".into())]).unwrap();
    assert!(!cmp.equal());
    let err = corollary_compare(&flow, &cw, &[("u".into(), "t".into())]);
    assert!(matches!(err, Err(Error::Validation(_))));
}

#[test]
fn torus_script_is_certified() {
    let flow = load_flow_text(TORUS_FLOW, w(10)).unwrap();
    let moves = parse_moves(TORUS_MOVES, &flow.symbols()).unwrap();
    assert_eq!(moves.len(), 4);
    let report = certify(&flow.state, &moves, &EngineOptions::default(), w(10)).unwrap();
    assert_eq!(report.records.len(), 4);
    assert!(report.records.iter().all(|r| r.tau_ratio_ok && r.zeta_ratio_ok));
}

#[test]
fn move_script_errors() {
    let flow = load_flow_text(TORUS_FLOW, w(10)).unwrap();
    let sym = flow.symbols();
    assert!(matches!(parse_moves("hs1 a a t\n", &sym), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_moves("\n\nfold a\n", &sym), Err(Error::Parse { line: 3, .. })));
    assert!(matches!(parse_moves("hs2 a u\n", &sym), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse_moves("birth u v 0 1 t | x a 1\n", &sym), Err(Error::Parse { .. })));
}

#[test]
fn serialized_random_states_reload_identically() {
    let cfg = RandomConfig::default();
    for seed in 0..12 {
        let case = random_case(seed, &cfg).unwrap();
        for st in [case.states.first().unwrap(), case.states.last().unwrap()] {
            let text = serialize_state(st);
            let back = parse_state(&text).unwrap();
            assert_eq!(serialize_state(&back), text, "seed {seed}");
            assert!(back.invariant().unwrap().value.agrees_with(&st.invariant().unwrap().value));
        }
    }
}

#[test]
fn rendered_scripts_replay_identically() {
    let cfg = RandomConfig::default();
    for seed in 20..30 {
        let case = random_case(seed, &cfg).unwrap();
        let script: String = case.moves.iter().map(|m| render_move(m) + "\n").collect();
        let sym = Symbols::literal(case.states[0].base());
        let moves = parse_moves(&script, &sym).unwrap();
        let states = run_script(&case.states[0], &moves, &EngineOptions::default()).unwrap();
        assert_eq!(serialize_state(states.last().unwrap()), serialize_state(case.states.last().unwrap()), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomials_round_trip(coeffs in proptest::collection::vec((-5i64..=5, 1i64..=4, -3i64..=3, -3i64..=3), 1..5)) {
        let mut text = String::new();
        for (i, (n, d, a, b)) in coeffs.iter().enumerate() {
            if i > 0 {
                text.push_str(" + ");
            }
            text.push_str(&format!("{n}/{d}*t^{a}*s^{b}"));
        }
        let cw = format!("[group]\ngenerators t s\n[cells]\ne0 0\ne1 1\n[boundary]\ne1 e0 {text}\n");
        let d = CwDescriptor::parse(&cw).unwrap();
        let once = d.render();
        prop_assert_eq!(CwDescriptor::parse(&once).unwrap().render(), once.clone());
        // the rendered polynomial denotes the same element
        let sum = |d: &CwDescriptor| {
            let mut acc = std::collections::BTreeMap::new();
            for (c, e) in &d.boundary[0].poly {
                *acc.entry(e.clone()).or_insert_with(BigRational::zero) += c;
            }
            acc.retain(|_, c| !c.is_zero());
            acc
        };
        prop_assert_eq!(sum(&d), sum(&CwDescriptor::parse(&once).unwrap()));
    }
}
