use novikov_sim::*;
use proptest::prelude::*;

fn opts() -> IntegrateOptions<f64> {
    IntegrateOptions::default()
}

#[test]
fn degenerate_family_critical_points() {
    let f = PlanarFamily::<f64>::degenerate();
    for lambda in [-0.3, -0.01, 0.02, 0.5] {
        let pts = critical_points(&f, lambda);
        let mut ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        ys.sort_by(f64::total_cmp);
        let mut expected = [0.0, -2.0 * lambda / 3.0];
        expected.sort_by(f64::total_cmp);
        assert_eq!(ys.len(), 2);
        for (a, b) in ys.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "lambda {lambda}: {ys:?}");
        }
        assert!(pts.iter().all(|p| p.x == 0.0 && p.eigenvalues.0 == 2.0));
    }
    assert_eq!(critical_points(&f, 0.0).len(), 1);
    assert_eq!(merge_parameters(&f), vec![0.0]);
}

#[test]
fn generic_family_roots_and_eigenvalues() {
    let f = PlanarFamily::<f64>::generic();
    let lambda = -0.12;
    let pts = critical_points(&f, lambda);
    let r = (-lambda / 3.0).sqrt();
    assert!((pts[0].y + r).abs() < 1e-15 && (pts[1].y - r).abs() < 1e-15);
    let e = 2.0 * (-3.0 * lambda).sqrt();
    assert!((pts[0].eigenvalues.1 + e).abs() < 1e-14 && (pts[1].eigenvalues.1 - e).abs() < 1e-14);
    assert!(critical_points(&f, 0.1).is_empty());
    assert_eq!(merge_parameters(&f), vec![0.0]);
}

#[test]
fn generic_scaling_exponents_are_one_half() {
    let grid = geometric_grid(-1e-1, -1e-4, 60);
    let scan = critical_scan(&PlanarFamily::<f64>::generic(), &grid);
    assert_eq!(scan.reference, Some(0.0));
    let sep = scan.separation_fit.unwrap();
    let eig = scan.eigenvalue_fit.unwrap();
    assert!((sep.slope - 0.5).abs() < 1e-9, "{sep:?}");
    assert!((eig.slope - 0.5).abs() < 1e-9, "{eig:?}");
}

#[test]
fn degenerate_family_scales_linearly() {
    // lambda y^2 has no linear lambda-term, so the pair separates like |lambda|
    let grid = geometric_grid(-1e-1, -1e-4, 40);
    let scan = critical_scan(&PlanarFamily::<f64>::degenerate(), &grid);
    assert!((scan.separation_fit.unwrap().slope - 1.0).abs() < 1e-9);
    assert!((scan.eigenvalue_fit.unwrap().slope - 1.0).abs() < 1e-9);
}

#[test]
fn degenerate_flow_matches_closed_form() {
    let f = PlanarFamily::<f64>::degenerate();
    let times = sample_times(0.1, 1e3, 20);
    let trace = integrate(&f, 0.0, (0.0, 0.5), &times, &opts()).unwrap();
    for p in &trace.samples {
        let exact = 0.5 / (1.0 + 1.5 * p.s);
        assert!((p.y - exact).abs() < 1e-8, "s {}: {} vs {exact}", p.s, p.y);
        assert_eq!(p.x, 0.0);
    }
}

#[test]
fn degenerate_decay_exponents() {
    let f = PlanarFamily::<f64>::degenerate();
    let rep = integrate_and_fit(&f, 0.0, (0.0, 0.5), (1e2, 1e4), &opts()).unwrap();
    assert_eq!(rep.y.kind, DecayKind::Power);
    let (y, dy, ddy) = (rep.y.exponent().unwrap(), rep.dy.exponent().unwrap(), rep.ddy.exponent().unwrap());
    assert!((y + 1.0).abs() < 0.05, "{y}");
    assert!((dy + 2.0).abs() < 0.1, "{dy}");
    assert!((ddy + 3.0).abs() < 0.15, "{ddy}");
    assert!(energy_check(&rep.trace).decreasing);
}

#[test]
fn transversal_direction_is_exponential() {
    let f = PlanarFamily::<f64>::degenerate();
    let rep = integrate_and_fit(&f, 0.0, (0.5, 0.0), (1.0, 10.0), &opts()).unwrap();
    assert_eq!(rep.x.kind, DecayKind::Exponential);
    assert_eq!(rep.x.exponent(), None);
    assert!((rep.x.rate().unwrap() - 2.0).abs() < 1e-3);
    assert_eq!(rep.y.kind, DecayKind::Degenerate);
}

#[test]
fn nondegenerate_sink_is_exponential() {
    let f = PlanarFamily::<f64>::generic();
    let lambda = -0.1;
    let rep = integrate_and_fit(&f, lambda, (0.0, 0.5), (2.0, 20.0), &opts()).unwrap();
    let y_star = (-lambda / 3.0).sqrt();
    assert!((rep.limit.1 - y_star).abs() < 1e-15);
    assert_eq!(rep.y.kind, DecayKind::Exponential);
    let rate = rep.y.rate().unwrap();
    assert!((rate - 6.0 * y_star).abs() < 0.02, "{rate}");
}

#[test]
fn escape_is_a_divergence_error() {
    let f = PlanarFamily::<f64>::degenerate();
    let err = integrate_and_fit(&f, 0.0, (0.0, -0.5), (1.0, 10.0), &opts()).unwrap_err();
    assert!(matches!(err, SimError::Divergence { .. }), "{err}");
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(PlanarFamily::<f64>::custom("neg", -1.0, [Affine::constant(0.0); 4]).is_err());
    let f = PlanarFamily::<f64>::degenerate();
    assert!(matches!(integrate_and_fit(&f, 0.0, (0.0, 0.5), (10.0, 1.0), &opts()), Err(SimError::Input(_))));
}

#[test]
fn single_precision_works() {
    let f = PlanarFamily::<f32>::generic();
    let pts = critical_points(&f, -0.03f32);
    assert_eq!(pts.len(), 2);
    assert!((pts[1].y - 0.1).abs() < 1e-6);
}

#[test]
fn csv_tables_have_documented_columns() {
    let f = PlanarFamily::<f64>::degenerate();
    let rep = integrate_and_fit(&f, 0.0, (0.0, 0.5), (1e2, 1e3), &opts()).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &rep.trace).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("s,x,y,dx,dy,ddx,ddy,energy\n"));
    assert_eq!(text.lines().count(), rep.trace.samples.len() + 1);
    let mut buf = Vec::new();
    write_fits(&mut buf, &rep).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(2).unwrap().starts_with("y,power,"));
    let mut buf = Vec::new();
    write_scan(&mut buf, &critical_scan(&f, &[-0.1, 0.0])).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roots_satisfy_the_quadratic(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        if let Some(rs) = quadratic_roots(a, b, c) {
            for r in rs {
                let scale = a.abs() * r * r + b.abs() * r.abs() + c.abs() + 1.0;
                prop_assert!((a * r * r + b * r + c).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn energy_decreases_along_custom_flows(
        p1 in -1.0f64..1.0, p2 in -1.0f64..1.0, slope in -1.0f64..1.0,
        lambda in -0.5f64..0.5, x0 in -0.5f64..0.5, y0 in -0.3f64..0.3,
    ) {
        // positive cubic coefficient keeps small starts bounded or fast to escape
        let f = PlanarFamily::custom("c", 1.0, [
            Affine::constant(0.0), Affine::new(p1, slope), Affine::constant(p2), Affine::constant(1.0),
        ]).unwrap();
        let times = sample_times(0.01, 5.0, 20);
        if let Ok(trace) = integrate(&f, lambda, (x0, y0), &times, &opts()) {
            prop_assert!(energy_check(&trace).decreasing);
            prop_assert!(trace.samples.windows(2).all(|w| w[1].s > w[0].s));
        }
    }

    #[test]
    fn critical_points_zero_the_gradient(base in -1.0f64..1.0, slope in -2.0f64..2.0, lambda in -1.0f64..1.0) {
        let f = PlanarFamily::custom("c", 2.0, [
            Affine::constant(0.0), Affine::new(base, slope), Affine::new(0.3, -slope), Affine::constant(1.0),
        ]).unwrap();
        for p in critical_points(&f, lambda) {
            let (gx, gy) = f.gradient(lambda, p.x, p.y);
            prop_assert!(gx.abs() < 1e-12 && gy.abs() < 1e-10);
        }
    }
}
