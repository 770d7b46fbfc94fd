use std::path::PathBuf;
use std::process::Command;

use novikov_cli::{run, EXIT_FAILED, EXIT_OK, EXIT_PARSE, EXIT_PRECISION, EXIT_VALIDATION};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("novikov-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.display().to_string()
}

fn novikov(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("novikov").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn compute_circle() {
    let (code, out, _) = novikov(&["compute", &data("circle.flow"), "--cutoff", "20"]);
    assert_eq!(code, EXIT_OK);
    let powers: Vec<String> = (2..=20).map(|k| format!("t^{k}")).collect();
    let geometric = format!("1 + t + {} + O(>20)", powers.join(" + "));
    assert!(out.contains(&format!("I    = {geometric}\n")), "{out}");
    assert!(out.contains(&format!("zeta = {geometric}\n")), "{out}");
    assert!(out.contains("tau  = 1 + O(>20)\n"), "{out}");
}

#[test]
fn cw_torsion_circle() {
    let (code, out, _) = novikov(&["cw-torsion", &data("circle.cw")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(": 1/(t - 1)\n"), "{out}");
    assert!(out.contains("mod +-<t>"), "{out}");
    let (_, point, _) = novikov(&["cw-torsion", &data("point.cw")]);
    assert!(point.contains(": 0\n"), "{point}");
}

#[test]
fn selftest_seed_seven() {
    let (code, out, _) = novikov(&["selftest", "--seed", "7", "--moves", "20", "--cutoff", "10"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().last(), Some("invariant"));
}

#[test]
fn compare_and_moves() {
    let (code, out, _) = novikov(&["compare", &data("circle.flow"), &data("circle.cw")]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("equal up to the unit -1"), "{out}");
    let (code, out, _) = novikov(&["compare", &data("torus.flow"), &data("torus.cw"), "--cutoff", "6"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out, _) =
        novikov(&["compare", &data("circle.flow"), &data("circle.cw"), "--iota", "t=t^2", "--cutoff", "4"]);
    assert_eq!(code, EXIT_FAILED, "{out}");
    assert!(out.contains("different"));
    let (code, out, _) = novikov(&["moves", &data("torus.flow"), &data("torus.moves"), "--cutoff", "10"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("move ")).count(), 4);
    assert!(out.lines().last().unwrap().starts_with("invariant"));
}

#[test]
fn machine_output_is_byte_stable() {
    for args in [
        vec!["selftest", "--seed", "3", "--moves", "8", "--cutoff", "6", "--format", "machine"],
        vec!["compute", "--format", "machine", "--cutoff", "7/2"],
    ] {
        let mut args: Vec<String> = args.into_iter().map(String::from).collect();
        if args[0] == "compute" {
            args.insert(1, data("torus.flow"));
        }
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let (c1, a, _) = novikov(&argv);
        let (c2, b, _) = novikov(&argv);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["command"], args[0].as_str());
    }
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.flow", "[group]\ngenerators t\n[bogus]\n");
    let (code, _, err) = novikov(&["compute", &bad]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("line 3"), "{err}");

    let lift = scratch("lift.flow", "[group]\ngenerators t\n[psi]\nt 2\n[generators]\na 1 t\nb 0\n");
    assert_eq!(novikov(&["compute", &lift]).0, EXIT_VALIDATION);
    let chain = scratch(
        "chain.flow",
        "[group]\ngenerators t\n[Y]\nt -1\n[generators]\na 1\nb 0\nc 1\n[flows]\na b + 1\nb c + 1\n",
    );
    assert_eq!(novikov(&["compute", &chain]).0, EXIT_VALIDATION);

    // the only boundary entry is zero to weight 2 and unknown beyond
    let unknown = scratch(
        "unknown.state",
        "[kernel]\nrank 1\ntorsion\nweight 1\ncutoff 5\n[generators]\na 1\nb 0\n[boundary]\na b O(>2)\n[eta]\n0\n",
    );
    let (code, _, err) = novikov(&["compute", &unknown, "--cutoff", "5"]);
    assert_eq!(code, EXIT_PRECISION, "{err}");

    assert_eq!(novikov(&["compute", &data("circle.flow"), "--cutoff", "0"]).0, EXIT_VALIDATION);
    assert_eq!(novikov(&["compute", &data("circle.flow"), "--cutoff", "x"]).0, EXIT_PARSE);
    assert_eq!(novikov(&["frobnicate"]).0, EXIT_PARSE);
    assert_eq!(novikov(&["moves", &data("torus.flow"), &bad]).0, EXIT_PARSE);
    assert_eq!(novikov(&["simulate", "degenerate", "--start", "0,-0.5", "--window", "1,10"]).0, EXIT_VALIDATION);
    assert_eq!(novikov(&["--help"]).0, EXIT_OK);
}

#[test]
fn serialized_state_computes_like_its_descriptor() {
    let flow = novikov_core::descriptor::load_flow_text(
        &std::fs::read_to_string(data("circle.flow")).unwrap(),
        novikov_core::Weight::from_integer(9),
    )
    .unwrap();
    let path = scratch("circle.state", &novikov_core::descriptor::serialize_state(&flow.state));
    let (code, out, _) = novikov(&["compute", &path, "--cutoff", "9"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("(I known to weight 9)"), "{out}");
    assert_eq!(out.matches("1*g^(9)").count(), 2, "{out}");
}

#[test]
fn simulate_reports_and_writes_csv() {
    let trace = scratch("trace.csv", "");
    let fits = scratch("fits.csv", "");
    let scan = scratch("scan.csv", "");
    let (code, out, err) = novikov(&[
        "simulate", "generic", "--lambda", "-0.1", "--window", "2,20", "--trace-csv", &trace, "--fits-csv", &fits,
        "--scan-csv", &scan,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("separation exponent 0.500000"), "{out}");
    assert!(out.contains("y   exponential"), "{out}");
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("s,x,y,dx,dy,ddx,ddy,energy\n"));
    assert_eq!(std::fs::read_to_string(&fits).unwrap().lines().count(), 5);
    assert_eq!(std::fs::read_to_string(&scan).unwrap().lines().count(), 41);

    let (code, out, _) = novikov(&["simulate", "custom", "--coeffs", "1,0,0,0,1,0,0,1,0", "--lambda", "-0.1", "--window", "2,20"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("family custom"), "{out}");

    let (code, out, _) = novikov(&["simulate", "paper", "--lambda", "0", "--window", "100,1000"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("family degenerate"), "{out}");
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_novikov");
    let ok = Command::new(bin).args(["cw-torsion", &data("torus.cw")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("mod +-<t, s>"));
    let bad = Command::new(bin).args(["compute", "/nonexistent/file.flow"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_VALIDATION));
    assert!(!bad.stderr.is_empty());
}
