//! The `novikov` command line: argument handling, rendering and exit codes.
//!
//! Exit codes: 0 success, 1 invariance or comparison failure, 2 parse error,
//! 3 validation error, 4 insufficient precision.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use novikov_core::descriptor::{
    corollary_compare, cw_namer, cw_torsion, load_flow_text, load_state_text, parse_iota, parse_moves, CwDescriptor,
    Namer, Symbols,
};
use novikov_core::engine::{certify, verify_invariance, InvarianceReport};
use novikov_core::random::{random_case, RandomConfig};
use novikov_core::scalar::parse_weight;
use novikov_core::{EngineOptions, Error, FloerState, Move, TorsionValue, UnitWitness, Weight};
use novikov_sim::{
    critical_scan, geometric_grid, integrate_and_fit, write_fits, write_scan, write_trace, Affine, DecayFit,
    IntegrateOptions, PlanarFamily, SimError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "novikov", version, about = "Novikov-ring torsion, orbit zeta functions and bifurcation moves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Weight cutoff, `p/q` or an integer.
    #[arg(long, global = true, default_value = "20")]
    pub cutoff: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// tau, zeta and their product for a flow descriptor or serialized state.
    Compute { input: PathBuf },
    /// Apply a move script and certify every step.
    Moves { input: PathBuf, script: PathBuf },
    /// Torsion of a CW descriptor, per field component.
    CwTorsion { input: PathBuf },
    /// Compare the flow invariant with the pushed-forward CW torsion.
    Compare {
        flow: PathBuf,
        cw: PathBuf,
        /// `h=m,...`: images of H_1 generators; omitted ones map by name.
        #[arg(long, default_value = "")]
        iota: String,
    },
    /// Critical scan and decay fits for a planar toy family.
    Simulate {
        /// `degenerate` (also accepted as `paper`), `generic` or `custom`.
        family: String,
        /// For `custom`: `a,b0,s0,b1,s1,b2,s2,b3,s3` giving
        /// `a x^2 + sum (b_k + s_k lambda) y^k`.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value = "0,0.5", allow_negative_numbers = true)]
        start: String,
        /// Fit window `lo,hi` in flow time.
        #[arg(long, default_value = "100,10000")]
        window: String,
        /// Scan grid `from,to,n`, geometrically spaced.
        #[arg(long, default_value = "-0.1,-0.0001,40", allow_negative_numbers = true)]
        grid: String,
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        #[arg(long)]
        fits_csv: Option<PathBuf>,
        #[arg(long)]
        scan_csv: Option<PathBuf>,
    },
    /// Randomized invariance check: a seeded state and move script.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum script length.
        #[arg(long, default_value_t = 20)]
        moves: usize,
        /// Number of consecutive seeds.
        #[arg(long, default_value_t = 1)]
        cases: u64,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::Precision { .. } => EXIT_PRECISION,
        Error::InvarianceViolation { .. } => EXIT_FAILED,
        _ => EXIT_VALIDATION,
    }
}

fn core_err(context: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::new(exit_code(&e), format!("{context}: {e}"))
}

fn sim_err(e: SimError) -> Failure {
    let code = match e {
        SimError::Refinement { .. } => EXIT_PRECISION,
        _ => EXIT_VALIDATION,
    };
    Failure::new(code, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn parse_cutoff(s: &str) -> Result<Weight, Failure> {
    let w = parse_weight(s).ok_or_else(|| Failure::new(EXIT_PARSE, format!("bad cutoff {s:?}")))?;
    if w <= Weight::from_integer(0) {
        return Err(Failure::new(EXIT_VALIDATION, "cutoff must be positive"));
    }
    Ok(w)
}

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::new(EXIT_PARSE, format!("{what}: expected {n} comma-separated numbers, got {s:?}")))?;
    if v.len() != n {
        return Err(Failure::new(EXIT_PARSE, format!("{what}: expected {n} numbers, got {}", v.len())));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// rendering

enum Names {
    Named(Namer),
    Raw,
}

impl Names {
    fn torsion(&self, t: &TorsionValue) -> Vec<String> {
        match self {
            Names::Named(n) => n.torsion(t),
            Names::Raw => t.components().iter().map(|c| c.to_string()).collect(),
        }
    }

    fn witness(&self, w: &UnitWitness) -> String {
        let g = match self {
            Names::Named(n) => n.element(&w.element),
            Names::Raw => format!("g^{}", w.element),
        };
        format!("{}{}", if w.sign > 0 { "+" } else { "-" }, g)
    }

    fn describe(&self, mv: &Move) -> String {
        let Names::Named(n) = self else { return mv.to_string() };
        match mv {
            Move::HandleSlide { x, y, chi } if x == y => format!("hs2 {x} chi={}", n.series(chi)),
            Move::HandleSlide { x, y, chi } => format!("hs1 {x} {y} chi={}", n.series(chi)),
            Move::Death { .. } => mv.to_string(),
            Move::Birth { z_plus, z_minus, position, grade, b, .. } => {
                format!("birth {z_plus} {z_minus} at {position} grade {grade} b={}", n.series(b))
            }
        }
    }
}

#[derive(Serialize)]
struct ComponentOut {
    character: Vec<i64>,
    order: u32,
    tau: String,
    zeta: String,
    invariant: String,
    invariant_cutoff: String,
}

#[derive(Serialize)]
struct ComputeOut {
    command: &'static str,
    cutoff: String,
    generators: usize,
    components: Vec<ComponentOut>,
}

#[derive(Serialize)]
struct TorsionOut {
    command: &'static str,
    components: Vec<(Vec<i64>, u32, String)>,
    modulo: String,
}

#[derive(Serialize)]
struct MoveOut {
    index: usize,
    kind: String,
    r#move: String,
    witness: String,
    verified: String,
    tau_ratio: bool,
    zeta_ratio: bool,
}

#[derive(Serialize)]
struct MovesOut {
    command: &'static str,
    cutoff: String,
    moves: Vec<MoveOut>,
    verified: String,
    result: &'static str,
}

#[derive(Serialize)]
struct CompareOut {
    command: &'static str,
    cutoff: String,
    invariant: Vec<String>,
    pushed: Vec<String>,
    witness: Option<String>,
    result: &'static str,
}

#[derive(Serialize)]
struct FitOut {
    quantity: &'static str,
    kind: &'static str,
    exponent: Option<f64>,
    rate: Option<f64>,
}

#[derive(Serialize)]
struct SimulateOut {
    command: &'static str,
    family: String,
    lambda: f64,
    lambda0: Vec<f64>,
    separation_exponent: Option<f64>,
    eigenvalue_exponent: Option<f64>,
    limit: (f64, f64),
    step: f64,
    halvings: u32,
    fits: Vec<FitOut>,
    energy_decreasing: bool,
}

#[derive(Serialize)]
struct SelftestCase {
    seed: u64,
    generators: usize,
    moves: usize,
    verified: String,
    ratio_laws: bool,
}

#[derive(Serialize)]
struct SelftestOut {
    command: &'static str,
    cutoff: String,
    cases: Vec<SelftestCase>,
    result: &'static str,
}

fn machine<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}

fn character_label(t: &TorsionValue, k: usize) -> (Vec<i64>, u32) {
    let kappa = &t.split().characters()[k];
    (kappa.values.clone(), kappa.order)
}

fn section(out: &mut String, header: &str, lines: &[String]) {
    let _ = writeln!(out, "{header}");
    for l in lines {
        let _ = writeln!(out, "  {l}");
    }
}

// ---------------------------------------------------------------------------
// subcommands

/// Flow descriptor or serialized state, at the given cutoff.
fn load(path: &Path, cutoff: Weight) -> Result<(FloerState, Symbols, Names), Failure> {
    let text = read(path)?;
    let ctx = path.display().to_string();
    if text.lines().any(|l| l.trim() == "[kernel]") {
        let (state, sym) = load_state_text(&text, cutoff).map_err(core_err(&ctx))?;
        Ok((state, sym, Names::Raw))
    } else {
        let flow = load_flow_text(&text, cutoff).map_err(core_err(&ctx))?;
        let sym = flow.symbols();
        let names = Names::Named(flow.namer());
        Ok((flow.state, sym, names))
    }
}

fn compute(cli: &Cli, input: &Path) -> Result<(String, i32), Failure> {
    let cutoff = parse_cutoff(&cli.cutoff)?;
    let (state, _, names) = load(input, cutoff)?;
    let inv = state.invariant().map_err(core_err("compute"))?;
    let (tau, zeta, value) = (names.torsion(&inv.tau), names.torsion(&inv.zeta), names.torsion(&inv.value));
    let components: Vec<ComponentOut> = (0..tau.len())
        .map(|k| {
            let (character, order) = character_label(&inv.value, k);
            ComponentOut {
                character,
                order,
                tau: tau[k].clone(),
                zeta: zeta[k].clone(),
                invariant: value[k].clone(),
                invariant_cutoff: inv.value.components()[k].cutoff().to_string(),
            }
        })
        .collect();
    let out = ComputeOut { command: "compute", cutoff: cutoff.to_string(), generators: state.complex().len(), components };
    if cli.format == Format::Machine {
        return Ok((machine(&out), EXIT_OK));
    }
    let mut s = String::new();
    let _ = writeln!(s, "cutoff {}  generators {}", out.cutoff, out.generators);
    for c in &out.components {
        let _ = writeln!(s, "component character {:?} order {}", c.character, c.order);
        let _ = writeln!(s, "  tau  = {}", c.tau);
        let _ = writeln!(s, "  zeta = {}", c.zeta);
        let _ = writeln!(s, "  I    = {}", c.invariant);
        let _ = writeln!(s, "  (I known to weight {})", c.invariant_cutoff);
    }
    Ok((s, EXIT_OK))
}

fn report_moves(cutoff: Weight, report: &InvarianceReport, mvs: &[Move], names: &Names) -> MovesOut {
    let moves: Vec<MoveOut> = report
        .records
        .iter()
        .map(|r| MoveOut {
            index: r.index + 1,
            kind: r.kind.to_string(),
            r#move: names.describe(&mvs[r.index]),
            witness: names.witness(&r.witness),
            verified: r.witness.verified.to_string(),
            tau_ratio: r.tau_ratio_ok,
            zeta_ratio: r.zeta_ratio_ok,
        })
        .collect();
    let laws = moves.iter().all(|m| m.tau_ratio && m.zeta_ratio);
    MovesOut {
        command: "moves",
        cutoff: cutoff.to_string(),
        moves,
        verified: report.verified.to_string(),
        result: if laws { "invariant" } else { "ratio law failed" },
    }
}

/// Relative precision `Re` is checked on states carried to `Re + 1`.
fn working(cutoff: Weight) -> Weight {
    cutoff + Weight::from_integer(1)
}

fn moves(cli: &Cli, input: &Path, script: &Path) -> Result<(String, i32), Failure> {
    let cutoff = parse_cutoff(&cli.cutoff)?;
    let (state, sym, names) = load(input, working(cutoff))?;
    let text = read(script)?;
    let mvs = parse_moves(&text, &sym).map_err(core_err(&script.display().to_string()))?;
    let report = certify(&state, &mvs, &EngineOptions::default(), cutoff).map_err(core_err("moves"))?;
    let out = report_moves(cutoff, &report, &mvs, &names);
    let code = if out.result == "invariant" { EXIT_OK } else { EXIT_FAILED };
    if cli.format == Format::Machine {
        return Ok((machine(&out), code));
    }
    let mut s = String::new();
    for m in &out.moves {
        let _ = writeln!(
            s,
            "move {}: {}  unit {}  verified to {}  tau ratio {}  zeta ratio {}",
            m.index,
            m.r#move,
            m.witness,
            m.verified,
            if m.tau_ratio { "ok" } else { "FAILED" },
            if m.zeta_ratio { "ok" } else { "FAILED" },
        );
    }
    let _ = writeln!(s, "{} ({} moves, verified to relative weight {})", out.result, out.moves.len(), out.verified);
    Ok((s, code))
}

fn cw(cli: &Cli, input: &Path) -> Result<(String, i32), Failure> {
    let ctx = input.display().to_string();
    let d = CwDescriptor::parse(&read(input)?).map_err(core_err(&ctx))?;
    let tau = cw_torsion(&d).map_err(core_err(&ctx))?;
    let namer = cw_namer(&d).map_err(core_err(&ctx))?;
    let lines = namer.torsion(&tau);
    let modulo = format!("+-<{}>", d.group.names.join(", "));
    let out = TorsionOut {
        command: "cw-torsion",
        components: lines
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let (c, o) = character_label(&tau, k);
                (c, o, l.clone())
            })
            .collect(),
        modulo,
    };
    if cli.format == Format::Machine {
        return Ok((machine(&out), EXIT_OK));
    }
    let mut s = String::new();
    for (c, o, l) in &out.components {
        let _ = writeln!(s, "component character {c:?} order {o}: {l}");
    }
    let _ = writeln!(s, "mod {}", out.modulo);
    Ok((s, EXIT_OK))
}

fn compare(cli: &Cli, flow: &Path, cw_path: &Path, iota: &str) -> Result<(String, i32), Failure> {
    let cutoff = parse_cutoff(&cli.cutoff)?;
    let ctx = flow.display().to_string();
    let loaded = load_flow_text(&read(flow)?, cutoff).map_err(core_err(&ctx))?;
    let cw_ctx = cw_path.display().to_string();
    let d = CwDescriptor::parse(&read(cw_path)?).map_err(core_err(&cw_ctx))?;
    let iota = parse_iota(iota).map_err(core_err("--iota"))?;
    let cmp = corollary_compare(&loaded, &d, &iota).map_err(core_err("compare"))?;
    let names = Names::Named(loaded.namer());
    let out = CompareOut {
        command: "compare",
        cutoff: cutoff.to_string(),
        invariant: names.torsion(&cmp.invariant),
        pushed: names.torsion(&cmp.pushed),
        witness: cmp.witness.as_ref().map(|w| names.witness(w)),
        result: if cmp.equal() { "equal" } else { "different" },
    };
    let code = if cmp.equal() { EXIT_OK } else { EXIT_FAILED };
    if cli.format == Format::Machine {
        return Ok((machine(&out), code));
    }
    let mut s = String::new();
    section(&mut s, "I_F:", &out.invariant);
    section(&mut s, "iota_* tau:", &out.pushed);
    match &out.witness {
        Some(w) => {
            let _ = writeln!(s, "equal up to the unit {w}");
        }
        None => {
            let _ = writeln!(s, "different: no unit +-g relates the two sides");
        }
    }
    Ok((s, code))
}

fn family(name: &str, coeffs: Option<&str>) -> Result<PlanarFamily<f64>, Failure> {
    if name == "custom" {
        let c = coeffs.ok_or_else(|| Failure::new(EXIT_PARSE, "custom family needs --coeffs"))?;
        let v = floats(c, 9, "--coeffs")?;
        let p = [0, 1, 2, 3].map(|k| Affine::new(v[1 + 2 * k], v[2 + 2 * k]));
        return PlanarFamily::custom("custom", v[0], p).map_err(sim_err);
    }
    PlanarFamily::builtin(name)
        .ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown family {name:?} (degenerate, generic, custom)")))
}

fn fit_out(quantity: &'static str, f: &DecayFit<f64>) -> FitOut {
    FitOut { quantity, kind: f.kind.label(), exponent: f.exponent(), rate: f.rate() }
}

fn write_csv(path: &Option<PathBuf>, f: impl FnOnce(std::fs::File) -> Result<(), SimError>) -> Result<(), Failure> {
    if let Some(p) = path {
        let file = std::fs::File::create(p).map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", p.display())))?;
        f(file).map_err(sim_err)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    name: &str,
    coeffs: Option<&str>,
    lambda: f64,
    start: &str,
    window: &str,
    grid: &str,
    csv: [&Option<PathBuf>; 3],
) -> Result<(String, i32), Failure> {
    let fam = family(name, coeffs)?;
    let st = floats(start, 2, "--start")?;
    let win = floats(window, 2, "--window")?;
    let g = floats(grid, 3, "--grid")?;
    if g[0] == 0.0 || g[1] == 0.0 || g[0].signum() != g[1].signum() || g[2] < 2.0 {
        return Err(Failure::new(EXIT_VALIDATION, "--grid needs two nonzero ends of one sign and n >= 2"));
    }
    let scan = critical_scan(&fam, &geometric_grid(g[0], g[1], g[2] as usize));
    let rep = integrate_and_fit(&fam, lambda, (st[0], st[1]), (win[0], win[1]), &IntegrateOptions::default())
        .map_err(sim_err)?;
    write_csv(csv[0], |f| write_trace(f, &rep.trace))?;
    write_csv(csv[1], |f| write_fits(f, &rep))?;
    write_csv(csv[2], |f| write_scan(f, &scan))?;
    let out = SimulateOut {
        command: "simulate",
        family: fam.name.clone(),
        lambda,
        lambda0: scan.lambda0.clone(),
        separation_exponent: scan.separation_fit.map(|f| f.slope),
        eigenvalue_exponent: scan.eigenvalue_fit.map(|f| f.slope),
        limit: rep.limit,
        step: rep.trace.step,
        halvings: rep.trace.halvings,
        fits: vec![fit_out("x", &rep.x), fit_out("y", &rep.y), fit_out("dy", &rep.dy), fit_out("ddy", &rep.ddy)],
        energy_decreasing: novikov_sim::energy_check(&rep.trace).decreasing,
    };
    if cli.format == Format::Machine {
        return Ok((machine(&out), EXIT_OK));
    }
    let mut s = String::new();
    let _ = writeln!(s, "family {}  lambda0 {:?}", out.family, out.lambda0);
    let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(
        s,
        "scan: separation exponent {}  small-eigenvalue exponent {}",
        show(out.separation_exponent),
        show(out.eigenvalue_exponent)
    );
    let _ = writeln!(
        s,
        "flow at lambda {} from ({}, {}) to ({:.6}, {:.6}); step {:e} after {} halvings",
        lambda, st[0], st[1], out.limit.0, out.limit.1, out.step, out.halvings
    );
    for f in &out.fits {
        let detail = match (f.exponent, f.rate) {
            (Some(e), _) => format!("exponent {e:.4}"),
            (_, Some(r)) => format!("rate {r:.4}"),
            _ => String::new(),
        };
        let _ = writeln!(s, "  {:<3} {:<12} {detail}", f.quantity, f.kind);
    }
    let _ = writeln!(s, "energy {}", if out.energy_decreasing { "decreasing" } else { "NOT decreasing" });
    Ok((s, EXIT_OK))
}

fn selftest(cli: &Cli, seed: u64, max_moves: usize, cases: u64) -> Result<(String, i32), Failure> {
    let cutoff = parse_cutoff(&cli.cutoff)?;
    if max_moves == 0 {
        return Err(Failure::new(EXIT_VALIDATION, "--moves must be positive"));
    }
    let cfg = RandomConfig { max_moves, working_cutoff: working(cutoff), ..RandomConfig::default() };
    let mut out = SelftestOut { command: "selftest", cutoff: cutoff.to_string(), cases: Vec::new(), result: "invariant" };
    for s in seed..seed.saturating_add(cases.max(1)) {
        let case = random_case(s, &cfg).map_err(core_err(&format!("seed {s}")))?;
        let report = verify_invariance(&case.states, &case.moves, cutoff).map_err(core_err(&format!("seed {s}")))?;
        let ratio_laws = report.records.iter().all(|r| r.tau_ratio_ok && r.zeta_ratio_ok);
        if !ratio_laws {
            out.result = "ratio law failed";
        }
        out.cases.push(SelftestCase {
            seed: s,
            generators: case.states[0].complex().len(),
            moves: case.moves.len(),
            verified: report.verified.to_string(),
            ratio_laws,
        });
    }
    let code = if out.result == "invariant" { EXIT_OK } else { EXIT_FAILED };
    if cli.format == Format::Machine {
        return Ok((machine(&out), code));
    }
    let mut s = String::new();
    for c in &out.cases {
        let _ = writeln!(
            s,
            "seed {}: {} generators, {} moves, verified to {}, ratio laws {}",
            c.seed,
            c.generators,
            c.moves,
            c.verified,
            if c.ratio_laws { "ok" } else { "FAILED" }
        );
    }
    let _ = writeln!(s, "{}", out.result);
    Ok((s, code))
}

fn dispatch(cli: &Cli) -> Result<(String, i32), Failure> {
    match &cli.command {
        Command::Compute { input } => compute(cli, input),
        Command::Moves { input, script } => moves(cli, input, script),
        Command::CwTorsion { input } => cw(cli, input),
        Command::Compare { flow, cw: c, iota } => compare(cli, flow, c, iota),
        Command::Simulate { family, coeffs, lambda, start, window, grid, trace_csv, fits_csv, scan_csv } => simulate(
            cli,
            family,
            coeffs.as_deref(),
            *lambda,
            start,
            window,
            grid,
            [trace_csv, fits_csv, scan_csv],
        ),
        Command::Selftest { seed, moves, cases } => selftest(cli, *seed, *moves, *cases),
    }
}

/// Run with `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
