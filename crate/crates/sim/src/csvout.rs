//! CSV tables for traces, fits and scans.

use std::io::Write;

use num_traits::Float;

use crate::error::SimResult;
use crate::family::to_f64;
use crate::fit::{DecayFit, LineFit};
use crate::integrate::{FitReport, FlowTrace};
use crate::scan::CriticalScan;

fn num<T: Float>(v: T) -> String {
    format!("{:e}", to_f64(v))
}

fn opt<T: Float>(v: Option<T>) -> String {
    v.map(num).unwrap_or_default()
}

/// Columns: `s,x,y,dx,dy,ddx,ddy,energy`.
pub fn write_trace<T: Float, W: Write>(out: W, trace: &FlowTrace<T>) -> SimResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "x", "y", "dx", "dy", "ddx", "ddy", "energy"])?;
    for p in &trace.samples {
        w.write_record([p.s, p.x, p.y, p.dx, p.dy, p.ddx, p.ddy, p.energy].map(num))?;
    }
    w.flush()?;
    Ok(())
}

fn fit_row<T: Float>(quantity: &str, f: &DecayFit<T>) -> [String; 7] {
    let p: Option<LineFit<T>> = f.power;
    let e: Option<LineFit<T>> = f.exponential;
    [
        quantity.to_string(),
        f.kind.label().to_string(),
        opt(p.map(|l| l.slope)),
        opt(p.map(|l| l.r2)),
        opt(e.map(|l| -l.slope)),
        opt(e.map(|l| l.r2)),
        p.map_or(0, |l| l.n).to_string(),
    ]
}

/// Columns: `quantity,kind,exponent,loglog_r2,rate,semilog_r2,samples`.
pub fn write_fits<T: Float, W: Write>(out: W, report: &FitReport<T>) -> SimResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quantity", "kind", "exponent", "loglog_r2", "rate", "semilog_r2", "samples"])?;
    for (name, f) in [("x", &report.x), ("y", &report.y), ("dy", &report.dy), ("ddy", &report.ddy)] {
        w.write_record(fit_row(name, f))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns: `lambda,count,y_low,y_high,eig_low,eig_high,separation,small_eigenvalue`.
pub fn write_scan<T: Float, W: Write>(out: W, scan: &CriticalScan<T>) -> SimResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "count", "y_low", "y_high", "eig_low", "eig_high", "separation", "small_eigenvalue"])?;
    for r in &scan.rows {
        let y = |i: usize| opt(r.points.get(i).map(|p| p.y));
        let e = |i: usize| opt(r.points.get(i).map(|p| p.eigenvalues.1));
        w.write_record([
            num(r.lambda),
            r.points.len().to_string(),
            y(0),
            y(r.points.len().max(1) - 1),
            e(0),
            e(r.points.len().max(1) - 1),
            opt(r.separation()),
            opt(r.small_eigenvalue()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
