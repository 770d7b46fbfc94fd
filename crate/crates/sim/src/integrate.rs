//! RK4 integration of the negative gradient flow with step halving.

use num_traits::Float;

use crate::error::{SimError, SimResult};
use crate::family::{c, to_f64, PlanarFamily};
use crate::fit::{classify_decay, DecayFit};
use crate::scan::{critical_points, geometric_grid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample<T> {
    pub s: T,
    pub x: T,
    pub y: T,
    pub dx: T,
    pub dy: T,
    pub ddx: T,
    pub ddy: T,
    pub energy: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace<T> {
    pub samples: Vec<Sample<T>>,
    /// Largest step used by the accepted run.
    pub step: T,
    pub tolerance: T,
    pub halvings: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions<T> {
    pub initial_step: T,
    /// Two successive refinements must agree to this, at every sample.
    pub tolerance: T,
    pub max_halvings: u32,
    pub samples_per_decade: usize,
    /// `|x| + |y|` beyond this counts as divergence.
    pub escape: T,
}

impl<T: Float> Default for IntegrateOptions<T> {
    fn default() -> Self {
        IntegrateOptions {
            initial_step: c(0.25),
            tolerance: c(1e-9),
            max_halvings: 14,
            samples_per_decade: 50,
            escape: c(1e8),
        }
    }
}

fn field<T: Float>(f: &PlanarFamily<T>, lambda: T, x: T, y: T) -> (T, T) {
    let (gx, gy) = f.gradient(lambda, x, y);
    (-gx, -gy)
}

fn rk4_step<T: Float>(f: &PlanarFamily<T>, lambda: T, x: T, y: T, h: T) -> (T, T) {
    let two = c::<T>(2.0);
    let half = c::<T>(0.5);
    let (k1x, k1y) = field(f, lambda, x, y);
    let (k2x, k2y) = field(f, lambda, x + half * h * k1x, y + half * h * k1y);
    let (k3x, k3y) = field(f, lambda, x + half * h * k2x, y + half * h * k2y);
    let (k4x, k4y) = field(f, lambda, x + h * k3x, y + h * k3y);
    let sixth = h / c::<T>(6.0);
    (
        x + sixth * (k1x + two * k2x + two * k3x + k4x),
        y + sixth * (k1y + two * k2y + two * k3y + k4y),
    )
}

fn sample<T: Float>(f: &PlanarFamily<T>, lambda: T, s: T, x: T, y: T) -> Sample<T> {
    let (dx, dy) = field(f, lambda, x, y);
    let (hxx, hyy) = f.hessian(lambda, x, y);
    Sample { s, x, y, dx, dy, ddx: -hxx * dx, ddy: -hyy * dy, energy: f.energy(lambda, x, y) }
}

/// Sample times: 0, then geometric from `first` to `end`.
pub fn sample_times<T: Float>(first: T, end: T, per_decade: usize) -> Vec<T> {
    let decades = to_f64((end / first).log10()).max(0.0);
    let n = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    let mut times = vec![T::zero()];
    times.extend(geometric_grid(first, end, n));
    times
}

fn run<T: Float>(
    f: &PlanarFamily<T>,
    lambda: T,
    start: (T, T),
    times: &[T],
    h: T,
    escape: T,
) -> SimResult<Vec<Sample<T>>> {
    let (mut x, mut y) = start;
    let mut out = Vec::with_capacity(times.len());
    let mut s = times[0];
    out.push(sample(f, lambda, s, x, y));
    for &target in &times[1..] {
        let span = target - s;
        let n = (span / h).ceil().max(T::one());
        let sub = span / n;
        let steps = n.to_usize().unwrap_or(usize::MAX);
        for _ in 0..steps {
            let (nx, ny) = rk4_step(f, lambda, x, y, sub);
            x = nx;
            y = ny;
            if !x.is_finite() || !y.is_finite() || x.abs() + y.abs() > escape {
                return Err(SimError::Divergence { s: to_f64(s), x: to_f64(x), y: to_f64(y) });
            }
        }
        s = target;
        out.push(sample(f, lambda, s, x, y));
    }
    Ok(out)
}

fn max_difference<T: Float>(a: &[Sample<T>], b: &[Sample<T>]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (p, q)| m.max((p.x - q.x).abs()).max((p.y - q.y).abs()))
}

/// Integrate `(x', y') = -grad H` from `s = 0`, sampling on [`sample_times`].
/// The step is halved until two successive runs agree to the tolerance.
pub fn integrate<T: Float>(
    family: &PlanarFamily<T>,
    lambda: T,
    start: (T, T),
    times: &[T],
    opts: &IntegrateOptions<T>,
) -> SimResult<FlowTrace<T>> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SimError::Input("sample times must be increasing".into()));
    }
    if !(opts.initial_step > T::zero()) {
        return Err(SimError::Input("step must be positive".into()));
    }
    let mut h = opts.initial_step;
    let mut prev = run(family, lambda, start, times, h, opts.escape)?;
    let mut diff = T::infinity();
    for k in 1..=opts.max_halvings {
        h = h / c::<T>(2.0);
        let next = run(family, lambda, start, times, h, opts.escape)?;
        diff = max_difference(&prev, &next);
        prev = next;
        if diff <= opts.tolerance {
            return Ok(FlowTrace { samples: prev, step: h, tolerance: opts.tolerance, halvings: k });
        }
    }
    Err(SimError::Refinement { halvings: opts.max_halvings, difference: to_f64(diff) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport<T> {
    pub trace: FlowTrace<T>,
    /// Critical point the trace approaches.
    pub limit: (T, T),
    pub window: (T, T),
    pub x: DecayFit<T>,
    /// `|y - y*|`.
    pub y: DecayFit<T>,
    pub dy: DecayFit<T>,
    pub ddy: DecayFit<T>,
}

/// Integrate up to `window.1` and fit decay laws on samples with
/// `s` in `window`.
pub fn integrate_and_fit<T: Float>(
    family: &PlanarFamily<T>,
    lambda: T,
    start: (T, T),
    window: (T, T),
    opts: &IntegrateOptions<T>,
) -> SimResult<FitReport<T>> {
    let (lo, hi) = window;
    if !(lo > T::zero() && hi > lo) {
        return Err(SimError::Input("fit window must satisfy 0 < lo < hi".into()));
    }
    let times = sample_times(lo / c::<T>(100.0), hi, opts.samples_per_decade);
    let trace = integrate(family, lambda, start, &times, opts)?;
    let last = trace.samples.last().expect("nonempty trace");
    let limit = critical_points(family, lambda)
        .into_iter()
        .map(|p| (p.x, p.y))
        .fold(None, |best: Option<(T, T)>, p| match best {
            Some(b) if (b.1 - last.y).abs() <= (p.1 - last.y).abs() => Some(b),
            _ => Some(p),
        })
        .unwrap_or((T::zero(), last.y));
    let tol = c::<T>(1e-12);
    let in_window: Vec<&Sample<T>> =
        trace.samples.iter().filter(|p| p.s >= lo * (T::one() - tol) && p.s <= hi * (T::one() + tol)).collect();
    let series = |g: &dyn Fn(&Sample<T>) -> T| -> Vec<(T, T)> { in_window.iter().map(|p| (p.s, g(p))).collect() };
    let x = classify_decay(&series(&|p| p.x - limit.0));
    let y = classify_decay(&series(&|p| p.y - limit.1));
    let dy = classify_decay(&series(&|p| p.dy));
    let ddy = classify_decay(&series(&|p| p.ddy));
    Ok(FitReport { trace, limit, window, x, y, dy, ddy })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyCheck<T> {
    /// Every step decreased `H`, or stayed within rounding of it.
    pub decreasing: bool,
    /// Steps with a strict decrease.
    pub strict_steps: usize,
    /// Steps where `H` did not move beyond rounding.
    pub flat_steps: usize,
    pub worst_increase: T,
}

/// `H` along the trace: strictly decreasing until the change drops below
/// the rounding floor of `H` itself.
pub fn energy_check<T: Float>(trace: &FlowTrace<T>) -> EnergyCheck<T> {
    let floor = c::<T>(8.0) * T::epsilon();
    let mut out = EnergyCheck { decreasing: true, strict_steps: 0, flat_steps: 0, worst_increase: T::zero() };
    for w in trace.samples.windows(2) {
        let (e0, e1) = (w[0].energy, w[1].energy);
        let noise = floor * e0.abs().max(e1.abs());
        if e1 < e0 - noise {
            out.strict_steps += 1;
        } else if (e1 - e0).abs() <= noise {
            out.flat_steps += 1;
        } else {
            out.decreasing = false;
        }
        out.worst_increase = out.worst_increase.max(e1 - e0);
    }
    out
}
