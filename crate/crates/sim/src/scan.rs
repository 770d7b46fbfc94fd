//! Closed-form critical points along a lambda grid.

use num_traits::Float;

use crate::family::{c, Affine, PlanarFamily};
use crate::fit::{power_fit, LineFit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint<T> {
    pub x: T,
    pub y: T,
    /// Hessian eigenvalues `(d2H/dx2, d2H/dy2)`.
    pub eigenvalues: (T, T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow<T> {
    pub lambda: T,
    /// Sorted by `y`.
    pub points: Vec<CriticalPoint<T>>,
}

impl<T: Float> ScanRow<T> {
    /// `|y1 - y2|` for the pair of critical points, when there are two.
    pub fn separation(&self) -> Option<T> {
        match self.points.as_slice() {
            [p, q] => Some((q.y - p.y).abs()),
            _ => None,
        }
    }

    /// Smallest `|eigenvalue|` among the pair.
    pub fn small_eigenvalue(&self) -> Option<T> {
        match self.points.as_slice() {
            [p, q] => Some(p.eigenvalues.1.abs().min(q.eigenvalues.1.abs())),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalScan<T> {
    pub rows: Vec<ScanRow<T>>,
    /// Parameters where two critical points merge, ascending.
    pub lambda0: Vec<T>,
    /// Merge point used for the fits (closest to the grid).
    pub reference: Option<T>,
    /// `log|separation|` against `log|lambda - lambda0|`.
    pub separation_fit: Option<LineFit<T>>,
    pub eigenvalue_fit: Option<LineFit<T>>,
}

/// Real roots of `a z^2 + b z + c`, ascending, with a double root reported
/// once. `None` when the polynomial vanishes identically.
pub fn quadratic_roots<T: Float>(a: T, b: T, cc: T) -> Option<Vec<T>> {
    let zero = T::zero();
    if a == zero {
        if b == zero {
            return if cc == zero { None } else { Some(Vec::new()) };
        }
        return Some(vec![-cc / b]);
    }
    let disc = b * b - c::<T>(4.0) * a * cc;
    if disc < zero {
        return Some(Vec::new());
    }
    if disc == zero {
        return Some(vec![-b / (c::<T>(2.0) * a)]);
    }
    // avoids cancellation in the smaller root
    let sq = disc.sqrt();
    let q = if b >= zero { -(b + sq) / c::<T>(2.0) } else { -(b - sq) / c::<T>(2.0) };
    let (r1, r2) = if q == zero { (zero, -b / a) } else { (q / a, cc / q) };
    Some(if r1 <= r2 { vec![r1, r2] } else { vec![r2, r1] })
}

pub fn critical_points<T: Float>(family: &PlanarFamily<T>, lambda: T) -> Vec<CriticalPoint<T>> {
    let (a, b, cc) = family.derivative_quadratic();
    let ys = quadratic_roots(a.at(lambda), b.at(lambda), cc.at(lambda)).unwrap_or_default();
    ys.into_iter()
        .map(|y| y + T::zero())
        .map(|y| CriticalPoint { x: T::zero(), y, eigenvalues: family.hessian(lambda, T::zero(), y) })
        .collect()
}

/// Parameters where `dp/dy` has a double root: zeros of its discriminant,
/// which is quadratic in lambda.
pub fn merge_parameters<T: Float>(family: &PlanarFamily<T>) -> Vec<T> {
    let (a, b, cc) = family.derivative_quadratic();
    let four = c::<T>(4.0);
    // (b0 + b1 l)^2 - 4 (a0 + a1 l)(c0 + c1 l)
    let d2 = b.slope * b.slope - four * a.slope * cc.slope;
    let d1 = c::<T>(2.0) * b.base * b.slope - four * (a.base * cc.slope + a.slope * cc.base);
    let d0 = b.base * b.base - four * a.base * cc.base;
    let roots = quadratic_roots(d2, d1, d0).unwrap_or_default();
    // + 0 turns a -0 root into 0
    roots.into_iter().filter(|&l| !degenerate_leading(&a, l)).map(|l| l + T::zero()).collect()
}

fn degenerate_leading<T: Float>(a: &Affine<T>, lambda: T) -> bool {
    a.at(lambda) == T::zero()
}

pub fn critical_scan<T: Float>(family: &PlanarFamily<T>, grid: &[T]) -> CriticalScan<T> {
    let rows: Vec<ScanRow<T>> = grid
        .iter()
        .map(|&lambda| ScanRow { lambda, points: critical_points(family, lambda) })
        .collect();
    let lambda0 = merge_parameters(family);
    let reference = nearest_to_grid(&lambda0, grid);
    let (separation_fit, eigenvalue_fit) = match reference {
        Some(l0) => {
            let sep: Vec<(T, T)> =
                rows.iter().filter_map(|r| r.separation().map(|d| ((r.lambda - l0).abs(), d))).collect();
            let eig: Vec<(T, T)> =
                rows.iter().filter_map(|r| r.small_eigenvalue().map(|e| ((r.lambda - l0).abs(), e))).collect();
            (power_fit(&sep), power_fit(&eig))
        }
        None => (None, None),
    };
    CriticalScan { rows, lambda0, reference, separation_fit, eigenvalue_fit }
}

fn nearest_to_grid<T: Float>(candidates: &[T], grid: &[T]) -> Option<T> {
    let dist = |l: T| grid.iter().fold(T::infinity(), |m, &g| m.min((g - l).abs()));
    candidates.iter().copied().fold(None, |best: Option<T>, l| match best {
        Some(b) if dist(b) <= dist(l) => Some(b),
        _ => Some(l),
    })
}

/// `n` points geometrically spaced between `from` and `to` (same sign).
pub fn geometric_grid<T: Float>(from: T, to: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![from];
    }
    let sign = if from < T::zero() { -T::one() } else { T::one() };
    let (lo, hi) = (from.abs().ln(), to.abs().ln());
    let steps = T::from(n - 1).unwrap();
    (0..n)
        .map(|i| sign * (lo + (hi - lo) * T::from(i).unwrap() / steps).exp())
        .collect()
}
