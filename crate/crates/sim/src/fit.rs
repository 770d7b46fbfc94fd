//! Least-squares fits in log-log and semi-log coordinates.

use num_traits::Float;

use crate::family::c;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination.
    pub r2: T,
    pub n: usize,
}

/// Ordinary least squares of `v` on `u`. Needs two distinct abscissae.
pub fn line_fit<T: Float>(points: &[(T, T)]) -> Option<LineFit<T>> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = T::from(n).unwrap();
    let mu = points.iter().fold(T::zero(), |a, p| a + p.0) / nf;
    let mv = points.iter().fold(T::zero(), |a, p| a + p.1) / nf;
    let (mut suu, mut suv, mut svv) = (T::zero(), T::zero(), T::zero());
    for &(u, v) in points {
        suu = suu + (u - mu) * (u - mu);
        suv = suv + (u - mu) * (v - mv);
        svv = svv + (v - mv) * (v - mv);
    }
    if suu <= T::zero() {
        return None;
    }
    let slope = suv / suu;
    let intercept = mv - slope * mu;
    let ss_res = points.iter().fold(T::zero(), |a, &(u, v)| {
        let r = v - (intercept + slope * u);
        a + r * r
    });
    let r2 = if svv > T::zero() { T::one() - ss_res / svv } else { T::one() };
    Some(LineFit { slope, intercept, r2, n })
}

/// Fit of `log|v|` against `log s`; the slope is the power-law exponent.
pub fn power_fit<T: Float>(samples: &[(T, T)]) -> Option<LineFit<T>> {
    let pts: Vec<(T, T)> = samples
        .iter()
        .filter(|(s, v)| *s > T::zero() && v.abs() > T::min_positive_value())
        .map(|&(s, v)| (s.ln(), v.abs().ln()))
        .collect();
    line_fit(&pts)
}

/// Fit of `log|v|` against `s`; minus the slope is the exponential rate.
pub fn exponential_fit<T: Float>(samples: &[(T, T)]) -> Option<LineFit<T>> {
    let pts: Vec<(T, T)> = samples
        .iter()
        .filter(|(_, v)| v.abs() > T::min_positive_value())
        .map(|&(s, v)| (s, v.abs().ln()))
        .collect();
    line_fit(&pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayKind {
    /// `|v| ~ C s^k`; the log-log plot is a line.
    Power,
    /// `|v| ~ C e^{-r s}`; the log-log plot bends, the semi-log one does not.
    Exponential,
    /// Neither plot is straight enough.
    Undetermined,
    /// Too few nonzero samples to fit.
    Degenerate,
}

impl DecayKind {
    pub fn label(self) -> &'static str {
        match self {
            DecayKind::Power => "power",
            DecayKind::Exponential => "exponential",
            DecayKind::Undetermined => "undetermined",
            DecayKind::Degenerate => "degenerate",
        }
    }
}

/// Minimum `r^2` for a plot to count as a straight line.
pub const LINEARITY_THRESHOLD: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit<T> {
    pub kind: DecayKind,
    pub power: Option<LineFit<T>>,
    pub exponential: Option<LineFit<T>>,
}

impl<T: Float> DecayFit<T> {
    /// The power-law exponent, only when the linearity test accepted it.
    pub fn exponent(&self) -> Option<T> {
        match self.kind {
            DecayKind::Power => self.power.map(|f| f.slope),
            _ => None,
        }
    }

    pub fn rate(&self) -> Option<T> {
        match self.kind {
            DecayKind::Exponential => self.exponential.map(|f| -f.slope),
            _ => None,
        }
    }
}

/// Classify the decay of `samples = (s, v)` by which coordinates make it
/// linear.
pub fn classify_decay<T: Float>(samples: &[(T, T)]) -> DecayFit<T> {
    let power = power_fit(samples);
    let exponential = exponential_fit(samples);
    let threshold = c::<T>(LINEARITY_THRESHOLD);
    let usable = power.map_or(0, |f| f.n);
    let kind = if usable < 3 {
        DecayKind::Degenerate
    } else {
        let pr = power.map_or(T::neg_infinity(), |f| f.r2);
        let er = exponential.map_or(T::neg_infinity(), |f| f.r2);
        if pr >= threshold && pr >= er {
            DecayKind::Power
        } else if er >= threshold {
            DecayKind::Exponential
        } else {
            DecayKind::Undetermined
        }
    };
    DecayFit { kind, power, exponential }
}
