//! One-parameter families `H_lambda(x, y) = a x^2 + p_lambda(y)` with `p`
//! a cubic whose coefficients are affine in `lambda`.

use num_traits::Float;

use crate::error::{SimError, SimResult};

pub(crate) fn c<T: Float>(v: f64) -> T {
    T::from(v).expect("representable constant")
}

pub(crate) fn to_f64<T: Float>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Coefficient `base + slope * lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine<T> {
    pub base: T,
    pub slope: T,
}

impl<T: Float> Affine<T> {
    pub fn new(base: T, slope: T) -> Self {
        Affine { base, slope }
    }

    pub fn constant(base: T) -> Self {
        Affine { base, slope: T::zero() }
    }

    pub fn at(&self, lambda: T) -> T {
        self.base + self.slope * lambda
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarFamily<T> {
    pub name: String,
    /// Coefficient of `x^2`; positive.
    pub a: T,
    /// Coefficients of `y^0 .. y^3`.
    pub p: [Affine<T>; 4],
}

impl<T: Float> PlanarFamily<T> {
    /// `x^2 + lambda y^2 + y^3`.
    pub fn degenerate() -> Self {
        let z = Affine::constant(T::zero());
        PlanarFamily {
            name: "degenerate".into(),
            a: T::one(),
            p: [z, z, Affine::new(T::zero(), T::one()), Affine::constant(T::one())],
        }
    }

    /// `x^2 + lambda y + y^3`; the lambda-derivative of the gradient is
    /// nonzero at the degenerate point.
    pub fn generic() -> Self {
        let z = Affine::constant(T::zero());
        PlanarFamily {
            name: "generic".into(),
            a: T::one(),
            p: [z, Affine::new(T::zero(), T::one()), z, Affine::constant(T::one())],
        }
    }

    pub fn custom(name: impl Into<String>, a: T, p: [Affine<T>; 4]) -> SimResult<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(SimError::Family("the x^2 coefficient must be positive and finite".into()));
        }
        if p.iter().any(|q| !q.base.is_finite() || !q.slope.is_finite()) {
            return Err(SimError::Family("coefficients must be finite".into()));
        }
        Ok(PlanarFamily { name: name.into(), a, p })
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "degenerate" | "paper" => Some(Self::degenerate()),
            "generic" => Some(Self::generic()),
            _ => None,
        }
    }

    fn coeffs(&self, lambda: T) -> [T; 4] {
        [self.p[0].at(lambda), self.p[1].at(lambda), self.p[2].at(lambda), self.p[3].at(lambda)]
    }

    pub fn energy(&self, lambda: T, x: T, y: T) -> T {
        let [p0, p1, p2, p3] = self.coeffs(lambda);
        self.a * x * x + p0 + y * (p1 + y * (p2 + y * p3))
    }

    /// `(dH/dx, dH/dy)`.
    pub fn gradient(&self, lambda: T, x: T, y: T) -> (T, T) {
        let [_, p1, p2, p3] = self.coeffs(lambda);
        let two = c::<T>(2.0);
        let three = c::<T>(3.0);
        (two * self.a * x, p1 + y * (two * p2 + three * p3 * y))
    }

    /// Diagonal of the Hessian; the mixed term vanishes for this form.
    pub fn hessian(&self, lambda: T, _x: T, y: T) -> (T, T) {
        let [_, _, p2, p3] = self.coeffs(lambda);
        (c::<T>(2.0) * self.a, c::<T>(2.0) * p2 + c::<T>(6.0) * p3 * y)
    }

    /// `dp/dy = A y^2 + B y + C` as affine coefficients `(A, B, C)`.
    pub(crate) fn derivative_quadratic(&self) -> (Affine<T>, Affine<T>, Affine<T>) {
        let three = c::<T>(3.0);
        let two = c::<T>(2.0);
        let [_, p1, p2, p3] = self.p;
        (
            Affine::new(three * p3.base, three * p3.slope),
            Affine::new(two * p2.base, two * p2.slope),
            p1,
        )
    }
}
