//! Scalar layer: weights, cutoffs and the coefficient-ring abstraction that
//! the series, matrix and torsion code is generic over.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Values of weight homomorphisms. Weights of the monomials that survive a
/// truncation are bounded by the cutoff, so machine-sized rationals suffice.
pub type Weight = Rational64;

/// Precision bound of a truncated series: every term of weight `<= cutoff`
/// is known exactly, nothing is known above it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Cutoff {
    Finite(Weight),
    Infinite,
}

impl Cutoff {
    pub fn finite(w: impl Into<Weight>) -> Self {
        Cutoff::Finite(w.into())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cutoff::Infinite)
    }

    pub fn value(&self) -> Option<Weight> {
        match self {
            Cutoff::Finite(w) => Some(*w),
            Cutoff::Infinite => None,
        }
    }

    /// Shift by a weight; infinity absorbs.
    pub fn shift(self, by: Weight) -> Self {
        match self {
            Cutoff::Finite(w) => Cutoff::Finite(w + by),
            Cutoff::Infinite => Cutoff::Infinite,
        }
    }

    /// `self + other` with infinity absorbing.
    pub fn plus(self, other: Cutoff) -> Self {
        match (self, other) {
            (Cutoff::Finite(a), Cutoff::Finite(b)) => Cutoff::Finite(a + b),
            _ => Cutoff::Infinite,
        }
    }

    pub fn admits(&self, w: &Weight) -> bool {
        match self {
            Cutoff::Finite(c) => w <= c,
            Cutoff::Infinite => true,
        }
    }
}

impl PartialOrd for Cutoff {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cutoff {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cutoff::Finite(a), Cutoff::Finite(b)) => a.cmp(b),
            (Cutoff::Finite(_), Cutoff::Infinite) => Ordering::Less,
            (Cutoff::Infinite, Cutoff::Finite(_)) => Ordering::Greater,
            (Cutoff::Infinite, Cutoff::Infinite) => Ordering::Equal,
        }
    }
}

impl From<Weight> for Cutoff {
    fn from(w: Weight) -> Self {
        Cutoff::Finite(w)
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Finite(w) => write!(f, "{w}"),
            Cutoff::Infinite => write!(f, "inf"),
        }
    }
}

/// Parse `p/q`, `p` or `inf`.
pub fn parse_weight(s: &str) -> Option<Weight> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                None
            } else {
                Some(Weight::new(p, q))
            }
        }
        None => s.parse::<i64>().ok().map(Weight::from_integer),
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if Zero::is_zero(&q) {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Which coefficient ring a series lives over, for diagnostics and rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingTag {
    Int,
    Rat,
    /// A character component: cyclotomic order and Laurent rank.
    Field { order: u32, laurent_rank: usize },
}

impl fmt::Display for RingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingTag::Int => write!(f, "Z"),
            RingTag::Rat => write!(f, "Q"),
            RingTag::Field { order, laurent_rank } => {
                write!(f, "Q(zeta_{order})(x1..x{laurent_rank})")
            }
        }
    }
}

/// Commutative coefficient ring of a Novikov series.
///
/// The context carries whatever is needed to build constants (for field
/// components: the cyclotomic order and the number of Laurent variables).
pub trait Coefficient: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    type Context: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero_in(ctx: &Self::Context) -> Self;
    fn one_in(ctx: &Self::Context) -> Self;
    fn vanishes(&self) -> bool;

    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn tag(ctx: &Self::Context) -> RingTag;

    fn is_unity(&self) -> bool;

    /// Multiplicative inverse, if the element is a unit of the ring.
    fn inverse(&self) -> Option<Self>;

    fn from_integer(ctx: &Self::Context, n: &BigInt) -> Self;

    /// `None` when the ring does not contain `q` (e.g. 1/2 over Z).
    fn from_rational(ctx: &Self::Context, q: &BigRational) -> Option<Self>;

    /// `Some(+1 | -1)` when the element is exactly plus or minus one.
    fn sign_unit(&self) -> Option<i8> {
        if self.is_unity() {
            Some(1)
        } else if self.negated().is_unity() {
            Some(-1)
        } else {
            None
        }
    }

    /// Whether the canonical rendering needs parentheses in a product.
    fn is_compound(&self) -> bool {
        false
    }
}

impl Coefficient for BigInt {
    type Context = ();

    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }

    fn zero_in(_: &()) -> Self {
        BigInt::zero()
    }
    fn one_in(_: &()) -> Self {
        BigInt::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn tag(_: &()) -> RingTag {
        RingTag::Int
    }
    fn is_unity(&self) -> bool {
        One::is_one(self)
    }
    fn inverse(&self) -> Option<Self> {
        if One::is_one(&self.abs()) {
            Some(self.clone())
        } else {
            None
        }
    }
    fn from_integer(_: &(), n: &BigInt) -> Self {
        n.clone()
    }
    fn from_rational(_: &(), q: &BigRational) -> Option<Self> {
        q.is_integer().then(|| q.to_integer())
    }
}

// Rational arithmetic with a machine-word fast path. `Ratio<BigInt>` runs a
// big-integer gcd on every operation, which dominated series products.
fn small(a: &BigRational) -> Option<(i128, i128)> {
    Some((a.numer().to_i64()?.into(), a.denom().to_i64()?.into()))
}

fn from_i128(n: i128, d: i128) -> BigRational {
    let g = n.gcd(&d);
    BigRational::new_raw(BigInt::from(n / g), BigInt::from(d / g))
}

pub(crate) fn qmul(a: &BigRational, b: &BigRational) -> BigRational {
    match (small(a), small(b)) {
        (Some((an, ad)), Some((bn, bd))) => from_i128(an * bn, ad * bd),
        _ => a * b,
    }
}

pub(crate) fn qadd(a: &BigRational, b: &BigRational) -> BigRational {
    if Zero::is_zero(a) {
        return b.clone();
    }
    if Zero::is_zero(b) {
        return a.clone();
    }
    match (small(a), small(b)) {
        (Some((an, ad)), Some((bn, bd))) if ad == bd => from_i128(an + bn, ad),
        (Some((an, ad)), Some((bn, bd))) => from_i128(an * bd + bn * ad, ad * bd),
        _ => a + b,
    }
}

pub(crate) fn qsub(a: &BigRational, b: &BigRational) -> BigRational {
    if Zero::is_zero(b) {
        return a.clone();
    }
    qadd(a, &-b)
}

impl Coefficient for BigRational {
    type Context = ();

    fn plus(&self, other: &Self) -> Self {
        qadd(self, other)
    }
    fn minus(&self, other: &Self) -> Self {
        qsub(self, other)
    }
    fn times(&self, other: &Self) -> Self {
        qmul(self, other)
    }
    fn negated(&self) -> Self {
        -self
    }

    fn zero_in(_: &()) -> Self {
        BigRational::zero()
    }
    fn one_in(_: &()) -> Self {
        BigRational::one()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn tag(_: &()) -> RingTag {
        RingTag::Rat
    }
    fn is_unity(&self) -> bool {
        One::is_one(self)
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_integer(_: &(), n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }
    fn from_rational(_: &(), q: &BigRational) -> Option<Self> {
        Some(q.clone())
    }
}
