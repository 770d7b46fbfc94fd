//! Laurent polynomials in `n` variables over `Q(zeta_m)`, and the fraction
//! field elements built from them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cyclotomic::Cyclo;
use crate::scalar::{Coefficient, RingTag};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Laurent {
    m: u32,
    nvars: usize,
    /// exponent vector -> nonzero coefficient; lexicographic order
    terms: BTreeMap<Vec<i64>, Cyclo>,
}

impl Laurent {
    pub fn zero(m: u32, nvars: usize) -> Self {
        Laurent { m, nvars, terms: BTreeMap::new() }
    }

    pub fn monomial(nvars: usize, exps: Vec<i64>, c: Cyclo) -> Self {
        debug_assert_eq!(exps.len(), nvars);
        let m = c.order();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Laurent { m, nvars, terms }
    }

    pub fn constant(nvars: usize, c: Cyclo) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Cyclo)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient when the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Cyclo> {
        match self.terms.len() {
            0 => Some(Cyclo::zero(self.m)),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Vec<i64>, &Cyclo)> {
        (self.terms.len() == 1).then(|| self.terms.iter().next()).flatten()
    }

    /// Lexicographically largest term.
    pub fn leading(&self) -> Option<(&Vec<i64>, &Cyclo)> {
        self.terms.iter().next_back()
    }

    fn insert_add(terms: &mut BTreeMap<Vec<i64>, Cyclo>, e: Vec<i64>, c: Cyclo) {
        use std::collections::btree_map::Entry;
        match terms.entry(e) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            Self::insert_add(&mut terms, e.clone(), c.clone());
        }
        Laurent { m: self.m, nvars: self.nvars, terms }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            Self::insert_add(&mut terms, e.clone(), c.neg());
        }
        Laurent { m: self.m, nvars: self.nvars, terms }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, k: &Cyclo) -> Self {
        if k.is_zero() {
            return Self::zero(self.m, self.nvars);
        }
        self.map(|c| c.mul(k))
    }

    fn map(&self, f: impl Fn(&Cyclo) -> Cyclo) -> Self {
        Laurent { m: self.m, nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                Self::insert_add(&mut terms, e, ca.mul(cb));
            }
        }
        Laurent { m: self.m, nvars: self.nvars, terms }
    }

    /// Multiply by `x^e`.
    pub fn shift(&self, e: &[i64]) -> Self {
        Laurent {
            m: self.m,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Componentwise minimum exponent (zeros for the zero polynomial).
    pub fn min_exponents(&self) -> Vec<i64> {
        let mut out: Option<Vec<i64>> = None;
        for e in self.terms.keys() {
            out = Some(match out {
                None => e.clone(),
                Some(m) => m.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        out.unwrap_or_else(|| vec![0; self.nvars])
    }

    /// Shift so that every variable appears with minimal exponent zero;
    /// returns the shifted polynomial and the exponent removed.
    pub fn strip_monomial(&self) -> (Self, Vec<i64>) {
        let e = self.min_exponents();
        let neg: Vec<i64> = e.iter().map(|x| -x).collect();
        (self.shift(&neg), e)
    }

    /// `self / d` when `d` divides `self` in the Laurent ring.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        let (a, ea) = self.strip_monomial();
        let (b, eb) = d.strip_monomial();
        let (lb_e, lb_c) = b.leading()?;
        let lb_inv = lb_c.inverse()?;
        let mut r = a;
        let mut q = Self::zero(self.m, self.nvars);
        while let Some((le, lc)) = r.leading() {
            let e: Vec<i64> = le.iter().zip(lb_e).map(|(x, y)| x - y).collect();
            if e.iter().any(|&x| x < 0) {
                return None;
            }
            let t = Self::monomial(self.nvars, e, lc.mul(&lb_inv));
            r = r.sub(&t.mul(&b));
            q = q.add(&t);
        }
        let shift: Vec<i64> = ea.iter().zip(&eb).map(|(x, y)| x - y).collect();
        Some(q.shift(&shift))
    }

    /// Image under `zeta -> zeta^u`.
    pub fn galois(&self, u: i64) -> Self {
        self.map(|c| c.galois(u))
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(j, &x)| if x == 1 { format!("x{}", j + 1) } else { format!("x{}^{x}", j + 1) })
                .collect();
            let plain = c.as_rational().is_some();
            match (mono.is_empty(), plain) {
                (true, _) => write!(f, "{c}")?,
                (false, true) => write!(f, "{c}*{}", mono.join("*"))?,
                (false, false) => write!(f, "({c})*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

/// Which field a [`FieldElement`] lives in: `Q(zeta_order)(x1, .., x_rank)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldCtx {
    pub order: u32,
    pub laurent_rank: usize,
}

/// Fraction `num / den` of Laurent polynomials.
///
/// Normal form: `den` has no monomial factor and leading coefficient 1, and
/// the fraction is cancelled whenever one side divides the other. No gcds
/// are taken (they swell badly over `Q(zeta)`), so the form is not unique;
/// equality is by cross-multiplication.
#[derive(Clone, Debug)]
pub struct FieldElement {
    ctx: FieldCtx,
    num: Laurent,
    den: Laurent,
}

impl FieldElement {
    pub fn new(num: Laurent, den: Laurent) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        let ctx = FieldCtx { order: num.order(), laurent_rank: num.nvars() };
        Some(Self::normalized(ctx, num, den))
    }

    pub fn from_laurent(num: Laurent) -> Self {
        let ctx = FieldCtx { order: num.order(), laurent_rank: num.nvars() };
        let den = Laurent::constant(ctx.laurent_rank, Cyclo::one(ctx.order));
        FieldElement { ctx, num, den }
    }

    pub fn from_cyclo(ctx: &FieldCtx, c: Cyclo) -> Self {
        Self::from_laurent(Laurent::constant(ctx.laurent_rank, c))
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn numerator(&self) -> &Laurent {
        &self.num
    }

    pub fn denominator(&self) -> &Laurent {
        &self.den
    }

    /// The value as a Laurent polynomial, when the denominator is constant.
    pub fn as_laurent(&self) -> Option<Laurent> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.inverse()?))
    }

    fn normalized(ctx: FieldCtx, mut num: Laurent, mut den: Laurent) -> Self {
        let n = ctx.laurent_rank;
        let one = || Laurent::constant(n, Cyclo::one(ctx.order));
        if num.is_zero() {
            return FieldElement { ctx, num, den: one() };
        }
        if let Some(c) = den.as_constant() {
            if c.is_one() {
                return FieldElement { ctx, num, den };
            }
            let inv = c.inverse().expect("nonzero denominator");
            return FieldElement { ctx, num: num.scale(&inv), den: one() };
        }
        let (d, e) = den.strip_monomial();
        den = d;
        num = num.shift(&e.iter().map(|x| -x).collect::<Vec<_>>());
        if let Some(q) = num.div_exact(&den) {
            return FieldElement { ctx, num: q, den: one() };
        }
        if let Some(q) = den.div_exact(&num) {
            let (d, e) = q.strip_monomial();
            num = one().shift(&e.iter().map(|x| -x).collect::<Vec<_>>());
            den = d;
        }
        let inv = den.leading().expect("nonzero").1.inverse().expect("nonzero");
        FieldElement { ctx, num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn galois(&self, u: i64) -> Self {
        FieldElement { ctx: self.ctx, num: self.num.galois(u), den: self.den.galois(u) }
    }

    /// Multiply by `x^e`.
    pub fn shift(&self, e: &[i64]) -> Self {
        FieldElement { ctx: self.ctx, num: self.num.shift(e), den: self.den.clone() }
    }

    /// `Some((c, e))` when the value is `c * x^e` for a constant `c`.
    pub fn as_monomial(&self) -> Option<(Cyclo, Vec<i64>)> {
        let l = self.as_laurent()?;
        let (e, c) = l.single_term()?;
        Some((c.clone(), e.clone()))
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, o: &Self) -> bool {
        self.ctx == o.ctx && self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.den.as_constant() {
            Some(c) if c.is_one() => write!(f, "{}", self.num),
            _ => write!(f, "({})/({})", self.num, self.den),
        }
    }
}

impl Coefficient for FieldElement {
    type Context = FieldCtx;

    fn zero_in(ctx: &FieldCtx) -> Self {
        Self::from_laurent(Laurent::zero(ctx.order, ctx.laurent_rank))
    }

    fn one_in(ctx: &FieldCtx) -> Self {
        Self::from_cyclo(ctx, Cyclo::one(ctx.order))
    }

    fn vanishes(&self) -> bool {
        self.num.is_zero()
    }

    fn plus(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::normalized(self.ctx, self.num.add(&o.num), self.den.clone());
        }
        // denominators are often powers of one polynomial
        if let Some(q) = o.den.div_exact(&self.den) {
            return Self::normalized(self.ctx, self.num.mul(&q).add(&o.num), o.den.clone());
        }
        if let Some(q) = self.den.div_exact(&o.den) {
            return Self::normalized(self.ctx, o.num.mul(&q).add(&self.num), self.den.clone());
        }
        Self::normalized(self.ctx, self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }

    fn times(&self, o: &Self) -> Self {
        if self.num.is_zero() || o.num.is_zero() {
            return Self::zero_in(&self.ctx);
        }
        Self::normalized(self.ctx, self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn negated(&self) -> Self {
        FieldElement { ctx: self.ctx, num: self.num.neg(), den: self.den.clone() }
    }

    fn tag(ctx: &FieldCtx) -> RingTag {
        RingTag::Field { order: ctx.order, laurent_rank: ctx.laurent_rank }
    }

    fn is_unity(&self) -> bool {
        self.num == self.den
    }

    fn inverse(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(Self::normalized(self.ctx, self.den.clone(), self.num.clone()))
    }

    fn from_integer(ctx: &FieldCtx, n: &BigInt) -> Self {
        Self::from_cyclo(ctx, Cyclo::from_rational(ctx.order, BigRational::from_integer(n.clone())))
    }

    fn from_rational(ctx: &FieldCtx, q: &BigRational) -> Option<Self> {
        Some(Self::from_cyclo(ctx, Cyclo::from_rational(ctx.order, q.clone())))
    }

    fn is_compound(&self) -> bool {
        match (self.num.single_term(), self.den.as_constant()) {
            (None, _) | (_, None) => !self.num.is_zero(),
            (Some((e, c)), Some(_)) => e.iter().any(|&x| x != 0) || c.as_rational().is_none(),
        }
    }
}

/// Rings whose elements embed in `Q`, so they can be pushed into a field
/// component.
pub trait RationalCoefficient: Coefficient {
    fn to_rational(&self) -> BigRational;
}

impl RationalCoefficient for BigInt {
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }
}

impl RationalCoefficient for BigRational {
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn x(m: u32, k: i64) -> Laurent {
        Laurent::monomial(1, vec![k], Cyclo::one(m))
    }

    fn c(m: u32, n: i64) -> Laurent {
        Laurent::constant(1, Cyclo::from_rational(m, q(n)))
    }

    #[test]
    fn reduces_univariate_fractions() {
        // (x^2 - 1) / (x - 1) = x + 1
        let num = x(1, 2).sub(&c(1, 1));
        let den = x(1, 1).sub(&c(1, 1));
        let f = FieldElement::new(num, den).unwrap();
        assert_eq!(f.as_laurent().unwrap(), x(1, 1).add(&c(1, 1)));
        // x / x^3 = x^-2
        let g = FieldElement::new(x(1, 1), x(1, 3)).unwrap();
        assert_eq!(g.as_monomial(), Some((Cyclo::one(1), vec![-2])));
    }

    #[test]
    fn field_operations() {
        let ctx = FieldCtx { order: 4, laurent_rank: 1 };
        let i = Laurent::constant(1, Cyclo::zeta_power(4, 1));
        let a = FieldElement::new(x(4, 1).add(&i), x(4, 2).sub(&c(4, 3))).unwrap();
        let inv = a.inverse().unwrap();
        assert!(a.times(&inv).is_unity());
        assert!(a.minus(&a).vanishes());
        assert_eq!(a.plus(&FieldElement::zero_in(&ctx)), a);
    }

    #[test]
    fn two_variable_exact_division() {
        let m = 1;
        let xv = Laurent::monomial(2, vec![1, 0], Cyclo::one(m));
        let yv = Laurent::monomial(2, vec![0, 1], Cyclo::one(m));
        let one = Laurent::constant(2, Cyclo::one(m));
        let p = xv.sub(&one).mul(&yv.add(&one));
        let got = p.div_exact(&yv.add(&one)).unwrap();
        assert_eq!(got, xv.sub(&one));
        assert!(xv.sub(&one).div_exact(&yv.sub(&one)).is_none());
        let f = FieldElement::new(p, yv.add(&one)).unwrap();
        assert_eq!(f.as_laurent().unwrap(), xv.sub(&one));
    }
}
