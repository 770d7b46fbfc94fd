//! Truncated Novikov series over a grading group with a rational weight.
//!
//! A [`Novikov`] value with finite cutoff `R` stands for the class of all
//! series that agree with it on every term of weight `<= R`. Arithmetic
//! propagates the cutoff so that every stored term is exact:
//!
//! * sum: `min(R_a, R_b)`
//! * product: `min(R_a + deg b, R_b + deg a)`; an exact zero factor gives an
//!   exact zero
//! * inverse of `c g (1 + h)`: `R_a - 2 deg a`, capped by the working cutoff
//!
//! Terms are kept sorted by `(weight, coordinates)`, so iteration and the
//! canonical rendering are deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{GradingGroup, GroupElement, WeightHom};
use crate::scalar::{Coefficient, Cutoff, Weight};

/// The group and weight a series is expanded against.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeriesBase {
    pub group: GradingGroup,
    pub weight: WeightHom,
}

impl SeriesBase {
    pub fn new(group: GradingGroup, weight: WeightHom) -> Result<Arc<Self>> {
        if weight.free_values.len() != group.rank() {
            return Err(Error::Structural(format!(
                "weight has {} values for a group of rank {}",
                weight.free_values.len(),
                group.rank()
            )));
        }
        Ok(Arc::new(SeriesBase { group, weight }))
    }

    pub fn weight_of(&self, g: &GroupElement) -> Weight {
        self.weight.eval(g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term<C> {
    pub weight: Weight,
    pub elem: GroupElement,
    pub coeff: C,
}

/// Degree of a series, distinguishing a genuine zero from a series whose
/// known part is empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Finite(Weight),
    /// No term is known; every term has weight greater than this cutoff.
    AboveCutoff(Weight),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct Novikov<C: Coefficient> {
    base: Arc<SeriesBase>,
    ctx: C::Context,
    terms: Vec<Term<C>>,
    cutoff: Cutoff,
}

impl<C: Coefficient> PartialEq for Novikov<C> {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other) && self.cutoff == other.cutoff && self.terms == other.terms
    }
}

fn big_weight(w: &Weight) -> BigRational {
    BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()))
}

type Accumulator<C> = BTreeMap<(Weight, GroupElement), C>;

fn accumulate<C: Coefficient>(acc: &mut Accumulator<C>, weight: Weight, elem: GroupElement, c: C) {
    use std::collections::btree_map::Entry;
    match acc.entry((weight, elem)) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let s = o.get().plus(&c);
            *o.get_mut() = s;
        }
    }
}

impl<C: Coefficient> Novikov<C> {
    pub fn zero(base: &Arc<SeriesBase>, ctx: &C::Context) -> Self {
        Novikov { base: base.clone(), ctx: ctx.clone(), terms: Vec::new(), cutoff: Cutoff::Infinite }
    }

    pub fn one(base: &Arc<SeriesBase>, ctx: &C::Context) -> Self {
        Self::monomial(base, ctx, base.group.identity(), C::one_in(ctx))
    }

    pub fn constant(base: &Arc<SeriesBase>, ctx: &C::Context, c: C) -> Self {
        Self::monomial(base, ctx, base.group.identity(), c)
    }

    pub fn monomial(base: &Arc<SeriesBase>, ctx: &C::Context, elem: GroupElement, coeff: C) -> Self {
        Self::from_terms(base, ctx, [(elem, coeff)], Cutoff::Infinite)
    }

    /// Collect terms, merging repeated group elements and dropping zeros and
    /// anything above `cutoff`.
    pub fn from_terms(
        base: &Arc<SeriesBase>,
        ctx: &C::Context,
        terms: impl IntoIterator<Item = (GroupElement, C)>,
        cutoff: Cutoff,
    ) -> Self {
        let mut acc = Accumulator::new();
        for (g, c) in terms {
            debug_assert!(base.group.contains(&g), "element {g} not in {}", base.group);
            let w = base.weight_of(&g);
            if cutoff.admits(&w) {
                accumulate(&mut acc, w, g, c);
            }
        }
        Self::from_accumulator(base.clone(), ctx.clone(), acc, cutoff)
    }

    fn from_accumulator(base: Arc<SeriesBase>, ctx: C::Context, acc: Accumulator<C>, cutoff: Cutoff) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.vanishes())
            .map(|((weight, elem), coeff)| Term { weight, elem, coeff })
            .collect();
        Novikov { base, ctx, terms, cutoff }
    }

    pub fn base(&self) -> &Arc<SeriesBase> {
        &self.base
    }

    pub fn ctx(&self) -> &C::Context {
        &self.ctx
    }

    pub fn terms(&self) -> &[Term<C>] {
        &self.terms
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn is_exact(&self) -> bool {
        self.cutoff.is_infinite()
    }

    /// Exactly zero (not merely unknown below the cutoff).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.is_exact()
    }

    /// No known term (exact zero or a truncated value with empty support).
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, g: &GroupElement) -> Option<&C> {
        self.terms.iter().find(|t| &t.elem == g).map(|t| &t.coeff)
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.base, &other.base) || self.base == other.base) && self.ctx == other.ctx
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "series over {} / {} and {} / {} cannot be combined",
                self.base.group,
                C::tag(&self.ctx),
                other.base.group,
                C::tag(&other.ctx)
            )))
        }
    }

    pub fn degree(&self) -> Degree {
        match (self.terms.first(), self.cutoff) {
            (Some(t), _) => Degree::Finite(t.weight),
            (None, Cutoff::Finite(r)) => Degree::AboveCutoff(r),
            (None, Cutoff::Infinite) => Degree::Infinite,
        }
    }

    /// A lower bound for the degree, usable in precision arithmetic.
    pub fn valuation(&self) -> Cutoff {
        match self.degree() {
            Degree::Finite(w) | Degree::AboveCutoff(w) => Cutoff::Finite(w),
            Degree::Infinite => Cutoff::Infinite,
        }
    }

    /// Sum of the terms of minimal weight, as an exact element.
    pub fn leading_term(&self) -> Self {
        let terms = match self.terms.first() {
            Some(first) => self.terms.iter().take_while(|t| t.weight == first.weight).cloned().collect(),
            None => Vec::new(),
        };
        Novikov { base: self.base.clone(), ctx: self.ctx.clone(), terms, cutoff: Cutoff::Infinite }
    }

    /// The leading term when it is a single monomial.
    pub fn leading_monomial(&self) -> Option<&Term<C>> {
        match self.terms.as_slice() {
            [] => None,
            [t] => Some(t),
            [t, u, ..] => (u.weight > t.weight).then_some(t),
        }
    }

    /// Restrict to terms of weight `<= r`; the cutoff becomes `min(cutoff, r)`.
    pub fn truncate(&self, r: Weight) -> Self {
        let cutoff = self.cutoff.min(Cutoff::Finite(r));
        let terms = self.terms.iter().take_while(|t| t.weight <= r).cloned().collect();
        Novikov { base: self.base.clone(), ctx: self.ctx.clone(), terms, cutoff }
    }

    /// Lower the cutoff without dropping information that is still valid.
    pub fn truncate_to(&self, c: Cutoff) -> Self {
        match c {
            Cutoff::Finite(r) => self.truncate(r),
            Cutoff::Infinite => self.clone(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.combine(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.combine(other, true))
    }

    fn combine(&self, other: &Self, subtract: bool) -> Self {
        let cutoff = self.cutoff.min(other.cutoff);
        let mut acc = Accumulator::new();
        for t in self.terms.iter().filter(|t| cutoff.admits(&t.weight)) {
            accumulate(&mut acc, t.weight, t.elem.clone(), t.coeff.clone());
        }
        for t in other.terms.iter().filter(|t| cutoff.admits(&t.weight)) {
            let c = if subtract { t.coeff.negated() } else { t.coeff.clone() };
            accumulate(&mut acc, t.weight, t.elem.clone(), c);
        }
        Self::from_accumulator(self.base.clone(), self.ctx.clone(), acc, cutoff)
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|c| c.negated())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.vanishes() {
            return Self::zero(&self.base, &self.ctx);
        }
        self.map_terms(|x| x.times(c))
    }

    fn map_terms(&self, f: impl Fn(&C) -> C) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { weight: t.weight, elem: t.elem.clone(), coeff: f(&t.coeff) })
            .filter(|t| !t.coeff.vanishes())
            .collect();
        Novikov { base: self.base.clone(), ctx: self.ctx.clone(), terms, cutoff: self.cutoff }
    }

    /// Multiply by the group element `g`.
    pub fn shift(&self, g: &GroupElement) -> Self {
        let dw = self.base.weight_of(g);
        let terms = self
            .terms
            .iter()
            .map(|t| Term { weight: t.weight + dw, elem: self.base.group.add(&t.elem, g), coeff: t.coeff.clone() })
            .collect::<Vec<_>>();
        let mut out = Novikov { base: self.base.clone(), ctx: self.ctx.clone(), terms, cutoff: self.cutoff.shift(dw) };
        // same weight shift for all terms, but coordinate order can change
        out.terms.sort_by(|a, b| (a.weight, &a.elem).cmp(&(b.weight, &b.elem)));
        out
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_unchecked(other, Cutoff::Infinite))
    }

    /// Product, additionally truncated at `cap`.
    pub fn mul_capped(&self, other: &Self, cap: Weight) -> Result<Self> {
        self.check_ring(other)?;
        Ok(self.mul_unchecked(other, Cutoff::Finite(cap)))
    }

    fn mul_unchecked(&self, other: &Self, cap: Cutoff) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.base, &self.ctx);
        }
        let cutoff = self
            .cutoff
            .plus(other.valuation())
            .min(other.cutoff.plus(self.valuation()))
            .min(cap);
        let mut acc = Accumulator::new();
        for a in &self.terms {
            for b in &other.terms {
                let w = a.weight + b.weight;
                if !cutoff.admits(&w) {
                    break;
                }
                accumulate(&mut acc, w, self.base.group.add(&a.elem, &b.elem), a.coeff.times(&b.coeff));
            }
        }
        Self::from_accumulator(self.base.clone(), self.ctx.clone(), acc, cutoff)
    }

    /// Multiplicative inverse; infinite expansions are cut at `cap`.
    ///
    /// Requires a single-monomial leading term `c g` with `c` a unit of the
    /// coefficient ring.
    pub fn inverse(&self, cap: Weight) -> Result<Self> {
        if self.terms.is_empty() {
            return Err(if self.is_exact() {
                Error::DivisionByZero
            } else {
                Error::precision("inverse of a series with no known term", self.cutoff)
            });
        }
        let lead = self
            .leading_monomial()
            .ok_or_else(|| Error::Unit(format!("leading term of {self} is not a monomial")))?;
        let c_inv = lead
            .coeff
            .inverse()
            .ok_or_else(|| Error::Unit(format!("leading coefficient {} is not invertible", lead.coeff)))?;
        let g_inv = self.base.group.neg(&lead.elem);
        let d = lead.weight;
        // a = c g (1 + h)
        let normalized = self.shift(&g_inv).scale(&c_inv);
        let h = normalized.checked_sub(&Self::one(&self.base, &self.ctx))?;
        if h.is_zero() {
            return Ok(Self::monomial(&self.base, &self.ctx, g_inv, c_inv));
        }
        // (1 + h)^{-1} is needed up to cap + d, and is known up to h's cutoff
        let target = Cutoff::Finite(cap + d).min(h.cutoff);
        let series = geometric(&h, target);
        Ok(series.shift(&g_inv).scale(&c_inv))
    }

    /// `exp(a)` for `deg a > 0`; needs rational coefficients.
    ///
    /// Uses the weight derivation `D(g) = w(g) g`: from `D(E) = D(a) E`,
    /// `w(g) E_g = sum_s w(s) a_s E_(g - s)`, solved in increasing weight.
    pub fn exp(&self, cap: Weight) -> Result<Self> {
        if self.is_zero() {
            return Ok(Self::one(&self.base, &self.ctx));
        }
        self.require_positive_degree("exp")?;
        let target = self.cutoff.min(Cutoff::Finite(cap));
        let mut pending: Accumulator<C> = BTreeMap::new();
        let mut done: Accumulator<C> = BTreeMap::new();
        if target.admits(&Weight::zero()) {
            pending.insert((Weight::zero(), self.base.group.identity()), C::one_in(&self.ctx));
        }
        while let Some(((w, g), mut c)) = pending.pop_first() {
            if !w.is_zero() {
                c = c.times(&self.rational_coeff(big_weight(&w.recip()))?);
            }
            if c.vanishes() {
                continue;
            }
            for t in &self.terms {
                let w2 = w + t.weight;
                if !target.admits(&w2) {
                    break;
                }
                let k = self.rational_coeff(big_weight(&t.weight))?;
                accumulate(&mut pending, w2, self.base.group.add(&g, &t.elem), t.coeff.times(&c).times(&k));
            }
            done.insert((w, g), c);
        }
        Ok(Self::from_accumulator(self.base.clone(), self.ctx.clone(), done, target))
    }

    /// `ln(1 + c)` for `deg c > 0`; needs rational coefficients.
    ///
    /// From `D(c) = (1 + c) D(L)`:
    /// `L_g = c_g - sum_s c_s w(g - s) / w(g) L_(g - s)`.
    pub fn ln(&self, cap: Weight) -> Result<Self> {
        let one = Self::one(&self.base, &self.ctx);
        let c = self.combine(&one, true);
        if c.is_zero() {
            return Ok(Self::zero(&self.base, &self.ctx));
        }
        if !matches!(c.valuation(), Cutoff::Finite(w) if w > Weight::zero()) {
            return Err(Error::Domain(format!("ln needs leading term 1, got {}", self.leading_term())));
        }
        let target = c.cutoff.min(Cutoff::Finite(cap));
        let mut pending: Accumulator<C> = BTreeMap::new();
        let mut done: Accumulator<C> = BTreeMap::new();
        for t in &c.terms {
            if target.admits(&t.weight) {
                pending.insert((t.weight, t.elem.clone()), t.coeff.clone());
            }
        }
        while let Some(((w, g), l)) = pending.pop_first() {
            if l.vanishes() {
                continue;
            }
            for t in &c.terms {
                let w2 = w + t.weight;
                if !target.admits(&w2) {
                    break;
                }
                let k = self.rational_coeff(big_weight(&-(w / w2)))?;
                accumulate(&mut pending, w2, self.base.group.add(&g, &t.elem), t.coeff.times(&l).times(&k));
            }
            done.insert((w, g), l);
        }
        Ok(Self::from_accumulator(self.base.clone(), self.ctx.clone(), done, target))
    }

    fn require_positive_degree(&self, op: &str) -> Result<()> {
        match self.degree() {
            Degree::Finite(w) if w <= Weight::zero() => {
                Err(Error::Domain(format!("{op} needs positive degree, got degree {w}")))
            }
            Degree::AboveCutoff(w) if w < Weight::zero() => {
                Err(Error::precision(format!("sign of the degree for {op}"), self.cutoff))
            }
            _ => Ok(()),
        }
    }

    fn rational_coeff(&self, q: BigRational) -> Result<C> {
        C::from_rational(&self.ctx, &q)
            .ok_or_else(|| Error::Domain(format!("coefficient ring {} does not contain {q}", C::tag(&self.ctx))))
    }

    /// Re-expand an exact element against another weight on the same group
    /// (the inclusion of the group ring into the Novikov ring).
    pub fn reweight(&self, base: &Arc<SeriesBase>) -> Result<Self> {
        if !self.is_exact() {
            return Err(Error::Domain("only exact elements can be re-expanded".into()));
        }
        if base.group != self.base.group {
            return Err(Error::Structural(format!("{} vs {}", base.group, self.base.group)));
        }
        Ok(Self::from_terms(
            base,
            &self.ctx,
            self.terms.iter().map(|t| (t.elem.clone(), t.coeff.clone())),
            Cutoff::Infinite,
        ))
    }

    /// Change coefficients along a ring map.
    pub fn map_coefficients<D: Coefficient>(&self, ctx: &D::Context, f: impl Fn(&C) -> D) -> Novikov<D> {
        Novikov::from_terms(
            &self.base,
            ctx,
            self.terms.iter().map(|t| (t.elem.clone(), f(&t.coeff))),
            self.cutoff,
        )
    }

    /// Agreement on every term below both cutoffs.
    pub fn agrees_with(&self, other: &Self) -> bool {
        if !self.same_ring(other) {
            return false;
        }
        let c = self.cutoff.min(other.cutoff);
        self.truncate_to(c).terms == other.truncate_to(c).terms
    }
}

/// `sum_k (-h)^k`, truncated at `target` (which must be finite unless `h = 0`).
/// `(1 + h)^{-1}` for `deg h > 0`, by the recurrence `c = 1 - h c` solved
/// in increasing weight: each coefficient is final once popped.
fn geometric<C: Coefficient>(h: &Novikov<C>, target: Cutoff) -> Novikov<C> {
    let cutoff = target.min(h.cutoff);
    let mut pending: Accumulator<C> = BTreeMap::new();
    let mut done: Accumulator<C> = BTreeMap::new();
    if cutoff.admits(&Weight::zero()) {
        pending.insert((Weight::zero(), h.base.group.identity()), C::one_in(&h.ctx));
    }
    while let Some(((w, g), c)) = pending.pop_first() {
        if c.vanishes() {
            continue;
        }
        for t in &h.terms {
            let w2 = w + t.weight;
            if !cutoff.admits(&w2) {
                break;
            }
            accumulate(&mut pending, w2, h.base.group.add(&g, &t.elem), t.coeff.times(&c).negated());
        }
        done.insert((w, g), c);
    }
    Novikov::from_accumulator(h.base.clone(), h.ctx.clone(), done, cutoff)
}

macro_rules! forward_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<C: Coefficient> std::ops::$tr<&Novikov<C>> for &Novikov<C> {
            type Output = Novikov<C>;
            /// Panics when the operands live over different rings; use the
            /// `checked_*` form to get an error instead.
            fn $m(self, rhs: &Novikov<C>) -> Novikov<C> {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl<C: Coefficient> std::ops::Neg for &Novikov<C> {
    type Output = Novikov<C>;
    fn neg(self) -> Novikov<C> {
        Novikov::neg(self)
    }
}

impl<C: Coefficient> fmt::Display for Novikov<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if t.coeff.is_compound() {
                write!(f, "({})*g^{}", t.coeff, t.elem)?;
            } else {
                write!(f, "{}*g^{}", t.coeff, t.elem)?;
            }
        }
        if let Cutoff::Finite(r) = self.cutoff {
            write!(f, " + O(>{r})")?;
        }
        Ok(())
    }
}
