//! Splitting of `Q[G]`-Novikov series into field components.
//!
//! For `G = ker N (+) F` with `F` free of rank <= 1 and `N` injective on it,
//! every character `k` of the torsion subgroup gives a ring map into series
//! over `F` with coefficients in `Q(zeta_m)(x_1, .., x_s)`, where the `x_i`
//! are a basis of the free part of `ker N`. Galois-conjugate characters give
//! the same field factor and are merged.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::cyclotomic::{Cyclo, DEFAULT_ORDER_BOUND, MAX_CYCLOTOMIC_ORDER};
use crate::error::{Error, Result};
use crate::group::{integer_row, GradingGroup, GroupElement, WeightHom};
use crate::laurent::{FieldCtx, FieldElement, Laurent, RationalCoefficient};
use crate::novikov::{Novikov, SeriesBase};
use crate::scalar::{Cutoff, Weight};
use crate::snf::reduce_row;
use crate::RatSeries;

pub type FieldSeries = Novikov<FieldElement>;

/// A character of the torsion subgroup, taken as the representative of its
/// Galois class: `k(e_j) = zeta_{d_j}^{v_j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharacterIndex {
    pub orders: Vec<i64>,
    pub values: Vec<i64>,
    /// Order of the character, i.e. the cyclotomic field it takes values in.
    pub order: u32,
}

impl CharacterIndex {
    fn new(orders: &[i64], values: Vec<i64>) -> Self {
        let order = orders
            .iter()
            .zip(&values)
            .fold(1i64, |acc, (d, v)| acc.lcm(&(d / d.gcd(v))));
        CharacterIndex { orders: orders.to_vec(), values, order: order as u32 }
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Exponent `e` with `k(t) = zeta_m^e`.
    pub fn exponent(&self, torsion: &[i64]) -> i64 {
        let m = self.order as i64;
        self.orders
            .iter()
            .zip(&self.values)
            .zip(torsion)
            .map(|((d, v), t)| {
                let g = d.gcd(v);
                t * (v / g) * (m / (d / g))
            })
            .sum::<i64>()
            .rem_euclid(m)
    }

    pub fn eval(&self, torsion: &[i64]) -> Cyclo {
        Cyclo::zeta_power(self.order, self.exponent(torsion))
    }
}

/// Galois-class representatives of the characters of `Z/d_1 + .. + Z/d_k`.
pub fn character_classes(orders: &[i64]) -> Vec<CharacterIndex> {
    let big_m = orders.iter().fold(1i64, |a, d| a.lcm(d));
    let units: Vec<i64> = (1..=big_m).filter(|u| u.gcd(&big_m) == 1).collect();
    let mut all = vec![Vec::new()];
    for &d in orders {
        all = all
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (0..d).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    let mut reps: Vec<Vec<i64>> = all
        .into_iter()
        .map(|v| {
            units
                .iter()
                .map(|u| v.iter().zip(orders).map(|(x, d)| (x * u).rem_euclid(*d)).collect::<Vec<_>>())
                .min()
                .expect("at least one unit")
        })
        .collect();
    reps.sort();
    reps.dedup();
    reps.into_iter().map(|v| CharacterIndex::new(orders, v)).collect()
}

/// The fixed decomposition `G = ker N (+) F` together with the character
/// classes of the torsion subgroup.
#[derive(Clone, Debug)]
pub struct CharacterSplit {
    source: Arc<SeriesBase>,
    target: Arc<SeriesBase>,
    f_rank: usize,
    laurent_rank: usize,
    /// columns: F generator (if any), then the ker N basis, in free coordinates
    w: Vec<Vec<i64>>,
    w_inv: Vec<Vec<i64>>,
    characters: Vec<CharacterIndex>,
}

pub fn character_split(base: &Arc<SeriesBase>) -> Result<CharacterSplit> {
    character_split_bounded(base, DEFAULT_ORDER_BOUND)
}

pub fn character_split_bounded(base: &Arc<SeriesBase>, order_bound: u32) -> Result<CharacterSplit> {
    let group = &base.group;
    let r = group.rank();
    let (row, den) = integer_row(&base.weight);
    let red = reduce_row(&row);
    let to_i64 = |m: &Vec<Vec<BigInt>>| -> Result<Vec<Vec<i64>>> {
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|x| x.to_i64().ok_or_else(|| Error::Validation("splitting basis overflows i64".into())))
                    .collect()
            })
            .collect()
    };
    let (w, w_inv) = (to_i64(&red.w)?, to_i64(&red.w_inv)?);
    let f_rank = usize::from(!red.gcd.is_zero());
    let f_weight = Weight::new(red.gcd.to_i64().unwrap_or(0), den);
    let target = SeriesBase::new(GradingGroup::free(f_rank), WeightHom::new(vec![f_weight; f_rank]))?;
    let characters = character_classes(group.torsion_factors());
    let cap = order_bound.min(MAX_CYCLOTOMIC_ORDER);
    if let Some(k) = characters.iter().find(|k| k.order > cap) {
        return Err(Error::Validation(format!(
            "character of order {} exceeds the cyclotomic bound {cap}",
            k.order
        )));
    }
    Ok(CharacterSplit {
        source: base.clone(),
        target,
        f_rank,
        laurent_rank: r - f_rank,
        w,
        w_inv,
        characters,
    })
}

impl CharacterSplit {
    pub fn source(&self) -> &Arc<SeriesBase> {
        &self.source
    }

    /// Series base of the components: `F` with the restricted weight.
    pub fn target(&self) -> &Arc<SeriesBase> {
        &self.target
    }

    pub fn characters(&self) -> &[CharacterIndex] {
        &self.characters
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn laurent_rank(&self) -> usize {
        self.laurent_rank
    }

    pub fn ctx(&self, component: usize) -> FieldCtx {
        FieldCtx { order: self.characters[component].order, laurent_rank: self.laurent_rank }
    }

    /// Weight of the generator of `F`, if `F` is nontrivial.
    pub fn f_weight(&self) -> Option<Weight> {
        self.target.weight.free_values.first().copied()
    }

    /// Free coordinates of an element in the recorded basis: `(F part, ker N part)`.
    pub fn split_free(&self, free: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let c: Vec<i64> = self
            .w_inv
            .iter()
            .map(|row| row.iter().zip(free).map(|(a, b)| a * b).sum())
            .collect();
        let (f, k) = c.split_at(self.f_rank);
        (f.to_vec(), k.to_vec())
    }

    pub fn join_free(&self, f: &[i64], k: &[i64]) -> Vec<i64> {
        let c: Vec<i64> = f.iter().chain(k).copied().collect();
        self.w.iter().map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum()).collect()
    }

    /// Image of a group element in component `i`: the F part and the
    /// coefficient `k(t) x^(ker N part)`.
    pub fn project_element(&self, g: &GroupElement, component: usize) -> (GroupElement, FieldElement) {
        let (f, k) = self.split_free(&g.free);
        let c = self.characters[component].eval(&g.torsion);
        (self.target.group.free_element(f), FieldElement::from_laurent(Laurent::monomial(self.laurent_rank, k, c)))
    }

    pub fn project<C: RationalCoefficient>(&self, a: &Novikov<C>, component: usize) -> Result<FieldSeries> {
        if a.base().as_ref() != self.source.as_ref() {
            return Err(Error::Structural(format!(
                "series over {} does not match the split group {}",
                a.base().group,
                self.source.group
            )));
        }
        let ctx = self.ctx(component);
        let order = ctx.order;
        let terms = a.terms().iter().map(|t| {
            let (f, x) = self.project_element(&t.elem, component);
            let q = FieldElement::from_cyclo(&ctx, Cyclo::from_rational(order, t.coeff.to_rational()));
            debug_assert_eq!(self.target.weight_of(&f), t.weight);
            (f, crate::scalar::Coefficient::times(&x, &q))
        });
        Ok(Novikov::from_terms(&self.target, &ctx, terms, a.cutoff()))
    }

    pub fn project_all<C: RationalCoefficient>(&self, a: &Novikov<C>) -> Result<Vec<FieldSeries>> {
        (0..self.len()).map(|i| self.project(a, i)).collect()
    }

    /// Inverse of [`Self::project_all`] on images of group-ring elements,
    /// via `a_t = (1/|T|) sum_k Tr(k(t)^-1 a_k)`.
    pub fn reassemble(&self, parts: &[FieldSeries]) -> Result<RatSeries> {
        if parts.len() != self.len() {
            return Err(Error::Structural(format!("{} components, expected {}", parts.len(), self.len())));
        }
        let group = &self.source.group;
        let torsion = group.torsion_elements();
        let size = BigRational::from_integer(BigInt::from(group.torsion_order()));
        let mut acc: BTreeMap<GroupElement, BigRational> = BTreeMap::new();
        let mut cutoff = Cutoff::Infinite;
        for (i, part) in parts.iter().enumerate() {
            let kappa = &self.characters[i];
            cutoff = cutoff.min(part.cutoff());
            for term in part.terms() {
                let l = term.coeff.as_laurent().ok_or_else(|| {
                    Error::Domain(format!("component value {} is not a Laurent polynomial", term.coeff))
                })?;
                for (k, c) in l.terms() {
                    let free = self.join_free(&term.elem.free, k);
                    for t in &torsion {
                        let x = c.mul(&Cyclo::zeta_power(kappa.order, -kappa.exponent(t))).trace();
                        if x.is_zero() {
                            continue;
                        }
                        let g = group.element(free.clone(), t.clone())?;
                        *acc.entry(g).or_insert_with(BigRational::zero) += x / &size;
                    }
                }
            }
        }
        Ok(Novikov::from_terms(&self.source, &(), acc, cutoff))
    }
}
