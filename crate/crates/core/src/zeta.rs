//! Closed-orbit ledgers, `eta = sum sign/mult * A`, `zeta = exp(eta)` and the
//! invariant `I = zeta * tau`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::complex::TorsionValue;
use crate::error::{Error, Result};
use crate::fields::CharacterSplit;
use crate::group::GroupElement;
use crate::novikov::{Novikov, SeriesBase};
use crate::scalar::{Coefficient, Cutoff, Weight};
use crate::RatSeries;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitEntry {
    pub class: GroupElement,
    pub sign: i8,
    pub mult: u32,
}

/// Signed, weighted closed orbits. A ledger that lists an infinite family
/// only up to some weight records that weight as its cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitLedger {
    pub entries: Vec<OrbitEntry>,
    pub cutoff: Cutoff,
}

impl Default for OrbitLedger {
    fn default() -> Self {
        OrbitLedger { entries: Vec::new(), cutoff: Cutoff::Infinite }
    }
}

impl OrbitLedger {
    pub fn push(&mut self, class: GroupElement, sign: i8, mult: u32) {
        self.entries.push(OrbitEntry { class, sign, mult });
    }

    /// The orbit `A` and its multiple covers `(kA, sign, k)` of weight at
    /// most `up_to`. Lowers the ledger cutoff to `up_to`.
    pub fn push_covers(&mut self, base: &SeriesBase, class: &GroupElement, sign: i8, mult: u32, up_to: Weight) -> Result<()> {
        let w = base.weight_of(class);
        if w <= Weight::zero() {
            return Err(Error::Domain(format!("orbit class {class} has weight {w} <= 0")));
        }
        let mut k = 1i64;
        while w * Weight::from_integer(k) <= up_to {
            self.push(base.group.scale(class, k), sign, mult * k as u32);
            k += 1;
        }
        self.cutoff = self.cutoff.min(Cutoff::Finite(up_to));
        Ok(())
    }
}

pub fn eta_from_orbits(base: &Arc<SeriesBase>, ledger: &OrbitLedger) -> Result<RatSeries> {
    let mut terms = Vec::with_capacity(ledger.entries.len());
    for e in &ledger.entries {
        if e.class.is_identity() {
            return Err(Error::Domain("orbit class is the identity".into()));
        }
        let w = base.weight_of(&e.class);
        if w <= Weight::zero() {
            return Err(Error::Domain(format!("orbit class {} has weight {w} <= 0", e.class)));
        }
        if e.mult == 0 || e.sign.abs() != 1 {
            return Err(Error::Domain(format!("bad sign {} or multiplicity {}", e.sign, e.mult)));
        }
        terms.push((e.class.clone(), BigRational::new(BigInt::from(e.sign), BigInt::from(e.mult))));
    }
    Ok(Novikov::from_terms(base, &(), terms, ledger.cutoff))
}

/// `exp(eta)` in every component; the leading term is 1 by construction and
/// checked.
pub fn zeta(split: &Arc<CharacterSplit>, eta: &RatSeries, cap: Weight) -> Result<TorsionValue> {
    let parts = split.project_all(eta)?;
    let comps = parts
        .iter()
        .map(|p| {
            let z = p.exp(cap)?;
            let lead = z.leading_monomial().ok_or_else(|| Error::precision("leading term of zeta", z.cutoff()))?;
            if !(lead.elem.is_identity() && lead.coeff.is_unity()) {
                return Err(Error::Domain(format!("zeta has leading term {}", z.leading_term())));
            }
            Ok(z)
        })
        .collect::<Result<Vec<_>>>()?;
    TorsionValue::new(split, comps)
}

/// `I = zeta * tau`, componentwise and truncated at the working cutoff.
#[derive(Clone, Debug)]
pub struct InvariantValue {
    pub tau: TorsionValue,
    pub zeta: TorsionValue,
    pub value: TorsionValue,
}

pub fn invariant(tau: &TorsionValue, eta: &RatSeries, cap: Weight) -> Result<InvariantValue> {
    let z = zeta(tau.split(), eta, cap)?;
    let value = z.mul(tau)?.truncate(cap);
    Ok(InvariantValue { tau: tau.clone(), zeta: z, value })
}
