//! Finitely generated abelian grading groups `Z^r + Z/d1 + ... + Z/dk`, their
//! homomorphisms to the rationals (weights) and to `2Z` (the grading shift),
//! and the splitting of a group along the kernel of the grading shift.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Weight;
use crate::snf::{reduce_row, smith_normal_form, IntMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradingGroup {
    rank: usize,
    torsion: Vec<i64>,
}

/// Coordinates of a group element: free part, then torsion residues in
/// `[0, d_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub free: Vec<i64>,
    pub torsion: Vec<i64>,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        self.free.iter().all(|&x| x == 0) && self.torsion.iter().all(|&x| x == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.free.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        if !self.torsion.is_empty() {
            write!(f, ";")?;
            for (i, x) in self.torsion.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, ")")
    }
}

impl GradingGroup {
    /// `Z^rank + Z/d1 + ...`; factors must be `>= 2` and form a divisibility chain.
    pub fn new(rank: usize, torsion: Vec<i64>) -> Result<Self> {
        if torsion.iter().any(|&d| d < 2) {
            return Err(Error::Validation(format!("torsion factors must be >= 2: {torsion:?}")));
        }
        if torsion.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::Validation(format!(
                "torsion factors must form a divisibility chain: {torsion:?}"
            )));
        }
        Ok(GradingGroup { rank, torsion })
    }

    pub fn free(rank: usize) -> Self {
        GradingGroup { rank, torsion: Vec::new() }
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion_factors(&self) -> &[i64] {
        &self.torsion
    }

    pub fn torsion_order(&self) -> i64 {
        self.torsion.iter().product()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { free: vec![0; self.rank], torsion: vec![0; self.torsion.len()] }
    }

    /// Build an element, reducing torsion coordinates into canonical range.
    pub fn element(&self, free: Vec<i64>, torsion: Vec<i64>) -> Result<GroupElement> {
        if free.len() != self.rank || torsion.len() != self.torsion.len() {
            return Err(Error::Structural(format!(
                "element of shape ({}, {}) in group of shape ({}, {})",
                free.len(),
                torsion.len(),
                self.rank,
                self.torsion.len()
            )));
        }
        let torsion = torsion.iter().zip(&self.torsion).map(|(x, d)| x.rem_euclid(*d)).collect();
        Ok(GroupElement { free, torsion })
    }

    pub fn free_element(&self, free: Vec<i64>) -> GroupElement {
        GroupElement { free, torsion: vec![0; self.torsion.len()] }
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        a.free.len() == self.rank
            && a.torsion.len() == self.torsion.len()
            && a.torsion.iter().zip(&self.torsion).all(|(x, d)| (0..*d).contains(x))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            torsion: a
                .torsion
                .iter()
                .zip(&b.torsion)
                .zip(&self.torsion)
                .map(|((x, y), d)| (x + y) % d)
                .collect(),
        }
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        self.scale(a, -1)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &GroupElement, k: i64) -> GroupElement {
        GroupElement {
            free: a.free.iter().map(|x| x * k).collect(),
            torsion: a.torsion.iter().zip(&self.torsion).map(|(x, d)| (x * k).rem_euclid(*d)).collect(),
        }
    }

    /// Every element of the torsion subgroup, in lexicographic order.
    pub fn torsion_elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &d in &self.torsion {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Largest `d` with `a = d * b` solvable. Zero for the identity and, by
    /// the same convention, for nonzero torsion elements (which are divisible
    /// by infinitely many integers).
    pub fn divisibility(&self, a: &GroupElement) -> u64 {
        let g = a.free.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        if g == 0 {
            return 0;
        }
        let g = g.unsigned_abs();
        let mut divisors: Vec<u64> = (1..=g).filter(|d| g % d == 0).collect();
        divisors.reverse();
        for d in divisors {
            // d * b_j = a_j (mod d_j) solvable iff gcd(d, d_j) | a_j
            let ok = a
                .torsion
                .iter()
                .zip(&self.torsion)
                .all(|(x, m)| x % (d as i64).gcd(m) == 0);
            if ok {
                return d;
            }
        }
        1
    }
}

impl fmt::Display for GradingGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.rank > 0 {
            parts.push(if self.rank == 1 { "Z".into() } else { format!("Z^{}", self.rank) });
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Rational-valued homomorphism, given by its values on free generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightHom {
    pub free_values: Vec<Weight>,
}

impl WeightHom {
    pub fn new(free_values: Vec<Weight>) -> Self {
        WeightHom { free_values }
    }

    pub fn zero(rank: usize) -> Self {
        WeightHom { free_values: vec![Weight::zero(); rank] }
    }

    pub fn eval(&self, a: &GroupElement) -> Weight {
        a.free
            .iter()
            .zip(&self.free_values)
            .fold(Weight::zero(), |acc, (x, w)| acc + w * x)
    }

    pub fn is_zero(&self) -> bool {
        self.free_values.iter().all(|w| w.is_zero())
    }

    pub fn negated(&self) -> Self {
        WeightHom { free_values: self.free_values.iter().map(|w| -w).collect() }
    }
}

/// Grading-shift homomorphism to `2Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SFHom {
    pub free_values: Vec<i64>,
}

impl SFHom {
    pub fn new(free_values: Vec<i64>) -> Result<Self> {
        if let Some(v) = free_values.iter().find(|v| *v % 2 != 0) {
            return Err(Error::Validation(format!("grading shift must be even, got {v}")));
        }
        Ok(SFHom { free_values })
    }

    pub fn eval(&self, a: &GroupElement) -> i64 {
        a.free.iter().zip(&self.free_values).map(|(x, v)| x * v).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.free_values.iter().all(|&v| v == 0)
    }
}

/// Coordinates for a group given by generators and relations.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub group: GradingGroup,
    generators: usize,
    relations: Vec<Vec<i64>>,
    /// image of each presentation generator
    images: Vec<GroupElement>,
    /// presentation-coordinate preimage of each free basis element
    free_preimages: Vec<Vec<i64>>,
    torsion_preimages: Vec<Vec<i64>>,
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Validation(format!("coordinate {x} exceeds machine range")))
}

/// Invariant-factor decomposition of `Z^n / rowspace(relations)`.
pub fn build_group(relations: &[Vec<i64>], generators: usize) -> Result<Presentation> {
    if let Some(r) = relations.iter().find(|r| r.len() != generators) {
        return Err(Error::Validation(format!(
            "relation {r:?} has {} entries, expected {generators}",
            r.len()
        )));
    }
    let big: IntMatrix =
        relations.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let snf = smith_normal_form(&big, generators);
    let mut free_idx = Vec::new();
    let mut tors_idx = Vec::new();
    for (j, d) in snf.diagonal.iter().enumerate() {
        if d.is_zero() {
            free_idx.push(j);
        } else if *d > BigInt::from(1) {
            tors_idx.push((j, to_i64(d)?));
        }
    }
    let group = GradingGroup::new(free_idx.len(), tors_idx.iter().map(|p| p.1).collect())?;
    let mut images = Vec::with_capacity(generators);
    for i in 0..generators {
        let row = &snf.v[i];
        let free = free_idx.iter().map(|&j| to_i64(&row[j])).collect::<Result<Vec<_>>>()?;
        let tors = tors_idx.iter().map(|&(j, _)| to_i64(&row[j])).collect::<Result<Vec<_>>>()?;
        images.push(group.element(free, tors)?);
    }
    let free_preimages = free_idx
        .iter()
        .map(|&j| snf.v_inv[j].iter().map(to_i64).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let torsion_preimages = tors_idx
        .iter()
        .map(|&(j, _)| snf.v_inv[j].iter().map(to_i64).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Presentation {
        group,
        generators,
        relations: relations.to_vec(),
        images,
        free_preimages,
        torsion_preimages,
    })
}

impl Presentation {
    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn image(&self, generator: usize) -> &GroupElement {
        &self.images[generator]
    }

    /// Image of the element with the given exponent vector.
    pub fn project(&self, exponents: &[i64]) -> GroupElement {
        exponents.iter().enumerate().fold(self.group.identity(), |acc, (i, &e)| {
            self.group.add(&acc, &self.group.scale(&self.images[i], e))
        })
    }

    /// An exponent vector projecting to `a`.
    pub fn preimage(&self, a: &GroupElement) -> Vec<i64> {
        let mut e = vec![0i64; self.generators];
        let parts = self.free_preimages.iter().zip(&a.free).chain(self.torsion_preimages.iter().zip(&a.torsion));
        for (row, &k) in parts {
            for (x, r) in e.iter_mut().zip(row) {
                *x += k * r;
            }
        }
        e
    }

    fn check_well_defined<T: Clone + Zero + PartialEq + fmt::Debug>(
        &self,
        values: &[T],
        mul: impl Fn(i64, &T) -> T,
    ) -> Result<()> {
        if values.len() != self.generators {
            return Err(Error::Validation(format!(
                "homomorphism has {} values for {} generators",
                values.len(),
                self.generators
            )));
        }
        for r in &self.relations {
            let v = r.iter().zip(values).fold(T::zero(), |acc, (&k, x)| acc + mul(k, x));
            if !v.is_zero() {
                return Err(Error::Validation(format!(
                    "homomorphism {values:?} does not vanish on relation {r:?}"
                )));
            }
        }
        Ok(())
    }

    /// Transport a weight given on presentation generators.
    pub fn weight_hom(&self, values: &[Weight]) -> Result<WeightHom> {
        self.check_well_defined(values, |k, w| w * k)?;
        let free_values = self
            .free_preimages
            .iter()
            .map(|pre| pre.iter().zip(values).fold(Weight::zero(), |acc, (&k, w)| acc + w * k))
            .collect();
        Ok(WeightHom { free_values })
    }

    /// Transport a grading shift given on presentation generators.
    pub fn sf_hom(&self, values: &[i64]) -> Result<SFHom> {
        self.check_well_defined(values, |k, v| k * v)?;
        SFHom::new(
            self.free_preimages
                .iter()
                .map(|pre| pre.iter().zip(values).map(|(k, v)| k * v).sum())
                .collect(),
        )
    }
}

/// `group = ker(psi) + Z a0`, with an explicit basis of the kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiSplitting {
    pub ambient: GradingGroup,
    pub psi: SFHom,
    pub kernel: GradingGroup,
    /// kernel free basis, in ambient free coordinates
    basis: Vec<Vec<i64>>,
    /// rows of the inverse basis change; row 0 reads off the a0 coefficient
    /// when `psi != 0`, the remaining rows the kernel coordinates
    coords: Vec<Vec<i64>>,
    pub a0: Option<GroupElement>,
    pub n_psi: i64,
}

pub fn split_by_psi(group: &GradingGroup, psi: &SFHom) -> Result<PsiSplitting> {
    if psi.free_values.len() != group.rank() {
        return Err(Error::Structural("grading shift does not match group rank".into()));
    }
    let r = group.rank();
    if psi.is_zero() {
        let id: Vec<Vec<i64>> =
            (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
        return Ok(PsiSplitting {
            ambient: group.clone(),
            psi: psi.clone(),
            kernel: group.clone(),
            basis: id.clone(),
            coords: id,
            a0: None,
            n_psi: 0,
        });
    }
    let row: Vec<BigInt> = psi.free_values.iter().map(|&v| BigInt::from(v)).collect();
    let red = reduce_row(&row);
    let col = |j: usize| -> Result<Vec<i64>> { (0..r).map(|i| to_i64(&red.w[i][j])).collect() };
    let basis = (1..r).map(col).collect::<Result<Vec<_>>>()?;
    let coords = red
        .w_inv
        .iter()
        .map(|row| row.iter().map(to_i64).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let a0 = group.free_element(col(0)?);
    let gcd = to_i64(&red.gcd)?;
    Ok(PsiSplitting {
        ambient: group.clone(),
        psi: psi.clone(),
        kernel: GradingGroup::new(r - 1, group.torsion_factors().to_vec())?,
        basis,
        coords,
        a0: Some(a0),
        n_psi: gcd / 2,
    })
}

impl PsiSplitting {
    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Kernel coordinates -> ambient coordinates.
    pub fn embed(&self, k: &GroupElement) -> GroupElement {
        let r = self.ambient.rank();
        let free = (0..r)
            .map(|i| self.basis.iter().zip(&k.free).map(|(b, x)| b[i] * x).sum())
            .collect();
        GroupElement { free, torsion: k.torsion.clone() }
    }

    /// The `a0`-multiple in the decomposition of `a` (`psi(a) / 2N_psi`).
    pub fn a0_multiple(&self, a: &GroupElement) -> i64 {
        if self.n_psi == 0 {
            0
        } else {
            self.psi.eval(a) / (2 * self.n_psi)
        }
    }

    /// Projection onto `ker psi`: `a = embed(result) + (psi(a)/2N_psi) a0`.
    pub fn project(&self, a: &GroupElement) -> GroupElement {
        if self.n_psi == 0 {
            return a.clone();
        }
        let free = self.coords[1..]
            .iter()
            .map(|row| row.iter().zip(&a.free).map(|(c, x)| c * x).sum())
            .collect();
        GroupElement { free, torsion: a.torsion.clone() }
    }

    /// Whether `a` lies in the kernel.
    pub fn in_kernel(&self, a: &GroupElement) -> bool {
        self.psi.eval(a) == 0
    }

    /// Restrict a weight on the ambient group to kernel coordinates.
    pub fn restrict(&self, weight: &WeightHom) -> WeightHom {
        WeightHom {
            free_values: self
                .basis
                .iter()
                .map(|b| b.iter().zip(&weight.free_values).fold(Weight::zero(), |acc, (x, w)| acc + w * x))
                .collect(),
        }
    }
}

/// Rational weight values scaled to a primitive-free integer row (common
/// denominator cleared).
pub(crate) fn integer_row(weight: &WeightHom) -> (Vec<BigInt>, i64) {
    let den = weight.free_values.iter().fold(1i64, |acc, w| acc.lcm(w.denom()));
    let row = weight
        .free_values
        .iter()
        .map(|w| BigInt::from(w.numer() * (den / w.denom())))
        .collect();
    (row, den)
}
