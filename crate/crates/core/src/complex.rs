//! Graded free complexes over a Novikov ring, chain-condition checks, and
//! Reidemeister torsion computed one field component at a time.
//!
//! Convention: for a set `A_i` of generators of `C_i` whose boundaries form
//! a basis of `im d_i`,
//!
//! ```text
//! tau = prod_i det[ d(A_(i+1)) | A_i ]_(c_i) ^ ((-1)^(i+1))
//! ```
//!
//! which gives `(t-1)^-1` for the circle. Z/2-graded complexes use the
//! representatives `i = 0, 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{CharacterSplit, FieldSeries};
use crate::group::GroupElement;
use crate::laurent::RationalCoefficient;
use crate::novikov::{Degree, Novikov, SeriesBase};
use crate::scalar::{Coefficient, Cutoff, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grading {
    Z2,
    Z,
}

/// Free complex with boundary matrix indexed `[target][source]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedComplex<C: Coefficient> {
    kind: Grading,
    base: Arc<SeriesBase>,
    ctx: C::Context,
    names: Vec<String>,
    grades: Vec<i64>,
    boundary: Vec<Vec<Novikov<C>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    /// Weight up to which `d^2 = 0` has been checked.
    pub verified: Cutoff,
}

impl<C: Coefficient> GradedComplex<C> {
    /// Complex with all boundary entries zero.
    pub fn new(kind: Grading, base: &Arc<SeriesBase>, ctx: &C::Context, generators: Vec<(String, i64)>) -> Result<Self> {
        let (names, grades): (Vec<_>, Vec<_>) = generators.into_iter().unzip();
        if kind == Grading::Z2 && grades.iter().any(|g| !(0..2).contains(g)) {
            return Err(Error::Validation("Z/2 grades must be 0 or 1".into()));
        }
        let n = names.len();
        let zero = Novikov::zero(base, ctx);
        Ok(GradedComplex {
            kind,
            base: base.clone(),
            ctx: ctx.clone(),
            names,
            grades,
            boundary: vec![vec![zero; n]; n],
        })
    }

    pub fn kind(&self) -> Grading {
        self.kind
    }

    pub fn base(&self) -> &Arc<SeriesBase> {
        &self.base
    }

    pub fn ctx(&self) -> &C::Context {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn grades(&self) -> &[i64] {
        &self.grades
    }

    pub fn grade(&self, i: usize) -> i64 {
        self.grades[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn entry(&self, target: usize, source: usize) -> &Novikov<C> {
        &self.boundary[target][source]
    }

    pub fn set_entry(&mut self, target: usize, source: usize, value: Novikov<C>) {
        self.boundary[target][source] = value;
    }

    pub fn matrix(&self) -> &[Vec<Novikov<C>>] {
        &self.boundary
    }

    pub fn zero_entry(&self) -> Novikov<C> {
        Novikov::zero(&self.base, &self.ctx)
    }

    /// Replace the whole complex data; used by moves.
    pub fn rebuild(&self, names: Vec<String>, grades: Vec<i64>, boundary: Vec<Vec<Novikov<C>>>) -> Self {
        GradedComplex { kind: self.kind, base: self.base.clone(), ctx: self.ctx.clone(), names, grades, boundary }
    }

    /// `grade(source) - grade(target)` is the degree of the boundary.
    pub fn compatible(&self, target: usize, source: usize) -> bool {
        let d = self.grades[source] - self.grades[target];
        match self.kind {
            Grading::Z => d == 1,
            Grading::Z2 => d.rem_euclid(2) == 1,
        }
    }

    pub fn validate_chain(&self) -> Result<ChainReport> {
        let n = self.len();
        for y in 0..n {
            for x in 0..n {
                if !self.boundary[y][x].is_empty() && !self.compatible(y, x) {
                    return Err(Error::ChainCondition(format!(
                        "entry {} -> {} has grades {} -> {}",
                        self.names[x], self.names[y], self.grades[x], self.grades[y]
                    )));
                }
            }
        }
        let mut verified = Cutoff::Infinite;
        for z in 0..n {
            for x in 0..n {
                let mut sum = self.zero_entry();
                for y in 0..n {
                    let (a, b) = (&self.boundary[z][y], &self.boundary[y][x]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    sum = sum.checked_add(&a.checked_mul(b)?)?;
                }
                if !sum.is_empty() {
                    return Err(Error::ChainCondition(format!(
                        "d^2 maps {} to {} with coefficient {}",
                        self.names[x], self.names[z], sum
                    )));
                }
                verified = verified.min(sum.cutoff());
            }
        }
        Ok(ChainReport { verified })
    }

    /// Lowest cutoff among the entries.
    pub fn cutoff(&self) -> Cutoff {
        self.boundary.iter().flatten().map(Novikov::cutoff).min().unwrap_or(Cutoff::Infinite)
    }

    fn degrees(&self) -> Vec<i64> {
        match self.kind {
            Grading::Z2 => vec![0, 1],
            Grading::Z => {
                let (lo, hi) = match (self.grades.iter().min(), self.grades.iter().max()) {
                    (Some(&lo), Some(&hi)) => (lo, hi),
                    _ => return Vec::new(),
                };
                (lo..=hi + 1).collect()
            }
        }
    }

    fn in_degree(&self, i: i64) -> Vec<usize> {
        let i = match self.kind {
            Grading::Z2 => i.rem_euclid(2),
            Grading::Z => i,
        };
        (0..self.len()).filter(|&k| self.grades[k] == i).collect()
    }
}

impl<C: RationalCoefficient> GradedComplex<C> {
    /// Torsion in every field component of `split`; inverses are expanded up
    /// to `cap`.
    pub fn torsion(&self, split: &Arc<CharacterSplit>, cap: Weight) -> Result<TorsionValue> {
        if split.source().as_ref() != self.base.as_ref() {
            return Err(Error::Structural("character split built over a different base".into()));
        }
        let components = (0..split.len())
            .map(|k| self.component_torsion(split, k, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(TorsionValue { split: split.clone(), components })
    }

    fn component_torsion(&self, split: &CharacterSplit, k: usize, cap: Weight) -> Result<FieldSeries> {
        let target = split.target();
        let ctx = split.ctx(k);
        let one = FieldSeries::one(target, &ctx);
        let projected: Vec<Vec<FieldSeries>> = self
            .boundary
            .iter()
            .map(|row| row.iter().map(|e| split.project(e, k)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let degrees = self.degrees();
        // pivot columns of d_i, and whether the remaining block was exactly zero
        let mut chosen = Vec::new();
        let mut exact = true;
        for &i in &degrees {
            let rows = self.in_degree(i - 1);
            let cols = self.in_degree(i);
            let m = submatrix(&projected, &rows, &cols);
            let e = pivot_search(m)?;
            exact &= e.exhausted_exactly;
            chosen.push(e.pivots.iter().map(|&(_, c)| cols[c]).collect::<Vec<_>>());
        }
        let rank = |j: usize| chosen.get(j).map_or(0, Vec::len);
        let acyclic = degrees.iter().enumerate().all(|(j, &i)| {
            let next = match self.kind {
                Grading::Z2 => (j + 1) % 2,
                Grading::Z => j + 1,
            };
            rank(j) + rank(next) == self.in_degree(i).len()
        });
        if !acyclic {
            if exact {
                return Ok(FieldSeries::zero(target, &ctx));
            }
            let known = projected.iter().flatten().map(FieldSeries::cutoff).min().unwrap_or(Cutoff::Infinite);
            return Err(Error::precision("rank of the boundary (acyclicity undecided)", known));
        }
        let mut tau = one;
        for (j, &i) in degrees.iter().enumerate() {
            let basis = self.in_degree(i);
            if basis.is_empty() {
                continue;
            }
            let next = match self.kind {
                Grading::Z2 => (j + 1) % 2,
                Grading::Z => j + 1,
            };
            let lifted: &[usize] = chosen.get(next).map_or(&[], Vec::as_slice);
            // columns: d(A_(i+1)) then unit vectors of A_i, written in the basis of C_i
            let mut m: Vec<Vec<FieldSeries>> = basis
                .iter()
                .map(|&r| lifted.iter().map(|&c| projected[r][c].clone()).collect())
                .collect();
            for &a in &chosen[j] {
                for (row, &r) in m.iter_mut().zip(&basis) {
                    row.push(if r == a { FieldSeries::one(target, &ctx) } else { FieldSeries::zero(target, &ctx) });
                }
            }
            let det = determinant(m, cap)?;
            let factor = if (i + 1).rem_euclid(2) == 0 { det } else { det.inverse(cap)? };
            tau = tau.checked_mul(&factor)?;
        }
        Ok(tau.truncate_to(Cutoff::Finite(cap)))
    }
}

fn submatrix(m: &[Vec<FieldSeries>], rows: &[usize], cols: &[usize]) -> Vec<Vec<FieldSeries>> {
    rows.iter().map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect()).collect()
}

struct Elimination {
    /// (row, column) of each pivot in the original indexing
    pivots: Vec<(usize, usize)>,
    /// Product of pivots with the permutation sign; meaningful when square.
    det: Option<FieldSeries>,
    /// Whether everything left after the last pivot was exactly zero.
    exhausted_exactly: bool,
}

/// Order used to choose pivots: degree, then leading monomial, then position.
fn pivot_key(e: &FieldSeries) -> Option<(Weight, GroupElement)> {
    match e.degree() {
        Degree::Finite(w) => Some((w, e.terms()[0].elem.clone())),
        _ => None,
    }
}

/// Full-pivot Gaussian elimination with minimal-weight pivots.
fn eliminate(mut m: Vec<Vec<FieldSeries>>, cap: Weight, want_det: bool) -> Result<Elimination> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut row_ids: Vec<usize> = (0..rows).collect();
    let mut col_ids: Vec<usize> = (0..cols).collect();
    let mut pivots = Vec::new();
    let mut det: Option<FieldSeries> = None;
    let mut sign_flip = false;
    let mut step = 0;
    while step < rows.min(cols) {
        let mut best: Option<((Weight, GroupElement), usize, usize)> = None;
        for (r, row) in m.iter().enumerate().skip(step) {
            for (c, e) in row.iter().enumerate().skip(step) {
                if let Some(key) = pivot_key(e) {
                    let cand = (key, row_ids[r], col_ids[c]);
                    let better = match &best {
                        None => true,
                        Some((bk, br, bc)) => (&cand.0, cand.1, cand.2) < (bk, row_ids[*br], col_ids[*bc]),
                    };
                    if better {
                        best = Some((cand.0, r, c));
                    }
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        if pr != step {
            m.swap(pr, step);
            row_ids.swap(pr, step);
            sign_flip ^= true;
        }
        if pc != step {
            for row in m.iter_mut() {
                row.swap(pc, step);
            }
            col_ids.swap(pc, step);
            sign_flip ^= true;
        }
        let p = m[step][step].clone();
        pivots.push((row_ids[step], col_ids[step]));
        if want_det {
            det = Some(match det {
                None => p.clone(),
                Some(d) => d.checked_mul(&p)?,
            });
        }
        let p_inv = p.inverse(cap)?;
        let pivot_row = m[step].clone();
        for row in m.iter_mut().skip(step + 1) {
            if row[step].is_zero() {
                continue;
            }
            let f = row[step].checked_mul(&p_inv)?;
            for c in step..cols {
                if pivot_row[c].is_zero() {
                    continue;
                }
                row[c] = row[c].checked_sub(&f.checked_mul(&pivot_row[c])?)?;
            }
            row[step] = FieldSeries::zero(p.base(), p.ctx());
        }
        step += 1;
    }
    let exhausted_exactly = m.iter().skip(step).all(|row| row.iter().skip(step).all(FieldSeries::is_zero));
    if want_det {
        if let Some(d) = det.as_mut() {
            if sign_flip {
                *d = d.neg();
            }
        }
    }
    Ok(Elimination { pivots, det, exhausted_exactly })
}

/// Pivot positions of the same full-pivot elimination as [`eliminate`],
/// found without dividing: each step replaces `row` by
/// `p * row - row[step] * pivot_row`. Every remaining entry is then the true
/// one times the same series (the product of earlier pivots), so degrees and
/// leading elements compare exactly as they would after dividing, and the
/// coefficients stay Laurent polynomials.
fn pivot_search(mut m: Vec<Vec<FieldSeries>>) -> Result<Elimination> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut row_ids: Vec<usize> = (0..rows).collect();
    let mut col_ids: Vec<usize> = (0..cols).collect();
    let mut pivots = Vec::new();
    let mut step = 0;
    while step < rows.min(cols) {
        let mut best: Option<((Weight, GroupElement), usize, usize)> = None;
        for (r, row) in m.iter().enumerate().skip(step) {
            for (c, e) in row.iter().enumerate().skip(step) {
                if let Some(key) = pivot_key(e) {
                    let better = match &best {
                        None => true,
                        Some((bk, br, bc)) => (&key, row_ids[r], col_ids[c]) < (bk, row_ids[*br], col_ids[*bc]),
                    };
                    if better {
                        best = Some((key, r, c));
                    }
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        m.swap(pr, step);
        row_ids.swap(pr, step);
        for row in m.iter_mut() {
            row.swap(pc, step);
        }
        col_ids.swap(pc, step);
        pivots.push((row_ids[step], col_ids[step]));
        let pivot_row = m[step].clone();
        let p = pivot_row[step].clone();
        for row in m.iter_mut().skip(step + 1) {
            let f = std::mem::replace(&mut row[step], FieldSeries::zero(p.base(), p.ctx()));
            for c in step + 1..cols {
                let scaled = row[c].checked_mul(&p)?;
                row[c] = if f.is_zero() || pivot_row[c].is_zero() {
                    scaled
                } else {
                    scaled.checked_sub(&f.checked_mul(&pivot_row[c])?)?
                };
            }
        }
        step += 1;
    }
    let exhausted_exactly = m.iter().skip(step).all(|row| row.iter().skip(step).all(FieldSeries::is_zero));
    Ok(Elimination { pivots, det: None, exhausted_exactly })
}

/// Determinant by expansion along rows, memoized over column subsets; no
/// divisions, so Laurent coefficients never turn into fractions.
fn minor_expansion(m: &[Vec<FieldSeries>]) -> Result<FieldSeries> {
    let n = m.len();
    let (base, ctx) = (m[0][0].base().clone(), *m[0][0].ctx());
    let mut minors: Vec<FieldSeries> = vec![FieldSeries::zero(&base, &ctx); 1 << n];
    minors[0] = FieldSeries::one(&base, &ctx);
    for mask in 1usize..1 << n {
        let r = mask.count_ones() as usize - 1;
        let mut acc = FieldSeries::zero(&base, &ctx);
        for c in (0..n).filter(|c| mask >> c & 1 == 1) {
            let rest = &minors[mask ^ (1 << c)];
            if m[r][c].is_zero() || rest.is_zero() {
                continue;
            }
            let t = m[r][c].checked_mul(rest)?;
            acc = if (mask >> (c + 1)).count_ones() % 2 == 0 { acc.checked_add(&t)? } else { acc.checked_sub(&t)? };
        }
        minors[mask] = acc;
    }
    Ok(minors.pop().expect("nonempty"))
}

/// Matrices up to this size use [`minor_expansion`].
const EXPANSION_LIMIT: usize = 10;

/// Determinant of a square matrix of field-component series.
fn determinant(m: Vec<Vec<FieldSeries>>, cap: Weight) -> Result<FieldSeries> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Structural("determinant of an empty matrix needs a ring".into()));
    }
    if n <= EXPANSION_LIMIT {
        return minor_expansion(&m);
    }
    let (base, ctx) = (m[0][0].base().clone(), *m[0][0].ctx());
    let e = eliminate(m, cap, true)?;
    if e.pivots.len() == n {
        return Ok(e.det.expect("square elimination records a determinant"));
    }
    if e.exhausted_exactly {
        return Ok(FieldSeries::zero(&base, &ctx));
    }
    Err(Error::precision("invertibility of a pivot", e.det.map_or(Cutoff::Infinite, |d| d.cutoff())))
}

/// Torsion (or any per-component value) as a tuple over the field
/// components of a fixed character split.
#[derive(Clone, Debug)]
pub struct TorsionValue {
    split: Arc<CharacterSplit>,
    components: Vec<FieldSeries>,
}

/// Witness of `a = sign * g * b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitWitness {
    pub sign: i8,
    pub element: GroupElement,
    /// Relative precision (cutoff minus degree of the quotient) at which the
    /// quotient was seen to be a monomial.
    pub verified: Cutoff,
}

impl fmt::Display for UnitWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, g^{}) verified to relative weight {}", if self.sign > 0 { "+" } else { "-" }, self.element, self.verified)
    }
}

impl TorsionValue {
    pub fn new(split: &Arc<CharacterSplit>, components: Vec<FieldSeries>) -> Result<Self> {
        if components.len() != split.len() {
            return Err(Error::Structural(format!("{} components, expected {}", components.len(), split.len())));
        }
        Ok(TorsionValue { split: split.clone(), components })
    }

    /// Image of a group-ring element in every component.
    pub fn from_element<C: RationalCoefficient>(split: &Arc<CharacterSplit>, a: &Novikov<C>) -> Result<Self> {
        Ok(TorsionValue { split: split.clone(), components: split.project_all(a)? })
    }

    pub fn one(split: &Arc<CharacterSplit>) -> Self {
        let components = (0..split.len()).map(|k| FieldSeries::one(split.target(), &split.ctx(k))).collect();
        TorsionValue { split: split.clone(), components }
    }

    pub fn split(&self) -> &Arc<CharacterSplit> {
        &self.split
    }

    pub fn components(&self) -> &[FieldSeries] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(usize, &FieldSeries) -> Result<FieldSeries>) -> Result<Self> {
        let components = self.components.iter().enumerate().map(|(k, c)| f(k, c)).collect::<Result<_>>()?;
        Ok(TorsionValue { split: self.split.clone(), components })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.map(|k, c| c.checked_mul(&other.components[k]))
    }

    /// Truncate every component; exact zeros stay exact.
    pub fn truncate(&self, cap: Weight) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| if c.is_zero() { c.clone() } else { c.truncate(cap) })
            .collect();
        TorsionValue { split: self.split.clone(), components }
    }

    /// Componentwise `self / other`; zero components divide to zero.
    pub fn ratio(&self, other: &Self, cap: Weight) -> Result<Self> {
        self.map(|k, c| {
            if c.is_zero() {
                return Ok(c.clone());
            }
            c.checked_mul(&other.components[k].inverse(cap)?)
        })
    }

    /// Lowest cutoff among the components.
    pub fn cutoff(&self) -> Cutoff {
        self.components.iter().map(FieldSeries::cutoff).min().unwrap_or(Cutoff::Infinite)
    }

    /// Componentwise agreement below both cutoffs.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.components.len() == other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| a.agrees_with(b))
    }

    /// Decide `self = +-g * other` for one sign and one `g` shared by all
    /// components.
    pub fn equal_mod_unit(&self, other: &Self, cap: Weight) -> Result<Option<UnitWitness>> {
        if self.components.len() != other.components.len() {
            return Err(Error::Structural("torsion values over different splits".into()));
        }
        let split = &self.split;
        let group = &split.source().group;
        let mut quotients = Vec::new();
        for (a, b) in self.components.iter().zip(&other.components) {
            match (a.is_zero(), b.is_zero()) {
                (true, true) => quotients.push(None),
                (false, false) => {
                    if a.is_empty() || b.is_empty() {
                        return Err(Error::precision("leading term of a torsion component", a.cutoff().min(b.cutoff())));
                    }
                    quotients.push(Some(a.checked_mul(&b.inverse(cap)?)?))
                }
                _ => return Ok(None),
            }
        }
        let mut verified = Cutoff::Infinite;
        let mut shape: Option<(Vec<i64>, Vec<i64>)> = None;
        for q in quotients.iter().flatten() {
            let Some(t) = q.leading_monomial() else {
                return Err(Error::precision("quotient of torsion components", q.cutoff()));
            };
            if q.terms().len() > 1 {
                return Ok(None);
            }
            let Some((_, x)) = t.coeff.as_monomial() else { return Ok(None) };
            verified = verified.min(q.cutoff().shift(-t.weight));
            let s = (t.elem.free.clone(), x);
            match &shape {
                None => shape = Some(s),
                Some(prev) if *prev != s => return Ok(None),
                _ => {}
            }
        }
        let Some((f, x)) = shape else {
            // every component is zero on both sides
            return Ok(Some(UnitWitness { sign: 1, element: group.identity(), verified }));
        };
        let free = split.join_free(&f, &x);
        for t in group.torsion_elements() {
            let g = group.element(free.clone(), t)?;
            for sign in [1i8, -1] {
                let fits = quotients.iter().enumerate().all(|(k, q)| {
                    let Some(q) = q else { return true };
                    let (_, unit) = split.project_element(&g, k);
                    let unit = if sign < 0 { unit.negated() } else { unit };
                    q.terms()[0].coeff == unit
                });
                if fits {
                    return Ok(Some(UnitWitness { sign, element: g, verified }));
                }
            }
        }
        Ok(None)
    }
}

impl fmt::Display for TorsionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, kappa)) in self.components.iter().zip(self.split.characters()).enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "[k={:?} m={}] {}", kappa.values, kappa.order, c)?;
        }
        Ok(())
    }
}
