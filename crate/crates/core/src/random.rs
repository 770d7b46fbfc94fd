//! Seeded generation of acyclic Floer states and random move scripts.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_traits::Signed;

use crate::complex::{GradedComplex, Grading};
use crate::engine::{apply_move, EngineOptions, FloerState, Move};
use crate::error::{Error, Result};
use crate::fields::character_split;
use crate::group::{split_by_psi, GradingGroup, GroupElement, SFHom, WeightHom};
use crate::novikov::{Degree, Novikov, SeriesBase};
use crate::scalar::{Coefficient, Cutoff, Weight};
use crate::zeta::{eta_from_orbits, OrbitLedger};
use crate::RatSeries;

#[derive(Clone, Debug)]
pub struct RandomConfig {
    /// Rank of `ker psi`.
    pub max_rank: usize,
    pub max_torsion_order: i64,
    pub max_generators: usize,
    pub max_moves: usize,
    /// Working cutoff of the generated states.
    pub working_cutoff: Weight,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            max_rank: 2,
            max_torsion_order: 4,
            max_generators: 6,
            max_moves: 20,
            working_cutoff: Weight::from_integer(11),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomCase {
    pub seed: u64,
    pub states: Vec<FloerState>,
    pub moves: Vec<Move>,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a RandomConfig,
    base: Arc<SeriesBase>,
    /// small elements of weight 0 and of positive weight
    flat: Vec<GroupElement>,
    positive: Vec<GroupElement>,
    fresh: usize,
}

fn torsion_choices(max_order: i64) -> Vec<Vec<i64>> {
    [vec![], vec![2], vec![3], vec![4], vec![2, 2]]
        .into_iter()
        .filter(|t| t.iter().product::<i64>() <= max_order)
        .collect()
}

/// Ambient group, grading shift and weight; returns `ker psi` with the
/// restricted weight.
fn random_base(rng: &mut ChaCha8Rng, cfg: &RandomConfig) -> Result<Arc<SeriesBase>> {
    let torsions = torsion_choices(cfg.max_torsion_order);
    loop {
        let k_rank = rng.gen_range(1..=cfg.max_rank.max(1));
        let with_psi = rng.gen_bool(0.4);
        let rank = k_rank + usize::from(with_psi);
        let torsion = torsions.choose(rng).cloned().unwrap_or_default();
        let ambient = GradingGroup::new(rank, torsion)?;
        let psi: Vec<i64> = if with_psi {
            (0..rank).map(|_| 2 * rng.gen_range(-2..=2)).collect()
        } else {
            vec![0; rank]
        };
        if with_psi && psi.iter().all(|&x| x == 0) {
            continue;
        }
        let splitting = split_by_psi(&ambient, &SFHom::new(psi)?)?;
        let y: Vec<Weight> = (0..rank).map(|_| Weight::from_integer(rng.gen_range(-2..=2))).collect();
        let weight = splitting.restrict(&WeightHom::new(y).negated());
        if weight.is_zero() || weight.free_values.iter().any(|w| w.abs() > Weight::from_integer(3)) {
            continue;
        }
        return SeriesBase::new(splitting.kernel.clone(), weight);
    }
}

impl<'a> Gen<'a> {
    fn new(seed: u64, cfg: &'a RandomConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_base(&mut rng, cfg)?;
        let group = &base.group;
        let mut flat = Vec::new();
        let mut positive = Vec::new();
        let ranges: Vec<Vec<i64>> = (0..group.rank()).map(|_| (-2..=2).collect()).collect();
        let mut frees = vec![Vec::new()];
        for r in &ranges {
            frees = frees
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    r.iter().map(move |x| {
                        let mut q = p.clone();
                        q.push(*x);
                        q
                    })
                })
                .collect();
        }
        for f in frees {
            for t in group.torsion_elements() {
                let g = group.element(f.clone(), t)?;
                let w = base.weight_of(&g);
                if w == Weight::from_integer(0) {
                    flat.push(g);
                } else if w > Weight::from_integer(0) && w <= Weight::from_integer(4) {
                    positive.push(g);
                }
            }
        }
        if positive.is_empty() {
            return Err(Error::Validation("generated weight has no small positive elements".into()));
        }
        Ok(Gen { rng, cfg, base, flat, positive, fresh: 0 })
    }

    fn coeff(&mut self) -> BigRational {
        let n = *[-2i64, -1, 1, 1, 2, 3].choose(&mut self.rng).unwrap();
        let d = *[1i64, 1, 1, 2, 3].choose(&mut self.rng).unwrap();
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn pick(&mut self, positive: bool) -> GroupElement {
        let pool = if positive || self.flat.is_empty() || self.rng.gen_bool(0.6) { &self.positive } else { &self.flat };
        pool.choose(&mut self.rng).unwrap().clone()
    }

    /// Random series with 1..=terms terms of positive (or nonnegative) degree.
    fn series(&mut self, terms: usize, positive: bool) -> RatSeries {
        let n = self.rng.gen_range(1..=terms);
        let items: Vec<_> = (0..n).map(|_| (self.pick(positive), self.coeff())).collect();
        let s = Novikov::from_terms(&self.base, &(), items, Cutoff::Infinite);
        if s.is_zero() {
            self.series(terms, positive)
        } else {
            s
        }
    }

    fn name(&mut self) -> String {
        self.fresh += 1;
        format!("g{}", self.fresh)
    }

    fn birth(&mut self, state: &FloerState) -> Move {
        let c = state.complex();
        let grade = self.rng.gen_range(0..2);
        let lower = 1 - grade;
        let b = self.series(2, true);
        let mut v = Vec::new();
        let mut w = Vec::new();
        for k in 0..c.len() {
            if !self.rng.gen_bool(0.5) {
                continue;
            }
            let s = self.series(2, false);
            if c.grade(k) == grade {
                v.push((c.names()[k].clone(), s));
            } else if c.grade(k) == lower {
                w.push((c.names()[k].clone(), s));
            }
        }
        let position = self.rng.gen_range(0..=c.len());
        Move::Birth { z_plus: self.name(), z_minus: self.name(), position, grade, b, v, w }
    }

    fn hs1(&mut self, state: &FloerState) -> Option<Move> {
        let c = state.complex();
        let pairs: Vec<(usize, usize)> = (0..c.len())
            .flat_map(|x| (0..c.len()).map(move |y| (x, y)))
            .filter(|&(x, y)| x != y && c.grade(x) == c.grade(y))
            .collect();
        let &(x, y) = pairs.choose(&mut self.rng)?;
        let a = self.pick(false);
        let sign = if self.rng.gen_bool(0.5) { 1 } else { -1 };
        let chi = Novikov::monomial(&self.base, &(), a, BigRational::from_integer(sign.into()));
        Some(Move::HandleSlide { x: c.names()[x].clone(), y: c.names()[y].clone(), chi })
    }

    fn hs2(&mut self, state: &FloerState) -> Option<Move> {
        let c = state.complex();
        if c.is_empty() {
            return None;
        }
        let x = c.names()[self.rng.gen_range(0..c.len())].clone();
        let chi = self.series(3, true);
        Some(Move::HandleSlide { x: x.clone(), y: x, chi })
    }

    fn death(&mut self, state: &FloerState) -> Option<Move> {
        let c = state.complex();
        let mut pairs = Vec::new();
        for zp in 0..c.len() {
            for zm in 0..c.len() {
                let e = c.entry(zm, zp);
                let unit_lead = matches!(e.degree(), Degree::Finite(d) if d == Weight::from_integer(0))
                    && e.leading_monomial().is_some_and(|t| t.elem.is_identity() && t.coeff.is_unity());
                if c.compatible(zm, zp) && unit_lead {
                    pairs.push((zp, zm));
                }
            }
        }
        let &(zp, zm) = pairs.choose(&mut self.rng)?;
        Some(Move::Death { z_plus: c.names()[zp].clone(), z_minus: c.names()[zm].clone() })
    }

    fn next_move(&mut self, state: &FloerState) -> Move {
        let n = state.complex().len();
        loop {
            let roll = self.rng.gen_range(0..4);
            let mv = match roll {
                0 => self.hs1(state),
                1 => self.hs2(state),
                2 => self.death(state),
                _ if n + 2 <= self.cfg.max_generators => Some(self.birth(state)),
                _ => None,
            };
            if let Some(m) = mv {
                return m;
            }
        }
    }
}

/// A seeded acyclic state (built from the empty complex by births and
/// slides) and a script of at most `max_moves` moves, with every
/// intermediate state.
pub fn random_case(seed: u64, cfg: &RandomConfig) -> Result<RandomCase> {
    let mut g = Gen::new(seed, cfg)?;
    let split = Arc::new(character_split(&g.base)?);
    let complex = GradedComplex::new(Grading::Z2, &g.base, &(), Vec::new())?;
    let mut ledger = OrbitLedger::default();
    for _ in 0..g.rng.gen_range(0..=3) {
        let a = g.pick(true);
        let sign = if g.rng.gen_bool(0.5) { 1 } else { -1 };
        let mult = g.rng.gen_range(1..=3);
        if g.rng.gen_bool(0.3) {
            ledger.push_covers(&g.base, &a, sign, mult, cfg.working_cutoff)?;
        } else {
            ledger.push(a, sign, mult);
        }
    }
    let eta = eta_from_orbits(&g.base, &ledger)?.truncate_to(Cutoff::Finite(cfg.working_cutoff));
    let opts = EngineOptions::default();
    let mut state = FloerState::new(split, complex, eta, cfg.working_cutoff)?;
    let seeds = g.rng.gen_range(1..=cfg.max_generators / 2);
    for _ in 0..seeds {
        let mv = g.birth(&state);
        state = apply_move(&state, &mv, &opts)?;
    }
    for _ in 0..g.rng.gen_range(0..=2) {
        if let Some(mv) = g.hs1(&state) {
            state = apply_move(&state, &mv, &opts)?;
        }
    }
    let count = g.rng.gen_range(1..=cfg.max_moves);
    let mut states = vec![state];
    let mut moves = Vec::with_capacity(count);
    for _ in 0..count {
        let current = states.last().expect("nonempty");
        let mv = g.next_move(current);
        let next = apply_move(current, &mv, &opts)?;
        moves.push(mv);
        states.push(next);
    }
    Ok(RandomCase { seed, states, moves })
}

/// Random ring elements for the closed-form checks: `(b, v, w)` with
/// `deg b > 0`, over a random base.
pub fn random_block(seed: u64, cfg: &RandomConfig, len: usize) -> Result<(RatSeries, Vec<RatSeries>, Vec<RatSeries>)> {
    let mut g = Gen::new(seed, cfg)?;
    let b = g.series(3, true);
    let v = (0..len).map(|_| g.series(2, false)).collect();
    let w = (0..len).map(|_| g.series(2, false)).collect();
    Ok((b, v, w))
}

/// Random series of positive degree over a random base, for kernel tests.
pub fn random_positive_series(seed: u64, cfg: &RandomConfig) -> Result<RatSeries> {
    let mut g = Gen::new(seed, cfg)?;
    Ok(g.series(4, true))
}
