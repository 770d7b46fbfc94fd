//! Exact arithmetic in cyclotomic fields `Q(zeta_m)`, stored as residues
//! modulo the m-th cyclotomic polynomial in the power basis `1, z, .., z^(phi(m)-1)`.

use std::fmt;
use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::{qadd, qmul, qsub};

/// Largest order the precomputed table covers.
pub const MAX_CYCLOTOMIC_ORDER: u32 = 120;

/// Default bound on the orders a character splitting may use.
pub const DEFAULT_ORDER_BOUND: u32 = 12;

fn table() -> &'static [Vec<i64>] {
    static TABLE: OnceLock<Vec<Vec<i64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = MAX_CYCLOTOMIC_ORDER as usize;
        let mut phis: Vec<Vec<i64>> = vec![Vec::new(); n + 1];
        for m in 1..=n {
            // x^m - 1 divided by every Phi_d with d | m, d < m
            let mut p = vec![0i64; m + 1];
            p[0] = -1;
            p[m] = 1;
            for d in (1..m).filter(|d| m % d == 0) {
                p = int_div_monic(&p, &phis[d]);
            }
            phis[m] = p;
        }
        phis
    })
}

fn int_div_monic(p: &[i64], d: &[i64]) -> Vec<i64> {
    let mut r = p.to_vec();
    let dn = d.len() - 1;
    let mut q = vec![0i64; r.len() - dn];
    for i in (0..q.len()).rev() {
        let c = r[i + dn];
        q[i] = c;
        for (j, &dj) in d.iter().enumerate() {
            r[i + j] -= c * dj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// Coefficients (low to high) of the m-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(m: u32) -> &'static [i64] {
    assert!(
        (1..=MAX_CYCLOTOMIC_ORDER).contains(&m),
        "cyclotomic order {m} outside 1..={MAX_CYCLOTOMIC_ORDER}"
    );
    &table()[m as usize]
}

pub fn euler_phi(m: u32) -> usize {
    (1..=m).filter(|k| k.gcd(&m) == 1).count()
}

// --- dense polynomials over Q, low to high ---

pub(crate) type QPoly = Vec<BigRational>;

fn trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_sub(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    let mut out: QPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            match b.get(i) {
                Some(y) => x - y,
                None => x,
            }
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_mul(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_divrem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    let mut r = a.clone();
    trim(&mut r);
    let bn = b.len() - 1;
    let lead_inv = b[bn].recip();
    if r.len() <= bn {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - bn];
    for i in (0..q.len()).rev() {
        let c = &r[i + bn] * &lead_inv;
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

/// `u` with `u a = 1 mod f`, for `a` coprime to `f`.
fn poly_inverse_mod(a: &QPoly, f: &QPoly) -> Option<QPoly> {
    // invariant: s_i a = r_i mod f
    let (mut r0, mut r1) = (f.clone(), a.clone());
    let (mut s0, mut s1): (QPoly, QPoly) = (Vec::new(), vec![BigRational::one()]);
    trim(&mut r1);
    while !r1.is_empty() {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = r0[0].recip();
    Some(s0.into_iter().map(|x| x * &c).collect())
}

/// Element of `Q(zeta_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cyclo {
    m: u32,
    c: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero(m: u32) -> Self {
        Cyclo { m, c: vec![BigRational::zero(); euler_phi(m)] }
    }

    pub fn from_rational(m: u32, q: BigRational) -> Self {
        let mut z = Self::zero(m);
        z.c[0] = q;
        z
    }

    pub fn one(m: u32) -> Self {
        Self::from_rational(m, BigRational::one())
    }

    /// `zeta_m^k`.
    pub fn zeta_power(m: u32, k: i64) -> Self {
        let e = k.rem_euclid(m as i64) as usize;
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = BigRational::one();
        Self::reduce(m, v)
    }

    fn reduce(m: u32, mut v: Vec<BigRational>) -> Self {
        let phi = cyclotomic_polynomial(m);
        let deg = phi.len() - 1;
        for i in (deg..v.len()).rev() {
            let c = std::mem::replace(&mut v[i], BigRational::zero());
            if c.is_zero() {
                continue;
            }
            for (j, &pj) in phi[..deg].iter().enumerate() {
                if pj != 0 {
                    v[i - deg + j] = qsub(&v[i - deg + j], &qmul(&c, &BigRational::from_integer(pj.into())));
                }
            }
        }
        v.resize(deg, BigRational::zero());
        Cyclo { m, c: v }
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    /// The value when it lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.c[1..].iter().all(Zero::is_zero).then(|| &self.c[0])
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(One::is_one)
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.m, o.m);
        Cyclo { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| qadd(a, b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.m, o.m);
        Cyclo { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| qsub(a, b)).collect() }
    }

    pub fn neg(&self) -> Self {
        Cyclo { m: self.m, c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Cyclo { m: self.m, c: self.c.iter().map(|a| qmul(a, q)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.m, o.m);
        if self.c.len() == 1 {
            return Cyclo { m: self.m, c: vec![qmul(&self.c[0], &o.c[0])] };
        }
        let mut v = vec![BigRational::zero(); 2 * self.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] = qadd(&v[i + j], &qmul(a, b));
                }
            }
        }
        Self::reduce(self.m, v)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.c.len() == 1 {
            return (!self.c[0].is_zero()).then(|| Cyclo { m: self.m, c: vec![self.c[0].recip()] });
        }
        if self.is_zero() {
            return None;
        }
        let f: QPoly = cyclotomic_polynomial(self.m).iter().map(|&x| BigRational::from_integer(x.into())).collect();
        let inv = poly_inverse_mod(&self.c, &f)?;
        Some(Self::reduce(self.m, inv))
    }

    /// Galois automorphism `zeta -> zeta^u`, `gcd(u, m) = 1`.
    pub fn galois(&self, u: i64) -> Self {
        let m = self.m as i64;
        let mut v = vec![BigRational::zero(); self.m as usize];
        for (j, a) in self.c.iter().enumerate() {
            v[(j as i64 * u).rem_euclid(m) as usize] += a;
        }
        Self::reduce(self.m, v)
    }

    /// Field trace down to Q.
    pub fn trace(&self) -> BigRational {
        let m = self.m as i64;
        let mut acc = Self::zero(self.m);
        for u in (1..=m).filter(|u| u.gcd(&m) == 1) {
            acc = acc.add(&self.galois(u));
        }
        acc.as_rational().cloned().expect("trace is rational")
    }

    /// Same value, viewed in `Q(zeta_n)` for a multiple `n` of `m`.
    pub fn lift(&self, n: u32) -> Self {
        assert_eq!(n % self.m, 0, "Q(zeta_{}) is not contained in Q(zeta_{n})", self.m);
        let k = (n / self.m) as usize;
        let mut v = vec![BigRational::zero(); (self.c.len() - 1) * k + 1];
        for (j, a) in self.c.iter().enumerate() {
            v[j * k] = a.clone();
        }
        Self::reduce(n, v)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if a.is_negative() { " - " } else { " + " })?;
            } else if a.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let abs = a.abs();
            match j {
                0 => write!(f, "{abs}")?,
                _ if abs.is_one() => write!(f, "z{}^{j}", self.m)?,
                _ => write!(f, "{abs}*z{}^{j}", self.m)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
