//! Integer lattice reductions over arbitrary-precision integers: Smith normal
//! form of a relation matrix and unimodular reduction of a single row.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Result of reducing `R` (rows = relations) to `U R V = D`.
///
/// Only the column side is recorded: the row space of `R` is carried onto
/// the row space of `D` by `x -> x V`, which is all a quotient needs.
#[derive(Clone, Debug)]
pub struct SmithForm {
    /// Diagonal entries, nonnegative, each dividing the next nonzero one.
    /// Length = number of columns; entries past the rank are zero.
    pub diagonal: Vec<BigInt>,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

struct Reducer {
    d: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
    rows: usize,
    cols: usize,
}

impl Reducer {
    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for row in self.d.iter_mut() {
            row.swap(a, b);
        }
        for row in self.v.iter_mut() {
            row.swap(a, b);
        }
        self.v_inv.swap(a, b);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap(a, b);
    }

    /// column `dst` += k * column `src`
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for row in self.d.iter_mut() {
            let t = &row[src] * k;
            row[dst] += t;
        }
        for row in self.v.iter_mut() {
            let t = &row[src] * k;
            row[dst] += t;
        }
        // V' = V E  =>  V'^{-1} = E^{-1} V^{-1}: row src -= k * row dst
        let dst_row = self.v_inv[dst].clone();
        for (x, y) in self.v_inv[src].iter_mut().zip(dst_row.iter()) {
            *x -= y * k;
        }
    }

    /// row `dst` += k * row `src`
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let src_row = self.d[src].clone();
        for (x, y) in self.d[dst].iter_mut().zip(src_row.iter()) {
            *x += y * k;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for row in self.d.iter_mut() {
            row[c] = -&row[c];
        }
        for row in self.v.iter_mut() {
            row[c] = -&row[c];
        }
        for x in self.v_inv[c].iter_mut() {
            *x = -&*x;
        }
    }

    fn smallest_nonzero(&self, from: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in from..self.rows {
            for j in from..self.cols {
                if self.d[i][j].is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.d[bi][bj].abs() <= self.d[i][j].abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    fn run(mut self) -> SmithForm {
        let n = self.rows.min(self.cols);
        let mut k = 0;
        while k < n {
            let Some((pi, pj)) = self.smallest_nonzero(k) else { break };
            self.swap_rows(k, pi);
            self.swap_cols(k, pj);
            loop {
                let mut dirty = false;
                for i in k + 1..self.rows {
                    if self.d[i][k].is_zero() {
                        continue;
                    }
                    let q = self.d[i][k].div_floor(&self.d[k][k]);
                    self.add_row(i, k, &-q);
                    if !self.d[i][k].is_zero() {
                        self.swap_rows(k, i);
                        dirty = true;
                    }
                }
                for j in k + 1..self.cols {
                    if self.d[k][j].is_zero() {
                        continue;
                    }
                    let q = self.d[k][j].div_floor(&self.d[k][k]);
                    self.add_col(j, k, &-q);
                    if !self.d[k][j].is_zero() {
                        self.swap_cols(k, j);
                        dirty = true;
                    }
                }
                if dirty {
                    continue;
                }
                // pivot must divide the rest of the block
                let mut offender = None;
                'scan: for i in k + 1..self.rows {
                    for j in k + 1..self.cols {
                        if !(&self.d[i][j] % &self.d[k][k]).is_zero() {
                            offender = Some(i);
                            break 'scan;
                        }
                    }
                }
                match offender {
                    Some(i) => self.add_row(k, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.d[k][k].is_negative() {
                self.negate_col(k);
            }
            k += 1;
        }
        let diagonal = (0..self.cols)
            .map(|j| if j < self.rows { self.d[j][j].clone() } else { BigInt::zero() })
            .collect();
        SmithForm { diagonal, v: self.v, v_inv: self.v_inv }
    }
}

/// Smith normal form of an integer matrix with `cols` columns.
pub fn smith_normal_form(rows: &[Vec<BigInt>], cols: usize) -> SmithForm {
    let reducer = Reducer {
        d: rows.to_vec(),
        v: identity(cols),
        v_inv: identity(cols),
        rows: rows.len(),
        cols,
    };
    reducer.run()
}

/// Unimodular `W` with `row * W = (g, 0, .., 0)`, `g = gcd(row) >= 0`.
///
/// Columns `1..` of `W` span the kernel of `row`; when `g > 0`, column 0
/// is a complement on which `row` takes the value `g`.
#[derive(Clone, Debug)]
pub struct RowReduction {
    pub gcd: BigInt,
    pub w: IntMatrix,
    pub w_inv: IntMatrix,
}

pub fn reduce_row(row: &[BigInt]) -> RowReduction {
    let n = row.len();
    let mut vals = row.to_vec();
    let mut w = identity(n);
    let mut w_inv = identity(n);
    for j in 1..n {
        if vals[j].is_zero() {
            continue;
        }
        let (a, b) = (vals[0].clone(), vals[j].clone());
        let eg = a.extended_gcd(&b);
        let g = eg.gcd;
        let (x, y) = (eg.x, eg.y);
        // [c0 cj] <- [c0 cj] * [[x, -b/g], [y, a/g]], determinant 1
        let (p, q) = (-(&b / &g), &a / &g);
        for r in w.iter_mut() {
            let c0 = &r[0] * &x + &r[j] * &y;
            let cj = &r[0] * &p + &r[j] * &q;
            r[0] = c0;
            r[j] = cj;
        }
        // inverse of [[x, p], [y, q]] is [[q, -p], [-y, x]]
        let (r0, rj) = (w_inv[0].clone(), w_inv[j].clone());
        for k in 0..n {
            w_inv[0][k] = &q * &r0[k] - &p * &rj[k];
            w_inv[j][k] = -(&y * &r0[k]) + &x * &rj[k];
        }
        vals[0] = g;
        vals[j] = BigInt::zero();
    }
    if n > 0 && vals[0].is_negative() {
        for r in w.iter_mut() {
            r[0] = -&r[0];
        }
        for x in w_inv[0].iter_mut() {
            *x = -&*x;
        }
        vals[0] = -&vals[0];
    }
    // kernel columns: first nonzero entry positive
    for j in 1..n {
        let first = (0..n).map(|i| &w[i][j]).find(|x| !x.is_zero()).cloned();
        if first.is_some_and(|x| x.is_negative()) {
            for r in w.iter_mut() {
                r[j] = -&r[j];
            }
            for x in w_inv[j].iter_mut() {
                *x = -&*x;
            }
        }
    }
    let gcd = if n == 0 { BigInt::zero() } else { vals[0].clone() };
    RowReduction { gcd, w, w_inv }
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn diag(s: &SmithForm) -> Vec<i64> {
        s.diagonal.iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn smith_of_diagonal_with_column_swap() {
        // [[0,2],[6,0]] is [[2,0],[0,6]] with columns swapped
        let s = smith_normal_form(&m(&[&[0, 2], &[6, 0]]), 2);
        assert_eq!(diag(&s), vec![2, 6]);
        assert_eq!(mat_mul(&s.v, &s.v_inv), identity(2));
    }

    #[test]
    fn smith_forces_divisibility_chain() {
        // Z/4 + Z/6 = Z/2 + Z/12
        let s = smith_normal_form(&m(&[&[4, 0], &[0, 6]]), 2);
        assert_eq!(diag(&s), vec![2, 12]);
    }

    #[test]
    fn smith_relations_vanish_after_projection() {
        let r = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = smith_normal_form(&r, 3);
        assert_eq!(diag(&s), vec![2, 6, 12]);
        let rv = mat_mul(&r, &s.v);
        for row in rv {
            for (j, x) in row.iter().enumerate() {
                if s.diagonal[j].is_zero() {
                    assert!(x.is_zero());
                } else {
                    assert!((x % &s.diagonal[j]).is_zero());
                }
            }
        }
        assert_eq!(mat_mul(&s.v_inv, &s.v), identity(3));
    }

    #[test]
    fn empty_and_zero_relations() {
        let s = smith_normal_form(&[], 2);
        assert_eq!(diag(&s), vec![0, 0]);
        let s = smith_normal_form(&m(&[&[0]]), 1);
        assert_eq!(diag(&s), vec![0]);
    }

    #[test]
    fn row_reduction_kernel() {
        let r = reduce_row(&[BigInt::from(2), BigInt::from(4)]);
        assert_eq!(r.gcd, BigInt::from(2));
        assert_eq!(r.w, m(&[&[1, 2], &[0, -1]]));
        assert_eq!(mat_mul(&r.w, &r.w_inv), identity(2));

        let r = reduce_row(&[BigInt::from(-6), BigInt::from(10), BigInt::from(15)]);
        assert_eq!(r.gcd, BigInt::from(1));
        let prod = mat_mul(&m(&[&[-6, 10, 15]]), &r.w);
        assert_eq!(prod, m(&[&[1, 0, 0]]));
        assert_eq!(mat_mul(&r.w_inv, &r.w), identity(3));
    }
}
