//! Exact and local linear algebra over the integers.
//!
//! * [`bareiss_determinant`] and [`sylvester_resultant`] work over `Z` with
//!   fraction-free elimination.
//! * [`resultant`] adds one pseudo-division step before the Sylvester
//!   determinant, which keeps the matrix small when the degrees are lopsided.
//! * [`local_elementary_divisors`] computes the p-parts of the elementary
//!   divisors of an integer lattice by elimination over `Z/p^N`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, Prime};
use crate::poly::IwaPoly;

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn bareiss_determinant(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = matrix.to_vec();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            negate = !negate;
        }
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot = &pivot_row[k];
        for row in tail.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..n {
                let t = pivot * &row[j] - &lead * &pivot_row[j];
                row[j] = if prev.is_one() { t } else { t / &prev };
            }
            row[k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// `Res(f, g)` as the determinant of the Sylvester matrix.
pub fn sylvester_resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let (Some(df), Some(dg)) = (f.len().checked_sub(1), g.len().checked_sub(1)) else {
        return BigInt::zero();
    };
    if df == 0 {
        return num_traits::pow(f[0].clone(), dg);
    }
    if dg == 0 {
        return num_traits::pow(g[0].clone(), df);
    }
    let size = df + dg;
    let mut m = vec![vec![BigInt::zero(); size]; size];
    for i in 0..dg {
        for (j, c) in f.iter().rev().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..df {
        for (j, c) in g.iter().rev().enumerate() {
            m[dg + i][i + j] = c.clone();
        }
    }
    bareiss_determinant(&m)
}

fn trimmed(c: &[BigInt]) -> &[BigInt] {
    let mut end = c.len();
    while end > 0 && c[end - 1].is_zero() {
        end -= 1;
    }
    &c[..end]
}

/// Pseudo-remainder: `lc(g)^(deg f - deg g + 1) * f = q * g + r`.
fn pseudo_remainder(f: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
    let df = f.len() - 1;
    let dg = g.len() - 1;
    let lc = &g[dg];
    let mut r = f.to_vec();
    for i in (dg..=df).rev() {
        let c = r[i].clone();
        for x in r.iter_mut().take(i + 1) {
            *x *= lc;
        }
        for (j, gj) in g.iter().enumerate() {
            r[i - dg + j] -= &c * gj;
        }
    }
    r.truncate(dg);
    while r.last().is_some_and(|c| c.is_zero()) {
        r.pop();
    }
    r
}

/// Exact resultant `Res(f, g)` of integer polynomials (coefficients listed
/// constant term first).
///
/// The larger-degree operand is first replaced by its pseudo-remainder
/// modulo the smaller one, then the Sylvester determinant is taken.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let f = trimmed(f);
    let g = trimmed(g);
    if f.is_empty() || g.is_empty() {
        return BigInt::zero();
    }
    let df = f.len() - 1;
    let dg = g.len() - 1;
    if df == 0 || dg == 0 {
        return sylvester_resultant(f, g);
    }
    if df < dg {
        let r = resultant(g, f);
        return if (df * dg) % 2 == 1 { -r } else { r };
    }
    // Res(f, g) = (-1)^(df dg) Res(g, f), and with lc(g)^k f = q g + r:
    // Res(g, f) * lc(g)^(k dg) = lc(g)^(df - dr) * Res(g, r).
    let k = df - dg + 1;
    let r = pseudo_remainder(f, g);
    if r.is_empty() {
        return BigInt::zero();
    }
    let dr = r.len() - 1;
    let lc = g[dg].clone();
    let res_gr = sylvester_resultant(g, &r);
    let up = df - dr;
    let down = k * dg;
    let res_gf = if up >= down {
        res_gr * num_traits::pow(lc, up - down)
    } else {
        let d = num_traits::pow(lc, down - up);
        let (q, rem) = res_gr.div_rem(&d);
        debug_assert!(rem.is_zero(), "inexact resultant normalization");
        q
    };
    if (df * dg) % 2 == 1 {
        -res_gf
    } else {
        res_gf
    }
}

/// Resultant of two polynomials (integer lifts of modular inputs).
pub fn poly_resultant(f: &IwaPoly, g: &IwaPoly) -> BigInt {
    resultant(f.coeffs(), g.coeffs())
}

/// Residue arithmetic modulo `p^N`, dispatched on the size of the modulus.
trait Residues {
    type E: Clone;
    fn embed(&self, x: &BigInt) -> Self::E;
    /// `None` for zero modulo `p^N`.
    fn valuation(&self, x: &Self::E) -> Option<u32>;
    /// Inverse of the unit part `pivot / p^v`.
    fn unit_inverse(&self, pivot: &Self::E, v: u32) -> Self::E;
    /// `(x / p^v) * inv`, reduced.
    fn quotient(&self, x: &Self::E, inv: &Self::E, v: u32) -> Self::E;
    /// `x - c * y`.
    fn sub_mul(&self, x: &Self::E, c: &Self::E, y: &Self::E) -> Self::E;
}

struct SmallResidues {
    p: u64,
    q: u128,
}

impl SmallResidues {
    fn pow_p(&self, v: u32) -> u128 {
        (self.p as u128).pow(v)
    }
}

impl Residues for SmallResidues {
    type E = u128;
    fn embed(&self, x: &BigInt) -> u128 {
        let r = x.mod_floor(&BigInt::from(self.q));
        u128::try_from(r).expect("residue below modulus")
    }
    fn valuation(&self, x: &u128) -> Option<u32> {
        if *x == 0 {
            return None;
        }
        let mut v = 0;
        let mut y = *x;
        while y.is_multiple_of(self.p as u128) {
            y /= self.p as u128;
            v += 1;
        }
        Some(v)
    }
    fn unit_inverse(&self, pivot: &u128, v: u32) -> u128 {
        let unit = pivot / self.pow_p(v);
        mod_inverse(&BigInt::from(unit), &BigInt::from(self.q))
            .and_then(|i| u128::try_from(i).ok())
            .expect("pivot unit is invertible")
    }
    fn quotient(&self, x: &u128, inv: &u128, v: u32) -> u128 {
        (x / self.pow_p(v)) * inv % self.q
    }
    fn sub_mul(&self, x: &u128, c: &u128, y: &u128) -> u128 {
        let prod = c * y % self.q;
        (x + self.q - prod) % self.q
    }
}

struct BigResidues {
    prime: Prime,
    q: BigInt,
}

impl Residues for BigResidues {
    type E = BigInt;
    fn embed(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.q)
    }
    fn valuation(&self, x: &BigInt) -> Option<u32> {
        self.prime.valuation(x)
    }
    fn unit_inverse(&self, pivot: &BigInt, v: u32) -> BigInt {
        mod_inverse(&(pivot / self.prime.pow(v)), &self.q).expect("pivot unit is invertible")
    }
    fn quotient(&self, x: &BigInt, inv: &BigInt, v: u32) -> BigInt {
        ((x / self.prime.pow(v)) * inv).mod_floor(&self.q)
    }
    fn sub_mul(&self, x: &BigInt, c: &BigInt, y: &BigInt) -> BigInt {
        (x - c * y).mod_floor(&self.q)
    }
}

/// Valuations of the elementary divisors of the lattice spanned by `rows`
/// inside `Z^ncols`, computed over `Z/p^N`.
///
/// The lattice must have full rank `ncols`, so that `Z_p^ncols / L` is finite
/// with length equal to the sum of the returned valuations. An elementary
/// divisor reaching `p^N` cannot be told apart from zero and is reported as
/// [`Error::PrecisionExhausted`].
pub fn local_elementary_divisors(
    prime: Prime,
    rows: &[Vec<BigInt>],
    ncols: usize,
    n: u32,
) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    let q = prime.pow(n);
    if q.bits() < 63 {
        let ring = SmallResidues {
            p: prime.get(),
            q: u128::try_from(q).expect("fits"),
        };
        eliminate(&ring, rows, ncols, n)
    } else {
        eliminate(&BigResidues { prime, q }, rows, ncols, n)
    }
}

fn eliminate<R: Residues>(
    ring: &R,
    rows: &[Vec<BigInt>],
    ncols: usize,
    n: u32,
) -> Result<Vec<u32>> {
    let mut m: Vec<Vec<R::E>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "ragged relation matrix");
            r.iter().map(|x| ring.embed(x)).collect()
        })
        .collect();
    // Column permutation tracked implicitly: active columns are kept in `cols`.
    let mut cols: Vec<usize> = (0..ncols).collect();
    let mut divisors = Vec::with_capacity(ncols);
    let mut top = 0;
    while !cols.is_empty() {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for (i, row) in m.iter().enumerate().skip(top) {
            for (ci, &c) in cols.iter().enumerate() {
                if let Some(v) = ring.valuation(&row[c]) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, ci));
                        if v == 0 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((v, pi, pci)) = best else {
            return Err(Error::PrecisionExhausted(format!(
                "{} elementary divisor(s) vanish modulo p^{n}",
                cols.len()
            )));
        };
        m.swap(top, pi);
        let pc = cols.swap_remove(pci);
        let (head, tail) = m.split_at_mut(top + 1);
        let pivot_row = &head[top];
        let inv = ring.unit_inverse(&pivot_row[pc], v);
        for row in tail.iter_mut() {
            if ring.valuation(&row[pc]).is_none() {
                continue;
            }
            let c = ring.quotient(&row[pc], &inv, v);
            for &j in &cols {
                row[j] = ring.sub_mul(&row[j], &c, &pivot_row[j]);
            }
            row[pc] = ring.embed(&BigInt::zero());
        }
        divisors.push(v);
        top += 1;
    }
    divisors.sort_unstable();
    Ok(divisors)
}

/// Length of `Z_p^ncols / L`, i.e. the exponent `e` with `|quotient| = p^e`.
pub fn quotient_length(prime: Prime, rows: &[Vec<BigInt>], ncols: usize, n: u32) -> Result<u64> {
    Ok(local_elementary_divisors(prime, rows, ncols, n)?
        .into_iter()
        .map(u64::from)
        .sum())
}

/// `|x|` helper for diagnostics.
pub fn bit_size(x: &BigInt) -> u64 {
    x.abs().bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Leibniz expansion, for tiny matrices only.
    fn leibniz(m: &[Vec<BigInt>]) -> BigInt {
        fn rec(m: &[Vec<BigInt>], row: usize, used: &mut Vec<bool>) -> BigInt {
            if row == m.len() {
                return BigInt::one();
            }
            let mut acc = BigInt::zero();
            for c in 0..m.len() {
                if used[c] {
                    continue;
                }
                // parity of the number of unused columns before c
                let before = (0..c).filter(|&k| !used[k]).count();
                let sign = if before % 2 == 0 { 1 } else { -1 };
                used[c] = true;
                acc += BigInt::from(sign) * &m[row][c] * rec(m, row + 1, used);
                used[c] = false;
            }
            acc
        }
        rec(m, 0, &mut vec![false; m.len()])
    }

    #[test]
    fn bareiss_small() {
        let m = vec![big(&[2, 0, 1]), big(&[1, 3, 2]), big(&[1, 1, 2])];
        assert_eq!(bareiss_determinant(&m), BigInt::from(6));
        let singular = vec![big(&[1, 2]), big(&[2, 4])];
        assert!(bareiss_determinant(&singular).is_zero());
        let needs_swap = vec![big(&[0, 1]), big(&[1, 0])];
        assert_eq!(bareiss_determinant(&needs_swap), BigInt::from(-1));
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res(X - 2, X^2 - 1) = (2^2 - 1) = 3
        assert_eq!(resultant(&big(&[-2, 1]), &big(&[-1, 0, 1])), BigInt::from(3));
        // common root
        assert!(resultant(&big(&[-1, 1]), &big(&[-1, 0, 1])).is_zero());
        // constants
        assert_eq!(resultant(&big(&[3]), &big(&[1, 1, 1])), BigInt::from(9));
    }

    #[test]
    fn elementary_divisors_of_diagonal() {
        let p = Prime::new(3).unwrap();
        let rows = vec![big(&[9, 0]), big(&[0, 6])];
        assert_eq!(local_elementary_divisors(p, &rows, 2, 10).unwrap(), vec![1, 2]);
        assert!(matches!(
            local_elementary_divisors(p, &rows, 2, 2),
            Err(Error::PrecisionExhausted(_))
        ));
        // big-modulus path agrees
        assert_eq!(local_elementary_divisors(p, &rows, 2, 80).unwrap(), vec![1, 2]);
    }

    #[test]
    fn rank_deficient_lattice_is_reported() {
        let p = Prime::new(5).unwrap();
        let rows = vec![big(&[1, 2]), big(&[2, 4])];
        assert!(local_elementary_divisors(p, &rows, 2, 20).is_err());
    }

    proptest! {
        #[test]
        fn bareiss_matches_leibniz(v in prop::collection::vec(-20i64..20, 16)) {
            let m: Vec<Vec<BigInt>> = v.chunks(4).map(big).collect();
            prop_assert_eq!(bareiss_determinant(&m), leibniz(&m));
        }

        #[test]
        fn reduced_resultant_matches_sylvester(
            f in prop::collection::vec(-30i64..30, 1..9),
            g in prop::collection::vec(-30i64..30, 1..5),
        ) {
            let f = big(&f);
            let g = big(&g);
            let ft = trimmed(&f).to_vec();
            let gt = trimmed(&g).to_vec();
            prop_assert_eq!(resultant(&f, &g), sylvester_resultant(&ft, &gt));
            prop_assert_eq!(resultant(&g, &f), sylvester_resultant(&gt, &ft));
        }

        #[test]
        fn local_divisors_give_determinant_valuation(v in prop::collection::vec(-40i64..40, 9)) {
            let p = Prime::new(3).unwrap();
            let m: Vec<Vec<BigInt>> = v.chunks(3).map(big).collect();
            let det = bareiss_determinant(&m);
            match p.valuation(&det) {
                None => prop_assert!(local_elementary_divisors(p, &m, 3, 30).is_err()),
                Some(e) => prop_assert_eq!(quotient_length(p, &m, 3, 30).unwrap(), e as u64),
            }
        }
    }
}
