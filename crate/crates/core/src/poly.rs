//! Polynomials over `Z_p` standing in for elements of `Lambda = Z_p[[X]]`.
//!
//! An [`IwaPoly`] is either exact (integer coefficients) or carries a modulus
//! `p^N`, in which case its coefficients are residues in `[0, p^N)`. Mixing an
//! exact operand with a modular one yields a modular result; two moduli combine
//! to the smaller one.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{mod_inverse, reduce_mod, Prime, DEFAULT_PRECISION};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct IwaPoly {
    prime: Prime,
    coeffs: Vec<BigInt>,
    modulus: Option<u32>,
}

impl IwaPoly {
    /// Exact polynomial with `coeffs[i]` the coefficient of `X^i`.
    pub fn new(prime: Prime, coeffs: Vec<BigInt>) -> Self {
        let mut p = IwaPoly {
            prime,
            coeffs,
            modulus: None,
        };
        p.trim();
        p
    }

    pub fn from_i64s(prime: Prime, coeffs: &[i64]) -> Self {
        Self::new(prime, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Polynomial reduced modulo `p^n`.
    pub fn new_mod(prime: Prime, coeffs: Vec<BigInt>, n: u32) -> Self {
        IwaPoly::new(prime, coeffs).with_modulus(n)
    }

    pub fn zero(prime: Prime) -> Self {
        Self::new(prime, Vec::new())
    }

    pub fn one(prime: Prime) -> Self {
        Self::constant(prime, BigInt::one())
    }

    /// The variable `X`.
    pub fn x(prime: Prime) -> Self {
        Self::from_i64s(prime, &[0, 1])
    }

    pub fn constant(prime: Prime, c: BigInt) -> Self {
        Self::new(prime, vec![c])
    }

    /// `c * X^k`.
    pub fn monomial(prime: Prime, c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.push(c);
        Self::new(prime, coeffs)
    }

    /// Reduce modulo `p^n`; an existing smaller modulus is kept.
    pub fn with_modulus(mut self, n: u32) -> Self {
        let n = self.modulus.map_or(n, |m| m.min(n));
        self.modulus = Some(n);
        self.normalize();
        self
    }

    /// Forget the modulus, keeping the canonical integer lift.
    pub fn lift(&self) -> Self {
        IwaPoly {
            modulus: None,
            ..self.clone()
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn normalize(&mut self) {
        if let Some(n) = self.modulus {
            let m = self.prime.pow(n);
            for c in &mut self.coeffs {
                *c = reduce_mod(c, &m);
            }
        }
        self.trim();
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// Exponent `N` of the modulus `p^N`, if any.
    pub fn modulus(&self) -> Option<u32> {
        self.modulus
    }

    pub fn is_exact(&self) -> bool {
        self.modulus.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// `f(0)`.
    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    /// Exact evaluation of the integer lift at an integer.
    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(
            self.prime, other.prime,
            "polynomials over different primes cannot be combined"
        );
    }

    fn combined_modulus(&self, other: &Self) -> Option<u32> {
        match (self.modulus, other.modulus) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn build(prime: Prime, coeffs: Vec<BigInt>, modulus: Option<u32>) -> Self {
        let mut p = IwaPoly {
            prime,
            coeffs,
            modulus,
        };
        p.normalize();
        p
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::build(
            self.prime,
            self.coeffs.iter().map(|a| a * c).collect(),
            self.modulus,
        )
    }

    /// `self * X^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::build(self.prime, coeffs, self.modulus)
    }

    /// Truncation to the coefficients of degree `< k`.
    pub fn truncate(&self, k: usize) -> Self {
        let coeffs = self.coeffs.iter().take(k).cloned().collect();
        Self::build(self.prime, coeffs, self.modulus)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = IwaPoly {
            modulus: self.modulus,
            ..IwaPoly::one(self.prime)
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Euclidean division `self = q * g + r` with `deg r < deg g`.
    ///
    /// The divisor's leading coefficient must be a p-adic unit. Exact inputs
    /// stay exact whenever the division is integral (always when `g` is monic);
    /// otherwise the result is computed modulo `p^DEFAULT_PRECISION`.
    pub fn divmod(&self, g: &IwaPoly) -> Result<(IwaPoly, IwaPoly)> {
        self.check_prime(g);
        let Some(dg) = g.degree() else {
            return Err(Error::DivisionByZero);
        };
        let lc = g.leading_coeff();
        if self.prime.valuation(&lc) != Some(0) {
            return Err(Error::NonUnitLeadingCoefficient);
        }
        let modulus = self.combined_modulus(g);
        if modulus.is_none() {
            if let Some(qr) = self.divmod_over_z(g, dg) {
                return Ok(qr);
            }
            let n = DEFAULT_PRECISION;
            return self
                .clone()
                .with_modulus(n)
                .divmod(&g.clone().with_modulus(n));
        }
        let n = modulus.expect("checked above");
        let m = self.prime.pow(n);
        let lc_inv = mod_inverse(&lc, &m).ok_or(Error::NonUnitLeadingCoefficient)?;
        let Some(df) = self.degree().filter(|&d| d >= dg) else {
            return Ok((
                IwaPoly::build(self.prime, Vec::new(), modulus),
                IwaPoly::build(self.prime, self.coeffs.clone(), modulus),
            ));
        };
        let mut r: Vec<BigInt> = self.coeffs.iter().map(|c| reduce_mod(c, &m)).collect();
        let mut q = vec![BigInt::zero(); df - dg + 1];
        for i in (dg..=df).rev() {
            let c = (&r[i] * &lc_inv).mod_floor(&m);
            if c.is_zero() {
                continue;
            }
            for (j, gj) in g.coeffs.iter().enumerate() {
                let t = &r[i - dg + j] - &c * gj;
                r[i - dg + j] = t.mod_floor(&m);
            }
            q[i - dg] = c;
        }
        r.truncate(dg);
        Ok((
            IwaPoly::build(self.prime, q, modulus),
            IwaPoly::build(self.prime, r, modulus),
        ))
    }

    fn divmod_over_z(&self, g: &IwaPoly, dg: usize) -> Option<(IwaPoly, IwaPoly)> {
        let Some(df) = self.degree().filter(|&d| d >= dg) else {
            return Some((IwaPoly::zero(self.prime), self.clone()));
        };
        let lc = g.leading_coeff();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); df - dg + 1];
        for i in (dg..=df).rev() {
            if r[i].is_zero() {
                continue;
            }
            let (c, rem) = r[i].div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, gj) in g.coeffs.iter().enumerate() {
                let t = &c * gj;
                r[i - dg + j] -= t;
            }
            q[i - dg] = c;
        }
        r.truncate(dg);
        Some((IwaPoly::new(self.prime, q), IwaPoly::new(self.prime, r)))
    }

    /// Remainder of division by a divisor with unit leading coefficient.
    pub fn rem(&self, g: &IwaPoly) -> Result<IwaPoly> {
        self.divmod(g).map(|(_, r)| r)
    }

    /// Exact quotient when `g` divides `self`.
    pub fn div_exact(&self, g: &IwaPoly) -> Option<IwaPoly> {
        match self.divmod(g) {
            Ok((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    /// The coefficients as rationals, for exact arithmetic over `Q`.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect()
    }
}

impl Add for &IwaPoly {
    type Output = IwaPoly;
    fn add(self, rhs: &IwaPoly) -> IwaPoly {
        self.check_prime(rhs);
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        IwaPoly::build(self.prime, coeffs, self.combined_modulus(rhs))
    }
}

impl Sub for &IwaPoly {
    type Output = IwaPoly;
    fn sub(self, rhs: &IwaPoly) -> IwaPoly {
        self.check_prime(rhs);
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        IwaPoly::build(self.prime, coeffs, self.combined_modulus(rhs))
    }
}

impl Neg for &IwaPoly {
    type Output = IwaPoly;
    fn neg(self) -> IwaPoly {
        IwaPoly::build(
            self.prime,
            self.coeffs.iter().map(|c| -c).collect(),
            self.modulus,
        )
    }
}

impl Mul for &IwaPoly {
    type Output = IwaPoly;
    fn mul(self, rhs: &IwaPoly) -> IwaPoly {
        self.check_prime(rhs);
        let modulus = self.combined_modulus(rhs);
        if self.is_zero() || rhs.is_zero() {
            return IwaPoly::build(self.prime, Vec::new(), modulus);
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IwaPoly::build(self.prime, out, modulus)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for IwaPoly {
            type Output = IwaPoly;
            fn $m(self, rhs: IwaPoly) -> IwaPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for IwaPoly {
    type Output = IwaPoly;
    fn neg(self) -> IwaPoly {
        -&self
    }
}

impl fmt::Display for IwaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("0")?;
        } else {
            let mut first = true;
            for (i, c) in self.coeffs.iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let sign = if c.is_negative() { "-" } else { "+" };
                if first {
                    if c.is_negative() {
                        f.write_str("-")?;
                    }
                } else {
                    write!(f, " {sign} ")?;
                }
                first = false;
                let a = c.abs();
                match (i, a.is_one()) {
                    (0, _) => write!(f, "{a}")?,
                    (1, true) => f.write_str("X")?,
                    (1, false) => write!(f, "{a}X")?,
                    (_, true) => write!(f, "X^{i}")?,
                    (_, false) => write!(f, "{a}X^{i}")?,
                }
            }
        }
        if let Some(n) = self.modulus {
            write!(f, " (mod {}^{})", self.prime, n)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    p: u64,
    coeffs: Vec<String>,
    mod_prec: Option<u32>,
}

impl TryFrom<PolyRepr> for IwaPoly {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        let prime = Prime::new(r.p)?;
        let coeffs = r
            .coeffs
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::InvalidArgument(format!("bad coefficient {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = r.mod_prec {
            if n == 0 {
                return Err(Error::InvalidArgument("mod_prec must be positive".into()));
            }
            let m = prime.pow(n);
            if coeffs.iter().any(|c| c.is_negative() || *c >= m) {
                return Err(Error::InvalidArgument(
                    "coefficients must lie in [0, p^mod_prec)".into(),
                ));
            }
        }
        let mut p = IwaPoly::new(prime, coeffs);
        p.modulus = r.mod_prec;
        Ok(p)
    }
}

impl From<IwaPoly> for PolyRepr {
    fn from(p: IwaPoly) -> Self {
        PolyRepr {
            p: p.prime.get(),
            coeffs: p.coeffs.iter().map(|c| c.to_string()).collect(),
            mod_prec: p.modulus,
        }
    }
}

fn binomial_row(m: usize, upto: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(upto.min(m) + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 1..=upto.min(m) {
        c = c * BigInt::from(m - k + 1) / BigInt::from(k);
        row.push(c.clone());
    }
    row
}

/// `omega_n = (1 + X)^(p^n) - 1`.
pub fn omega(p: Prime, n: u32) -> IwaPoly {
    let m = p.pow_usize(n);
    let mut coeffs = binomial_row(m, m);
    coeffs[0] = BigInt::zero();
    IwaPoly::new(p, coeffs)
}

/// `Phi_n = omega_n / omega_(n-1) = sum_(i<p) (1 + X)^(i p^(n-1))`, for `n >= 1`.
pub fn phi_poly(p: Prime, n: u32) -> IwaPoly {
    assert!(n >= 1, "Phi_n is defined for n >= 1");
    let step = p.pow_usize(n - 1);
    let deg = (p.get() as usize - 1) * step;
    let mut coeffs = vec![BigInt::zero(); deg + 1];
    for i in 0..p.get() as usize {
        for (k, c) in binomial_row(i * step, deg).into_iter().enumerate() {
            coeffs[k] += c;
        }
    }
    IwaPoly::new(p, coeffs)
}

/// Euclidean division; see [`IwaPoly::divmod`].
pub fn divmod(f: &IwaPoly, g: &IwaPoly) -> Result<(IwaPoly, IwaPoly)> {
    f.divmod(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn omega_small_cases() {
        assert_eq!(omega(p(3), 0), IwaPoly::x(p(3)));
        assert_eq!(omega(p(3), 1), IwaPoly::from_i64s(p(3), &[0, 3, 3, 1]));
        assert_eq!(omega(p(5), 2).degree(), Some(25));
    }

    #[test]
    fn phi_small_cases() {
        assert_eq!(phi_poly(p(3), 1), IwaPoly::from_i64s(p(3), &[3, 3, 1]));
        assert_eq!(phi_poly(p(5), 2).constant_term(), BigInt::from(5));
        assert_eq!(phi_poly(p(7), 2).degree(), Some(42));
    }

    #[test]
    fn phi_is_eisenstein() {
        for (q, n) in [(3, 1), (3, 4), (5, 2), (7, 2)] {
            let f = phi_poly(p(q), n);
            assert!(f.leading_coeff().is_one());
            assert_eq!(f.constant_term(), BigInt::from(q));
            let d = f.degree().unwrap();
            for c in &f.coeffs()[..d] {
                assert!((c % BigInt::from(q)).is_zero());
            }
        }
    }

    #[test]
    fn omega_factors() {
        for q in [3, 5] {
            for n in 1..=4 {
                let lhs = &phi_poly(p(q), n) * &omega(p(q), n - 1);
                assert_eq!(lhs, omega(p(q), n));
            }
        }
        // X * Phi_1 * ... * Phi_n = omega_n, n <= 6 at p = 3
        let mut prod = IwaPoly::x(p(3));
        for n in 1..=6 {
            prod = &prod * &phi_poly(p(3), n);
            assert_eq!(prod, omega(p(3), n));
        }
    }

    #[test]
    fn divmod_examples() {
        let (q, r) = omega(p(3), 2).divmod(&omega(p(3), 1)).unwrap();
        assert_eq!(q, phi_poly(p(3), 2));
        assert!(r.is_zero());

        let x = IwaPoly::x(p(3));
        let (q, r) = x.divmod(&omega(p(3), 1)).unwrap();
        assert!(q.is_zero());
        assert_eq!(r, x);

        let phi1 = phi_poly(p(3), 1);
        let sq = &phi1 * &phi1;
        let g = IwaPoly::from_i64s(p(3), &[1, 2, 0, 1]);
        let (q, r) = sq.divmod(&g).unwrap();
        assert!(r.degree().unwrap_or(0) < 3);
        assert_eq!(&(&q * &g) + &r, sq);
    }

    #[test]
    fn divmod_rejects_non_unit_leading_coefficient() {
        let f = IwaPoly::from_i64s(p(3), &[1, 1, 1]);
        let g = IwaPoly::from_i64s(p(3), &[1, 3]);
        assert_eq!(f.divmod(&g), Err(Error::NonUnitLeadingCoefficient));
        assert_eq!(
            f.divmod(&IwaPoly::zero(p(3))),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn divmod_with_unit_leading_coefficient() {
        // 2 is a unit at p = 3 but does not divide over Z
        let f = IwaPoly::from_i64s(p(3), &[1, 1, 1]);
        let g = IwaPoly::from_i64s(p(3), &[0, 2]);
        let (q, r) = f.divmod(&g).unwrap();
        assert_eq!(q.modulus(), Some(DEFAULT_PRECISION));
        let back = &(&q * &g) + &r;
        assert_eq!(back, f.clone().with_modulus(DEFAULT_PRECISION));
        // integral division stays exact
        let (q, r) = (&f * &g).divmod(&g).unwrap();
        assert!(q.is_exact() && r.is_zero());
        assert_eq!(q, f);
    }

    #[test]
    fn modulus_bookkeeping() {
        let a = IwaPoly::from_i64s(p(3), &[10, -1]).with_modulus(2);
        assert_eq!(a.coeffs(), &[BigInt::from(1), BigInt::from(8)]);
        let b = IwaPoly::from_i64s(p(3), &[1, 1]);
        assert_eq!((&a + &b).modulus(), Some(2));
        assert_eq!(a.clone().with_modulus(5).modulus(), Some(2));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn display() {
        let f = IwaPoly::from_i64s(p(3), &[3, -3, 1]);
        assert_eq!(f.to_string(), "X^2 - 3X + 3");
        assert_eq!(IwaPoly::zero(p(3)).to_string(), "0");
    }

    #[test]
    fn json_shape() {
        let f = IwaPoly::from_i64s(p(3), &[3, 0, 1, 0]);
        let js = serde_json::to_value(&f).unwrap();
        assert_eq!(js, serde_json::json!({"p": 3, "coeffs": ["3", "0", "1"], "mod_prec": null}));
        let bad = serde_json::json!({"p": 3, "coeffs": ["9"], "mod_prec": 2});
        assert!(serde_json::from_value::<IwaPoly>(bad).is_err());
    }

    fn arb_poly() -> impl Strategy<Value = IwaPoly> {
        (
            prop::collection::vec(-200i64..200, 0..8),
            prop::option::of(1u32..6),
        )
            .prop_map(|(c, m)| {
                let f = IwaPoly::from_i64s(Prime::new(5).unwrap(), &c);
                match m {
                    Some(n) => f.with_modulus(n),
                    None => f,
                }
            })
    }

    proptest! {
        #[test]
        fn json_round_trip(f in arb_poly()) {
            let s = serde_json::to_string(&f).unwrap();
            prop_assert_eq!(serde_json::from_str::<IwaPoly>(&s).unwrap(), f);
        }

        #[test]
        fn divmod_by_monic_reconstructs(f in arb_poly(), g in prop::collection::vec(-50i64..50, 0..4)) {
            let mut g = g;
            g.push(1);
            let g = IwaPoly::from_i64s(f.prime(), &g);
            let (q, r) = f.divmod(&g).unwrap();
            prop_assert!(r.degree().is_none_or(|d| d < g.degree().unwrap()));
            prop_assert_eq!(&(&q * &g) + &r, f);
        }
    }
}
