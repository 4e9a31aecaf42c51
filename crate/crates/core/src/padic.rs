//! Scalar p-adic arithmetic: the [`Prime`] newtype, extended rationals used
//! for valuations, and finite-precision elements of `Q_p`.
//!
//! A [`PadicNumber`] is either the exact zero or `p^val * unit + O(p^(val + prec))`
//! with `unit` a residue in `[1, p^prec)` prime to `p`. Exact zero is kept apart
//! from "zero modulo `p^N`": any operation whose result is only known to vanish
//! modulo the available precision fails with [`Error::IndeterminateValuation`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of p-adic digits carried by default.
pub const DEFAULT_PRECISION: u32 = 64;

/// An odd prime number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(Error::InvalidPrime(p));
        }
        let mut d = 3u64;
        while d.saturating_mul(d) <= p {
            if p.is_multiple_of(d) {
                return Err(Error::InvalidPrime(p));
            }
            d += 2;
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^k` as an exact integer.
    pub fn pow(self, k: u32) -> BigInt {
        num_traits::pow(self.to_bigint(), k as usize)
    }

    /// `p^k` as a machine integer; panics on overflow.
    pub fn pow_usize(self, k: u32) -> usize {
        (self.0 as usize)
            .checked_pow(k)
            .expect("p^k does not fit in usize")
    }

    /// Euler's totient `phi(p^n) = p^n - p^(n-1)`, with `phi(1) = 1`.
    pub fn totient(self, n: u32) -> usize {
        if n == 0 {
            1
        } else {
            self.pow_usize(n) - self.pow_usize(n - 1)
        }
    }

    /// `ord_p(x)` for a nonzero integer; `None` for zero.
    pub fn valuation(self, x: &BigInt) -> Option<u32> {
        if x.is_zero() {
            return None;
        }
        let p = self.to_bigint();
        let chunk = num_traits::pow(p.clone(), 16);
        let mut y = x.clone();
        let mut v = 0u32;
        loop {
            let (q, r) = y.div_rem(&chunk);
            if !r.is_zero() {
                break;
            }
            y = q;
            v += 16;
        }
        loop {
            let (q, r) = y.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            y = q;
            v += 1;
        }
        Some(v)
    }

    pub fn valuation_u64(self, mut x: u64) -> Option<u32> {
        if x == 0 {
            return None;
        }
        let mut v = 0;
        while x.is_multiple_of(self.0) {
            x /= self.0;
            v += 1;
        }
        Some(v)
    }

    /// Valuation of a rational number; `None` for zero.
    pub fn valuation_rational(self, x: &BigRational) -> Option<i64> {
        let n = self.valuation(x.numer())?;
        let d = self.valuation(x.denom()).expect("denominator is nonzero");
        Some(n as i64 - d as i64)
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A rational number or `+inf`.
///
/// `+inf` absorbs addition and compares greater than every finite value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedRational {
    Finite(BigRational),
    Infinity,
}

impl ExtendedRational {
    pub fn zero() -> Self {
        ExtendedRational::Finite(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        ExtendedRational::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExtendedRational::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRational::Infinity)
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::Infinity => None,
        }
    }

    /// The value as an integer, if it is a finite integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.finite()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }

    pub fn to_i64(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        self.to_integer().and_then(|n| n.to_i64())
    }

    /// Division by a positive integer; `inf / k = inf`.
    pub fn div_int(&self, k: i64) -> Self {
        assert!(k > 0, "division by a non-positive integer");
        match self {
            ExtendedRational::Finite(r) => ExtendedRational::Finite(r / BigInt::from(k)),
            ExtendedRational::Infinity => ExtendedRational::Infinity,
        }
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedRational::*;
        match (self, other) {
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, Finite(_)) => Ordering::Greater,
            (Finite(_), Infinity) => Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ExtendedRational {
    type Output = ExtendedRational;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Add for &ExtendedRational {
    type Output = ExtendedRational;
    fn add(self, rhs: Self) -> ExtendedRational {
        match (self, rhs) {
            (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => {
                ExtendedRational::Finite(a + b)
            }
            _ => ExtendedRational::Infinity,
        }
    }
}

impl From<BigRational> for ExtendedRational {
    fn from(r: BigRational) -> Self {
        ExtendedRational::Finite(r)
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Infinity => f.write_str("inf"),
            ExtendedRational::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            ExtendedRational::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for ExtendedRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtendedRational::Infinity);
        }
        let bad = || Error::InvalidArgument(format!("not an extended rational: {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(ExtendedRational::Finite(BigRational::new(num, den)))
    }
}

impl Serialize for ExtendedRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntOrString {
    Int(i64),
    Str(String),
}

impl<'de> Deserialize<'de> for ExtendedRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match IntOrString::deserialize(d)? {
            IntOrString::Int(n) => Ok(ExtendedRational::from_integer(n)),
            IntOrString::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// An element of `Q_p` at finite relative precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PadicRepr", into = "PadicRepr")]
pub struct PadicNumber {
    prime: Prime,
    /// `None` for the exact zero.
    valuation: Option<i64>,
    /// In `[1, p^precision)` and prime to `p`; zero for the exact zero.
    unit: BigUint,
    precision: u32,
}

impl PadicNumber {
    pub fn zero(prime: Prime) -> Self {
        PadicNumber {
            prime,
            valuation: None,
            unit: BigUint::zero(),
            precision: DEFAULT_PRECISION,
        }
    }

    /// `p^valuation * unit` at relative precision `precision`.
    pub fn new(prime: Prime, valuation: i64, unit: &BigInt, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidArgument("precision must be positive".into()));
        }
        if prime.valuation(unit) != Some(0) {
            return Err(Error::NonUnit);
        }
        let modulus = prime.pow(precision);
        let unit = unit.mod_floor(&modulus).to_biguint().expect("mod_floor is nonnegative");
        Ok(PadicNumber {
            prime,
            valuation: Some(valuation),
            unit,
            precision,
        })
    }

    pub fn from_integer(prime: Prime, n: &BigInt, precision: u32) -> Result<Self> {
        Self::from_rational(prime, &BigRational::from_integer(n.clone()), precision)
    }

    pub fn from_i64(prime: Prime, n: i64, precision: u32) -> Result<Self> {
        Self::from_integer(prime, &BigInt::from(n), precision)
    }

    pub fn from_rational(prime: Prime, x: &BigRational, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidArgument("precision must be positive".into()));
        }
        let Some(v) = prime.valuation_rational(x) else {
            return Ok(PadicNumber {
                precision,
                ..PadicNumber::zero(prime)
            });
        };
        let mut num = x.numer().clone();
        let mut den = x.denom().clone();
        let p = prime.to_bigint();
        while (&num % &p).is_zero() {
            num /= &p;
        }
        while (&den % &p).is_zero() {
            den /= &p;
        }
        let modulus = prime.pow(precision);
        let den_inv = mod_inverse(&den, &modulus).ok_or(Error::NonUnit)?;
        let unit = (num * den_inv).mod_floor(&modulus);
        Self::new(prime, v, &unit, precision)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// `None` for the exact zero.
    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation == Some(0)
    }

    /// `val + prec`, the exponent of the error term; `None` for exact zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        self.valuation.map(|v| v + self.precision as i64)
    }

    /// Integer representative `p^val * unit` of an integral element.
    pub fn to_integer(&self) -> Result<BigInt> {
        match self.valuation {
            None => Ok(BigInt::zero()),
            Some(v) if v < 0 => Err(Error::InvalidArgument(
                "element is not integral".to_string(),
            )),
            Some(v) => Ok(self.prime.pow(v as u32) * BigInt::from(self.unit.clone())),
        }
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime.get(), other.prime.get()));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let modulus = self.prime.pow(self.precision);
        let unit = (modulus - BigInt::from(self.unit.clone()))
            .to_biguint()
            .expect("unit is below the modulus");
        PadicNumber {
            unit,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let (va, vb) = match (self.valuation, other.valuation) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => (a, b),
        };
        let m = va.min(vb);
        let abs_prec = (va + self.precision as i64).min(vb + other.precision as i64);
        let work = (abs_prec - m) as u32;
        let ua = BigInt::from(self.unit.clone()) * self.prime.pow((va - m) as u32);
        let ub = BigInt::from(other.unit.clone()) * self.prime.pow((vb - m) as u32);
        let sum = (ua + ub).mod_floor(&self.prime.pow(work));
        let t = self
            .prime
            .valuation(&sum)
            .ok_or(Error::IndeterminateValuation)?;
        let unit = sum / self.prime.pow(t);
        PadicNumber::new(self.prime, m + t as i64, &unit, work - t)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let (va, vb) = match (self.valuation, other.valuation) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(PadicNumber::zero(self.prime)),
        };
        let precision = self.precision.min(other.precision);
        let unit = BigInt::from(&self.unit * &other.unit);
        PadicNumber::new(self.prime, va + vb, &unit, precision)
    }

    pub fn inv(&self) -> Result<Self> {
        let v = self.valuation.ok_or(Error::DivisionByZero)?;
        let modulus = self.prime.pow(self.precision);
        let inv = mod_inverse(&BigInt::from(self.unit.clone()), &modulus).ok_or(Error::NonUnit)?;
        PadicNumber::new(self.prime, -v, &inv, self.precision)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn ord_p(&self) -> ExtendedRational {
        ord_p(self)
    }
}

/// `ord_p(a)`, normalized so that `ord_p(p) = 1`; `+inf` for the exact zero.
pub fn ord_p(a: &PadicNumber) -> ExtendedRational {
    match a.valuation {
        None => ExtendedRational::Infinity,
        Some(v) => ExtendedRational::from_integer(v),
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

#[derive(Serialize, Deserialize)]
struct PadicRepr {
    p: u64,
    val: ValRepr,
    unit: String,
    prec: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValRepr {
    Int(i64),
    Inf(String),
}

impl TryFrom<PadicRepr> for PadicNumber {
    type Error = Error;
    fn try_from(r: PadicRepr) -> Result<Self> {
        let prime = Prime::new(r.p)?;
        let unit: BigInt = r
            .unit
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad unit {:?}", r.unit)))?;
        match r.val {
            ValRepr::Inf(s) if s == "inf" => {
                if !unit.is_zero() {
                    return Err(Error::InvalidArgument("zero must carry unit \"0\"".into()));
                }
                Ok(PadicNumber {
                    precision: r.prec.max(1),
                    ..PadicNumber::zero(prime)
                })
            }
            ValRepr::Inf(s) => Err(Error::InvalidArgument(format!("bad valuation {s:?}"))),
            ValRepr::Int(v) => {
                if unit.sign() == Sign::Minus || unit >= prime.pow(r.prec) {
                    return Err(Error::InvalidArgument("unit is not normalized".into()));
                }
                PadicNumber::new(prime, v, &unit, r.prec)
            }
        }
    }
}

impl From<PadicNumber> for PadicRepr {
    fn from(a: PadicNumber) -> Self {
        PadicRepr {
            p: a.prime.get(),
            val: match a.valuation {
                None => ValRepr::Inf("inf".into()),
                Some(v) => ValRepr::Int(v),
            },
            unit: a.unit.to_string(),
            prec: a.precision,
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation {
            None => write!(f, "0"),
            Some(v) => write!(
                f,
                "{}^{} * {} + O({}^{})",
                self.prime,
                v,
                self.unit,
                self.prime,
                v + self.precision as i64
            ),
        }
    }
}

/// Nonnegative `x mod m` helper shared by the polynomial layers.
pub(crate) fn reduce_mod(x: &BigInt, m: &BigInt) -> BigInt {
    if x.is_negative() || x >= m {
        x.mod_floor(m)
    } else {
        x.clone()
    }
}
