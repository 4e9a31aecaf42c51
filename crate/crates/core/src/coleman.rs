//! The lattice `I_v = {(G_1, G_2) : (p-1) G_1(0) = (2-a_v) G_2(0)}` and the
//! finite-level maps `h^u_n(G_1, G_2) = H_n^sharp G_1 + u H_n^flat G_2 mod omega_n`.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logmat::{h_entries, LocalCurveData};
use crate::padic::{mod_inverse, PadicNumber, Prime};
use crate::poly::{omega, IwaPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePair {
    pub g1: IwaPoly,
    pub g2: IwaPoly,
}

impl LatticePair {
    pub fn new(g1: IwaPoly, g2: IwaPoly) -> Result<Self> {
        if g1.prime() != g2.prime() {
            return Err(Error::PrimeMismatch(g1.prime().get(), g2.prime().get()));
        }
        Ok(LatticePair { g1, g2 })
    }

    pub fn prime(&self) -> Prime {
        self.g1.prime()
    }

    /// The smaller of the two moduli, if any.
    pub fn modulus(&self) -> Option<u32> {
        match (self.g1.modulus(), self.g2.modulus()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticePair {
            g1: &self.g1 + &other.g1,
            g2: &self.g2 + &other.g2,
        }
    }

    pub fn scale(&self, f: &IwaPoly) -> Self {
        LatticePair {
            g1: f * &self.g1,
            g2: f * &self.g2,
        }
    }
}

/// `(p-1) G_1 - (2-a_v) G_2`, the relation cutting out `I_v`.
fn relation(pair: &LatticePair, data: &LocalCurveData) -> IwaPoly {
    let p = data.prime().get() as i64;
    let c1 = BigInt::from(p - 1);
    let c2 = BigInt::from(2 - data.a_v());
    &pair.g1.scale(&c1) - &pair.g2.scale(&c2)
}

/// Membership in `I_v`, tested modulo `p^N` when `n` is given, otherwise
/// exactly (or at the pair's own modulus).
pub fn in_image(pair: &LatticePair, data: &LocalCurveData, n: Option<u32>) -> bool {
    let r = relation(pair, data).constant_term();
    match n.or(pair.modulus()) {
        None => r.is_zero(),
        Some(k) => (r % data.prime().pow(k)).is_zero(),
    }
}

/// The relation read as a congruence modulo `X`: `(p-1) G_1 = (2-a_v) G_2 mod X`.
pub fn mod_x_relation_holds(pair: &LatticePair, data: &LocalCurveData) -> bool {
    relation(pair, data)
        .rem(&IwaPoly::x(data.prime()))
        .expect("X is monic")
        .is_zero()
}

/// Residue of a unit `u` modulo `p^N`, `N` its precision.
fn unit_residue(u: &PadicNumber) -> Result<(BigInt, u32)> {
    if !u.is_unit() {
        return Err(Error::NonUnit);
    }
    Ok((u.to_integer()?, u.precision()))
}

/// `H_n^sharp G_1 + u H_n^flat G_2 mod omega_n`, reduced modulo `p^N` with
/// `N` the precision of `u`.
pub fn h_u_map(pair: &LatticePair, data: &LocalCurveData, n: u32, u: &PadicNumber) -> Result<IwaPoly> {
    assert!(n >= 1, "h^u_n is defined for n >= 1");
    if u.prime() != data.prime() {
        return Err(Error::PrimeMismatch(u.prime().get(), data.prime().get()));
    }
    let (u, prec) = unit_residue(u)?;
    let (sharp, flat) = h_entries(data, n);
    let image = &(&sharp * &pair.g1) + &(&flat * &pair.g2).scale(&u);
    image.with_modulus(prec).rem(&omega(data.prime(), n))
}

/// `(-X H_(n-1)^flat, u^-1 X H_(n-1)^sharp)`, which lies in `I_v` and maps to
/// `omega_(n-1)` under `h^u_n`.
pub fn witness(data: &LocalCurveData, n: u32, u: &PadicNumber) -> Result<LatticePair> {
    assert!(n >= 1, "the witness is defined for n >= 1");
    let prime = data.prime();
    let (u, prec) = unit_residue(u)?;
    let u_inv = mod_inverse(&u, &prime.pow(prec)).ok_or(Error::NonUnit)?;
    let (sharp, flat) = h_entries(data, n - 1);
    let x = IwaPoly::x(prime);
    Ok(LatticePair {
        g1: (-(&x * &flat)).with_modulus(prec),
        g2: (&x * &sharp).scale(&u_inv).with_modulus(prec),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossIdentityReport {
    pub n: u32,
    pub passed: bool,
    pub lhs: IwaPoly,
    pub rhs: IwaPoly,
}

/// `-H_n^sharp H_(n-1)^flat + H_n^flat H_(n-1)^sharp = omega_(n-1) / X`.
pub fn cross_identity_check(data: &LocalCurveData, n: u32) -> CrossIdentityReport {
    assert!(n >= 1, "the cross identity needs n >= 1");
    cross_identity_from_entries(data.prime(), n, &h_entries(data, n), &h_entries(data, n - 1))
}

/// The cross identity for supplied first rows of `H_n` and `H_(n-1)`.
pub fn cross_identity_from_entries(
    prime: Prime,
    n: u32,
    current: &(IwaPoly, IwaPoly),
    previous: &(IwaPoly, IwaPoly),
) -> CrossIdentityReport {
    let lhs = &(&current.1 * &previous.0) - &(&current.0 * &previous.1);
    let rhs = omega(prime, n - 1)
        .div_exact(&IwaPoly::x(prime))
        .expect("X divides omega");
    CrossIdentityReport {
        n,
        passed: lhs == rhs,
        lhs,
        rhs,
    }
}
