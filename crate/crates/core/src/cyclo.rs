//! Evaluation at `eps_n = zeta_(p^n) - 1` and the valuations it induces.
//!
//! `Z_p[eps_n] = Z_p[X]/Phi_n` is totally ramified of degree `phi(p^n)` with
//! uniformizer `eps_n`, so the normalized valuation of `f(eps_n)` equals
//! `ord_p Res(Phi_n, f)`: the norm of `f(eps_n)` is the resultant.

use num_traits::Zero;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::resultant;
use crate::padic::{ExtendedRational, Prime};
use crate::poly::{phi_poly, IwaPoly};

/// A residue class modulo `Phi_n`, i.e. an element of `Z_p[eps_n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloElement {
    level: u32,
    rep: IwaPoly,
}

impl CycloElement {
    pub fn prime(&self) -> Prime {
        self.rep.prime()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Representative of degree `< phi(p^n)`.
    pub fn rep(&self) -> &IwaPoly {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    fn same_ring(&self, other: &Self) {
        assert_eq!(self.level, other.level, "elements of different levels");
        assert_eq!(self.prime(), other.prime(), "elements over different primes");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ring(other);
        CycloElement {
            level: self.level,
            rep: &self.rep + &other.rep,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ring(other);
        eval_at_eps(&(&self.rep * &other.rep), self.level)
    }
}

/// `f(eps_n)`, realized as `f mod Phi_n`.
pub fn eval_at_eps(f: &IwaPoly, n: u32) -> CycloElement {
    assert!(n >= 1, "eps_n is defined for n >= 1");
    let phi = phi_poly(f.prime(), n);
    let rep = f.rem(&phi).expect("Phi_n is monic");
    CycloElement { level: n, rep }
}

/// `ord_(eps_n)` normalized by `ord_(eps_n)(eps_n) = 1`, so that
/// `ord_(eps_n) = phi(p^n) * ord_p`.
///
/// For a representative known only modulo `p^N`, the valuation is determined
/// exactly when it is below `N * phi(p^n)`; otherwise the result would depend
/// on the unknown digits and [`Error::PrecisionExhausted`] is returned.
pub fn ord_eps(e: &CycloElement) -> Result<ExtendedRational> {
    let prime = e.prime();
    let phi_deg = prime.totient(e.level);
    let threshold = e.rep.modulus().map(|n| n as u64 * phi_deg as u64);
    if e.rep.is_zero() {
        return match threshold {
            None => Ok(ExtendedRational::Infinity),
            Some(t) => Err(Error::PrecisionExhausted(format!(
                "element vanishes modulo p^{}, ord_eps >= {t}",
                e.rep.modulus().unwrap_or_default()
            ))),
        };
    }
    let res = resultant(phi_poly(prime, e.level).coeffs(), e.rep.coeffs());
    let v = prime
        .valuation(&res)
        .expect("nonzero element of a field has nonzero norm");
    if let Some(t) = threshold {
        if v as u64 >= t {
            return Err(Error::PrecisionExhausted(format!(
                "ord_eps of the lift is {v}, not below the threshold {t}"
            )));
        }
    }
    Ok(ExtendedRational::from_integer(v as i64))
}

/// `ord_p(f(eps_n)) = ord_(eps_n)(f(eps_n)) / phi(p^n)`.
pub fn ord_p_at_eps(f: &IwaPoly, n: u32) -> Result<ExtendedRational> {
    let v = ord_eps(&eval_at_eps(f, n))?;
    Ok(v.div_int(f.prime().totient(n) as i64))
}

/// `mu` and `lambda` read off the coefficients: `mu` is the least coefficient
/// valuation, `lambda` the first index attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeierstrassData {
    pub mu: u64,
    pub lambda: u64,
}

pub fn mu_lambda(f: &IwaPoly) -> Result<WeierstrassData> {
    if f.is_zero() {
        return Err(match f.modulus() {
            None => Error::ZeroPolynomial,
            Some(n) => Error::PrecisionExhausted(format!(
                "polynomial vanishes modulo p^{n}"
            )),
        });
    }
    let prime = f.prime();
    let (lambda, mu) = f
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| prime.valuation(c).map(|v| (i, v)))
        .min_by_key(|&(i, v)| (v, i))
        .expect("nonzero polynomial has a nonzero coefficient");
    Ok(WeierstrassData {
        mu: mu as u64,
        lambda: lambda as u64,
    })
}

/// `gcd(omega_(n-1), f)`: the product of the irreducible factors
/// `X, Phi_1, ..., Phi_(n-1)` of `omega_(n-1)` that divide `f`.
pub fn gcd_with_omega(f: &IwaPoly, n: u32) -> Result<IwaPoly> {
    assert!(n >= 1, "omega_(n-1) needs n >= 1");
    let prime = f.prime();
    if f.is_zero() {
        return Err(match f.modulus() {
            None => Error::ZeroPolynomial,
            Some(k) => Error::PrecisionExhausted(format!(
                "polynomial vanishes modulo p^{k}; every factor is ambiguous"
            )),
        });
    }
    let mut g = IwaPoly::one(prime);
    // for modular f the constant term is already reduced modulo p^N
    if f.constant_term().is_zero() {
        g = &g * &IwaPoly::x(prime);
    }
    for m in 1..n {
        let phi = phi_poly(prime, m);
        let divides = match f.modulus() {
            None => f.rem(&phi)?.is_zero(),
            Some(k) => {
                let threshold = k as u64 * prime.totient(m) as u64;
                let lifted = eval_at_eps(&f.lift(), m);
                match ord_eps(&lifted)? {
                    ExtendedRational::Infinity => true,
                    v => v >= ExtendedRational::from_integer(threshold as i64),
                }
            }
        };
        if divides {
            g = &g * &phi;
        }
    }
    Ok(g)
}

/// `true` when `f` and `omega_n` are coprime, i.e. `Lambda/(f, omega_n)` is finite.
pub fn coprime_to_omega(f: &IwaPoly, n: u32) -> Result<bool> {
    Ok(gcd_with_omega(f, n + 1)?.is_one())
}

/// The uniformizer `eps_n`.
pub fn uniformizer(prime: Prime, n: u32) -> CycloElement {
    eval_at_eps(&IwaPoly::x(prime), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::omega;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn int(v: i64) -> ExtendedRational {
        ExtendedRational::from_integer(v)
    }

    /// Independent oracle: in the Eisenstein basis `1, eps, ..., eps^(phi-1)`
    /// the terms `c_i eps^i` have pairwise distinct valuations
    /// `phi * ord_p(c_i) + i`, so the minimum is attained once.
    fn eisenstein_ord(e: &CycloElement) -> ExtendedRational {
        let prime = e.prime();
        let phi = prime.totient(e.level()) as i64;
        e.rep()
            .coeffs()
            .iter()
            .enumerate()
            .filter_map(|(i, c)| prime.valuation(c).map(|v| phi * v as i64 + i as i64))
            .min()
            .map_or(ExtendedRational::Infinity, int)
    }

    #[test]
    fn normalization() {
        for (q, n) in [(3, 1), (3, 3), (5, 2), (7, 1)] {
            assert_eq!(ord_eps(&uniformizer(p(q), n)).unwrap(), int(1));
            let c = eval_at_eps(&IwaPoly::constant(p(q), BigInt::from(q)), n);
            assert_eq!(ord_eps(&c).unwrap(), int(p(q).totient(n) as i64));
        }
    }

    #[test]
    fn omega_vanishes_and_x_maps_to_eps() {
        for n in 1..=4 {
            assert!(eval_at_eps(&omega(p(3), n), n).is_zero());
            assert_eq!(ord_eps(&eval_at_eps(&omega(p(3), n), n)).unwrap(), ExtendedRational::Infinity);
            assert_eq!(eval_at_eps(&IwaPoly::x(p(3)), n).rep(), &IwaPoly::x(p(3)));
        }
    }

    #[test]
    fn higher_phi_evaluates_to_p() {
        for (q, n, m) in [(3, 1, 2), (3, 2, 4), (5, 1, 3), (5, 2, 3)] {
            let e = eval_at_eps(&phi_poly(p(q), m), n);
            assert_eq!(e.rep(), &IwaPoly::constant(p(q), BigInt::from(q)));
        }
    }

    #[test]
    fn lower_phi_valuation_is_its_degree() {
        for (q, n) in [(3, 4), (5, 3)] {
            for m in 1..n {
                let e = eval_at_eps(&phi_poly(p(q), m), n);
                assert_eq!(ord_eps(&e).unwrap(), int(p(q).totient(m) as i64));
            }
        }
    }

    #[test]
    fn degree_valuation_law_for_divisors_of_omega() {
        let prime = p(3);
        let n = 4;
        let mut factors = vec![IwaPoly::x(prime)];
        factors.extend((1..n).map(|m| phi_poly(prime, m)));
        for mask in 0u32..(1 << factors.len()) {
            let h = factors
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .fold(IwaPoly::one(prime), |acc, (_, f)| &acc * f);
            let v = ord_eps(&eval_at_eps(&h, n)).unwrap();
            assert_eq!(v, int(h.degree().unwrap() as i64), "mask {mask}");
        }
    }

    #[test]
    fn modular_threshold() {
        let prime = p(3);
        // p^2 known modulo p^3: ord_eps = 2 * phi(3) = 4 < 3 * 2
        let f = IwaPoly::constant(prime, BigInt::from(9)).with_modulus(3);
        assert_eq!(ord_eps(&eval_at_eps(&f, 1)).unwrap(), int(4));
        // p^3 modulo p^3 is zero: undecidable
        let g = IwaPoly::constant(prime, BigInt::from(27)).with_modulus(3);
        assert!(matches!(ord_eps(&eval_at_eps(&g, 1)), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn mu_lambda_examples() {
        let prime = p(3);
        let f = IwaPoly::from_i64s(prime, &[9, 0, 3]);
        assert_eq!(mu_lambda(&f).unwrap(), WeierstrassData { mu: 1, lambda: 2 });
        assert_eq!(mu_lambda(&IwaPoly::one(prime)).unwrap(), WeierstrassData { mu: 0, lambda: 0 });
        assert_eq!(
            mu_lambda(&IwaPoly::constant(prime, BigInt::from(27))).unwrap(),
            WeierstrassData { mu: 3, lambda: 0 }
        );
        assert_eq!(mu_lambda(&IwaPoly::zero(prime)), Err(Error::ZeroPolynomial));
        let z = IwaPoly::constant(prime, BigInt::from(27)).with_modulus(3);
        assert!(matches!(mu_lambda(&z), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn gcd_examples() {
        let prime = p(3);
        let x = IwaPoly::x(prime);
        let phi1 = phi_poly(prime, 1);
        let f = &phi1 * &IwaPoly::from_i64s(prime, &[-3, 1]);
        assert_eq!(gcd_with_omega(&f, 2).unwrap(), phi1);
        assert!(gcd_with_omega(&IwaPoly::from_i64s(prime, &[1, 1]), 4).unwrap().is_one());
        let f = &x * &phi_poly(prime, 2);
        assert_eq!(gcd_with_omega(&f, 3).unwrap(), f);
        // modular input: Phi_1 * (X - 3) mod 3^5 still has Phi_1 "at precision"
        let fm = (&phi1 * &IwaPoly::from_i64s(prime, &[-3, 1])).with_modulus(5);
        assert_eq!(gcd_with_omega(&fm, 2).unwrap(), phi1);
        assert_eq!(gcd_with_omega(&IwaPoly::zero(prime), 2), Err(Error::ZeroPolynomial));
    }

    fn arb_poly(q: u64, max_deg: usize) -> impl Strategy<Value = IwaPoly> {
        prop::collection::vec(-500i64..500, 1..=max_deg + 1)
            .prop_map(move |c| IwaPoly::from_i64s(Prime::new(q).unwrap(), &c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn evaluation_is_a_ring_homomorphism(f in arb_poly(3, 12), g in arb_poly(3, 12), n in 1u32..4) {
            let (ef, eg) = (eval_at_eps(&f, n), eval_at_eps(&g, n));
            prop_assert_eq!(eval_at_eps(&(&f * &g), n), ef.mul(&eg));
            prop_assert_eq!(eval_at_eps(&(&f + &g), n), ef.add(&eg));
        }

        #[test]
        fn resultant_valuation_matches_eisenstein_digits(f in arb_poly(5, 30), n in 1u32..3) {
            let e = eval_at_eps(&f, n);
            prop_assert_eq!(ord_eps(&e).unwrap(), eisenstein_ord(&e));
        }

        #[test]
        fn ord_eps_is_additive(f in arb_poly(3, 10), g in arb_poly(3, 10), n in 1u32..4) {
            let (ef, eg) = (eval_at_eps(&f, n), eval_at_eps(&g, n));
            let lhs = ord_eps(&ef.mul(&eg)).unwrap();
            prop_assert_eq!(lhs, &ord_eps(&ef).unwrap() + &ord_eps(&eg).unwrap());
        }
    }
}
