//! Kobayashi ranks of the towers `Lambda/(f, omega_n)`.
//!
//! Three independent computations of the same number:
//! * the closed form `ord_(eps_n) f(eps_n)`;
//! * first differences of `ord_p Res(f, omega_m)`, the size of the finite
//!   quotient at level `m`;
//! * kernel and cokernel lengths of the projection from level `n` to `n-1`,
//!   by elementary divisors of explicit relation lattices.
//!
//! A coefficient degree `k` models `Lambda_O = Lambda (x) O` with `O` free of
//! rank `k` over `Z_p`; every length, hence every rank, is multiplied by `k`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclo::{coprime_to_omega, eval_at_eps, ord_eps, WeierstrassData};
use crate::error::{Error, Result};
use crate::linalg::{quotient_length, resultant};
use crate::padic::{ExtendedRational, Prime};
use crate::poly::{omega, IwaPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerOfQuotients {
    pub f: IwaPoly,
    #[serde(default = "one")]
    pub coeff_degree: u32,
}

fn one() -> u32 {
    1
}

impl TowerOfQuotients {
    pub fn new(f: IwaPoly) -> Result<Self> {
        Self::with_coeff_degree(f, 1)
    }

    pub fn with_coeff_degree(f: IwaPoly, k: u32) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if k == 0 {
            return Err(Error::InvalidArgument("coefficient degree must be positive".into()));
        }
        Ok(TowerOfQuotients { f, coeff_degree: k })
    }

    pub fn prime(&self) -> Prime {
        self.f.prime()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NablaMethod {
    ClosedForm,
    ResultantOracle,
    SnfOracle,
    FiniteTower,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NablaResult {
    pub n: u32,
    pub value: i64,
    pub method: NablaMethod,
}

fn scaled(k: u32, v: i64) -> Result<i64> {
    v.checked_mul(k as i64).ok_or(Error::Overflow("Kobayashi rank"))
}

/// `k * ord_(eps_n) f(eps_n)`.
pub fn nabla_closed_form(t: &TowerOfQuotients, n: u32) -> Result<NablaResult> {
    assert!(n >= 1, "Kobayashi ranks start at level 1");
    let v = ord_eps(&eval_at_eps(&t.f, n))?;
    let v = match v {
        ExtendedRational::Infinity => return Err(Error::PhiDividesF(n)),
        v => v.to_i64().ok_or(Error::Overflow("ord_eps"))?,
    };
    Ok(NablaResult {
        n,
        value: scaled(t.coeff_degree, v)?,
        method: NablaMethod::ClosedForm,
    })
}

/// For a modular `f`, every valuation feeding the level-`n` quotient must be
/// determined by the known digits.
fn check_determined(f: &IwaPoly, n: u32) -> Result<()> {
    let Some(k) = f.modulus() else { return Ok(()) };
    if f.constant_term().is_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "f(0) vanishes modulo p^{k}"
        )));
    }
    for m in 1..=n {
        ord_eps(&eval_at_eps(f, m))?;
    }
    Ok(())
}

fn require_finite(f: &IwaPoly, n: u32) -> Result<()> {
    if !coprime_to_omega(f, n)? {
        return Err(Error::NotFinite(n));
    }
    check_determined(f, n)
}

/// `e(Lambda/(f, omega_m)) = ord_p Res(f, omega_m)`.
fn resultant_length(f: &IwaPoly, m: u32) -> Result<i64> {
    let prime = f.prime();
    let r = resultant(f.lift().coeffs(), omega(prime, m).coeffs());
    let v = prime.valuation(&r).ok_or(Error::NotFinite(m))?;
    Ok(v as i64)
}

/// `k * (ord_p Res(f, omega_n) - ord_p Res(f, omega_(n-1)))`.
pub fn nabla_resultant_oracle(t: &TowerOfQuotients, n: u32) -> Result<NablaResult> {
    assert!(n >= 1, "Kobayashi ranks start at level 1");
    require_finite(&t.f, n)?;
    let v = resultant_length(&t.f, n)? - resultant_length(&t.f, n - 1)?;
    Ok(NablaResult {
        n,
        value: scaled(t.coeff_degree, v)?,
        method: NablaMethod::ResultantOracle,
    })
}

/// Coefficient vectors of `f X^i mod omega_m` for `i < p^m`, reduced mod `q`.
fn multiplication_rows(f: &IwaPoly, m: u32, q: &BigInt) -> Vec<Vec<BigInt>> {
    let prime = f.prime();
    let d = prime.pow_usize(m);
    let w = omega(prime, m);
    let w = w.coeffs();
    let mut r = vec![BigInt::zero(); d];
    // reduce f modulo the monic omega_m, one top coefficient at a time
    let mut coeffs: Vec<BigInt> = f.coeffs().iter().map(|c| c.mod_floor(q)).collect();
    for top in (d..coeffs.len()).rev() {
        let c = std::mem::take(&mut coeffs[top]);
        if !c.is_zero() {
            for (j, wj) in w.iter().enumerate().take(d) {
                let idx = top - d + j;
                coeffs[idx] = (&coeffs[idx] - &c * wj).mod_floor(q);
            }
        }
    }
    for (i, c) in coeffs.into_iter().take(d).enumerate() {
        r[i] = c;
    }
    let mut rows = Vec::with_capacity(d);
    for _ in 0..d {
        let top = r[d - 1].clone();
        let mut next = Vec::with_capacity(d);
        next.push(BigInt::zero());
        next.extend_from_slice(&r[..d - 1]);
        if !top.is_zero() {
            for j in 0..d {
                next[j] = (&next[j] - &top * &w[j]).mod_floor(q);
            }
        }
        rows.push(std::mem::replace(&mut r, next));
    }
    rows
}

/// Lengths of the kernel and cokernel of `Lambda/(f, omega_n) -> Lambda/(f, omega_(n-1))`,
/// computed over `Z/p^N`.
pub fn projection_lengths(f: &IwaPoly, n: u32, prec: u32) -> Result<(u64, u64)> {
    assert!(n >= 1, "the projection starts at level 1");
    let prime = f.prime();
    let prec = f.modulus().map_or(prec, |k| prec.min(k));
    let q = prime.pow(prec);
    let dn = prime.pow_usize(n);
    let dm = prime.pow_usize(n - 1);

    let level_n = multiplication_rows(f, n, &q);
    let e_n = quotient_length(prime, &level_n, dn, prec)?;
    // ker = (f, omega_(n-1)) / (f, omega_n) inside Z[X]/omega_n
    let w = omega(prime, n - 1);
    let mut widened = level_n;
    for i in 0..dn - dm {
        let mut row = vec![BigInt::zero(); dn];
        for (j, c) in w.coeffs().iter().enumerate() {
            row[i + j] = c.mod_floor(&q);
        }
        widened.push(row);
    }
    let e_widened = quotient_length(prime, &widened, dn, prec)?;
    let kernel = e_n - e_widened;

    // coker = target modulo the images of the basis X^i, i < p^n
    let mut target = multiplication_rows(f, n - 1, &q);
    for i in 0..dn {
        let image = IwaPoly::monomial(prime, BigInt::from(1), i)
            .rem(&w)
            .expect("omega is monic");
        let mut row = vec![BigInt::zero(); dm];
        for (j, c) in image.coeffs().iter().enumerate() {
            row[j] = c.mod_floor(&q);
        }
        target.push(row);
    }
    let cokernel = quotient_length(prime, &target, dm, prec)?;
    Ok((kernel, cokernel))
}

/// `k * (length ker - length coker)` of the projection, at working precision `p^N`.
pub fn nabla_snf_oracle(t: &TowerOfQuotients, n: u32, prec: u32) -> Result<NablaResult> {
    assert!(n >= 1, "Kobayashi ranks start at level 1");
    require_finite(&t.f, n)?;
    let (ker, coker) = projection_lengths(&t.f, n, prec)?;
    Ok(NablaResult {
        n,
        value: scaled(t.coeff_degree, ker as i64 - coker as i64)?,
        method: NablaMethod::SnfOracle,
    })
}

/// [`nabla_snf_oracle`] starting at `p^start` and doubling the precision on
/// exhaustion, up to `p^max`.
pub fn nabla_snf_oracle_adaptive(t: &TowerOfQuotients, n: u32, start: u32, max: u32) -> Result<NablaResult> {
    let mut prec = start.max(1);
    loop {
        match nabla_snf_oracle(t, n, prec) {
            Err(Error::PrecisionExhausted(_))
                if prec < max && t.f.modulus().is_none_or(|k| prec < k) =>
            {
                prec = (prec * 2).min(max);
            }
            other => return other,
        }
    }
}

/// `phi(p^n) mu + lambda`.
pub fn nabla_asymptotic(w: WeierstrassData, prime: Prime, n: u32) -> u64 {
    assert!(n >= 1, "the asymptotic formula is stated for n >= 1");
    prime.totient(n) as u64 * w.mu + w.lambda
}

/// First differences `e(M_n) - e(M_(n-1))` of a list of exponents `e(M_0), e(M_1), ...`.
pub fn nabla_finite_tower(sizes: &[i64]) -> Vec<NablaResult> {
    sizes
        .windows(2)
        .enumerate()
        .map(|(i, w)| NablaResult {
            n: i as u32 + 1,
            value: w[1] - w[0],
            method: NablaMethod::FiniteTower,
        })
        .collect()
}

/// Least `n0 >= 1` with the closed form equal to the asymptotic value for
/// every `n0 <= n <= n_max`, or `None` if even `n_max` disagrees.
pub fn stabilization_index(t: &TowerOfQuotients, w: WeierstrassData, n_max: u32) -> Result<Option<u32>> {
    let mut n0 = None;
    for n in (1..=n_max).rev() {
        let lhs = nabla_closed_form(t, n)?.value;
        let rhs = scaled(t.coeff_degree, nabla_asymptotic(w, t.prime(), n) as i64)?;
        if lhs != rhs {
            break;
        }
        n0 = Some(n);
    }
    Ok(n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::mu_lambda;
    use crate::poly::phi_poly;
    use proptest::prelude::*;

    fn p(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn tower(q: u64, c: &[i64]) -> TowerOfQuotients {
        TowerOfQuotients::new(IwaPoly::from_i64s(p(q), c)).unwrap()
    }

    /// `e(Lambda/(f, omega_m))` from elementary divisors of the relation lattice.
    fn snf_length(f: &IwaPoly, m: u32) -> u64 {
        let q = f.prime().pow(40);
        let d = f.prime().pow_usize(m);
        quotient_length(f.prime(), &multiplication_rows(f, m, &q), d, 40).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(nabla_closed_form(&tower(3, &[0, 1]), 1).unwrap().value, 1);
        for n in 1..=3 {
            assert_eq!(nabla_closed_form(&tower(5, &[5]), n).unwrap().value, p(5).totient(n) as i64);
        }
        let f = &phi_poly(p(3), 1) * &IwaPoly::from_i64s(p(3), &[-3, 1]);
        let t = TowerOfQuotients::new(f).unwrap();
        assert_eq!(nabla_closed_form(&t, 2).unwrap().value, 3);
        let t = TowerOfQuotients::new(phi_poly(p(3), 2)).unwrap();
        assert_eq!(nabla_closed_form(&t, 2), Err(Error::PhiDividesF(2)));
    }

    #[test]
    fn coefficient_degree_scales() {
        let t = TowerOfQuotients::with_coeff_degree(IwaPoly::from_i64s(p(3), &[3, 1]), 2).unwrap();
        let base = tower(3, &[3, 1]);
        for n in 1..=3 {
            let k1 = nabla_closed_form(&base, n).unwrap().value;
            assert_eq!(nabla_closed_form(&t, n).unwrap().value, 2 * k1);
            assert_eq!(nabla_resultant_oracle(&t, n).unwrap().value, 2 * k1);
            assert_eq!(nabla_snf_oracle(&t, n, 16).unwrap().value, 2 * k1);
        }
    }

    #[test]
    fn resultant_oracle_examples() {
        assert_eq!(nabla_resultant_oracle(&tower(3, &[3]), 1).unwrap().value, 2);
        assert_eq!(nabla_resultant_oracle(&tower(3, &[-3, 1]), 2).unwrap().value, 1);
        assert_eq!(nabla_resultant_oracle(&tower(3, &[0, 1]), 1), Err(Error::NotFinite(1)));
        let f = &phi_poly(p(3), 1) * &IwaPoly::from_i64s(p(3), &[-3, 1]);
        let t = TowerOfQuotients::new(f).unwrap();
        assert_eq!(nabla_resultant_oracle(&t, 2), Err(Error::NotFinite(2)));
    }

    #[test]
    fn snf_oracle_examples() {
        assert_eq!(nabla_snf_oracle(&tower(3, &[0, 1]), 1, 8), Err(Error::NotFinite(1)));
        for method in [nabla_closed_form(&tower(3, &[3]), 2), nabla_resultant_oracle(&tower(3, &[3]), 2), nabla_snf_oracle(&tower(3, &[3]), 2, 8)] {
            assert_eq!(method.unwrap().value, 6);
        }
        // |Lambda/(9, omega_2)| = 9^9 needs divisors 9, so p^2 is too coarse
        assert!(matches!(nabla_snf_oracle(&tower(3, &[9]), 2, 2), Err(Error::PrecisionExhausted(_))));
        assert_eq!(nabla_snf_oracle_adaptive(&tower(3, &[9]), 2, 1, 64).unwrap().value, 12);
    }

    #[test]
    fn relation_lattice_sizes_match_resultants() {
        for c in [[3i64, 1, 0], [2, 5, 1], [9, 3, 1], [1, 0, 0]] {
            let f = IwaPoly::from_i64s(p(3), &c);
            for m in 0..=3 {
                assert_eq!(snf_length(&f, m) as i64, resultant_length(&f, m).unwrap(), "{c:?} m={m}");
            }
        }
    }

    #[test]
    fn asymptotic_examples() {
        let w = |mu, lambda| WeierstrassData { mu, lambda };
        assert_eq!(nabla_asymptotic(w(0, 0), p(3), 4), 0);
        assert_eq!(nabla_asymptotic(w(1, 2), p(3), 2), 8);
        assert_eq!(nabla_asymptotic(w(2, 0), p(5), 1), 8);
        let t = tower(3, &[9, 0, 3]);
        assert_eq!(nabla_closed_form(&t, 2).unwrap().value, 8);
        let wl = mu_lambda(&t.f).unwrap();
        // at n = 1 the degree-2 term is not yet dominant: 9 + 3 eps_1^2 has ord 5
        assert_eq!(nabla_closed_form(&t, 1).unwrap().value, 5);
        assert_eq!(stabilization_index(&t, wl, 4).unwrap(), Some(2));
    }

    #[test]
    fn finite_tower_differences() {
        let r: Vec<i64> = nabla_finite_tower(&[0, 1, 3]).iter().map(|r| r.value).collect();
        assert_eq!(r, vec![1, 2]);
        assert!(nabla_finite_tower(&[4, 4, 4]).iter().all(|r| r.value == 0));
        assert!(nabla_finite_tower(&[7]).is_empty());
    }

    #[test]
    fn modular_inputs() {
        let f = IwaPoly::from_i64s(p(3), &[3, 1]).with_modulus(4);
        let t = TowerOfQuotients::new(f).unwrap();
        for n in 1..=2 {
            let c = nabla_closed_form(&t, n).unwrap().value;
            assert_eq!(nabla_resultant_oracle(&t, n).unwrap().value, c);
            assert_eq!(nabla_snf_oracle(&t, n, 64).unwrap().value, c);
        }
        // Phi_1 known mod 3 is X^2: ord_eps(eps_1^2) = 2 reaches the threshold 1 * phi(3)
        let t = TowerOfQuotients::new(phi_poly(p(3), 1).with_modulus(1)).unwrap();
        assert!(matches!(nabla_closed_form(&t, 1), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn json_shapes() {
        let r = nabla_closed_form(&tower(3, &[0, 1]), 1).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"n":1,"value":1,"method":"closed_form"}"#);
        let t: TowerOfQuotients =
            serde_json::from_str(r#"{"f":{"p":3,"coeffs":["3","1"],"mod_prec":null}}"#).unwrap();
        assert_eq!(t.coeff_degree, 1);
    }

    fn arb_coprime(q: u64) -> impl Strategy<Value = IwaPoly> {
        prop::collection::vec(-200i64..200, 1..6)
            .prop_map(move |c| IwaPoly::from_i64s(p(q), &c))
            .prop_filter("finite tower", |f| !f.is_zero() && coprime_to_omega(f, 2).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn three_methods_agree(f in arb_coprime(3), n in 1u32..3) {
            let t = TowerOfQuotients::new(f).unwrap();
            let c = nabla_closed_form(&t, n).unwrap().value;
            prop_assert_eq!(nabla_resultant_oracle(&t, n).unwrap().value, c);
            prop_assert_eq!(nabla_snf_oracle_adaptive(&t, n, 8, 256).unwrap().value, c);
        }

        #[test]
        fn closed_form_is_additive(f in arb_coprime(5), g in arb_coprime(5), n in 1u32..3) {
            let (tf, tg) = (TowerOfQuotients::new(f.clone()).unwrap(), TowerOfQuotients::new(g.clone()).unwrap());
            let tfg = TowerOfQuotients::new(&f * &g).unwrap();
            prop_assert_eq!(
                nabla_closed_form(&tfg, n).unwrap().value,
                nabla_closed_form(&tf, n).unwrap().value + nabla_closed_form(&tg, n).unwrap().value
            );
        }

        #[test]
        fn finite_tower_inverts_prefix_sums(d in prop::collection::vec(-20i64..20, 0..10), e0 in 0i64..10) {
            let mut sizes = vec![e0];
            for x in &d {
                sizes.push(sizes.last().unwrap() + x);
            }
            let back: Vec<i64> = nabla_finite_tower(&sizes).iter().map(|r| r.value).collect();
            prop_assert_eq!(back, d);
        }
    }
}
