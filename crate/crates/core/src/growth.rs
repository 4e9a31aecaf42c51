//! Growth of `e(Sha_p(E/F_n))` along the cyclotomic tower from local
//! supersingular data and user-supplied mu/lambda invariants.
//!
//! Deltas are asymptotic predictions: they are evaluated at every `n`, but
//! only claimed for `n` large.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kobayashi::nabla_finite_tower;
use crate::logmat::{signature, valuation_matrix_closed_form, LocalCurveData, Sign};
use crate::padic::{ExtendedRational, Prime};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsPrime {
    pub degree: u64,
    pub a_v: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Base {
    pub n0: u32,
    pub e0: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthScenario {
    pub p: u64,
    pub ss_primes: Vec<SsPrime>,
    #[serde(default)]
    pub sigma: Option<Vec<Sign>>,
    #[serde(default)]
    pub tau: Option<Vec<Sign>>,
    pub mu_sigma: u64,
    pub lambda_sigma: u64,
    pub mu_tau: u64,
    pub lambda_tau: u64,
    pub r_inf: u64,
    pub base: Base,
    /// Accepted for documentation; ordinary primes add no term of their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinary_primes: Option<serde_json::Value>,
}

impl GrowthScenario {
    pub fn prime(&self) -> Result<Prime> {
        Prime::new(self.p)
    }

    pub fn local_data(&self) -> Result<Vec<LocalCurveData>> {
        let prime = self.prime()?;
        self.ss_primes
            .iter()
            .map(|s| LocalCurveData::new(prime, s.a_v, vec![s.degree]))
            .collect()
    }

    fn signs(&self, explicit: &Option<Vec<Sign>>, level: u32, name: &str) -> Result<Vec<Sign>> {
        match explicit {
            Some(v) if v.len() != self.ss_primes.len() => Err(Error::InvalidArgument(format!(
                "{name} has {} entries for {} supersingular primes",
                v.len(),
                self.ss_primes.len()
            ))),
            Some(v) => Ok(v.clone()),
            None => self.local_data()?.iter().map(|d| signature(d, level)).collect(),
        }
    }

    /// Signs used at odd levels: explicit `sigma` or the matrix default.
    pub fn sigma_vector(&self) -> Result<Vec<Sign>> {
        self.signs(&self.sigma, 1, "sigma")
    }

    /// Signs used at even levels: explicit `tau` or the matrix default.
    pub fn tau_vector(&self) -> Result<Vec<Sign>> {
        self.signs(&self.tau, 2, "tau")
    }
}

fn require_nonempty(sc: &GrowthScenario) -> Result<()> {
    if sc.ss_primes.is_empty() {
        return Err(Error::InvalidArgument(
            "the set of supersingular primes must be nonempty".into(),
        ));
    }
    Ok(())
}

/// `phi(p^n) * sum_w d_w * v_w`, with `v_w` the first-row valuation of the
/// column picked by `signs[w]`.
fn weighted_term(sc: &GrowthScenario, n: u32, signs: &[Sign]) -> Result<i64> {
    require_nonempty(sc)?;
    let prime = sc.prime()?;
    let mut total = BigRational::zero();
    for (index, (data, sign)) in sc.local_data()?.iter().zip(signs).enumerate() {
        let vm = valuation_matrix_closed_form(data, n);
        match vm.get(0, sign.column()) {
            ExtendedRational::Infinity => {
                return Err(Error::InfiniteTerm {
                    index,
                    sign: sign.as_str(),
                })
            }
            ExtendedRational::Finite(v) => {
                total += v * BigRational::from_integer(BigInt::from(data.degree_sum()));
            }
        }
    }
    let value = total * BigRational::from_integer(BigInt::from(prime.totient(n)));
    if !value.is_integer() {
        return Err(Error::NonIntegerResult(value.to_string()));
    }
    value.to_integer().to_i64().ok_or(Error::Overflow("growth term"))
}

/// `S(sigma, n)` for odd `n`.
pub fn s_term(sc: &GrowthScenario, n: u32) -> Result<i64> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("S is defined at odd levels, got n = {n}")));
    }
    weighted_term(sc, n, &sc.sigma_vector()?)
}

/// `T(tau, n)` for even `n >= 2`.
pub fn t_term(sc: &GrowthScenario, n: u32) -> Result<i64> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "T is defined at even levels n >= 2, got n = {n}"
        )));
    }
    weighted_term(sc, n, &sc.tau_vector()?)
}

/// `S` or `T` according to the parity of `n`.
pub fn s_or_t(sc: &GrowthScenario, n: u32) -> Result<i64> {
    if n % 2 == 1 {
        s_term(sc, n)
    } else {
        t_term(sc, n)
    }
}

/// `sum_w d_w (p^(n-1) - p^(n-2) + ... -+ p^j0)` with `j0 = 1` for odd `n` and
/// `0` for even `n`; valid when every `a_v` is zero.
pub fn av_zero_closed_form(sc: &GrowthScenario, n: u32) -> Result<i64> {
    require_nonempty(sc)?;
    if sc.ss_primes.iter().any(|s| s.a_v != 0) {
        return Err(Error::NotAvZero);
    }
    let p = BigInt::from(sc.p);
    let start = if n % 2 == 1 { 1 } else { 0 };
    let mut sum = BigInt::zero();
    for j in start..n {
        let term = num_traits::pow(p.clone(), j as usize);
        if (n - 1 - j).is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let d: u64 = sc.ss_primes.iter().map(|s| s.degree).sum();
    (sum * BigInt::from(d)).to_i64().ok_or(Error::Overflow("closed form"))
}

/// Components of one delta.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShaRow {
    pub n: u32,
    pub parity: String,
    #[serde(rename = "S_or_T")]
    pub s_or_t: i64,
    pub phi_mu: i64,
    pub lambda: i64,
    pub r_inf: i64,
    pub delta: i64,
    pub cumulative: i64,
}

fn delta_row(sc: &GrowthScenario, n: u32) -> Result<ShaRow> {
    let prime = sc.prime()?;
    let (mu, lambda) = if n % 2 == 1 {
        (sc.mu_sigma, sc.lambda_sigma)
    } else {
        (sc.mu_tau, sc.lambda_tau)
    };
    let st = s_or_t(sc, n)?;
    let phi_mu = (prime.totient(n) as u64)
        .checked_mul(mu)
        .and_then(|v| i64::try_from(v).ok())
        .ok_or(Error::Overflow("phi(p^n) mu"))?;
    let lambda = i64::try_from(lambda).map_err(|_| Error::Overflow("lambda"))?;
    let r_inf = i64::try_from(sc.r_inf).map_err(|_| Error::Overflow("r_inf"))?;
    let delta = st
        .checked_add(phi_mu)
        .and_then(|v| v.checked_add(lambda))
        .and_then(|v| v.checked_sub(r_inf))
        .ok_or(Error::Overflow("delta"))?;
    Ok(ShaRow {
        n,
        parity: if n % 2 == 1 { "odd" } else { "even" }.into(),
        s_or_t: st,
        phi_mu,
        lambda,
        r_inf,
        delta,
        cumulative: 0,
    })
}

/// `e(Sha_p(E/F_n)) - e(Sha_p(E/F_(n-1)))`, predicted for large `n`.
pub fn sha_delta(sc: &GrowthScenario, n: u32) -> Result<i64> {
    if n == 0 {
        return Err(Error::InvalidArgument("deltas start at n = 1".into()));
    }
    Ok(delta_row(sc, n)?.delta)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShaTable {
    pub rows: Vec<ShaRow>,
    pub warnings: Vec<String>,
}

/// Deltas for `n0 < n <= n_max`, prefix-summed from `(n0, e0)`.
pub fn sha_table(sc: &GrowthScenario, n_max: u32) -> Result<ShaTable> {
    if n_max < sc.base.n0 {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} is below the anchor n0 = {}",
            sc.base.n0
        )));
    }
    let e0 = i64::try_from(sc.base.e0).map_err(|_| Error::Overflow("e0"))?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut e = e0;
    for n in sc.base.n0 + 1..=n_max {
        let mut row = delta_row(sc, n)?;
        e = e.checked_add(row.delta).ok_or(Error::Overflow("cumulative"))?;
        row.cumulative = e;
        if e < 0 {
            warnings.push(format!(
                "n = {n}: cumulative exponent {e} is negative; the inputs are inconsistent"
            ));
        }
        rows.push(row);
    }
    let mut sizes = vec![e0];
    sizes.extend(rows.iter().map(|r| r.cumulative));
    let back = nabla_finite_tower(&sizes);
    debug_assert!(back.iter().zip(&rows).all(|(b, r)| b.value == r.delta));
    Ok(ShaTable { rows, warnings })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub valid: bool,
    pub violations: Vec<String>,
    pub default_sigma: Option<Vec<Sign>>,
    pub default_tau: Option<Vec<Sign>>,
}

/// Checks local data, the nonempty supersingular set, vector lengths, and
/// that no chosen sign lands on an infinite valuation at either parity.
pub fn validate_scenario(sc: &GrowthScenario) -> ScenarioReport {
    let mut violations = Vec::new();
    let mut defaults = (None, None);
    if let Err(e) = sc.prime() {
        violations.push(e.to_string());
    } else {
        if sc.ss_primes.is_empty() {
            violations.push("the set of supersingular primes is empty".into());
        }
        let mut all_valid = true;
        for (i, s) in sc.ss_primes.iter().enumerate() {
            if let Err(e) = LocalCurveData::new(sc.prime().expect("checked"), s.a_v, vec![s.degree]) {
                violations.push(format!("supersingular prime #{i}: {e}"));
                all_valid = false;
            }
        }
        if all_valid && !sc.ss_primes.is_empty() {
            let plain = GrowthScenario {
                sigma: None,
                tau: None,
                ..sc.clone()
            };
            defaults = (plain.sigma_vector().ok(), plain.tau_vector().ok());
            for (name, n) in [("sigma", 1), ("tau", 2)] {
                if let Err(e) = s_or_t(sc, n) {
                    violations.push(format!("{name}: {e}"));
                }
            }
        }
    }
    ScenarioReport {
        valid: violations.is_empty(),
        violations,
        default_sigma: defaults.0,
        default_tau: defaults.1,
    }
}
