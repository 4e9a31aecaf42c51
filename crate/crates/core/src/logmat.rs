//! The matrices `A_v`, `C_n`, `H_n = C_n ... C_1` and `M_n = A_v^(n+1) H_n`
//! attached to a supersingular prime, and the valuations of `H_n(eps_n)`.
//!
//! Column 0 of the first row of `H_n` is the sharp entry, column 1 the flat one.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::ord_p_at_eps;
use crate::error::{Error, Result};
use crate::padic::{ExtendedRational, Prime};
use crate::poly::{omega, phi_poly, IwaPoly};

/// Local data at a supersingular prime `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LocalCurveRepr", into = "LocalCurveRepr")]
pub struct LocalCurveData {
    prime: Prime,
    a_v: i64,
    degrees: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct LocalCurveRepr {
    p: u64,
    a_v: i64,
    #[serde(default = "default_degrees")]
    degrees: Vec<u64>,
}

fn default_degrees() -> Vec<u64> {
    vec![1]
}

impl LocalCurveData {
    /// Checks `p | a_v` and the Weil bound `a_v^2 <= 4p`.
    pub fn new(prime: Prime, a_v: i64, degrees: Vec<u64>) -> Result<Self> {
        let p = prime.get() as i128;
        let a = a_v as i128;
        if a % p != 0 {
            return Err(Error::InvalidLocalData(format!(
                "a_v = {a_v} is not divisible by p = {p}"
            )));
        }
        if a * a > 4 * p {
            return Err(Error::InvalidLocalData(format!(
                "a_v = {a_v} violates the Weil bound a_v^2 <= 4p"
            )));
        }
        if degrees.is_empty() || degrees.contains(&0) {
            return Err(Error::InvalidLocalData(
                "local degrees must be a nonempty list of positive integers".into(),
            ));
        }
        Ok(LocalCurveData { prime, a_v, degrees })
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn a_v(&self) -> i64 {
        self.a_v
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn degree_sum(&self) -> u64 {
        self.degrees.iter().sum()
    }

    /// `ord_p(a_v)`, which is `1` or `+inf`.
    pub fn r_v(&self) -> ExtendedRational {
        match self.prime.valuation(&BigInt::from(self.a_v)) {
            Some(v) => ExtendedRational::from_integer(v as i64),
            None => ExtendedRational::Infinity,
        }
    }
}

impl TryFrom<LocalCurveRepr> for LocalCurveData {
    type Error = Error;

    fn try_from(r: LocalCurveRepr) -> Result<Self> {
        LocalCurveData::new(Prime::new(r.p)?, r.a_v, r.degrees)
    }
}

impl From<LocalCurveData> for LocalCurveRepr {
    fn from(d: LocalCurveData) -> Self {
        LocalCurveRepr {
            p: d.prime.get(),
            a_v: d.a_v,
            degrees: d.degrees,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Sharp,
    Flat,
}

impl Sign {
    /// Column of the first row of `H_n` that this sign selects.
    pub fn column(self) -> usize {
        match self {
            Sign::Sharp => 0,
            Sign::Flat => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Sharp => "sharp",
            Sign::Flat => "flat",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sharp" | "♯" | "#" => Ok(Sign::Sharp),
            "flat" | "♭" | "b" => Ok(Sign::Flat),
            other => Err(Error::InvalidArgument(format!("unknown sign {other:?}"))),
        }
    }
}

/// `p^(-denom_exp) * entries`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogMatrix2 {
    pub denom_exp: u32,
    pub entries: [[IwaPoly; 2]; 2],
}

impl LogMatrix2 {
    pub fn identity(prime: Prime) -> Self {
        let (o, z) = (IwaPoly::one(prime), IwaPoly::zero(prime));
        LogMatrix2 {
            denom_exp: 0,
            entries: [[o.clone(), z.clone()], [z, o]],
        }
    }

    pub fn from_ints(prime: Prime, m: [[i64; 2]; 2], denom_exp: u32) -> Self {
        let c = |v: i64| IwaPoly::constant(prime, BigInt::from(v));
        LogMatrix2 {
            denom_exp,
            entries: [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &IwaPoly {
        &self.entries[i][j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.entries;
        let b = &other.entries;
        let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        LogMatrix2 {
            denom_exp: self.denom_exp + other.denom_exp,
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    /// Determinant of the integer part; the full determinant carries
    /// `p^(-2 denom_exp)`.
    pub fn det_numerator(&self) -> IwaPoly {
        let a = &self.entries;
        &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0])
    }
}

/// `ord_p` of the four entries of a matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValuationMatrix(pub [[ExtendedRational; 2]; 2]);

impl ValuationMatrix {
    pub fn get(&self, i: usize, j: usize) -> &ExtendedRational {
        &self.0[i][j]
    }

    pub fn first_row(&self) -> (&ExtendedRational, &ExtendedRational) {
        (&self.0[0][0], &self.0[0][1])
    }
}

impl fmt::Display for ValuationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

/// `C_n = [[a_v, 1], [-Phi_n, 0]]`.
pub fn c_matrix(data: &LocalCurveData, n: u32) -> LogMatrix2 {
    assert!(n >= 1, "C_n is defined for n >= 1");
    let prime = data.prime;
    LogMatrix2 {
        denom_exp: 0,
        entries: [
            [
                IwaPoly::constant(prime, BigInt::from(data.a_v)),
                IwaPoly::one(prime),
            ],
            [-phi_poly(prime, n), IwaPoly::zero(prime)],
        ],
    }
}

/// `H_n = C_n C_(n-1) ... C_1` as a direct product; `H_0 = I`.
pub fn h_matrix(data: &LocalCurveData, n: u32) -> LogMatrix2 {
    (1..=n).fold(LogMatrix2::identity(data.prime), |h, k| {
        c_matrix(data, k).mul(&h)
    })
}

/// First rows of `H_0, ..., H_n` from the recursion
/// `H_k = a_v H_(k-1) - Phi_(k-1) H_(k-2)`.
fn first_rows(data: &LocalCurveData, n: u32) -> Vec<(IwaPoly, IwaPoly)> {
    let prime = data.prime;
    let a = IwaPoly::constant(prime, BigInt::from(data.a_v));
    let mut rows = vec![(IwaPoly::one(prime), IwaPoly::zero(prime))];
    if n >= 1 {
        rows.push((a.clone(), IwaPoly::one(prime)));
    }
    for k in 2..=n as usize {
        let phi = phi_poly(prime, k as u32 - 1);
        let (s1, f1) = &rows[k - 1];
        let (s2, f2) = &rows[k - 2];
        let s = &(&a * s1) - &(&phi * s2);
        let f = &(&a * f1) - &(&phi * f2);
        rows.push((s, f));
    }
    rows
}

/// `(H_n^sharp, H_n^flat)`, the first row of `H_n`, by recursion.
pub fn h_entries(data: &LocalCurveData, n: u32) -> (IwaPoly, IwaPoly) {
    first_rows(data, n).pop().expect("at least H_0")
}

/// `H_n` assembled from the recursion: the first row as in [`h_entries`] and
/// the second row `-Phi_n` times the first row of `H_(n-1)`.
pub fn h_matrix_from_recursion(data: &LocalCurveData, n: u32) -> LogMatrix2 {
    if n == 0 {
        return LogMatrix2::identity(data.prime);
    }
    let mut rows = first_rows(data, n);
    let (s, f) = rows.pop().expect("H_n");
    let (ps, pf) = rows.pop().expect("H_(n-1)");
    let phi = phi_poly(data.prime, n);
    LogMatrix2 {
        denom_exp: 0,
        entries: [[s, f], [-(&phi * &ps), -(&phi * &pf)]],
    }
}

/// Integer part of `p A_v = [[0, -1], [p, a_v]]`.
pub fn a_matrix(data: &LocalCurveData) -> LogMatrix2 {
    LogMatrix2::from_ints(data.prime, [[0, -1], [data.prime.get() as i64, data.a_v]], 1)
}

/// `M_n = A_v^(n+1) H_n`, with `denom_exp = n + 1`.
pub fn m_matrix(data: &LocalCurveData, n: u32) -> LogMatrix2 {
    assert!(n >= 1, "M_n is defined for n >= 1");
    let a = a_matrix(data);
    let h = h_matrix(data, n);
    (0..=n).fold(h, |m, _| a.mul(&m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureFailure {
    pub check: &'static str,
    /// Offending entry, absent for the determinant.
    pub entry: Option<(usize, usize)>,
    pub expected: IwaPoly,
    pub found: IwaPoly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub n: u32,
    pub passed: bool,
    pub failure: Option<StructureFailure>,
}

/// Checks `det H_n = omega_n / X` and that every entry of `H_n` matches the
/// recursion (first row) and the block form (second row).
pub fn det_structure_check(data: &LocalCurveData, n: u32) -> StructureReport {
    check_h_matrix(data, n, &h_matrix(data, n))
}

/// [`det_structure_check`] against a supplied candidate for `H_n`.
pub fn check_h_matrix(data: &LocalCurveData, n: u32, h: &LogMatrix2) -> StructureReport {
    let expected = h_matrix_from_recursion(data, n);
    let mut failure = None;
    'entries: for i in 0..2 {
        for j in 0..2 {
            if h.entries[i][j] != expected.entries[i][j] {
                failure = Some(StructureFailure {
                    check: if i == 0 { "recursion" } else { "block" },
                    entry: Some((i, j)),
                    expected: expected.entries[i][j].clone(),
                    found: h.entries[i][j].clone(),
                });
                break 'entries;
            }
        }
    }
    if failure.is_none() {
        let target = omega(data.prime, n)
            .div_exact(&IwaPoly::x(data.prime))
            .expect("X divides omega_n");
        let det = h.det_numerator();
        if h.denom_exp != 0 || det != target {
            failure = Some(StructureFailure {
                check: "determinant",
                entry: None,
                expected: target,
                found: det,
            });
        }
    }
    StructureReport {
        n,
        passed: failure.is_none(),
        failure,
    }
}

/// `ord_p` of the entries of `H_n(eps_n)`, computed from resultants.
pub fn valuation_matrix(data: &LocalCurveData, n: u32) -> Result<ValuationMatrix> {
    assert!(n >= 1, "valuations at eps_n need n >= 1");
    let h = h_matrix(data, n);
    let v = |i: usize, j: usize| ord_p_at_eps(&h.entries[i][j], n);
    Ok(ValuationMatrix([[v(0, 0)?, v(0, 1)?], [v(1, 0)?, v(1, 1)?]]))
}

/// `sum_{i in range} p^(-(2i - shift))`.
fn inverse_power_sum(p: u64, range: std::ops::RangeInclusive<u32>, shift: u32) -> BigRational {
    let p = BigInt::from(p);
    range.fold(BigRational::zero(), |acc, i| {
        acc + BigRational::new(BigInt::one(), num_traits::pow(p.clone(), (2 * i - shift) as usize))
    })
}

/// Closed form of [`valuation_matrix`]: with `k = (n-1)/2` for odd `n`,
/// the first row is `(r_v + sum_{i<=k} p^-2i, sum_{i<=k} p^-(2i-1))`, and
/// for even `n` it is `(sum_{i<=n/2} p^-(2i-1), r_v + sum_{i<n/2} p^-2i)`.
pub fn valuation_matrix_closed_form(data: &LocalCurveData, n: u32) -> ValuationMatrix {
    assert!(n >= 1, "valuations at eps_n need n >= 1");
    let p = data.prime.get();
    let r = data.r_v();
    let (sharp, flat) = if n % 2 == 1 {
        let k = (n - 1) / 2;
        (
            &r + &ExtendedRational::Finite(inverse_power_sum(p, 1..=k, 0)),
            ExtendedRational::Finite(inverse_power_sum(p, 1..=k, 1)),
        )
    } else {
        let k = n / 2;
        (
            ExtendedRational::Finite(inverse_power_sum(p, 1..=k, 1)),
            &r + &ExtendedRational::Finite(inverse_power_sum(p, 1..=k - 1, 0)),
        )
    };
    let inf = ExtendedRational::Infinity;
    ValuationMatrix([[sharp, flat], [inf.clone(), inf]])
}

/// The sign whose first-row entry has strictly smaller valuation.
pub fn signature_from_matrix(m: &ValuationMatrix) -> Result<Sign> {
    let (s, f) = m.first_row();
    if s == f {
        return Err(Error::AmbiguousSignature(s.to_string(), f.to_string()));
    }
    Ok(if s < f { Sign::Sharp } else { Sign::Flat })
}

/// Default signature at level `n`, read off the closed-form valuation matrix.
pub fn signature(data: &LocalCurveData, n: u32) -> Result<Sign> {
    signature_from_matrix(&valuation_matrix_closed_form(data, n))
}

/// `min ord_p(M_(n+1) - M_n)` over the four entries and the coefficients of
/// degree `<= deg_cap`; `+inf` when all of them vanish.
pub fn m_convergence_gap(data: &LocalCurveData, n: u32, deg_cap: usize) -> ExtendedRational {
    let prime = data.prime;
    let next = m_matrix(data, n + 1);
    let cur = m_matrix(data, n);
    // both over p^(n+2): M_(n+1) = next / p^(n+2), M_n = p cur / p^(n+2)
    let p = prime.to_bigint();
    let shift = (n + 2) as i64;
    let mut best: Option<i64> = None;
    for i in 0..2 {
        for j in 0..2 {
            let diff = &next.entries[i][j] - &cur.entries[i][j].scale(&p);
            for c in diff.coeffs().iter().take(deg_cap + 1) {
                if let Some(v) = prime.valuation(c) {
                    let v = v as i64 - shift;
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
            }
        }
    }
    best.map_or(ExtendedRational::Infinity, ExtendedRational::from_integer)
}

/// Largest absolute coefficient among the entries, for diagnostics.
pub fn max_coefficient_bits(m: &LogMatrix2) -> u64 {
    m.entries
        .iter()
        .flatten()
        .flat_map(|e| e.coeffs().iter())
        .map(|c| c.abs().bits())
        .max()
        .unwrap_or(0)
}
