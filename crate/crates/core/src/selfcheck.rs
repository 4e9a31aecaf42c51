//! End-to-end consistency suite: every closed form against its independent
//! computation, over a configurable grid of primes and levels.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coleman::{cross_identity_check, h_u_map, in_image, witness};
use crate::cyclo::{coprime_to_omega, mu_lambda, WeierstrassData};
use crate::error::{Error, Result};
use crate::growth::{av_zero_closed_form, s_or_t, sha_delta, sha_table, Base, GrowthScenario, SsPrime};
use crate::kobayashi::{
    nabla_closed_form, nabla_finite_tower, nabla_resultant_oracle, nabla_snf_oracle_adaptive,
    stabilization_index, TowerOfQuotients,
};
use crate::logmat::{
    det_structure_check, m_convergence_gap, valuation_matrix, valuation_matrix_closed_form,
    LocalCurveData,
};
use crate::padic::{PadicNumber, Prime, DEFAULT_PRECISION};
use crate::poly::{omega, IwaPoly};

#[derive(Clone, Debug)]
pub struct SelfcheckConfig {
    pub primes: Vec<Prime>,
    pub n_max: u32,
    pub seed: u64,
}

impl SelfcheckConfig {
    pub fn new(primes: Vec<Prime>, n_max: u32, seed: u64) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::InvalidArgument("at least one prime is required".into()));
        }
        if n_max == 0 {
            return Err(Error::InvalidArgument("n-max must be at least 1".into()));
        }
        Ok(SelfcheckConfig { primes, n_max, seed })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub detail: String,
    pub elapsed_ms: u128,
}

/// Every `a_v` allowed at `p`: `p | a_v` and `a_v^2 <= 4p`.
pub fn admissible_traces(prime: Prime) -> Vec<i64> {
    let p = prime.get() as i64;
    let mut v = vec![0];
    if p * p <= 4 * p {
        v.extend([p, -p]);
    }
    v
}

/// Levels at which resultants stay at desk scale for `p`.
fn level_cap(prime: Prime, n_max: u32) -> u32 {
    (1..=n_max)
        .take_while(|&n| prime.pow_usize(n) <= 343)
        .last()
        .unwrap_or(1)
}

fn grid(cfg: &SelfcheckConfig) -> Vec<(LocalCurveData, u32)> {
    cfg.primes
        .iter()
        .flat_map(|&p| {
            let cap = level_cap(p, cfg.n_max);
            admissible_traces(p)
                .into_iter()
                .map(move |a| (LocalCurveData::new(p, a, vec![1]).expect("admissible"), cap))
        })
        .collect()
}

/// Tallies a list of labelled outcomes into a result.
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, label: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(label());
        }
    }

    fn error(&mut self, label: String, e: Error) {
        self.checks += 1;
        self.failures.push(format!("{label}: {e}"));
    }

    fn finish(self, id: u8, name: &'static str, start: Instant) -> CriterionResult {
        let passed = self.failures.is_empty() && self.checks > 0;
        let detail = if passed {
            format!("{} checks", self.checks)
        } else if self.checks == 0 {
            "no checks ran".into()
        } else {
            let mut shown: Vec<_> = self.failures.iter().take(3).cloned().collect();
            if self.failures.len() > 3 {
                shown.push(format!("... {} more", self.failures.len() - 3));
            }
            shown.join("; ")
        };
        CriterionResult {
            id,
            name,
            passed,
            checks: self.checks,
            detail,
            elapsed_ms: start.elapsed().as_millis(),
        }
    }
}

fn label(d: &LocalCurveData, n: u32) -> String {
    format!("p={} a_v={} n={n}", d.prime(), d.a_v())
}

pub fn check_valuation_tables(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let cases: Vec<_> = grid(cfg)
        .into_iter()
        .flat_map(|(d, cap)| (1..=cap).map(move |n| (d.clone(), n)))
        .collect();
    let outcomes: Vec<_> = cases
        .par_iter()
        .map(|(d, n)| (label(d, *n), valuation_matrix(d, *n).map(|v| v == valuation_matrix_closed_form(d, *n))))
        .collect();
    let mut t = Tally::new();
    for (l, o) in outcomes {
        match o {
            Ok(ok) => t.check(ok, || l),
            Err(e) => t.error(l, e),
        }
    }
    t.finish(1, "valuation matrices match closed form", start)
}

pub fn check_structure(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for (d, cap) in grid(cfg) {
        for n in 1..=cap {
            let r = det_structure_check(&d, n);
            t.check(r.passed, || format!("{} {:?}", label(&d, n), r.failure));
            t.check(cross_identity_check(&d, n).passed, || format!("cross identity {}", label(&d, n)));
        }
    }
    t.finish(2, "determinant, block and cross identities", start)
}

pub fn check_witness(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for (d, cap) in grid(cfg) {
        let p = d.prime().get() as i64;
        for u in [1, 1 + p, p - 1] {
            let u = PadicNumber::from_i64(d.prime(), u, DEFAULT_PRECISION).expect("unit");
            for n in 1..=cap {
                let l = format!("{} u={}", label(&d, n), u);
                let outcome = witness(&d, n, &u).and_then(|w| {
                    let image = h_u_map(&w, &d, n, &u)?;
                    Ok(in_image(&w, &d, None) && image.lift() == omega(d.prime(), n - 1))
                });
                match outcome {
                    Ok(ok) => t.check(ok, || l),
                    Err(e) => t.error(l, e),
                }
            }
        }
    }
    t.finish(3, "witness maps to omega_(n-1)", start)
}

/// Seeded `f` with `deg <= 10`, coefficients in `[-p^6, p^6]`, coprime to `omega_n`.
pub fn random_finite_tower_polys(prime: Prime, count: usize, n: u32, rng: &mut impl Rng) -> Vec<IwaPoly> {
    let bound = prime.get().pow(6) as i64;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let deg = rng.gen_range(0..=10usize);
        let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-bound..=bound)).collect();
        let f = IwaPoly::from_i64s(prime, &coeffs);
        if !f.is_zero() && coprime_to_omega(&f, n).unwrap_or(false) {
            out.push(f);
        }
    }
    out
}

/// A seeded product `p^mu d(X) u(X)` with `d` distinguished of degree `lambda`
/// and `u(0)` a unit, returned with `(mu, lambda)`.
pub fn random_weierstrass_product(prime: Prime, rng: &mut impl Rng) -> (IwaPoly, WeierstrassData) {
    let p = prime.get() as i64;
    let mu = rng.gen_range(0..=3u32);
    let lambda = rng.gen_range(0..=4usize);
    let mut d: Vec<i64> = (0..lambda).map(|_| p * rng.gen_range(-20..=20)).collect();
    d.push(1);
    let udeg = rng.gen_range(0..=3usize);
    let mut u: Vec<i64> = (0..=udeg).map(|_| rng.gen_range(-50..=50)).collect();
    while u[0] % p == 0 {
        u[0] = rng.gen_range(-50..=50);
    }
    let f = (&IwaPoly::from_i64s(prime, &d) * &IwaPoly::from_i64s(prime, &u))
        .scale(&prime.pow(mu));
    (
        f,
        WeierstrassData {
            mu: mu as u64,
            lambda: lambda as u64,
        },
    )
}

pub fn check_kobayashi_oracles(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let n_top = cfg.n_max.min(3);
    let cases: Vec<(Prime, IwaPoly)> = cfg
        .primes
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(400 + i as u64));
            random_finite_tower_polys(p, 50, n_top, &mut rng)
                .into_iter()
                .map(move |f| (p, f))
        })
        .collect();
    let outcomes: Vec<_> = cases
        .par_iter()
        .flat_map_iter(|(p, f)| {
            (1..=n_top).map(move |n| {
                let l = format!("p={p} n={n} f=[{f}]");
                let t = TowerOfQuotients::new(f.clone()).expect("nonzero");
                let r = (|| {
                    let c = nabla_closed_form(&t, n)?.value;
                    let r = nabla_resultant_oracle(&t, n)?.value;
                    let s = nabla_snf_oracle_adaptive(&t, n, 16, 1024)?.value;
                    Ok::<_, Error>(c == r && r == s)
                })();
                (l, r)
            })
        })
        .collect();
    let mut t = Tally::new();
    for (l, o) in outcomes {
        match o {
            Ok(ok) => t.check(ok, || l),
            Err(e) => t.error(l, e),
        }
    }
    t.finish(4, "Kobayashi rank: closed form, resultant and lattice agree", start)
}

pub fn check_asymptotic_law(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for (i, &p) in cfg.primes.iter().enumerate() {
        let n_top = level_cap(p, cfg.n_max.max(2));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(500 + i as u64));
        for _ in 0..20 {
            let (f, w) = random_weierstrass_product(p, &mut rng);
            let l = format!("p={p} f=[{f}]");
            t.check(mu_lambda(&f).ok() == Some(w), || format!("{l}: mu/lambda"));
            // roots of d have valuation >= 1/lambda, so the law holds once phi(p^n) > lambda
            let bound = (1..).find(|&n| p.totient(n) as u64 > w.lambda).expect("grows");
            let tower = TowerOfQuotients::new(f).expect("nonzero");
            match stabilization_index(&tower, w, n_top) {
                Ok(n0) => t.check(n0.is_some_and(|n0| n0 <= bound.min(n_top)), || {
                    format!("{l}: stabilized at {n0:?}, expected by {bound}")
                }),
                Err(e) => t.error(l, e),
            }
        }
    }
    t.finish(5, "ord_eps f(eps_n) = phi(p^n) mu + lambda eventually", start)
}

fn av_zero_scenario(p: u64, degrees: &[u64]) -> GrowthScenario {
    GrowthScenario {
        p,
        ss_primes: degrees.iter().map(|&degree| SsPrime { degree, a_v: 0 }).collect(),
        sigma: None,
        tau: None,
        mu_sigma: 0,
        lambda_sigma: 0,
        mu_tau: 0,
        lambda_tau: 0,
        r_inf: 0,
        base: Base { n0: 0, e0: 0 },
        ordinary_primes: None,
    }
}

pub fn check_trace_zero_closed_forms(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(600));
    for &p in &cfg.primes {
        for _ in 0..10 {
            let len = rng.gen_range(1..=4);
            let degrees: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=6)).collect();
            let sc = av_zero_scenario(p.get(), &degrees);
            for n in 1..=9 {
                let l = format!("p={p} degrees={degrees:?} n={n}");
                match (s_or_t(&sc, n), av_zero_closed_form(&sc, n)) {
                    (Ok(a), Ok(b)) => t.check(a == b, || format!("{l}: {a} != {b}")),
                    (Err(e), _) | (_, Err(e)) => t.error(l, e),
                }
            }
        }
    }
    t.finish(6, "S/T equal the alternating sums when a_v = 0", start)
}

/// `p = 3`, one supersingular prime of degree 2 with `a_v = 0`,
/// `lambda_flat = 5`, `r_inf = 2`.
pub fn worked_scenario() -> GrowthScenario {
    GrowthScenario {
        lambda_sigma: 5,
        r_inf: 2,
        ..av_zero_scenario(3, &[2])
    }
}

pub fn check_growth_composition(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let sc = worked_scenario();
    match sha_delta(&sc, 3) {
        Ok(d) => t.check(d == 15, || format!("delta(3) = {d}, expected 15")),
        Err(e) => t.error("delta(3)".into(), e),
    }
    match sha_table(&sc, cfg.n_max.max(3) + 2) {
        Ok(table) => {
            let mut e = sc.base.e0 as i64;
            for r in &table.rows {
                e += r.delta;
                t.check(r.cumulative == e, || format!("n={}: cumulative {}", r.n, r.cumulative));
            }
            let mut sizes = vec![sc.base.e0 as i64];
            sizes.extend(table.rows.iter().map(|r| r.cumulative));
            let back: Vec<i64> = nabla_finite_tower(&sizes).iter().map(|r| r.value).collect();
            let deltas: Vec<i64> = table.rows.iter().map(|r| r.delta).collect();
            t.check(back == deltas, || "first differences do not return the deltas".into());
        }
        Err(e) => t.error("table".into(), e),
    }
    t.finish(7, "growth deltas compose and prefix-sum", start)
}

pub fn check_convergence_gaps(cfg: &SelfcheckConfig) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for &p in &cfg.primes {
        for a in admissible_traces(p).into_iter().filter(|&a| a >= 0) {
            let d = LocalCurveData::new(p, a, vec![1]).expect("admissible");
            let top = level_cap(p, cfg.n_max.max(2));
            let gaps: Vec<_> = (1..=top).map(|n| m_convergence_gap(&d, n, 10)).collect();
            t.check(gaps.windows(2).all(|w| w[0] <= w[1]), || {
                let shown: Vec<String> = gaps.iter().map(|g| g.to_string()).collect();
                format!("p={p} a_v={a}: gaps {shown:?}")
            });
        }
    }
    t.finish(8, "convergence gaps of M_n are nondecreasing", start)
}

/// Runs criteria 1 to 8 in parallel; results are ordered by criterion.
pub fn run_selfcheck(cfg: &SelfcheckConfig) -> Vec<CriterionResult> {
    type Check = fn(&SelfcheckConfig) -> CriterionResult;
    let checks: [Check; 8] = [
        check_valuation_tables,
        check_structure,
        check_witness,
        check_kobayashi_oracles,
        check_asymptotic_law,
        check_trace_zero_closed_forms,
        check_growth_composition,
        check_convergence_gaps,
    ];
    checks.par_iter().map(|c| c(cfg)).collect()
}
