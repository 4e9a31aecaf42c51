use num_bigint::BigInt;
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use iwasawa_core::coleman::LatticePair;
use iwasawa_core::cyclo::WeierstrassData;
use iwasawa_core::growth::{Base, GrowthScenario, SsPrime};
use iwasawa_core::kobayashi::{NablaMethod, NablaResult, TowerOfQuotients};
use iwasawa_core::logmat::{c_matrix, m_matrix, valuation_matrix_closed_form, LocalCurveData, Sign};
use iwasawa_core::{ExtendedRational, IwaPoly, PadicNumber, Prime};

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(x: &T) {
    let text = serde_json::to_string(x).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, x, "{text}");
}

fn primes() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![3u64, 5, 7, 11, 101]).prop_map(|p| Prime::new(p).unwrap())
}

fn poly() -> impl Strategy<Value = IwaPoly> {
    (primes(), prop::collection::vec(any::<i64>(), 0..8), prop::option::of(1u32..20)).prop_map(
        |(p, c, m)| {
            let f = IwaPoly::new(p, c.into_iter().map(BigInt::from).collect());
            match m {
                Some(m) => f.with_modulus(m),
                None => f,
            }
        },
    )
}

fn extended() -> impl Strategy<Value = ExtendedRational> {
    prop_oneof![
        Just(ExtendedRational::Infinity),
        (-1000i64..1000, 1i64..500).prop_map(|(a, b)| ExtendedRational::from_ratio(a, b)),
    ]
}

proptest! {
    #[test]
    fn padic_numbers(p in primes(), v in -20i64..20, u in 1i64..1_000_000, prec in 1u32..40) {
        let u = if u % p.get() as i64 == 0 { u + 1 } else { u };
        let x = PadicNumber::new(p, v, &BigInt::from(u), prec).unwrap();
        round_trip(&x);
        round_trip(&PadicNumber::zero(p));
    }

    #[test]
    fn polynomials(f in poly()) {
        round_trip(&f);
    }

    #[test]
    fn extended_rationals(x in extended()) {
        round_trip(&x);
    }

    #[test]
    fn lattice_pairs(f in poly(), g in poly()) {
        let g = IwaPoly::new(f.prime(), g.coeffs().to_vec());
        round_trip(&LatticePair::new(f, g).unwrap());
    }

    #[test]
    fn nabla_results(n in 0u32..50, value in any::<i64>(),
                     method in prop::sample::select(vec![NablaMethod::ClosedForm, NablaMethod::ResultantOracle,
                                                         NablaMethod::SnfOracle, NablaMethod::FiniteTower])) {
        round_trip(&NablaResult { n, value, method });
    }

    #[test]
    fn towers_and_weierstrass(f in poly(), k in 1u32..5, mu in any::<u64>(), lambda in any::<u64>()) {
        prop_assume!(!f.is_zero());
        round_trip(&TowerOfQuotients::with_coeff_degree(f, k).unwrap());
        round_trip(&WeierstrassData { mu, lambda });
    }

    #[test]
    fn matrices(a in prop::sample::select(vec![-3i64, 0, 3]), n in 1u32..5) {
        let d = LocalCurveData::new(Prime::new(3).unwrap(), a, vec![1, 2]).unwrap();
        round_trip(&d);
        round_trip(&c_matrix(&d, n));
        round_trip(&m_matrix(&d, n));
        round_trip(&valuation_matrix_closed_form(&d, n));
    }

    #[test]
    fn scenarios(degrees in prop::collection::vec(1u64..9, 1..4), flat in any::<bool>(),
                 mu in 0u64..5, lambda in 0u64..30, r in 0u64..10, n0 in 0u32..4, e0 in 0u64..100) {
        let len = degrees.len();
        let sc = GrowthScenario {
            p: 3,
            ss_primes: degrees.into_iter().map(|degree| SsPrime { degree, a_v: 0 }).collect(),
            sigma: flat.then(|| vec![Sign::Flat; len]),
            tau: None,
            mu_sigma: mu,
            lambda_sigma: lambda,
            mu_tau: mu,
            lambda_tau: lambda,
            r_inf: r,
            base: Base { n0, e0 },
            ordinary_primes: None,
        };
        round_trip(&sc);
    }
}

#[test]
fn malformed_payloads_are_rejected() {
    assert!(serde_json::from_str::<IwaPoly>(r#"{"p":4,"coeffs":[],"mod_prec":null}"#).is_err());
    assert!(serde_json::from_str::<IwaPoly>(r#"{"p":3,"coeffs":["27"],"mod_prec":3}"#).is_err());
    assert!(serde_json::from_str::<PadicNumber>(r#"{"p":3,"val":0,"unit":"3","prec":4}"#).is_err());
    assert!(serde_json::from_str::<ExtendedRational>(r#""1/0""#).is_err());
    assert!(serde_json::from_str::<Sign>(r#""natural""#).is_err());
}
