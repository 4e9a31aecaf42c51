use thiserror::Error;

/// Errors raised by the arithmetic and formula layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),

    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),

    #[error("valuation cannot be determined at the available precision")]
    IndeterminateValuation,

    #[error("division by zero")]
    DivisionByZero,

    #[error("leading coefficient of the divisor is not a p-adic unit")]
    NonUnitLeadingCoefficient,

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("the zero polynomial has no mu/lambda invariants")]
    ZeroPolynomial,

    #[error("Phi_{0} divides f")]
    PhiDividesF(u32),

    #[error("module tower is not finite at level {0}: gcd(f, omega_{0}) is nontrivial")]
    NotFinite(u32),

    #[error("expected a p-adic unit")]
    NonUnit,

    #[error("signature is ambiguous: first-row valuations are {0} and {1}")]
    AmbiguousSignature(String, String),

    #[error("infinite term: prime #{index} is assigned {sign} while r_v = infinity")]
    InfiniteTerm { index: usize, sign: &'static str },

    #[error("formula produced the non-integer value {0}")]
    NonIntegerResult(String),

    #[error("closed form requires a_v = 0 at every supersingular prime")]
    NotAvZero,

    #[error("invalid local data: {0}")]
    InvalidLocalData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
