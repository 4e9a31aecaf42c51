//! Exact arithmetic for the local side of signed Iwasawa theory at
//! supersingular primes: p-adic scalars, the Iwasawa algebra and its
//! cyclotomic quotients, logarithmic matrices, the image lattice of the
//! signed Coleman maps, Kobayashi ranks, and Tate-Shafarevich growth tables.

pub mod coleman;
pub mod cyclo;
pub mod error;
pub mod growth;
pub mod kobayashi;
pub mod linalg;
pub mod logmat;
pub mod padic;
pub mod poly;
pub mod selfcheck;

pub use error::{Error, Result};
pub use padic::{ExtendedRational, PadicNumber, Prime, DEFAULT_PRECISION};
pub use poly::IwaPoly;
