//! Distribution functions with regularly varying tails.
//!
//! Tails are modelled as `1 - F(x) = L(x) / x^alpha` on `[support_low, inf)`
//! with `0 < alpha < 1` and `L` slowly varying. The module also provides
//! Karamata asymptotics for truncated first moments, de Bruijn conjugates
//! and asymptotic inverses of regularly varying functions.

mod debruijn;
mod law;
mod slowly;
mod tail;

pub use debruijn::{asymptotic_inverse, de_bruijn_conjugate, de_bruijn_conjugate_in, AsymptoticInverse, ConjugateMethod, DeBruijnConjugate};
pub use law::{DistributionFunction, Law};
pub use slowly::SlowlyVarying;
pub use tail::{karamata_truncated_moment, TailModel};

use crate::quadrature::QuadratureError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegVarError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("tail index {0} outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("infinite quantile: F^<-(1) is unbounded")]
    InfiniteQuantile,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("ill-posed conjugate: {0}")]
    IllPosedConjugate(String),
}

pub type Result<T> = std::result::Result<T, RegVarError>;
