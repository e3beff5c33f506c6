//! Interval maps, orbits, invariant sampling and exact digit streams.

mod bits;
mod cf;
mod map;
mod observable;
mod orbit;

pub use bits::BitStream;
pub use cf::{cf_digits, rational_cf, HomographicDigits, BITS_PER_DIGIT};
pub use map::{AffineBranch, Branch, IntervalMap, MapKind};
pub use observable::{Observable, VariationLevel, VariationMethod, VariationReport};
pub use orbit::{
    cf_digit_stream, default_bit_budget, orbit_stream, sample_point, InvariantSampler, OrbitMode, OrbitStart,
    OrbitStream, ValueStream,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),
    #[error("map is undefined at {0}")]
    UndefinedPoint(f64),
    #[error("orbit mode {mode:?} is not available for the {map} map")]
    IncompatibleMode { mode: OrbitMode, map: &'static str },
    #[error("no invariant density known and no Ulam estimate supplied")]
    NoSampler,
    #[error("continued-fraction digit does not fit in 64 bits")]
    DigitOverflow,
    #[error("digit extraction did not terminate within {bits} bits")]
    NonTerminating { bits: u64 },
}
