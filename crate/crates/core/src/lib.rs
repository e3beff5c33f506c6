//! Trimmed and truncated strong laws for Birkhoff sums of heavy-tailed
//! observables over expanding interval maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`regvar`]: regularly varying tails, Karamata asymptotics, de Bruijn
//!   conjugates.
//! * [`dynamics`]: interval maps, exact orbit streams and continued-fraction
//!   digits, observables.
//! * [`trimming`]: trimmed / truncated sums and the streaming checkpoint
//!   profile.
//! * [`sequences`]: trimming plans `(f_n, a_n, b_n, d_n, gamma_n)`.
//! * [`spectral`]: Ulam discretisation of the transfer operator and
//!   spectral diagnostics.
//! * [`harness`]: config-driven experiments and their persisted results.
//!
//! See the `examples/` directory for one runnable program per capability.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::large_enum_variant)]

pub mod dynamics;
pub mod harness;
pub mod quadrature;
pub mod regvar;
pub mod sequences;
pub mod spectral;
pub mod summation;
pub mod trimming;
