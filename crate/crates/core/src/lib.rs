//! Prime-constrained Diophantine approximation on lines.
//!
//! The crate counts triples `(p, q, r)` with `p`, `r` prime such that
//! `0 < p*alpha - r < p^(-1/5 + eps)` and `0 < p*c*alpha - q < p^(-1/5 + eps)`,
//! and evaluates every auxiliary object needed to study how those counts
//! behave: continued-fraction convergents of the slope `c`, the Vaaler
//! sawtooth approximation, Vaughan's identity, exponential sums over primes
//! and congruence-restricted counts with their Fourier error terms.
//!
//! Module map:
//!
//! * [`arith`]: fixed-point reals, phases mod 1, segmented prime sieve and
//!   the classical arithmetic functions.
//! * [`realfield`]: exact quadratic irrationals and continued fractions.
//! * [`fourier`]: sawtooth, Vaaler kernel, Vaughan decomposition.
//! * [`expsum`]: exponential sums over primes and their bilinear pieces.
//! * [`counting`]: the triple counter and the block counters.
//! * [`sievecount`]: congruence-restricted counts and error terms.
//! * [`harness`]: configuration, seeded pipelines and report emission.
//! * [`seed`]: labelled random substreams.

pub mod arith;
pub mod counting;
pub mod error;
pub mod expsum;
pub mod fourier;
pub mod harness;
pub mod realfield;
pub mod seed;
pub mod sievecount;

pub use error::{Error, Result};
