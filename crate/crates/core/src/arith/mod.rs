//! Arithmetic primitives: fixed-point reals, phases, primes and the
//! multiplicative functions used by the sums.

mod fixed;
mod functions;
mod primes;

pub use fixed::{dist_nearest_int, e_frac, FixedReal, Phase, DEFAULT_FRAC_BITS, MIN_FRAC_BITS};
pub use functions::{
    chebyshev_psi, divisor_count, divisors, factorize, moebius, moebius_table, von_mangoldt,
    von_mangoldt_range, von_mangoldt_table,
};
pub use primes::{
    is_prime_trial, isqrt, sieve_primes, small_primes, PrimeTable, CACHE_HEADER_LEN, CACHE_MAGIC,
};
