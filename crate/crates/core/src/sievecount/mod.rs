//! Congruence-restricted counts of `n <= N` whose multiples of `alpha`
//! and `c alpha` have small fractional parts, their Fourier error terms,
//! the resonance minimum that controls those terms along the test
//! sequence, and the integral estimate for `min(K, 1/||alpha x||)`.

mod cells;
mod integral;
mod resonance;

pub use cells::{
    cells_up_to, count_sieve_s, e_term, e_term_with_cutoff, geometric_abs, j_n_average, j_weighted,
    sieve_cell, window_mu, JnAverage, JnSpec, SieveCell, SieveSetup,
};
pub use integral::{integral_min_check, riemann_min, IntegralCase, IntegralMinCheck};
pub use resonance::{resonance_bound_holds, resonance_r, resonance_sweep, ResonanceSweep};
