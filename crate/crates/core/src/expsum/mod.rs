//! Exponential sums over prime powers, their Vaughan-reduced type I and
//! type II forms, and the reciprocal-distance sum `R_c(L, x)`.
//!
//! Every sum twists by `e(h c n)` for a quadratic irrational slope `c`.
//! Phases are reduced modulo one in 128-bit fixed point, so the phase
//! error for `n h <= 2^64` stays below `2^-64` turns.

mod bounds;
mod sums;

pub use bounds::{
    ceil_root, default_j, default_u, r_c_bound, r_c_sum, z1_bound, z2_bound, z_h_bound, z_hk_bound,
    BoundDiagnostic,
};
pub use sums::{
    dyadic_blocks, prime_exp_sum, slope_phase, z1_h, z2_h, z_h, z_h_vaughan_route, z_hk, VaughanRoute,
    ExpSumResult, SumKind, Window,
};
