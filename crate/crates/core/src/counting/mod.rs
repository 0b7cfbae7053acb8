//! The triple counter `F_N(alpha)`, the target density `G_N`, the block
//! counters `T(P)`, `S(P)`, `R(P)`, `N(P)` and the two estimators of
//! `int_a^b F_N`.

mod blocks;
mod measure;
mod triples;

pub use blocks::{
    count_n_p, count_n_p_with, count_r_p, count_r_p_with, count_s_p, count_s_p_with, count_t_p,
    BlockParams, NCount, RCount, TCount,
};
pub use measure::{
    integral_f_n, integral_f_n_with, measure_b_p, sample_alpha, BpMeasure, IntegralEstimate,
    IntegralSpec,
};
pub use triples::{count_f_n, g_n, window_width, ApproxTriple, FCount, TripleCounter};
