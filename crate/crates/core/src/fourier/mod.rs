//! The sawtooth, its trigonometric approximation with a nonnegative
//! majorant, and Vaughan's decomposition of von Mangoldt sums.

mod vaaler;
mod vaughan;

pub use vaaler::{
    adversarial_points, check_vaaler, psi, vaaler_weight, VaalerCheck, VaalerKernel, TAYLOR_CUTOFF,
};
pub use vaughan::{
    vaughan_b, vaughan_b_table, vaughan_decompose, vaughan_pieces, vaughan_pieces_table,
    VaughanDecomposition, VaughanParams, VaughanPieces,
};
