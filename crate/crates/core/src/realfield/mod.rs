//! Exact quadratic irrationals, their continued fractions and the test
//! sequence of squared convergent denominators.

mod cf;
mod surd;

pub use cf::{
    cf_expansion, convergents, e_fixed, heuristic_cf_expansion, pi_fixed, rational_approx_at,
    sequence_s, Convergent, Convergents, HeuristicExpansion, PartialQuotients, RationalApprox,
};
pub use surd::{QuadraticIrrational, MAX_RADICAND};
