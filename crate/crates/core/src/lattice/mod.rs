//! Randomly shifted dyadic lattices on the torus.

mod cube;
mod goodness;
mod shift;
mod whitney;

pub use cube::{CubeId, Direction, ShiftedLattice};
pub use goodness::{
    bad_witness_by_enumeration, badness_threshold, classify_goodness, default_r, gamma_from, pi_good, pi_table, Goodness,
    GoodnessParams, PiEstimate, PiMode,
};
pub use shift::ShiftBits;
pub use whitney::{whitney_nodes, whitney_quadrature, WhitneyNodes};
