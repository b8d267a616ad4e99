//! The truncated bi-parameter g-function and its good-cube decompositions.

mod energy;
mod probe;
mod sigma;
mod split;

pub(crate) use energy::slab_energies_upto;
pub use energy::{g_norm, slab_energies, truncated_nodes, SlabEnergies, TNode};
pub use probe::{boundedness_probe, operator_norm_estimate, rayleigh_max, ProbeReport};
pub use sigma::{
    averaging_identity_check, good_mask, level_pis, sigma_good, AveragingMode, AveragingReport,
    SigmaReport, Weighting, EXACT_SHIFT_BITS,
};
pub use split::{split_sigma, Pieces, SplitReport, SubSplit};
