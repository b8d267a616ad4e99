//! Discrete upper doubling measures on the torus and their companions.

mod accretive;
mod dominating;
mod factor;
pub mod io;

pub use accretive::{verify_pseudo_accretive, AccretiveFunction};
pub use dominating::{
    dyadic_radii, symmetric_envelope, symmetrize_dominating, verify_upper_doubling,
    DominatingFamily, DominatingFunction, LambdaTable, Symmetrized,
};
pub use factor::{FactorMeasure, PrefixTable};
