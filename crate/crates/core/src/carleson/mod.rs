//! Carleson coefficients, the packing condition over unions of rectangles,
//! dyadic Carleson embedding, Schur coefficients, decay diagnostics and the
//! dyadic strong maximal function.

mod coefficient;
mod diagnostics;
mod embedding;
mod maximal;
mod schur;

use serde::{Deserialize, Serialize};

use crate::lattice::{CubeId, ShiftedLattice};
use crate::measure::FactorMeasure;

pub use coefficient::{
    biparameter_carleson_check, carleson_coefficient, carleson_table, random_omegas, CarlesonCheck,
    CarlesonTable, OmegaPlan, OmegaSet,
};
pub use diagnostics::{
    a_i_sequence, a_j_sequence, decay_profile, f_alpha_pair, DecayKind, DecayProfile, FAlphaValue,
    SequenceReport,
};
pub use embedding::{
    carleson_embedding_check, embedding_instance, packing_sums, EmbeddingFamily, EmbeddingInstance,
    EmbeddingReport,
};
pub use maximal::{
    car_car_sum, layer_cake_inclusion, rectangle_averages, strong_maximal, CarCarReport,
    LayerCakeReport, RectangleAverages,
};
pub use schur::{calibrate_schur, schur_check, schur_norm_sq, SchurCalibration, SchurMatrix};

/// Position of a cube in level-major order: `Σ_{l<level} 2^{l·dim} + flat`.
pub fn cube_position(dim: usize, c: CubeId) -> usize {
    (0..c.level).map(|l| 1usize << (l as usize * dim)).sum::<usize>() + c.flat()
}

/// One non-negative number per cube of a lattice, stored level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeSequence {
    pub dim: usize,
    pub depth: u32,
    /// `values[level][flat]`.
    pub values: Vec<Vec<f64>>,
}

impl CubeSequence {
    pub fn zeros(dim: usize, depth: u32) -> Self {
        let values = (0..=depth).map(|l| vec![0.0; 1usize << (l as usize * dim)]).collect();
        Self { dim, depth, values }
    }

    pub fn get(&self, c: CubeId) -> f64 {
        self.values[c.level as usize][c.flat()]
    }

    pub fn set(&mut self, c: CubeId, v: f64) {
        self.values[c.level as usize][c.flat()] = v;
    }

    pub fn total(&self) -> f64 {
        self.values.iter().flatten().sum()
    }
}

/// `μ(Q)` for every cube of the lattice.
pub fn cube_masses(m: &FactorMeasure, lat: &ShiftedLattice) -> CubeSequence {
    let mut out = CubeSequence::zeros(lat.dim(), lat.depth());
    for c in lat.all_cubes() {
        out.set(c, m.box_mass(lat.start(c), lat.lens(c)));
    }
    out
}
