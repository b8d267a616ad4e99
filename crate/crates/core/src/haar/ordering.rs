use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lattice::{CubeId, ShiftedLattice};
use crate::measure::{verify_pseudo_accretive, AccretiveFunction, FactorMeasure};

/// Children `I_1 … I_{2^n}` of a cube and the tail masses
/// `b(I*_j) = ∫_{I_j ∪ … ∪ I_{2^n}} b dμ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildOrdering {
    pub cube: CubeId,
    pub children: Vec<CubeId>,
    pub masses: Vec<Complex64>,
    pub tails: Vec<Complex64>,
}

/// `∫_c b dμ` and `μ(c)` over the cells of a lattice cube.
pub(crate) fn cube_integrals(
    lattice: &ShiftedLattice,
    m: &FactorMeasure,
    b: &AccretiveFunction,
    c: CubeId,
) -> (Complex64, f64) {
    let w = m.weights();
    lattice.cells(c).into_iter().fold((Complex64::new(0.0, 0.0), 0.0), |(s, mu), i| {
        (s + b.values[i] * w[i], mu + w[i])
    })
}

/// The accretivity constant of `b`, computing it when `b` is unvalidated.
pub fn accretivity_slack(m: &FactorMeasure, b: &AccretiveFunction) -> Result<f64> {
    let delta = match b.accretivity_constant {
        Some(d) => d,
        None => verify_pseudo_accretive(b, m, 0.0)?.worst_ratio,
    };
    if !(delta > 0.0) {
        return Err(param("b", "not pseudo-accretive on this measure"));
    }
    Ok(delta)
}

/// First permutation, in lexicographic order of the children, satisfying
/// `|b(I*_j)| ≥ [1 − (j−1)2^{-n}]·μ(I)·slack` for every `j`.
pub fn order_children(
    lattice: &ShiftedLattice,
    m: &FactorMeasure,
    b: &AccretiveFunction,
    cube: CubeId,
    slack: f64,
) -> Result<ChildOrdering> {
    let kids = lattice.children(cube)?;
    let count = kids.len();
    let ints: Vec<(Complex64, f64)> = kids.iter().map(|&c| cube_integrals(lattice, m, b, c)).collect();
    let mu: f64 = ints.iter().map(|x| x.1).sum();
    let step = 1.0 / count as f64;
    // rounding allowance on the comparison
    let tol = 1e-12 * mu.max(f64::MIN_POSITIVE);
    for perm in (0..count).permutations(count) {
        let mut tails = vec![Complex64::new(0.0, 0.0); count];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (0..count).rev() {
            acc += ints[perm[j]].0;
            tails[j] = acc;
        }
        let ok = tails
            .iter()
            .enumerate()
            .all(|(j, t)| t.norm() + tol >= (1.0 - j as f64 * step) * mu * slack);
        if ok {
            return Ok(ChildOrdering {
                cube,
                children: perm.iter().map(|&i| kids[i]).collect(),
                masses: perm.iter().map(|&i| ints[i].0).collect(),
                tails,
            });
        }
    }
    Err(Error::InsufficientAccretivity { cube })
}
