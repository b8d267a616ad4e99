use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::ChildOrdering;
use crate::lattice::{CubeId, ShiftedLattice};

/// A basis element: `child == 0` is the root scaling function,
/// `child == j ≥ 1` the Haar function `φ_{I,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HaarIndex {
    pub cube: CubeId,
    pub child: usize,
}

impl HaarIndex {
    pub fn is_scaling(&self) -> bool {
        self.child == 0
    }
}

impl fmt::Display for HaarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.cube, self.child)
    }
}

/// Constant on each listed piece, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarFunction {
    pub index: HaarIndex,
    pub normalization: Complex64,
    pub pieces: Vec<(CubeId, Complex64)>,
}

impl HaarFunction {
    pub fn dense(&self, lattice: &ShiftedLattice) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); lattice.grid().len()];
        for &(c, v) in &self.pieces {
            for i in lattice.cells(c) {
                out[i] = v;
            }
        }
        out
    }

    pub fn value_on(&self, lattice: &ShiftedLattice, cell: usize) -> Complex64 {
        self.pieces
            .iter()
            .find(|(c, _)| lattice.contains_cell(*c, cell))
            .map_or(Complex64::new(0.0, 0.0), |p| p.1)
    }
}

/// `φ_{I,j} = √(b(I_j)b(I*_{j+1})/b(I*_j)) · (1_{I_j}/b(I_j) − 1_{I*_{j+1}}/b(I*_{j+1}))`
/// with the principal square root, `1 ≤ j < 2^n`.
pub fn haar_function(ordering: &ChildOrdering, j: usize) -> Result<HaarFunction> {
    let count = ordering.children.len();
    assert!(j >= 1 && j < count, "Haar index {j} outside 1..{count}");
    let cube = ordering.cube;
    let degenerate = |what| Error::DegenerateHaar { cube, index: j, what };
    let own = ordering.masses[j - 1];
    let tail = ordering.tails[j];
    let whole = ordering.tails[j - 1];
    if own.norm() == 0.0 {
        return Err(degenerate("b(I_j)"));
    }
    if tail.norm() == 0.0 {
        return Err(degenerate("b(I*_{j+1})"));
    }
    if whole.norm() == 0.0 {
        return Err(degenerate("b(I*_j)"));
    }
    let normalization = (own * tail / whole).sqrt();
    let mut pieces = vec![(ordering.children[j - 1], normalization / own)];
    let rest = -normalization / tail;
    pieces.extend(ordering.children[j..].iter().map(|&c| (c, rest)));
    Ok(HaarFunction {
        index: HaarIndex { cube, child: j },
        normalization,
        pieces,
    })
}

/// `1/√b(root)` on the whole torus.
pub fn scaling_function(root_mass: Complex64) -> Result<HaarFunction> {
    if root_mass.norm() == 0.0 {
        return Err(Error::DegenerateHaar {
            cube: CubeId::ROOT,
            index: 0,
            what: "b(root)",
        });
    }
    let v = root_mass.sqrt().inv();
    Ok(HaarFunction {
        index: HaarIndex {
            cube: CubeId::ROOT,
            child: 0,
        },
        normalization: v,
        pieces: vec![(CubeId::ROOT, v)],
    })
}
