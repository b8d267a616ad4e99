use std::io::Write;

use log::warn;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haar::{
    accretivity_slack, cube_integrals, haar_function, order_children, scaling_function,
    ChildOrdering, HaarFunction, HaarIndex,
};
use crate::lattice::{CubeId, ShiftedLattice};
use crate::measure::{AccretiveFunction, FactorMeasure};

/// The `b`-adapted basis of one factor: the root scaling function followed by
/// every non-degenerate Haar function, coarse levels first.
#[derive(Debug, Clone)]
pub struct HaarSystem {
    lattice: ShiftedLattice,
    weights: Vec<f64>,
    b: Vec<Complex64>,
    orderings: Vec<ChildOrdering>,
    functions: Vec<HaarFunction>,
    /// cells × functions
    matrix: Array2<Complex64>,
    dropped: Vec<HaarIndex>,
}

impl HaarSystem {
    pub fn build(m: &FactorMeasure, b: &AccretiveFunction, lattice: &ShiftedLattice) -> Result<Self> {
        let grid = lattice.grid();
        if m.grid() != grid || b.values.len() != grid.len() {
            return Err(Error::Shape("measure, b and lattice grids differ".into()));
        }
        let slack = accretivity_slack(m, b)?;
        let cubes: Vec<CubeId> = (0..lattice.depth()).flat_map(|l| lattice.cubes_at(l)).collect();
        let orderings = cubes
            .par_iter()
            .map(|&c| order_children(lattice, m, b, c, slack))
            .collect::<Result<Vec<_>>>()?;
        let (root_mass, _) = cube_integrals(lattice, m, b, CubeId::ROOT);
        let mut functions = vec![scaling_function(root_mass)?];
        let mut dropped = Vec::new();
        for ord in &orderings {
            for j in 1..ord.children.len() {
                match haar_function(ord, j) {
                    Ok(f) => functions.push(f),
                    Err(e @ Error::DegenerateHaar { .. }) => {
                        warn!("dropping Haar function: {e}");
                        dropped.push(HaarIndex { cube: ord.cube, child: j });
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let mut matrix = Array2::zeros((grid.len(), functions.len()));
        for (k, f) in functions.iter().enumerate() {
            for &(c, v) in &f.pieces {
                for i in lattice.cells(c) {
                    matrix[[i, k]] = v;
                }
            }
        }
        Ok(Self {
            lattice: lattice.clone(),
            weights: m.weights().to_vec(),
            b: b.values.clone(),
            orderings,
            functions,
            matrix,
            dropped,
        })
    }

    pub fn lattice(&self) -> &ShiftedLattice {
        &self.lattice
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn orderings(&self) -> &[ChildOrdering] {
        &self.orderings
    }

    pub fn ordering(&self, cube: CubeId) -> Option<&ChildOrdering> {
        self.orderings.iter().find(|o| o.cube == cube)
    }

    pub fn functions(&self) -> &[HaarFunction] {
        &self.functions
    }

    pub fn indices(&self) -> Vec<HaarIndex> {
        self.functions.iter().map(|f| f.index).collect()
    }

    pub fn position(&self, index: HaarIndex) -> Option<usize> {
        self.functions.iter().position(|f| f.index == index)
    }

    pub fn function(&self, index: HaarIndex) -> Option<&HaarFunction> {
        self.functions.iter().find(|f| f.index == index)
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn dropped(&self) -> &[HaarIndex] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `∫ b φ dμ`.
    pub fn cancellation(&self, k: usize) -> Complex64 {
        (0..self.weights.len())
            .map(|i| self.b[i] * self.matrix[[i, k]] * self.weights[i])
            .sum()
    }

    /// `⟨b φ_a, φ_b⟩` for all pairs.
    pub fn gram(&self) -> Array2<Complex64> {
        let scaled = Array2::from_shape_fn(self.matrix.dim(), |(i, k)| {
            self.matrix[[i, k]] * self.b[i] * self.weights[i]
        });
        scaled.t().dot(&self.matrix)
    }

    /// One-parameter coefficients `⟨f, φ⟩`.
    pub fn analyze(&self, f: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .map(|k| {
                f.iter()
                    .zip(&self.weights)
                    .enumerate()
                    .map(|(i, (v, w))| v * w * self.matrix[[i, k]])
                    .sum()
            })
            .collect()
    }

    /// `Σ c_k b φ_k`.
    pub fn synthesize(&self, c: &[Complex64]) -> Vec<Complex64> {
        (0..self.weights.len())
            .map(|i| {
                self.b[i]
                    * c.iter()
                        .enumerate()
                        .map(|(k, v)| v * self.matrix[[i, k]])
                        .sum::<Complex64>()
            })
            .collect()
    }
}

/// `f_{I1 J1} = ⟨f, φ_{I1} ⊗ ψ_{J1}⟩` over both bases, top components
/// included.
#[derive(Debug, Clone)]
pub struct BiParamCoefficients {
    pub rows: Vec<HaarIndex>,
    pub cols: Vec<HaarIndex>,
    pub values: Array2<Complex64>,
}

fn diag_scale(f: &Array2<Complex64>, left: impl Fn(usize) -> Complex64, right: impl Fn(usize) -> Complex64) -> Array2<Complex64> {
    Array2::from_shape_fn(f.dim(), |(i, j)| left(i) * f[[i, j]] * right(j))
}

fn check_field(f: &Array2<Complex64>, sn: &HaarSystem, sm: &HaarSystem) -> Result<()> {
    let want = (sn.weights.len(), sm.weights.len());
    if f.dim() != want {
        return Err(Error::Shape(format!("field is {:?}, grids need {:?}", f.dim(), want)));
    }
    Ok(())
}

/// Coefficients of a product-cell field `f[[x1, x2]]`.
pub fn forward_transform(f: &Array2<Complex64>, sn: &HaarSystem, sm: &HaarSystem) -> Result<BiParamCoefficients> {
    check_field(f, sn, sm)?;
    let weighted = diag_scale(
        f,
        |i| Complex64::new(sn.weights[i], 0.0),
        |j| Complex64::new(sm.weights[j], 0.0),
    );
    let values = sn.matrix.t().dot(&weighted).dot(&sm.matrix);
    Ok(BiParamCoefficients {
        rows: sn.indices(),
        cols: sm.indices(),
        values,
    })
}

/// `Σ f_{I1J1} b·φ_{I1} ⊗ ψ_{J1}`.
pub fn reconstruct(c: &BiParamCoefficients, sn: &HaarSystem, sm: &HaarSystem) -> Result<Array2<Complex64>> {
    if c.values.dim() != (sn.len(), sm.len()) {
        return Err(Error::Shape("coefficients do not match the Haar systems".into()));
    }
    let raw = sn.matrix.dot(&c.values).dot(&sm.matrix.t());
    Ok(diag_scale(&raw, |i| sn.b[i], |j| sm.b[j]))
}

/// Relative `L²(μ)` distance between two product-cell fields.
pub fn relative_l2_error(f: &Array2<Complex64>, g: &Array2<Complex64>, wn: &[f64], wm: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((i, j), v) in f.indexed_iter() {
        let w = wn[i] * wm[j];
        num += (v - g[[i, j]]).norm_sqr() * w;
        den += v.norm_sqr() * w;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

impl BiParamCoefficients {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "level1", "index1", "childIdx1", "level2", "index2", "childIdx2", "re", "im",
        ])?;
        for (a, ra) in self.rows.iter().enumerate() {
            for (b, cb) in self.cols.iter().enumerate() {
                let v = self.values[[a, b]];
                out.write_record(&[
                    ra.cube.level.to_string(),
                    ra.cube.flat().to_string(),
                    ra.child.to_string(),
                    cb.cube.level.to_string(),
                    cb.cube.flat().to_string(),
                    cb.child.to_string(),
                    format!("{:.16e}", v.re),
                    format!("{:.16e}", v.im),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}
