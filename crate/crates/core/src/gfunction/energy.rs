use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{weight_field, KernelSpec, ThetaBank};
use crate::lattice::whitney_quadrature;

/// A `t` node of the truncated range `(2^{-depth}, 1]`, tagged with the
/// level of the Whitney slab it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TNode {
    pub level: u32,
    pub t: f64,
    pub weight: f64,
}

/// Whitney nodes of every slab `(2^{-j-1}, 2^{-j}]`, `j = 0..depth`.
pub fn truncated_nodes(depth: u32, g: usize) -> Result<Vec<TNode>> {
    let mut out = Vec::new();
    for level in 0..depth {
        for (t, weight) in whitney_quadrature(level, g)?.iter() {
            out.push(TNode { level, t, weight });
        }
    }
    Ok(out)
}

/// `∑_{t1 ∈ slab j1, t2 ∈ slab j2} w1 w2 |Θ_{t1,t2} f(x)|² μ(x)` per product
/// cell, for every pair of slab levels.
#[derive(Debug, Clone)]
pub struct SlabEnergies {
    pub levels_n: u32,
    pub levels_m: u32,
    fields: Vec<Array2<f64>>,
}

impl SlabEnergies {
    pub fn field(&self, j1: u32, j2: u32) -> &Array2<f64> {
        &self.fields[(j1 * self.levels_m + j2) as usize]
    }

    pub fn total(&self) -> f64 {
        self.fields.iter().map(|f| f.sum()).sum()
    }
}

pub(crate) fn check_field(k: &KernelSpec, f: &Array2<Complex64>, wn: &[f64], wm: &[f64]) -> Result<()> {
    let want = (k.grid_n.len(), k.grid_m.len());
    if f.dim() != want || wn.len() != want.0 || wm.len() != want.1 {
        return Err(Error::Shape(format!("field {:?} does not match kernel grids {want:?}", f.dim())));
    }
    Ok(())
}

/// Energies of `Θf` grouped by slab pair.
pub fn slab_energies(
    k: &KernelSpec,
    f: &Array2<Complex64>,
    wn: &[f64],
    wm: &[f64],
    g: usize,
) -> Result<SlabEnergies> {
    slab_energies_upto(k, f, wn, wm, g, k.grid_n.depth, k.grid_m.depth)
}

/// As [`slab_energies`] over slab levels `0..ln` and `0..lm`.
pub(crate) fn slab_energies_upto(
    k: &KernelSpec,
    f: &Array2<Complex64>,
    wn: &[f64],
    wm: &[f64],
    g: usize,
    ln: u32,
    lm: u32,
) -> Result<SlabEnergies> {
    check_field(k, f, wn, wm)?;
    let n1 = truncated_nodes(ln, g)?;
    let n2 = truncated_nodes(lm, g)?;
    let t1: Vec<f64> = n1.iter().map(|n| n.t).collect();
    let t2: Vec<f64> = n2.iter().map(|n| n.t).collect();
    let bank = ThetaBank::new(k, &t1, &t2);
    let fw = weight_field(f, wn, wm);
    let mu = Array2::from_shape_fn(f.dim(), |(i, j)| wn[i] * wm[j]);
    let per_t1: Vec<Vec<Array2<f64>>> = n1
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let mut rows = vec![Array2::zeros(f.dim()); lm as usize];
            let left = bank.left_product(&fw, i);
            for (j, b) in n2.iter().enumerate() {
                let theta = match &left {
                    Some(l) => bank.finish(l, j),
                    None => bank.apply_weighted(&fw, i, j),
                };
                let w = a.weight * b.weight;
                let slot = &mut rows[b.level as usize];
                ndarray::Zip::from(slot).and(&theta).and(&mu).for_each(|s, th, m| {
                    *s += w * th.norm_sqr() * m;
                });
            }
            rows
        })
        .collect();
    let mut fields = vec![Array2::zeros(f.dim()); (ln * lm) as usize];
    for (a, rows) in n1.iter().zip(per_t1) {
        for (j2, r) in rows.into_iter().enumerate() {
            fields[a.level as usize * lm as usize + j2] += &r;
        }
    }
    Ok(SlabEnergies {
        levels_n: ln,
        levels_m: lm,
        fields,
    })
}

/// `‖g(f)‖²_{L²(μ)}` over the truncated `t`-range.
pub fn g_norm(k: &KernelSpec, f: &Array2<Complex64>, wn: &[f64], wm: &[f64], g: usize) -> Result<f64> {
    Ok(slab_energies(k, f, wn, wm, g)?.total())
}
