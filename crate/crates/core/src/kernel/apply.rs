use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{KernelBody, KernelSpec};

fn weighted(f: &Array2<Complex64>, wn: &[f64], wm: &[f64]) -> Array2<Complex64> {
    Array2::from_shape_fn(f.dim(), |(i, j)| f[[i, j]] * (wn[i] * wm[j]))
}

fn check(k: &KernelSpec, f: &Array2<Complex64>, wn: &[f64], wm: &[f64]) -> Result<()> {
    let want = (k.grid_n.len(), k.grid_m.len());
    if f.dim() != want || wn.len() != want.0 || wm.len() != want.1 {
        return Err(Error::Shape(format!(
            "field {:?} and weights ({}, {}) do not match kernel grids {want:?}",
            f.dim(),
            wn.len(),
            wm.len()
        )));
    }
    Ok(())
}

/// `Θ_{t1,t2} f(x) = Σ_y K_{t1,t2}(x, y) f(y) μ(y)` over cell centres.
pub fn apply_theta(
    k: &KernelSpec,
    f: &Array2<Complex64>,
    wn: &[f64],
    wm: &[f64],
    t1: f64,
    t2: f64,
) -> Result<Array2<Complex64>> {
    check(k, f, wn, wm)?;
    let fw = weighted(f, wn, wm);
    Ok(match &k.body {
        KernelBody::Factorized { scale, first, second } => {
            let a = first.matrix(k.grid_n, t1);
            let b = second.matrix(k.grid_m, t2);
            a.dot(&fw).dot(&b.t()) * *scale
        }
        KernelBody::Tabulated(tab) => apply_table(tab, &fw),
    })
}

pub(crate) fn apply_table(tab: &Array2<f64>, fw: &Array2<Complex64>) -> Array2<Complex64> {
    let (nn, nm) = fw.dim();
    let flat: Vec<Complex64> = (0..nn * nm).map(|y| fw[[y % nn, y / nn]]).collect();
    Array2::from_shape_fn((nn, nm), |(x1, x2)| {
        let row = tab.row(x1 + nn * x2);
        row.iter().zip(&flat).map(|(t, v)| v * *t).sum()
    })
}

/// The same sum evaluated entry by entry through [`KernelSpec::eval`].
pub fn apply_theta_direct(
    k: &KernelSpec,
    f: &Array2<Complex64>,
    wn: &[f64],
    wm: &[f64],
    t1: f64,
    t2: f64,
) -> Result<Array2<Complex64>> {
    check(k, f, wn, wm)?;
    let (nn, nm) = f.dim();
    let mut out = Array2::zeros((nn, nm));
    for x1 in 0..nn {
        for x2 in 0..nm {
            let mut s = Complex64::new(0.0, 0.0);
            for y1 in 0..nn {
                for y2 in 0..nm {
                    s += k.eval([x1, x2], [y1, y2], t1, t2) * f[[y1, y2]] * (wn[y1] * wm[y2]);
                }
            }
            out[[x1, x2]] = s;
        }
    }
    Ok(out)
}

/// Factor matrices of a kernel precomputed on two lists of `t` nodes.
#[derive(Debug, Clone)]
pub struct ThetaBank {
    scale: Complex64,
    first: Vec<Array2<Complex64>>,
    second: Vec<Array2<Complex64>>,
    table: Option<Array2<f64>>,
}

impl ThetaBank {
    pub fn new(k: &KernelSpec, t1: &[f64], t2: &[f64]) -> Self {
        match &k.body {
            KernelBody::Factorized { scale, first, second } => Self {
                scale: *scale,
                first: t1.iter().map(|&t| first.matrix(k.grid_n, t)).collect(),
                second: t2.iter().map(|&t| second.matrix(k.grid_m, t)).collect(),
                table: None,
            },
            KernelBody::Tabulated(tab) => Self {
                scale: Complex64::new(1.0, 0.0),
                first: Vec::new(),
                second: Vec::new(),
                table: Some(tab.clone()),
            },
        }
    }

    /// `K_{t1}(·,·)` for factorized kernels.
    pub fn first(&self, i: usize) -> Option<&Array2<Complex64>> {
        self.first.get(i)
    }

    pub fn second(&self, j: usize) -> Option<&Array2<Complex64>> {
        self.second.get(j)
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn table(&self) -> Option<&Array2<f64>> {
        self.table.as_ref()
    }

    /// `Θ` at nodes `(i, j)` applied to an already μ-weighted field.
    pub fn apply_weighted(&self, fw: &Array2<Complex64>, i: usize, j: usize) -> Array2<Complex64> {
        match &self.table {
            Some(tab) => apply_table(tab, fw),
            None => self.first[i].dot(fw).dot(&self.second[j].t()) * self.scale,
        }
    }

    /// `scale · K_{t1} · fw` at first-factor node `i`; `None` for tables.
    pub fn left_product(&self, fw: &Array2<Complex64>, i: usize) -> Option<Array2<Complex64>> {
        if self.table.is_some() {
            return None;
        }
        Some(self.first[i].dot(fw) * self.scale)
    }

    pub fn finish(&self, left: &Array2<Complex64>, j: usize) -> Array2<Complex64> {
        left.dot(&self.second[j].t())
    }
}

pub fn weight_field(f: &Array2<Complex64>, wn: &[f64], wm: &[f64]) -> Array2<Complex64> {
    weighted(f, wn, wm)
}
