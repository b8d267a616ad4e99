use std::f64::consts::PI;
use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{torus_distance, CellGrid};
use crate::haar::{cube_integrals, haar_function, order_children, accretivity_slack};
use crate::lattice::{CubeId, GoodnessParams, ShiftedLattice};
use crate::measure::{AccretiveFunction, DominatingFunction, FactorMeasure};

/// `t^e / (t^e λ(x,t) + d^e λ(x,d))` with `d = |x − y|`.
pub fn size_profile(lambda: &DominatingFunction, grid: CellGrid, x: usize, e: f64, t: f64, d: f64) -> f64 {
    let xc = grid.center(x);
    let te = t.powf(e);
    te / (te * lambda.eval(&xc, t) + d.powf(e) * lambda.eval(&xc, d))
}

/// `δ^e / (t^e λ(x,t) + d^e λ(x,d))`.
pub fn holder_profile(
    lambda: &DominatingFunction,
    grid: CellGrid,
    x: usize,
    e: f64,
    t: f64,
    d: f64,
    delta: f64,
) -> f64 {
    size_profile(lambda, grid, x, e, t, d) * (delta / t).powf(e)
}

/// One factor of a product kernel `K_{t1} ⊗ K_{t2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorKernel {
    Zero,
    Constant { value: f64 },
    /// `t^e/(t^e λ(x,t) + d^e λ(x,d))`, times `sin(2πν(y−x)₀)` with
    /// `ν = max(1, 2^{j−1})` for `t ∈ (2^{-j-1}, 2^{-j}]` when `oscillate` is
    /// set. The frequency is constant on each Whitney band. The sine is odd in
    /// `y − x`, so for a uniform measure and `λ` independent of `x` the kernel
    /// integrates to zero in `y`. On the band `j = L` it vanishes at cell centres.
    StandardDecay {
        exponent: f64,
        lambda: DominatingFunction,
        oscillate: bool,
    },
    /// `t^e · profile(y)`.
    Separable { exponent: f64, profile: Vec<Complex64> },
}

impl FactorKernel {
    pub fn eval(&self, grid: CellGrid, x: usize, y: usize, t: f64) -> Complex64 {
        match self {
            FactorKernel::Zero => Complex64::new(0.0, 0.0),
            FactorKernel::Constant { value } => Complex64::new(*value, 0.0),
            FactorKernel::StandardDecay {
                exponent,
                lambda,
                oscillate,
            } => {
                let (xc, yc) = (grid.center(x), grid.center(y));
                let mut v = size_profile(lambda, grid, x, *exponent, t, torus_distance(&xc, &yc));
                if *oscillate {
                    let band = (-t.log2()).floor();
                    let nu = (band - 1.0).exp2().max(1.0);
                    v *= (2.0 * PI * nu * (yc[0] - xc[0])).sin();
                }
                Complex64::new(v, 0.0)
            }
            FactorKernel::Separable { exponent, profile } => profile[y] * t.powf(*exponent),
        }
    }

    /// `k(x, y, t)` for all cell pairs.
    pub fn matrix(&self, grid: CellGrid, t: f64) -> Array2<Complex64> {
        Array2::from_shape_fn((grid.len(), grid.len()), |(x, y)| self.eval(grid, x, y, t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelBody {
    Factorized {
        scale: Complex64,
        first: FactorKernel,
        second: FactorKernel,
    },
    /// `t`-independent; row `x1 + N_n·x2`, column `y1 + N_n·y2`.
    Tabulated(Array2<f64>),
}

/// A kernel `K_{t1,t2}(x, y)` on a product of two cell grids together with
/// the exponents and dominating functions its estimates refer to.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub alpha: f64,
    pub beta: f64,
    pub grid_n: CellGrid,
    pub grid_m: CellGrid,
    pub lambda_n: DominatingFunction,
    pub lambda_m: DominatingFunction,
    pub body: KernelBody,
}

impl KernelSpec {
    pub fn is_factorized(&self) -> bool {
        matches!(self.body, KernelBody::Factorized { .. })
    }

    pub fn eval(&self, x: [usize; 2], y: [usize; 2], t1: f64, t2: f64) -> Complex64 {
        match &self.body {
            KernelBody::Factorized { scale, first, second } => {
                scale * first.eval(self.grid_n, x[0], y[0], t1) * second.eval(self.grid_m, x[1], y[1], t2)
            }
            KernelBody::Tabulated(tab) => {
                let n = self.grid_n.len();
                Complex64::new(tab[[x[0] + n * x[1], y[0] + n * y[1]]], 0.0)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.body {
            KernelBody::Factorized { scale, first, second } => {
                scale.norm() == 0.0 || *first == FactorKernel::Zero || *second == FactorKernel::Zero
            }
            KernelBody::Tabulated(t) => t.iter().all(|v| *v == 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinKind {
    Zero,
    StandardProduct { c: f64, oscillate: bool },
    BAnnihilating,
    Violator,
}

/// Inputs shared by the built-in kernels.
#[derive(Debug, Clone)]
pub struct BuiltinParams<'a> {
    pub alpha: f64,
    pub beta: f64,
    pub measure_n: &'a FactorMeasure,
    pub measure_m: &'a FactorMeasure,
    pub lambda_n: DominatingFunction,
    pub lambda_m: DominatingFunction,
    /// Needed by `BAnnihilating` only.
    pub b1: Option<&'a AccretiveFunction>,
}

/// The first Haar function of the root of the unshifted lattice, adapted
/// to `b1`; it satisfies `∫ g b1 dμ = 0`.
pub fn annihilating_profile(m: &FactorMeasure, b1: &AccretiveFunction) -> Result<Vec<Complex64>> {
    let lat = ShiftedLattice::unshifted(m.dim(), m.depth(), GoodnessParams::new(1, 0.25)?)?;
    let slack = accretivity_slack(m, b1)?;
    let ord = order_children(&lat, m, b1, CubeId::ROOT, slack)?;
    let (root, _) = cube_integrals(&lat, m, b1, CubeId::ROOT);
    if root.norm() == 0.0 {
        return Err(param("b1", "vanishing integral"));
    }
    Ok(haar_function(&ord, 1)?.dense(&lat))
}

pub fn make_builtin(kind: BuiltinKind, p: BuiltinParams<'_>) -> Result<KernelSpec> {
    if !(p.alpha > 0.0 && p.beta > 0.0) {
        return Err(param("alpha/beta", "exponents must be positive"));
    }
    let (grid_n, grid_m) = (p.measure_n.grid(), p.measure_m.grid());
    let body = match kind {
        BuiltinKind::Zero => KernelBody::Factorized {
            scale: Complex64::new(0.0, 0.0),
            first: FactorKernel::Zero,
            second: FactorKernel::Zero,
        },
        BuiltinKind::StandardProduct { c, oscillate } => KernelBody::Factorized {
            scale: Complex64::new(c, 0.0),
            first: FactorKernel::StandardDecay {
                exponent: p.alpha,
                lambda: p.lambda_n.clone(),
                oscillate,
            },
            second: FactorKernel::StandardDecay {
                exponent: p.beta,
                lambda: p.lambda_m.clone(),
                oscillate,
            },
        },
        BuiltinKind::BAnnihilating => {
            let b1 = p.b1.ok_or_else(|| param("b1", "required by the annihilating kernel"))?;
            KernelBody::Factorized {
                scale: Complex64::new(1.0, 0.0),
                first: FactorKernel::Separable {
                    exponent: p.alpha,
                    profile: annihilating_profile(p.measure_n, b1)?,
                },
                second: FactorKernel::Separable {
                    exponent: p.beta,
                    profile: vec![Complex64::new(1.0, 0.0); grid_m.len()],
                },
            }
        }
        BuiltinKind::Violator => KernelBody::Factorized {
            scale: Complex64::new(1.0, 0.0),
            first: FactorKernel::Constant { value: 1.0 },
            second: FactorKernel::Constant { value: 1.0 },
        },
    };
    Ok(KernelSpec {
        alpha: p.alpha,
        beta: p.beta,
        grid_n,
        grid_m,
        lambda_n: p.lambda_n,
        lambda_m: p.lambda_m,
        body,
    })
}

/// Layout: `rows: u64 LE`, `cols: u64 LE`, then `rows·cols` f64 LE, row-major.
pub fn write_tabulated<W: Write>(mut w: W, table: &Array2<f64>) -> Result<()> {
    let (r, c) = table.dim();
    w.write_all(&(r as u64).to_le_bytes())?;
    w.write_all(&(c as u64).to_le_bytes())?;
    for v in table.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tabulated<R: Read>(mut r: R) -> Result<Array2<f64>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(cols)
        .filter(|&n| n <= 1 << 26)
        .ok_or_else(|| Error::Parse(format!("table {rows}×{cols} too large")))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut word)?;
        values.push(f64::from_le_bytes(word));
    }
    Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Parse(e.to_string()))
}

/// Wraps a table as a kernel on the given grids.
pub fn tabulated_kernel(
    table: Array2<f64>,
    grid_n: CellGrid,
    grid_m: CellGrid,
    alpha: f64,
    beta: f64,
    lambda_n: DominatingFunction,
    lambda_m: DominatingFunction,
) -> Result<KernelSpec> {
    let n = grid_n.len() * grid_m.len();
    if table.dim() != (n, n) {
        return Err(Error::Shape(format!("table is {:?}, grids need ({n}, {n})", table.dim())));
    }
    Ok(KernelSpec {
        alpha,
        beta,
        grid_n,
        grid_m,
        lambda_n,
        lambda_m,
        body: KernelBody::Tabulated(table),
    })
}
