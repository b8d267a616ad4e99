use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cube_masses;
use crate::error::{param, Error, Result};
use crate::lattice::{CubeId, ShiftedLattice};
use crate::measure::{DominatingFunction, FactorMeasure};

/// `A_{I1 I2} = ℓ1^{α/2} ℓ2^{α/2} μ(I1)^{1/2} μ(I2)^{1/2} / (D^α max_z λ(z, D))`
/// over all cube pairs, `D = ℓ1 + ℓ2 + d(I1, I2)`, `z` ranging over the cell
/// centres of `I1 ∪ I2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurMatrix {
    pub alpha: f64,
    pub cubes: Vec<CubeId>,
    pub values: Array2<f64>,
}

impl SchurMatrix {
    pub fn build(alpha: f64, lambda: &DominatingFunction, m: &FactorMeasure, lat: &ShiftedLattice) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(param("alpha", "must be positive"));
        }
        if lat.grid() != m.grid() {
            return Err(Error::Shape("lattice and measure grids differ".into()));
        }
        let cubes: Vec<CubeId> = lat.all_cubes().collect();
        let masses = cube_masses(m, lat);
        let cells: Vec<Vec<usize>> = cubes.iter().map(|&c| lat.cells(c)).collect();
        let n = cubes.len();
        let mut values = Array2::zeros((n, n));
        for a in 0..n {
            for b in a..n {
                let (i1, i2) = (cubes[a], cubes[b]);
                let v = scale_decay(alpha, lambda, lat, i1, i2, &cells[a], &cells[b])
                    * (masses.get(i1) * masses.get(i2)).sqrt();
                values[[a, b]] = v;
                values[[b, a]] = v;
            }
        }
        Ok(Self { alpha, cubes, values })
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

/// `A_{I1 I2} μ(I1)^{-1/2} μ(I2)^{-1/2}`.
pub(crate) fn scale_decay(
    alpha: f64,
    lambda: &DominatingFunction,
    lat: &ShiftedLattice,
    i1: CubeId,
    i2: CubeId,
    cells1: &[usize],
    cells2: &[usize],
) -> f64 {
    let grid = lat.grid();
    let d = i1.side() + i2.side() + lat.distance(i1, i2);
    let sup = cells1
        .iter()
        .chain(cells2)
        .map(|&x| lambda.eval(&grid.center(x), d))
        .fold(0.0, f64::max);
    (i1.side() * i2.side()).powf(alpha / 2.0) / (d.powf(alpha) * sup)
}

/// `(Σ A x y)² / (Σx² Σy²)`; zero when either vector vanishes.
pub fn schur_check(a: &SchurMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != a.len() || y.len() != a.len() {
        return Err(Error::Shape(format!("vectors must have length {}", a.len())));
    }
    if x.iter().chain(y).any(|v| !(*v >= 0.0)) {
        return Err(param("x/y", "entries must be non-negative"));
    }
    let (xa, ya) = (Array1::from(x.to_vec()), Array1::from(y.to_vec()));
    let (nx, ny) = (xa.dot(&xa), ya.dot(&ya));
    if nx == 0.0 || ny == 0.0 {
        return Ok(0.0);
    }
    let s = xa.dot(&a.values.dot(&ya));
    Ok(s * s / (nx * ny))
}

/// `max_{x,y ≥ 0} (Σ A x y)² / (Σx² Σy²)` by alternating ascent
/// `x ← A y / |A y|`, `y ← Aᵀ x / |Aᵀ x|` from `starts` random positive
/// vectors. Each step cannot decrease the ratio.
pub fn schur_norm_sq(a: &SchurMatrix, starts: usize, seed: u64) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normalize = |v: Array1<f64>| {
        let s = v.dot(&v).sqrt();
        if s > 0.0 {
            v / s
        } else {
            v
        }
    };
    let mut best = 0.0f64;
    for _ in 0..starts.max(1) {
        let mut y = normalize(Array1::from_shape_fn(n, |_| rng.random_range(0.0..1.0)));
        let mut val = 0.0;
        for _ in 0..10_000 {
            let x = normalize(a.values.dot(&y));
            y = normalize(a.values.t().dot(&x));
            let s = x.dot(&a.values.dot(&y));
            let next = s * s;
            if (next - val).abs() <= 1e-15 * next {
                val = next;
                break;
            }
            val = next;
        }
        best = best.max(val);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurCalibration {
    /// `C_S`: the largest maximized ratio over all calibration cases.
    pub constant: f64,
    /// `(label, maximized ratio)` per case.
    pub cases: Vec<(String, f64)>,
}

/// `C_S` from small instances: uniform and random measures at `n ∈ {1, 2}`
/// with depths up to `max_depth`, `λ` the ball-mass majorant of each measure
/// (the uniform one additionally with `λ(x, r) = (2r)^n`).
pub fn calibrate_schur(alpha: f64, max_depth: u32, random_measures: usize, seed: u64) -> Result<SchurCalibration> {
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for dim in 1..=2usize {
        let max = if dim == 1 { max_depth } else { max_depth.min(3) };
        for depth in 1..=max {
            let lat = ShiftedLattice::unshifted(dim, depth, crate::lattice::GoodnessParams::new(1, 0.25)?)?;
            let uniform = FactorMeasure::uniform(dim, depth)?;
            let power = DominatingFunction::power_law((2f64).powi(dim as i32), dim as f64)?;
            let mut run = |label: String, m: &FactorMeasure, l: &DominatingFunction| -> Result<()> {
                let a = SchurMatrix::build(alpha, l, m, &lat)?;
                cases.push((label, schur_norm_sq(&a, 4, seed)));
                Ok(())
            };
            run(format!("uniform n={dim} L={depth} power"), &uniform, &power)?;
            run(
                format!("uniform n={dim} L={depth} balls"),
                &uniform,
                &DominatingFunction::from_ball_masses(&uniform)?,
            )?;
            for k in 0..random_measures {
                let w: Vec<f64> = (0..uniform.weights().len())
                    .map(|_| rng.random_range(0.05..1.0f64).powi(3))
                    .collect();
                let s: f64 = w.iter().sum();
                let m = FactorMeasure::new(dim, depth, w.into_iter().map(|v| v / s).collect())?;
                run(
                    format!("random#{k} n={dim} L={depth} balls"),
                    &m,
                    &DominatingFunction::from_ball_masses(&m)?,
                )?;
            }
        }
    }
    let constant = cases.iter().map(|c| c.1).fold(0.0, f64::max);
    Ok(SchurCalibration { constant, cases })
}
