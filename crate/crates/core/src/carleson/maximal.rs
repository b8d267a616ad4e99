use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cube_masses, cube_position, CarlesonTable};
use crate::error::{Error, Result};
use crate::lattice::{CubeId, ShiftedLattice};
use crate::measure::FactorMeasure;

/// `⟨f⟩^μ_{I×J}` for every dyadic rectangle; `None` on zero-mass rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangleAverages {
    pub dim_n: usize,
    pub dim_m: usize,
    pub cubes_n: Vec<CubeId>,
    pub cubes_m: Vec<CubeId>,
    /// Row-major over `(cubes_n, cubes_m)`.
    pub values: Vec<Option<Complex64>>,
}

impl RectangleAverages {
    pub fn get(&self, i: CubeId, j: CubeId) -> Option<Complex64> {
        let (a, b) = (cube_position(self.dim_n, i), cube_position(self.dim_m, j));
        self.values[a * self.cubes_m.len() + b]
    }
}

/// Rectangle sums of `f μ` coarsened one level at a time, first along the
/// second factor, then along the first.
pub fn rectangle_averages(
    f: &Array2<Complex64>,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
) -> Result<RectangleAverages> {
    if f.dim() != (mn.weights().len(), mm.weights().len()) || lat_n.grid() != mn.grid() || lat_m.grid() != mm.grid() {
        return Err(Error::Shape("field, measures and lattices disagree".into()));
    }
    let (ln, lm) = (lat_n.depth(), lat_m.depth());
    let (wn, wm) = (mn.weights(), mm.weights());
    let cubes_n: Vec<CubeId> = lat_n.all_cubes().collect();
    let cubes_m: Vec<CubeId> = lat_m.all_cubes().collect();
    let count_m = cubes_m.len();
    let mut sums = vec![Complex64::new(0.0, 0.0); cubes_n.len() * count_m];
    let at = |i: CubeId, j: CubeId| cube_position(lat_n.dim(), i) * count_m + cube_position(lat_m.dim(), j);
    for i in lat_n.cubes_at(ln) {
        let x1 = lat_n.cells(i)[0];
        for j in lat_m.cubes_at(lm) {
            let x2 = lat_m.cells(j)[0];
            sums[at(i, j)] = f[[x1, x2]] * (wn[x1] * wm[x2]);
        }
    }
    for i in lat_n.cubes_at(ln) {
        for level in (0..lm).rev() {
            for j in lat_m.cubes_at(level) {
                sums[at(i, j)] = lat_m.children(j)?.into_iter().map(|c| sums[at(i, c)]).sum();
            }
        }
    }
    for level in (0..ln).rev() {
        for i in lat_n.cubes_at(level) {
            let kids = lat_n.children(i)?;
            for &j in &cubes_m {
                sums[at(i, j)] = kids.iter().map(|&c| sums[at(c, j)]).sum();
            }
        }
    }
    let (mass_n, mass_m) = (cube_masses(mn, lat_n), cube_masses(mm, lat_m));
    let mut values = Vec::with_capacity(sums.len());
    for &i in &cubes_n {
        for &j in &cubes_m {
            let mass = mass_n.get(i) * mass_m.get(j);
            values.push((mass > 0.0).then(|| sums[at(i, j)] / mass));
        }
    }
    Ok(RectangleAverages {
        dim_n: lat_n.dim(),
        dim_m: lat_m.dim(),
        cubes_n,
        cubes_m,
        values,
    })
}

/// `M_s f(x) = max_{I×J ∋ x} |⟨f⟩_{I×J}|` per product cell.
pub fn strong_maximal(
    f: &Array2<Complex64>,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
) -> Result<Array2<f64>> {
    let avg = rectangle_averages(f, mn, mm, lat_n, lat_m)?;
    Ok(maximal_from(&avg, f.dim(), lat_n, lat_m))
}

fn maximal_from(
    avg: &RectangleAverages,
    shape: (usize, usize),
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
) -> Array2<f64> {
    Array2::from_shape_fn(shape, |(x1, x2)| {
        let mut best = 0.0f64;
        for l1 in 0..=lat_n.depth() {
            let i = lat_n.cube_of_cell(l1, x1);
            for l2 in 0..=lat_m.depth() {
                if let Some(v) = avg.get(i, lat_m.cube_of_cell(l2, x2)) {
                    best = best.max(v.norm());
                }
            }
        }
        best
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCakeReport {
    pub thresholds: Vec<f64>,
    /// Rectangles with `|⟨f⟩| > t`, summed over thresholds.
    pub pairs_checked: usize,
    /// `(threshold, I, J)` for rectangles not inside `{M_s f > t}`.
    pub violations: Vec<(f64, CubeId, CubeId)>,
}

/// For each `t`: `{(I, J) : |⟨f⟩_{I×J}| > t}` lies inside `{M_s f > t}`,
/// checked cell by cell.
pub fn layer_cake_inclusion(
    avg: &RectangleAverages,
    maximal: &Array2<f64>,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    thresholds: &[f64],
) -> LayerCakeReport {
    let mut pairs_checked = 0;
    let mut violations = Vec::new();
    let w = avg.cubes_m.len();
    for &t in thresholds {
        for (k, v) in avg.values.iter().enumerate() {
            let Some(v) = v else { continue };
            if v.norm() <= t {
                continue;
            }
            pairs_checked += 1;
            let (i, j) = (avg.cubes_n[k / w], avg.cubes_m[k % w]);
            let cj = lat_m.cells(j);
            let inside = lat_n.cells(i).into_iter().all(|x1| cj.iter().all(|&x2| maximal[[x1, x2]] > t));
            if !inside {
                violations.push((t, i, j));
            }
        }
    }
    LayerCakeReport {
        thresholds: thresholds.to_vec(),
        pairs_checked,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarCarReport {
    /// `Σ_{I,J} |⟨f⟩_{I×J}|² C_{IJ}`.
    pub sum: f64,
    /// `‖M_s f‖²_{L²(μ)}`.
    pub maximal_norm_sq: f64,
    /// `sum / maximal_norm_sq`, the measured constant.
    pub ratio: f64,
}

pub fn car_car_sum(
    table: &CarlesonTable,
    f: &Array2<Complex64>,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
) -> Result<CarCarReport> {
    let avg = rectangle_averages(f, mn, mm, lat_n, lat_m)?;
    if avg.cubes_n != table.cubes_n || avg.cubes_m != table.cubes_m {
        return Err(Error::Shape("table and lattices disagree".into()));
    }
    let sum = avg
        .values
        .iter()
        .zip(&table.values)
        .filter_map(|(a, c)| a.map(|a| a.norm_sqr() * c))
        .sum();
    let m = maximal_from(&avg, f.dim(), lat_n, lat_m);
    let (wn, wm) = (mn.weights(), mm.weights());
    let maximal_norm_sq = m.indexed_iter().map(|((a, b), v)| v * v * wn[a] * wm[b]).sum();
    Ok(CarCarReport {
        sum,
        maximal_norm_sq,
        ratio: if maximal_norm_sq > 0.0 { sum / maximal_norm_sq } else { 0.0 },
    })
}
