use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cube_position;
use crate::error::{param, Error, Result};
use crate::gfunction::slab_energies_upto;
use crate::kernel::{weight_field, KernelSpec, ThetaBank};
use crate::lattice::{whitney_quadrature, CubeId, ShiftedLattice};
use crate::measure::{AccretiveFunction, FactorMeasure};
use crate::report::{VerificationReport, Witness};
use crate::seed::derive_index;

/// `C_{IJ}` for every pair of cubes of two lattices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonTable {
    pub dim_n: usize,
    pub dim_m: usize,
    pub cubes_n: Vec<CubeId>,
    pub cubes_m: Vec<CubeId>,
    /// Row-major over `(cubes_n, cubes_m)`.
    pub values: Vec<f64>,
}

impl CarlesonTable {
    pub fn get(&self, i: CubeId, j: CubeId) -> f64 {
        let (a, b) = (cube_position(self.dim_n, i), cube_position(self.dim_m, j));
        self.values[a * self.cubes_m.len() + b]
    }

    pub fn entries(&self) -> impl Iterator<Item = (CubeId, CubeId, f64)> + '_ {
        let w = self.cubes_m.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.cubes_n[k / w], self.cubes_m[k % w], *v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Columns `i_level,i_index,j_level,j_index,value`; indices are flat.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i_level", "i_index", "j_level", "j_index", "value"])?;
        for (i, j, v) in self.entries() {
            out.write_record([
                i.level.to_string(),
                i.flat().to_string(),
                j.level.to_string(),
                j.flat().to_string(),
                format!("{v:.16e}"),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the values written by [`CarlesonTable::write_csv`] back into a
    /// table with the same cube lists.
    pub fn values_from_csv<R: Read>(&self, r: R) -> Result<Vec<f64>> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut out = Vec::with_capacity(self.values.len());
        for rec in rdr.records() {
            let rec = rec?;
            let v = rec
                .get(4)
                .ok_or_else(|| Error::Parse("missing value column".into()))?;
            out.push(v.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
        }
        if out.len() != self.values.len() {
            return Err(Error::Shape(format!("{} rows, expected {}", out.len(), self.values.len())));
        }
        Ok(out)
    }
}

fn tensor(b1: &AccretiveFunction, b2: &AccretiveFunction) -> Array2<Complex64> {
    Array2::from_shape_fn((b1.values.len(), b2.values.len()), |(i, j)| b1.values[i] * b2.values[j])
}

fn check_lattices(k: &KernelSpec, lat_n: &ShiftedLattice, lat_m: &ShiftedLattice) -> Result<()> {
    if lat_n.grid() != k.grid_n || lat_m.grid() != k.grid_m {
        return Err(Error::Shape("lattice grids do not match the kernel".into()));
    }
    Ok(())
}

/// `C_{IJ} = Σ_{x ∈ I×J} Σ_{t1 ∈ W_I, t2 ∈ W_J} w1 w2 |Θ_{t1,t2} b(x)|² μ(x)` for a
/// single pair, with `b = b1 ⊗ b2` and `g` nodes per Whitney band.
#[allow(clippy::too_many_arguments)]
pub fn carleson_coefficient(
    k: &KernelSpec,
    b1: &AccretiveFunction,
    b2: &AccretiveFunction,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    i: CubeId,
    j: CubeId,
    g: usize,
) -> Result<f64> {
    check_lattices(k, lat_n, lat_m)?;
    lat_n.check_cube(i)?;
    lat_m.check_cube(j)?;
    let q1 = whitney_quadrature(i.level, g)?;
    let q2 = whitney_quadrature(j.level, g)?;
    let bank = ThetaBank::new(k, &q1.nodes, &q2.nodes);
    let fw = weight_field(&tensor(b1, b2), mn.weights(), mm.weights());
    let (cells_i, cells_j) = (lat_n.cells(i), lat_m.cells(j));
    let (wn, wm) = (mn.weights(), mm.weights());
    let mut total = 0.0;
    for (a, w1) in q1.weights.iter().enumerate() {
        for (b, w2) in q2.weights.iter().enumerate() {
            let theta = bank.apply_weighted(&fw, a, b);
            let mut s = 0.0;
            for &x1 in &cells_i {
                for &x2 in &cells_j {
                    s += theta[[x1, x2]].norm_sqr() * wn[x1] * wm[x2];
                }
            }
            total += w1 * w2 * s;
        }
    }
    Ok(total)
}

/// Every `C_{IJ}`, all levels `0..=L` of both lattices, from one pass of slab
/// energies.
#[allow(clippy::too_many_arguments)]
pub fn carleson_table(
    k: &KernelSpec,
    b1: &AccretiveFunction,
    b2: &AccretiveFunction,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    g: usize,
) -> Result<CarlesonTable> {
    check_lattices(k, lat_n, lat_m)?;
    let (ln, lm) = (lat_n.depth(), lat_m.depth());
    let e = slab_energies_upto(k, &tensor(b1, b2), mn.weights(), mm.weights(), g, ln + 1, lm + 1)?;
    let cubes_n: Vec<CubeId> = lat_n.all_cubes().collect();
    let cubes_m: Vec<CubeId> = lat_m.all_cubes().collect();
    let cells_m: Vec<Vec<usize>> = cubes_m.iter().map(|&c| lat_m.cells(c)).collect();
    let nm = mm.weights().len();
    let rows: Vec<Vec<f64>> = cubes_n
        .par_iter()
        .map(|&i| {
            let cells_i = lat_n.cells(i);
            let mut row = vec![0.0; cubes_m.len()];
            let mut partial: Vec<Vec<f64>> = Vec::with_capacity(lm as usize + 1);
            for j2 in 0..=lm {
                let field = e.field(i.level, j2);
                partial.push((0..nm).map(|x2| cells_i.iter().map(|&x1| field[[x1, x2]]).sum()).collect());
            }
            for (b, j) in cubes_m.iter().enumerate() {
                let p = &partial[j.level as usize];
                row[b] = cells_m[b].iter().map(|&x2| p[x2]).sum();
            }
            row
        })
        .collect();
    Ok(CarlesonTable {
        dim_n: lat_n.dim(),
        dim_m: lat_m.dim(),
        cubes_n,
        cubes_m,
        values: rows.concat(),
    })
}

/// A finite union of dyadic rectangles `I × J`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSet {
    pub rectangles: Vec<(CubeId, CubeId)>,
    indicator: Array2<bool>,
    mass: f64,
}

impl OmegaSet {
    pub fn new(
        rectangles: Vec<(CubeId, CubeId)>,
        lat_n: &ShiftedLattice,
        lat_m: &ShiftedLattice,
        mn: &FactorMeasure,
        mm: &FactorMeasure,
    ) -> Result<Self> {
        let mut indicator = Array2::from_elem((lat_n.grid().len(), lat_m.grid().len()), false);
        for &(i, j) in &rectangles {
            lat_n.check_cube(i)?;
            lat_m.check_cube(j)?;
            let cj = lat_m.cells(j);
            for x1 in lat_n.cells(i) {
                for &x2 in &cj {
                    indicator[[x1, x2]] = true;
                }
            }
        }
        let (wn, wm) = (mn.weights(), mm.weights());
        let mass = indicator
            .indexed_iter()
            .filter(|(_, &v)| v)
            .map(|((a, b), _)| wn[a] * wm[b])
            .sum();
        Ok(Self {
            rectangles,
            indicator,
            mass,
        })
    }

    /// `Ω = [0,1)^{n+m}`, the product of the two roots.
    pub fn full(lat_n: &ShiftedLattice, lat_m: &ShiftedLattice, mn: &FactorMeasure, mm: &FactorMeasure) -> Result<Self> {
        Self::new(vec![(CubeId::ROOT, CubeId::ROOT)], lat_n, lat_m, mn, mm)
    }

    pub fn indicator(&self) -> &Array2<bool> {
        &self.indicator
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn contains_rectangle(&self, lat_n: &ShiftedLattice, lat_m: &ShiftedLattice, i: CubeId, j: CubeId) -> bool {
        let cj = lat_m.cells(j);
        lat_n
            .cells(i)
            .into_iter()
            .all(|x1| cj.iter().all(|&x2| self.indicator[[x1, x2]]))
    }

    /// Every cell of `Ω` lies in a member rectangle and every member lies in `Ω`.
    pub fn is_admissible(&self, lat_n: &ShiftedLattice, lat_m: &ShiftedLattice) -> bool {
        let mut covered = Array2::from_elem(self.indicator.dim(), false);
        for &(i, j) in &self.rectangles {
            if !self.contains_rectangle(lat_n, lat_m, i, j) {
                return false;
            }
            let cj = lat_m.cells(j);
            for x1 in lat_n.cells(i) {
                for &x2 in &cj {
                    covered[[x1, x2]] = true;
                }
            }
        }
        covered == self.indicator
    }

    /// `Σ_{I×J ⊂ Ω} C_{IJ}`.
    pub fn packed_sum(&self, table: &CarlesonTable, lat_n: &ShiftedLattice, lat_m: &ShiftedLattice) -> f64 {
        let nm = self.indicator.ncols();
        let cells_m: Vec<Vec<usize>> = table.cubes_m.iter().map(|&c| lat_m.cells(c)).collect();
        let w = table.cubes_m.len();
        let mut total = 0.0;
        for (a, &i) in table.cubes_n.iter().enumerate() {
            let ci = lat_n.cells(i);
            // cells of I inside Ω, per column x2
            let counts: Vec<usize> = (0..nm)
                .map(|x2| ci.iter().filter(|&&x1| self.indicator[[x1, x2]]).count())
                .collect();
            for (b, cj) in cells_m.iter().enumerate() {
                if cj.iter().all(|&x2| counts[x2] == ci.len()) {
                    total += table.values[a * w + b];
                }
            }
        }
        total
    }
}

/// Random unions of dyadic rectangles with both levels in
/// `min_level..=max_level` (clamped to each lattice's depth).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaPlan {
    pub count: usize,
    pub max_rectangles: usize,
    pub min_level: u32,
    pub max_level: u32,
    pub seed: u64,
}

pub fn random_omegas(
    plan: &OmegaPlan,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
) -> Result<Vec<OmegaSet>> {
    if plan.max_rectangles == 0 || plan.min_level > plan.max_level {
        return Err(param("omega_plan", "needs max_rectangles ≥ 1 and min_level ≤ max_level"));
    }
    let pick = |rng: &mut ChaCha8Rng, lat: &ShiftedLattice| {
        let hi = plan.max_level.min(lat.depth());
        let lo = plan.min_level.min(hi);
        let level = rng.random_range(lo..=hi);
        let flat = rng.random_range(0..lat.count_at(level));
        lat.cubes_at(level).nth(flat).expect("flat index in range")
    };
    (0..plan.count)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_index(plan.seed, t as u64));
            let n = rng.random_range(1..=plan.max_rectangles);
            let rects = (0..n).map(|_| (pick(&mut rng, lat_n), pick(&mut rng, lat_m))).collect();
            OmegaSet::new(rects, lat_n, lat_m, mn, mm)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonCheck {
    /// Worst `Σ_{I×J⊂Ω} C_{IJ} / μ(Ω)` against the configured constant.
    pub report: VerificationReport,
    /// Ratio per `Ω`, the full square first; `None` when `μ(Ω) = 0`.
    pub ratios: Vec<Option<f64>>,
    pub full_square_ratio: f64,
    pub worst_omega: Option<Vec<(CubeId, CubeId)>>,
}

/// The packing condition over the full square and the random family of
/// `plan`. Passes iff every ratio is at most `constant`.
pub fn biparameter_carleson_check(
    table: &CarlesonTable,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    plan: &OmegaPlan,
    constant: f64,
) -> Result<CarlesonCheck> {
    let mut omegas = vec![OmegaSet::full(lat_n, lat_m, mn, mm)?];
    omegas.extend(random_omegas(plan, lat_n, lat_m, mn, mm)?);
    let ratios: Vec<Option<f64>> = omegas
        .par_iter()
        .map(|o| (o.mass() > 0.0).then(|| o.packed_sum(table, lat_n, lat_m) / o.mass()))
        .collect();
    let mut report = VerificationReport::new("biparameter_carleson", constant);
    let mut worst: Option<usize> = None;
    for (t, r) in ratios.iter().enumerate() {
        match r {
            None => report.skipped += 1,
            Some(r) => {
                let before = report.worst_ratio;
                report.observe(*r, || {
                    Witness::new(format!("omega {t}"))
                        .with("omega", t as f64)
                        .with("mass", omegas[t].mass())
                        .with("rectangles", omegas[t].rectangles.len() as f64)
                });
                if worst.is_none() || report.worst_ratio > before {
                    worst = Some(t);
                }
            }
        }
    }
    let full_square_ratio = ratios[0].unwrap_or(0.0);
    report.extra("full_square_ratio", full_square_ratio);
    Ok(CarlesonCheck {
        report: report.finish_upper(),
        ratios,
        full_square_ratio,
        worst_omega: worst.map(|t| omegas[t].rectangles.clone()),
    })
}
