use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gfunction::{good_mask, truncated_nodes, TNode};
use crate::haar::{forward_transform, reconstruct, BiParamCoefficients, HaarIndex, HaarSystem};
use crate::kernel::{apply_theta, weight_field, KernelSpec, ThetaBank};
use crate::lattice::{badness_threshold, CubeId};

/// Energies of the four pieces `Σ_{<,<}, Σ_{<,≥}, Σ_{≥,<}, Σ_{≥,≥}`; the
/// first comparison is `ℓ(I1)` against `ℓ(I2)`, the second `ℓ(J1)` against
/// `ℓ(J2)`. The root scaling function counts as `≥`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pieces {
    pub lt_lt: f64,
    pub lt_ge: f64,
    pub ge_lt: f64,
    pub ge_ge: f64,
}

impl Pieces {
    pub fn sum(&self) -> f64 {
        self.lt_lt + self.lt_ge + self.ge_lt + self.ge_ge
    }
}

/// The `(≥,<)` piece split by the position of `I1` relative to `I2`:
/// separated (`d > ℓ(I2)^γ ℓ(I1)^{1−γ}`), nested far above
/// (`ℓ(I1) > 2^r ℓ(I2)`), or near.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubSplit {
    pub out: f64,
    pub inside: f64,
    pub near: f64,
    pub count_out: usize,
    pub count_inside: usize,
    pub count_near: usize,
    /// Pairs `(I2, I1)` with `I2` good and `ℓ(I1) ≥ ℓ(I2)`.
    pub count_total: usize,
    pub conserved: bool,
    /// `Σ_{≥,<} ≤ 3·(out + inside + near)`.
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub sigma: f64,
    pub pieces: Pieces,
    /// `Σ ≤ 4·(sum of pieces)`.
    pub bound_holds: bool,
    pub subsplit: SubSplit,
}

fn level_of(i: &HaarIndex) -> u32 {
    i.cube.level
}

fn masked(c: &BiParamCoefficients, rows: &[bool], cols: &[bool]) -> BiParamCoefficients {
    let values = Array2::from_shape_fn(c.values.dim(), |(a, b)| {
        if rows[a] && cols[b] {
            c.values[[a, b]]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    BiParamCoefficients {
        rows: c.rows.clone(),
        cols: c.cols.clone(),
        values,
    }
}

struct Energy<'a> {
    k: &'a KernelSpec,
    bank: ThetaBank,
    n1: Vec<TNode>,
    n2: Vec<TNode>,
    wn: &'a [f64],
    wm: &'a [f64],
}

impl Energy<'_> {
    /// `Σ_{t1 ∈ slab j1, t2 ∈ slab j2} w1 w2 Σ_x ρ1(x1) ρ2(x2) μ(x) |Θ f(x)|²`.
    fn eval(&self, f: &Array2<Complex64>, j1: u32, j2: u32, rho1: &[f64], rho2: &[f64]) -> Result<f64> {
        let rows: Vec<usize> = (0..rho1.len()).filter(|&i| rho1[i] != 0.0).collect();
        if rows.is_empty() || rho2.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let fw = weight_field(f, self.wn, self.wm);
        let mut total = 0.0;
        for (i, a) in self.n1.iter().enumerate().filter(|(_, a)| a.level == j1) {
            let left = self
                .bank
                .first(i)
                .map(|k1| k1.select(Axis(0), &rows).dot(&fw) * self.bank.scale());
            for (j, b) in self.n2.iter().enumerate().filter(|(_, b)| b.level == j2) {
                let theta = match &left {
                    Some(l) => l.dot(&self.bank.second(j).expect("factor matrix").t()),
                    None => apply_theta(self.k, f, self.wn, self.wm, a.t, b.t)?.select(Axis(0), &rows),
                };
                let mut s = 0.0;
                for ((r, x2), v) in theta.indexed_iter() {
                    s += rho1[rows[r]] * self.wn[rows[r]] * rho2[x2] * self.wm[x2] * v.norm_sqr();
                }
                total += a.weight * b.weight * s;
            }
        }
        Ok(total)
    }
}

/// Splits the good-pair sum of a fixed pair of lattices (those of the Haar
/// systems) by scale comparisons between coefficient and Whitney cubes.
pub fn split_sigma(
    k: &KernelSpec,
    f: &Array2<Complex64>,
    sn: &HaarSystem,
    sm: &HaarSystem,
    g: usize,
) -> Result<SplitReport> {
    let (lat_n, lat_m) = (sn.lattice(), sm.lattice());
    let (ln, lm) = (lat_n.depth(), lat_m.depth());
    let (wn, wm) = (sn.weights(), sm.weights());
    let coeffs = forward_transform(f, sn, sm)?;
    let n1 = truncated_nodes(ln, g)?;
    let n2 = truncated_nodes(lm, g)?;
    let t1: Vec<f64> = n1.iter().map(|n| n.t).collect();
    let t2: Vec<f64> = n2.iter().map(|n| n.t).collect();
    let energy = Energy {
        k,
        bank: ThetaBank::new(k, &t1, &t2),
        n1,
        n2,
        wn,
        wm,
    };
    let good_n: Vec<Vec<f64>> = (0..ln).map(|l| good_mask(lat_n, l)).collect();
    let good_m: Vec<Vec<f64>> = (0..lm).map(|l| good_mask(lat_m, l)).collect();
    let row_levels: Vec<u32> = coeffs.rows.iter().map(level_of).collect();
    let col_levels: Vec<u32> = coeffs.cols.iter().map(level_of).collect();

    let mut sigma = 0.0;
    let mut pieces = [0.0; 4];
    for j1 in 0..ln {
        for j2 in 0..lm {
            let (r1, r2) = (&good_n[j1 as usize], &good_m[j2 as usize]);
            sigma += energy.eval(f, j1, j2, r1, r2)?;
            for (p, (lt1, lt2)) in [(true, true), (true, false), (false, true), (false, false)]
                .into_iter()
                .enumerate()
            {
                let rows: Vec<bool> = row_levels.iter().map(|&l| (l > j1) == lt1).collect();
                let cols: Vec<bool> = col_levels.iter().map(|&l| (l > j2) == lt2).collect();
                let part = reconstruct(&masked(&coeffs, &rows, &cols), sn, sm)?;
                pieces[p] += energy.eval(&part, j1, j2, r1, r2)?;
            }
        }
    }
    let pieces = Pieces {
        lt_lt: pieces[0],
        lt_ge: pieces[1],
        ge_lt: pieces[2],
        ge_ge: pieces[3],
    };

    let params = lat_n.params();
    let mut sub = SubSplit {
        out: 0.0,
        inside: 0.0,
        near: 0.0,
        count_out: 0,
        count_inside: 0,
        count_near: 0,
        count_total: 0,
        conserved: true,
        bound_holds: true,
    };
    for j1 in 0..ln {
        for i2 in lat_n.cubes_at(j1).filter(|&c| lat_n.is_good(c)) {
            let cells = lat_n.cells(i2);
            let mut rho1 = vec![0.0; wn.len()];
            for &c in &cells {
                rho1[c] = 1.0;
            }
            let mut class = vec![0u8; coeffs.rows.len()];
            let mut counts = [0usize; 3];
            let mut eligible = 0;
            for (a, idx) in coeffs.rows.iter().enumerate() {
                let l1 = idx.cube.level;
                if l1 > j1 {
                    class[a] = 3;
                    continue;
                }
                eligible += 1;
                let cube: CubeId = idx.cube;
                let d = lat_n.distance(cube, i2);
                class[a] = if d > badness_threshold(j1, l1, params.gamma) {
                    0
                } else if l1 + params.r < j1 {
                    1
                } else {
                    2
                };
                counts[class[a] as usize] += 1;
            }
            sub.count_total += eligible;
            sub.conserved &= counts.iter().sum::<usize>() == eligible;
            sub.count_out += counts[0];
            sub.count_inside += counts[1];
            sub.count_near += counts[2];
            for j2 in 0..lm {
                let cols: Vec<bool> = col_levels.iter().map(|&l| l > j2).collect();
                let r2 = &good_m[j2 as usize];
                for (cl, slot) in [(0u8, &mut sub.out), (1, &mut sub.inside), (2, &mut sub.near)] {
                    let rows: Vec<bool> = class.iter().map(|&c| c == cl).collect();
                    if !rows.iter().any(|&r| r) {
                        continue;
                    }
                    let part = reconstruct(&masked(&coeffs, &rows, &cols), sn, sm)?;
                    *slot += energy.eval(&part, j1, j2, &rho1, r2)?;
                }
            }
        }
    }
    let slack = 1.0 + 1e-12;
    sub.bound_holds = pieces.ge_lt <= 3.0 * (sub.out + sub.inside + sub.near) * slack;
    Ok(SplitReport {
        sigma,
        bound_holds: sigma <= 4.0 * pieces.sum() * slack,
        pieces,
        subsplit: sub,
    })
}
