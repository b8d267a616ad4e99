use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gfunction::{slab_energies, SlabEnergies};
use crate::kernel::KernelSpec;
use crate::lattice::{pi_good, GoodnessParams, PiMode, ShiftBits, ShiftedLattice};
use crate::seed::derive_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Plain,
    PiWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub sigma: f64,
    pub good_counts_n: Vec<usize>,
    pub good_counts_m: Vec<usize>,
    pub pi_n: Vec<f64>,
    pub pi_m: Vec<f64>,
    /// `c(j1, j2) = 1/(π_n(j1) π_m(j2))`; all ones in plain mode.
    pub c_mn: Vec<Vec<f64>>,
}

/// Per cell: 1 when the level-`level` cube holding it is good.
pub fn good_mask(lattice: &ShiftedLattice, level: u32) -> Vec<f64> {
    (0..lattice.grid().len())
        .map(|c| f64::from(u8::from(lattice.is_good(lattice.cube_of_cell(level, c)))))
        .collect()
}

fn shift_masks(params: GoodnessParams, bits: ShiftBits) -> Result<Vec<Vec<f64>>> {
    let depth = bits.depth();
    Ok(masks(&ShiftedLattice::from_bits(bits, params)?, depth))
}

fn masks(lattice: &ShiftedLattice, levels: u32) -> Vec<Vec<f64>> {
    (0..levels).map(|l| good_mask(lattice, l)).collect()
}

/// `Σ_{j1,j2} c(j1,j2) · maskₙ(j1)ᵀ Φ_{j1j2} maskₘ(j2)`.
fn masked_sum(e: &SlabEnergies, mn: &[Vec<f64>], mm: &[Vec<f64>], c: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for j1 in 0..e.levels_n {
        for j2 in 0..e.levels_m {
            let field = e.field(j1, j2);
            let (a, b) = (&mn[j1 as usize], &mm[j2 as usize]);
            let mut s = 0.0;
            for ((x1, x2), v) in field.indexed_iter() {
                s += v * a[x1] * b[x2];
            }
            total += c[j1 as usize][j2 as usize] * s;
        }
    }
    total
}

/// `π_good` for levels `0..levels`; exact when enumerable, Monte Carlo otherwise.
pub fn level_pis(
    dim: usize,
    depth: u32,
    params: GoodnessParams,
    levels: u32,
    mc: Option<(u64, u64)>,
) -> Result<Vec<f64>> {
    (0..levels)
        .map(|l| {
            let mode = match mc {
                Some((trials, seed)) if depth as usize * dim > 24 => PiMode::MonteCarlo { trials, seed },
                _ => PiMode::Exact,
            };
            pi_good(dim, depth, params, l, mode).map(|e| e.value)
        })
        .collect()
}

fn c_table(pi_n: &[f64], pi_m: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(l) = pi_n.iter().chain(pi_m).position(|&p| p == 0.0) {
        let level = if l < pi_n.len() { l } else { l - pi_n.len() };
        return Err(Error::ZeroPiGood { level: level as u32 });
    }
    Ok(pi_n
        .iter()
        .map(|a| pi_m.iter().map(|b| 1.0 / (a * b)).collect())
        .collect())
}

/// Whitney-region energies over pairs of good cubes `(I2, J2)` of two
/// fixed lattices.
pub fn sigma_good(
    e: &SlabEnergies,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    weighting: Weighting,
) -> Result<SigmaReport> {
    let (ln, lm) = (e.levels_n, e.levels_m);
    if lat_n.depth() != ln || lat_m.depth() != lm {
        return Err(param("lattice", "depth differs from the energy grids"));
    }
    let (pi_n, pi_m) = match weighting {
        Weighting::Plain => (vec![1.0; ln as usize], vec![1.0; lm as usize]),
        Weighting::PiWeighted => (
            level_pis(lat_n.dim(), ln, lat_n.params(), ln, None)?,
            level_pis(lat_m.dim(), lm, lat_m.params(), lm, None)?,
        ),
    };
    let c_mn = c_table(&pi_n, &pi_m)?;
    let sigma = masked_sum(e, &masks(lat_n, ln), &masks(lat_m, lm), &c_mn);
    Ok(SigmaReport {
        sigma,
        good_counts_n: (0..ln).map(|l| lat_n.good_count(l)).collect(),
        good_counts_m: (0..lm).map(|l| lat_m.good_count(l)).collect(),
        pi_n,
        pi_m,
        c_mn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AveragingMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingReport {
    pub g_norm_sq: f64,
    /// Mean of the π-weighted Σ over shifts.
    pub estimate: f64,
    pub std_error: Option<f64>,
    /// `|estimate − g_norm_sq| / g_norm_sq` (absolute when `g_norm_sq = 0`).
    pub discrepancy: f64,
    pub configurations: u64,
    pub pi_n: Vec<f64>,
    pub pi_m: Vec<f64>,
    pub c_mn: Vec<Vec<f64>>,
    pub pass: bool,
}

/// Exact-mode bound on the shift bits of both factors together.
pub const EXACT_SHIFT_BITS: u32 = 16;

/// Compares the shift average of the π-weighted good-pair sum with
/// `‖g(f)‖²`. Exact mode passes at relative discrepancy `tolerance`; Monte
/// Carlo mode passes within three standard errors.
#[allow(clippy::too_many_arguments)]
pub fn averaging_identity_check(
    k: &KernelSpec,
    f: &Array2<Complex64>,
    wn: &[f64],
    wm: &[f64],
    g: usize,
    params_n: GoodnessParams,
    params_m: GoodnessParams,
    mode: AveragingMode,
    tolerance: f64,
) -> Result<AveragingReport> {
    let (gn, gm) = (k.grid_n, k.grid_m);
    let (ln, lm) = (gn.depth, gm.depth);
    let bits_n = ln * gn.dim as u32;
    let bits_m = lm * gm.dim as u32;
    if mode == AveragingMode::Exact && bits_n + bits_m > EXACT_SHIFT_BITS {
        return Err(Error::CostGuard {
            bits: bits_n + bits_m,
            limit: EXACT_SHIFT_BITS,
        });
    }
    let pi_n = level_pis(gn.dim, ln, params_n, ln, Some((100_000, 1)))?;
    let pi_m = level_pis(gm.dim, lm, params_m, lm, Some((100_000, 2)))?;
    let c_mn = c_table(&pi_n, &pi_m)?;
    let e = slab_energies(k, f, wn, wm, g)?;
    let g_norm_sq = e.total();
    let (values, configurations): (Vec<f64>, u64) = match mode {
        AveragingMode::Exact => {
            let all_n = (0..1u64 << bits_n)
                .map(|c| shift_masks(params_n, ShiftBits::from_code(gn.dim, ln, c)))
                .collect::<Result<Vec<_>>>()?;
            let all_m = (0..1u64 << bits_m)
                .map(|c| shift_masks(params_m, ShiftBits::from_code(gm.dim, lm, c)))
                .collect::<Result<Vec<_>>>()?;
            let vals: Vec<f64> = all_n
                .par_iter()
                .flat_map_iter(|a| all_m.iter().map(|b| masked_sum(&e, a, b, &c_mn)).collect::<Vec<_>>())
                .collect();
            let count = vals.len() as u64;
            (vals, count)
        }
        AveragingMode::MonteCarlo { trials, seed } => {
            let vals = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<f64> {
                    let s = derive_index(seed, t);
                    let a = shift_masks(params_n, ShiftBits::random(gn.dim, ln, derive_index(s, 0)))?;
                    let b = shift_masks(params_m, ShiftBits::random(gm.dim, lm, derive_index(s, 1)))?;
                    Ok(masked_sum(&e, &a, &b, &c_mn))
                })
                .collect::<Result<Vec<_>>>()?;
            (vals, trials)
        }
    };
    let count = values.len() as f64;
    let estimate = values.iter().sum::<f64>() / count;
    let scale = if g_norm_sq > 0.0 { g_norm_sq } else { 1.0 };
    let discrepancy = (estimate - g_norm_sq).abs() / scale;
    let (std_error, pass) = match mode {
        AveragingMode::Exact => (None, discrepancy <= tolerance),
        AveragingMode::MonteCarlo { .. } => {
            let var = values.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
            let se = (var / count).sqrt();
            let ok = (estimate - g_norm_sq).abs() <= 3.0 * se || discrepancy <= tolerance;
            (Some(se), ok)
        }
    };
    Ok(AveragingReport {
        g_norm_sq,
        estimate,
        std_error,
        discrepancy,
        configurations,
        pi_n,
        pi_m,
        c_mn,
        pass,
    })
}
