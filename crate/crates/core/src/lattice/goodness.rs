//! Good and bad cubes, and the probability `π_good` of goodness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{CellGrid, MAX_DIM};
use crate::lattice::{CubeId, ShiftBits, ShiftedLattice};
use crate::seed::derive_index;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessParams {
    pub r: u32,
    pub gamma: f64,
}

impl GoodnessParams {
    pub fn new(r: u32, gamma: f64) -> Result<Self> {
        if r < 1 {
            return Err(param("r", "must be at least 1"));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(param("gamma", format!("{gamma} outside (0, 1/2)")));
        }
        Ok(Self { r, gamma })
    }
}

/// `γ = α / (2(d_λ + α))`.
pub fn gamma_from(alpha: f64, d_lambda: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(param("alpha", format!("{alpha} must be positive")));
    }
    if !(d_lambda >= 0.0) {
        return Err(param("d_lambda", format!("{d_lambda} must be non-negative")));
    }
    Ok(alpha / (2.0 * (d_lambda + alpha)))
}

/// Smallest `r` with `2^{-rγ} < 1/2`.
pub fn default_r(gamma: f64) -> u32 {
    (1.0 / gamma).floor() as u32 + 1
}

/// `ℓ(I)^γ ℓ(J)^{1-γ}` for cubes at levels `small` (I) and `large` (J).
pub fn badness_threshold(small: u32, large: u32, gamma: f64) -> f64 {
    (-(small as f64 * gamma + large as f64 * (1.0 - gamma))).exp2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goodness {
    Good,
    Bad { witness: CubeId },
}

/// Badness witness of `c` given the per-level offsets of a lattice.
///
/// Only ancestors need checking: a coarser cube `J` not containing `I` is
/// separated from `I` by the boundary of `I`'s ancestor at `J`'s level.
/// Level 0 is the whole torus and has no boundary.
pub(crate) fn classify_with_offsets(
    grid: CellGrid,
    offsets: &[[usize; MAX_DIM]],
    params: GoodnessParams,
    c: CubeId,
) -> Option<CubeId> {
    if c.level <= params.r {
        return None;
    }
    let depth = grid.depth;
    let side = grid.side();
    let len = 1usize << (depth - c.level);
    let off = offsets[c.level as usize];
    let mut start = [0usize; MAX_DIM];
    for a in 0..grid.dim {
        start[a] = (c.index[a] as usize * len + off[a]) % side;
    }
    for level in 1..=c.level - params.r {
        let alen = 1usize << (depth - level);
        let aoff = offsets[level as usize];
        let mut inner = usize::MAX;
        let mut index = [0u32; MAX_DIM];
        for a in 0..grid.dim {
            // position of I inside its ancestor, in cells
            let rel = (start[a] + side - aoff[a]) % side;
            index[a] = (rel / alen) as u32;
            let p = rel % alen;
            inner = inner.min(p).min(alen - p - len);
        }
        let dist = inner as f64 * grid.cell_len();
        if dist <= badness_threshold(c.level, level, params.gamma) {
            return Some(CubeId { level, index });
        }
    }
    None
}

pub fn classify_goodness(lattice: &ShiftedLattice, c: CubeId) -> Goodness {
    match lattice.bad_witness(c) {
        None => Goodness::Good,
        Some(witness) => Goodness::Bad { witness },
    }
}

/// Circular gap, in cells, between the point `p` and the closed arc
/// `[s, s + l]` on a circle of `side` cells.
fn point_arc_gap(p: usize, s: usize, l: usize, side: usize) -> usize {
    let ahead = (p + side - s) % side;
    if ahead <= l {
        0
    } else {
        (ahead - l).min(side - ahead)
    }
}

/// Slow reference for [`classify_goodness`]: tries every cube `J` of every
/// level `1..=level − r` of the lattice, ancestors or not, and measures
/// `d(I, ∂J)` as the least distance from `I` to a cell-corner vertex of
/// `∂J`. Both distances are piecewise linear with breakpoints on the cell
/// lattice, so the vertex minimum is exact.
pub fn bad_witness_by_enumeration(lattice: &ShiftedLattice, c: CubeId) -> Option<CubeId> {
    let params = lattice.params();
    if c.level <= params.r {
        return None;
    }
    let grid = lattice.grid();
    let side = grid.side();
    let (si, li) = (lattice.start(c), lattice.lens(c));
    let dist_to_i = |v: [usize; MAX_DIM]| {
        (0..grid.dim)
            .map(|a| point_arc_gap(v[a], si[a], li[a], side))
            .max()
            .unwrap_or(0)
    };
    for level in 1..=c.level - params.r {
        let threshold = badness_threshold(c.level, level, params.gamma);
        for j in lattice.cubes_at(level) {
            let (sj, lj) = (lattice.start(j), lattice.lens(j));
            let mut best = usize::MAX;
            if grid.dim == 1 {
                for v in [sj[0], (sj[0] + lj[0]) % side] {
                    best = best.min(dist_to_i([v, 0]));
                }
            } else {
                for step in 0..=lj[0] {
                    for edge in [0, lj[0]] {
                        let along = [(sj[0] + step) % side, (sj[1] + edge) % side];
                        let across = [(sj[0] + edge) % side, (sj[1] + step) % side];
                        best = best.min(dist_to_i(along)).min(dist_to_i(across));
                    }
                }
            }
            if best as f64 * grid.cell_len() <= threshold {
                return Some(j);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PiMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiEstimate {
    pub level: u32,
    pub value: f64,
    /// Standard error; `None` in exact mode.
    pub std_error: Option<f64>,
    pub configurations: u64,
}

const EXACT_BIT_LIMIT: u32 = 24;

/// Probability that the level-`level` cube `I + β` is good.
///
/// Goodness of a level-`j` cube depends on `β^1 … β^j` only, and the
/// probability does not depend on which standard cube is shifted, so exact
/// mode enumerates the `2^{j·n}` relevant bit patterns with the remaining
/// bits fixed at zero.
pub fn pi_good(
    dim: usize,
    depth: u32,
    params: GoodnessParams,
    level: u32,
    mode: PiMode,
) -> Result<PiEstimate> {
    let grid = CellGrid::new(dim, depth)?;
    if level > depth {
        return Err(Error::Level {
            level: level as i64,
            depth,
        });
    }
    let cube = CubeId {
        level,
        index: [0; MAX_DIM],
    };
    match mode {
        PiMode::Exact => {
            let bits = depth * dim as u32;
            if bits > EXACT_BIT_LIMIT {
                return Err(Error::CostGuard {
                    bits,
                    limit: EXACT_BIT_LIMIT,
                });
            }
            let configurations = 1u64 << (level as usize * dim);
            let good: u64 = (0..configurations)
                .into_par_iter()
                .map(|code| {
                    let offsets = ShiftBits::from_code(dim, depth, code).offsets();
                    u64::from(classify_with_offsets(grid, &offsets, params, cube).is_none())
                })
                .sum();
            Ok(PiEstimate {
                level,
                value: good as f64 / configurations as f64,
                std_error: None,
                configurations,
            })
        }
        PiMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(param("trials", "must be positive"));
            }
            let good: u64 = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let offsets = ShiftBits::random(dim, depth, derive_index(seed, t)).offsets();
                    u64::from(classify_with_offsets(grid, &offsets, params, cube).is_none())
                })
                .sum();
            let p = good as f64 / trials as f64;
            Ok(PiEstimate {
                level,
                value: p,
                std_error: Some((p * (1.0 - p) / trials as f64).sqrt()),
                configurations: trials,
            })
        }
    }
}

/// `π_good` for every level `0..=depth`.
pub fn pi_table(dim: usize, depth: u32, params: GoodnessParams, mode: PiMode) -> Result<Vec<PiEstimate>> {
    (0..=depth)
        .map(|l| pi_good(dim, depth, params, l, mode))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_from(1.0, 1.0).unwrap(), 0.25);
        assert_eq!(gamma_from(1.0, 3.0).unwrap(), 0.125);
        assert_eq!(gamma_from(4.0, 1.0).unwrap(), 0.4);
        assert!(gamma_from(0.0, 1.0).is_err());
        assert!(gamma_from(-1.0, 1.0).is_err());
    }

    #[test]
    fn default_r_rule() {
        for &g in &[0.1, 0.25, 0.3, 0.45, 0.49] {
            let r = default_r(g);
            assert!((-(r as f64) * g).exp2() < 0.5);
            assert!(r == 1 || (-((r - 1) as f64) * g).exp2() >= 0.5);
        }
    }

    #[test]
    fn params_validation() {
        assert!(GoodnessParams::new(1, 0.5).is_err());
        assert!(GoodnessParams::new(1, 0.0).is_err());
        assert!(GoodnessParams::new(0, 0.25).is_err());
    }

    #[test]
    fn bad_example_from_unshifted_grid() {
        let lat = ShiftedLattice::unshifted(1, 4, GoodnessParams::new(1, 0.25).unwrap()).unwrap();
        let c = CubeId { level: 4, index: [7, 0] };
        match classify_goodness(&lat, c) {
            Goodness::Bad { witness } => assert!(witness.level <= 3),
            Goodness::Good => panic!("[7/16, 8/16) touches the boundary of [3/8, 1/2)"),
        }
    }

    #[test]
    fn shallow_cubes_are_good() {
        let p = GoodnessParams::new(3, 0.25).unwrap();
        let lat = ShiftedLattice::build(1, 3, 11, 3, 0.25).unwrap();
        assert!(lat.all_cubes().all(|c| lat.is_good(c)));
        for l in 0..=3 {
            assert_eq!(pi_good(1, 3, p, l, PiMode::Exact).unwrap().value, 1.0);
        }
    }

    #[test]
    fn cost_guard() {
        let p = GoodnessParams::new(1, 0.25).unwrap();
        assert!(matches!(
            pi_good(2, 13, p, 3, PiMode::Exact),
            Err(Error::CostGuard { .. })
        ));
    }

    #[test]
    fn small_gamma_still_bad_somewhere() {
        let p = GoodnessParams::new(1, 1e-6).unwrap();
        let est = pi_good(1, 4, p, 4, PiMode::Exact).unwrap();
        assert!(est.value < 1.0);
    }
}
