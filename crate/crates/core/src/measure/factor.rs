use std::ops::{Add, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{CellGrid, Point, MAX_DIM};

/// Summed-area table over the finest cells, supporting wrapped boxes.
#[derive(Debug, Clone)]
pub struct PrefixTable<T> {
    grid: CellGrid,
    // (side+1)^dim entries; entry (i,j) = sum over cells with coords < (i,j)
    table: Vec<T>,
}

impl<T> PrefixTable<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T>,
{
    pub fn new(grid: CellGrid, cells: &[T]) -> Self {
        let side = grid.side();
        let w = side + 1;
        let table = if grid.dim == 1 {
            let mut t = vec![T::default(); w];
            for i in 0..side {
                t[i + 1] = t[i] + cells[i];
            }
            t
        } else {
            let mut t = vec![T::default(); w * w];
            for j in 0..side {
                let mut row = T::default();
                for i in 0..side {
                    row = row + cells[i + j * side];
                    t[(i + 1) + (j + 1) * w] = t[(i + 1) + j * w] + row;
                }
            }
            t
        };
        Self { grid, table }
    }

    fn rect(&self, lo: [usize; MAX_DIM], hi: [usize; MAX_DIM]) -> T {
        if self.grid.dim == 1 {
            self.table[hi[0]] - self.table[lo[0]]
        } else {
            let w = self.grid.side() + 1;
            let at = |i: usize, j: usize| self.table[i + j * w];
            at(hi[0], hi[1]) - at(lo[0], hi[1]) - at(hi[0], lo[1]) + at(lo[0], lo[1])
        }
    }

    /// Sum over the periodic box with per-axis cell range `[start, start+len)`.
    pub fn box_sum(&self, start: [usize; MAX_DIM], len: [usize; MAX_DIM]) -> T {
        let side = self.grid.side();
        let mut pieces: [Vec<(usize, usize)>; MAX_DIM] = Default::default();
        for a in 0..MAX_DIM {
            if a >= self.grid.dim {
                pieces[a].push((0, 1));
                continue;
            }
            let s = start[a] % side;
            let l = len[a].min(side);
            if s + l <= side {
                pieces[a].push((s, s + l));
            } else {
                pieces[a].push((s, side));
                pieces[a].push((0, s + l - side));
            }
        }
        let mut acc = T::default();
        for &(a0, b0) in &pieces[0] {
            for &(a1, b1) in &pieces[1] {
                acc = acc + self.rect([a0, a1], [b0, b1]);
            }
        }
        acc
    }
}

/// Non-negative cell weights on the finest partition of `[0,1)^n`.
#[derive(Debug, Clone)]
pub struct FactorMeasure {
    grid: CellGrid,
    weights: Vec<f64>,
    prefix: PrefixTable<f64>,
    total: f64,
}

impl FactorMeasure {
    pub fn new(dim: usize, depth: u32, weights: Vec<f64>) -> Result<Self> {
        let grid = CellGrid::new(dim, depth)?;
        if weights.len() != grid.len() {
            return Err(Error::WeightCount {
                dim,
                depth,
                expected: grid.len(),
                got: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
        {
            return Err(Error::NegativeWeight { index, value });
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let prefix = PrefixTable::new(grid, &weights);
        Ok(Self {
            grid,
            weights,
            prefix,
            total,
        })
    }

    pub fn uniform(dim: usize, depth: u32) -> Result<Self> {
        let grid = CellGrid::new(dim, depth)?;
        let w = 1.0 / grid.len() as f64;
        Self::new(dim, depth, vec![w; grid.len()])
    }

    pub fn grid(&self) -> CellGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn depth(&self) -> u32 {
        self.grid.depth
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Mass of the periodic box `[start, start+len)` in cell units.
    pub fn box_mass(&self, start: [usize; MAX_DIM], len: [usize; MAX_DIM]) -> f64 {
        self.prefix.box_sum(start, len)
    }

    /// Mass of the periodic ℓ^∞ ball; partial cells count by overlap fraction.
    pub fn ball_mass(&self, x: &Point, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 0.5) {
            return Err(Error::Radius(r));
        }
        let side = self.grid.side();
        let h = self.grid.cell_len();
        let fractions: Vec<Vec<f64>> = (0..self.grid.dim)
            .map(|a| {
                let lo = x[a] - r;
                (0..side)
                    .map(|i| arc_overlap(i as f64 * h, h, lo, 2.0 * r) / h)
                    .collect()
            })
            .collect();
        let mass = if self.grid.dim == 1 {
            self.weights
                .iter()
                .zip(&fractions[0])
                .map(|(w, f)| w * f)
                .sum()
        } else {
            let mut m = 0.0;
            for j in 0..side {
                let fj = fractions[1][j];
                if fj == 0.0 {
                    continue;
                }
                let row = &self.weights[j * side..(j + 1) * side];
                m += row.iter().zip(&fractions[0]).map(|(w, f)| w * f).sum::<f64>() * fj;
            }
            m
        };
        Ok(mass)
    }

    /// Prefix table of `values · weight` per cell, for weighted box integrals.
    pub fn weighted_prefix(&self, values: &[Complex64]) -> PrefixTable<Complex64> {
        let cells: Vec<Complex64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * *w)
            .collect();
        PrefixTable::new(self.grid, &cells)
    }
}

/// Length of the overlap between `[c, c+h)` and the arc `[lo, lo+len)` mod 1.
fn arc_overlap(c: f64, h: f64, lo: f64, len: f64) -> f64 {
    let lo = lo.rem_euclid(1.0);
    [-1.0, 0.0, 1.0]
        .iter()
        .map(|k| {
            let a = lo + k;
            let b = a + len;
            (b.min(c + h) - a.max(c)).max(0.0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        let m = FactorMeasure::uniform(1, 3).unwrap();
        assert_eq!(m.total_mass(), 1.0);
        assert_eq!(m.box_mass([0, 0], [4, 1]), 0.5);

        let m = FactorMeasure::new(1, 1, vec![0.75, 0.25]).unwrap();
        assert_eq!(m.box_mass([1, 0], [1, 1]), 0.25);

        let m = FactorMeasure::new(1, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!((m.box_mass([1, 0], [2, 1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            FactorMeasure::new(1, 1, vec![0.5, -0.1]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(
            FactorMeasure::new(1, 1, vec![0.0, 0.0]),
            Err(Error::ZeroMass)
        ));
        assert!(matches!(
            FactorMeasure::new(1, 2, vec![1.0]),
            Err(Error::WeightCount { .. })
        ));
    }

    #[test]
    fn wrapped_box() {
        let m = FactorMeasure::new(1, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!((m.box_mass([3, 0], [2, 1]) - 0.5).abs() < 1e-15);
        let m2 = FactorMeasure::new(2, 1, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!((m2.box_mass([1, 1], [1, 2]) - 0.6).abs() < 1e-15);
        assert!((m2.box_mass([1, 1], [2, 2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_examples() {
        let m = FactorMeasure::uniform(1, 3).unwrap();
        assert!((m.ball_mass(&[0.5, 0.0], 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.ball_mass(&[0.0, 0.0], 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.ball_mass(&[0.3, 0.0], 0.5).unwrap() - 1.0).abs() < 1e-15);
        let m = FactorMeasure::new(1, 1, vec![0.75, 0.25]).unwrap();
        assert!((m.ball_mass(&[0.25, 0.0], 0.25).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(m.ball_mass(&[0.0, 0.0], 0.6), Err(Error::Radius(_))));
        assert!(matches!(m.ball_mass(&[0.0, 0.0], 0.0), Err(Error::Radius(_))));
    }

    #[test]
    fn ball_2d_partial() {
        let m = FactorMeasure::uniform(2, 2).unwrap();
        // [0.25, 0.75)^2 → 1/4
        assert!((m.ball_mass(&[0.5, 0.5], 0.25).unwrap() - 0.25).abs() < 1e-15);
        // radius 0.1 around a cell centre: (0.2)^2
        assert!((m.ball_mass(&[0.125, 0.125], 0.1).unwrap() - 0.04).abs() < 1e-15);
    }
}
