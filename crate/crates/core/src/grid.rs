//! Finest-cell indexing on the torus `[0,1)^n`, `n ∈ {1, 2}`.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 2;

/// A point of the torus. Unused coordinates are zero.
pub type Point = [f64; MAX_DIM];

/// The `2^{depth·dim}` finest cells. Flat index is `i0 + i1·side`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellGrid {
    pub dim: usize,
    pub depth: u32,
}

impl CellGrid {
    pub fn new(dim: usize, depth: u32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(dim));
        }
        if depth == 0 || depth as usize * dim > 30 {
            return Err(crate::error::param(
                "depth",
                format!("{depth} out of range for dimension {dim}"),
            ));
        }
        Ok(Self { dim, depth })
    }

    pub fn side(&self) -> usize {
        1 << self.depth
    }

    pub fn cell_len(&self) -> f64 {
        1.0 / self.side() as f64
    }

    pub fn len(&self) -> usize {
        1 << (self.depth as usize * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flat(&self, coords: [usize; MAX_DIM]) -> usize {
        if self.dim == 1 {
            coords[0]
        } else {
            coords[0] + coords[1] * self.side()
        }
    }

    pub fn coords(&self, flat: usize) -> [usize; MAX_DIM] {
        let side = self.side();
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat % side, flat / side]
        }
    }

    pub fn center(&self, flat: usize) -> Point {
        let c = self.coords(flat);
        let h = self.cell_len();
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = (c[a] as f64 + 0.5) * h;
        }
        p
    }

    /// Cell containing `x` (coordinates reduced mod 1).
    pub fn cell_of(&self, x: &Point) -> usize {
        let side = self.side();
        let mut c = [0usize; MAX_DIM];
        for a in 0..self.dim {
            let u = x[a].rem_euclid(1.0);
            c[a] = ((u * side as f64).floor() as usize).min(side - 1);
        }
        self.flat(c)
    }
}

/// Periodic distance between two reals on the circle of circumference 1.
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Periodic ℓ^∞ distance between torus points.
pub fn torus_distance(x: &Point, y: &Point) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| circle_distance(*a, *b))
        .fold(0.0, f64::max)
}

/// Gap between two half-open arcs `[a, a+la)` and `[b, b+lb)` of a circle
/// with `n` points, in point units. Zero when they overlap or touch.
pub fn arc_gap(a: usize, la: usize, b: usize, lb: usize, n: usize) -> usize {
    let ba = (b + n - a % n) % n;
    let ab = (a + n - b % n) % n;
    if ba < la || ab < lb {
        return 0;
    }
    // ba >= la and ab >= lb here
    (ba - la).min(ab - lb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_gap_cases() {
        assert_eq!(arc_gap(0, 2, 2, 2, 8), 0);
        assert_eq!(arc_gap(0, 2, 3, 2, 8), 1);
        assert_eq!(arc_gap(6, 4, 3, 1, 8), 1);
        assert_eq!(arc_gap(0, 8, 3, 1, 8), 0);
        assert_eq!(arc_gap(7, 2, 3, 1, 8), 2);
    }

    #[test]
    fn torus_distance_wraps() {
        assert!((torus_distance(&[0.05, 0.0], &[0.95, 0.0]) - 0.1).abs() < 1e-15);
        assert!((torus_distance(&[0.1, 0.9], &[0.2, 0.1]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn cells_round_trip() {
        let g = CellGrid::new(2, 3).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.cell_of(&g.center(i)), i);
        }
    }
}
