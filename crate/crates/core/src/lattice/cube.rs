use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{arc_gap, CellGrid, Point, MAX_DIM};
use crate::lattice::goodness::{classify_with_offsets, GoodnessParams};
use crate::lattice::ShiftBits;

/// A cube of a shifted lattice: level `j` (side `2^{-j}`) and a per-axis
/// index modulo `2^j`. Its point set is the standard dyadic cube with that
/// index translated by `σ_j`, mod 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeId {
    pub level: u32,
    pub index: [u32; MAX_DIM],
}

impl CubeId {
    pub const ROOT: CubeId = CubeId {
        level: 0,
        index: [0; MAX_DIM],
    };

    pub fn side(&self) -> f64 {
        (0.5f64).powi(self.level as i32)
    }

    /// Index flattened as `i0 + i1·2^level`.
    pub fn flat(&self) -> usize {
        self.index[0] as usize + ((self.index[1] as usize) << self.level)
    }
}

impl fmt::Display for CubeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}[{},{}]", self.level, self.index[0], self.index[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Parent,
    Children,
    Ancestor(u32),
}

/// A randomly shifted dyadic lattice on the torus with a goodness cache.
#[derive(Debug, Clone)]
pub struct ShiftedLattice {
    grid: CellGrid,
    bits: ShiftBits,
    offsets: Vec<[usize; MAX_DIM]>,
    params: GoodnessParams,
    // per level, per flat index: the witness of badness, if any
    badness: Vec<Vec<Option<CubeId>>>,
}

impl ShiftedLattice {
    pub fn build(dim: usize, depth: u32, seed: u64, r: u32, gamma: f64) -> Result<Self> {
        let params = GoodnessParams::new(r, gamma)?;
        Self::from_bits(ShiftBits::random(dim, depth, seed), params)
    }

    pub fn from_bits(bits: ShiftBits, params: GoodnessParams) -> Result<Self> {
        let grid = CellGrid::new(bits.dim, bits.depth())?;
        let offsets = bits.offsets();
        let mut lattice = Self {
            grid,
            bits,
            offsets,
            params,
            badness: Vec::new(),
        };
        let badness = (0..=grid.depth)
            .map(|level| {
                lattice
                    .cubes_at(level)
                    .map(|c| classify_with_offsets(grid, &lattice.offsets, params, c))
                    .collect()
            })
            .collect();
        lattice.badness = badness;
        Ok(lattice)
    }

    pub fn unshifted(dim: usize, depth: u32, params: GoodnessParams) -> Result<Self> {
        Self::from_bits(ShiftBits::zero(dim, depth), params)
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

    pub fn bits(&self) -> &ShiftBits {
        &self.bits
    }

    pub fn params(&self) -> GoodnessParams {
        self.params
    }

    /// `σ_j` per axis in finest-cell units.
    pub fn offset(&self, level: u32) -> [usize; MAX_DIM] {
        self.offsets[level as usize]
    }

    pub fn count_at(&self, level: u32) -> usize {
        1usize << (level as usize * self.grid.dim)
    }

    pub fn cubes_at(&self, level: u32) -> impl Iterator<Item = CubeId> + '_ {
        let per_axis = 1u32 << level;
        let dim = self.grid.dim;
        (0..self.count_at(level)).map(move |f| {
            let mut index = [0u32; MAX_DIM];
            index[0] = f as u32 % per_axis;
            if dim == 2 {
                index[1] = f as u32 / per_axis;
            }
            CubeId { level, index }
        })
    }

    pub fn all_cubes(&self) -> impl Iterator<Item = CubeId> + '_ {
        (0..=self.depth()).flat_map(move |l| self.cubes_at(l))
    }

    /// Side of a level-`level` cube in finest cells.
    pub fn cells_per_side(&self, level: u32) -> usize {
        1usize << (self.grid.depth - level)
    }

    /// First finest cell of the cube along each axis.
    pub fn start(&self, c: CubeId) -> [usize; MAX_DIM] {
        let side = self.grid.side();
        let len = self.cells_per_side(c.level);
        let off = self.offsets[c.level as usize];
        let mut s = [0usize; MAX_DIM];
        for a in 0..self.grid.dim {
            s[a] = (c.index[a] as usize * len + off[a]) % side;
        }
        s
    }

    pub fn lens(&self, c: CubeId) -> [usize; MAX_DIM] {
        let len = self.cells_per_side(c.level);
        let mut l = [1usize; MAX_DIM];
        for v in l.iter_mut().take(self.grid.dim) {
            *v = len;
        }
        l
    }

    pub fn center(&self, c: CubeId) -> Point {
        let s = self.start(c);
        let len = self.cells_per_side(c.level) as f64;
        let h = self.grid.cell_len();
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.grid.dim {
            p[a] = ((s[a] as f64 + 0.5 * len) * h).rem_euclid(1.0);
        }
        p
    }

    /// Finest cells of the cube, flat indices, in axis-0-fastest order.
    pub fn cells(&self, c: CubeId) -> Vec<usize> {
        let side = self.grid.side();
        let s = self.start(c);
        let len = self.cells_per_side(c.level);
        let n1 = if self.grid.dim == 2 { len } else { 1 };
        let mut out = Vec::with_capacity(len * n1);
        for j in 0..n1 {
            for i in 0..len {
                out.push(self.grid.flat([(s[0] + i) % side, (s[1] + j) % side]));
            }
        }
        out
    }

    /// The level-`level` cube holding a finest cell.
    pub fn cube_of_cell(&self, level: u32, cell: usize) -> CubeId {
        let side = self.grid.side();
        let len = self.cells_per_side(level);
        let off = self.offsets[level as usize];
        let coords = self.grid.coords(cell);
        let mut index = [0u32; MAX_DIM];
        for a in 0..self.grid.dim {
            index[a] = (((coords[a] + side - off[a]) % side) / len) as u32;
        }
        CubeId { level, index }
    }

    pub fn cube_of_point(&self, level: u32, x: &Point) -> CubeId {
        self.cube_of_cell(level, self.grid.cell_of(x))
    }

    pub fn contains_cell(&self, c: CubeId, cell: usize) -> bool {
        self.cube_of_cell(c.level, cell) == c
    }

    /// `J ⊆ I` for cubes of this lattice.
    pub fn contains(&self, outer: CubeId, inner: CubeId) -> bool {
        inner.level >= outer.level
            && self
                .ancestor(inner, inner.level - outer.level)
                .is_ok_and(|a| a == outer)
    }

    pub fn parent(&self, c: CubeId) -> Result<CubeId> {
        self.ancestor(c, 1)
    }

    /// Children in lexicographic order of their per-axis offset bits.
    pub fn children(&self, c: CubeId) -> Result<Vec<CubeId>> {
        if c.level >= self.depth() {
            return Err(Error::Level {
                level: c.level as i64 + 1,
                depth: self.depth(),
            });
        }
        let beta = self.bits.bits[c.level as usize];
        let modulus = 2u32 << c.level;
        let dim = self.grid.dim;
        Ok((0..1usize << dim)
            .map(|e| {
                let mut index = [0u32; MAX_DIM];
                for a in 0..dim {
                    let bit = ((e >> a) & 1) as u32;
                    index[a] = (2 * c.index[a] + beta[a] as u32 + bit) % modulus;
                }
                CubeId {
                    level: c.level + 1,
                    index,
                }
            })
            .collect())
    }

    /// `I^{(k)}`: the unique cube of side `2^k ℓ(I)` containing `I`.
    pub fn ancestor(&self, c: CubeId, k: u32) -> Result<CubeId> {
        if k > c.level {
            return Err(Error::Level {
                level: c.level as i64 - k as i64,
                depth: self.depth(),
            });
        }
        let target = c.level - k;
        let cell = self.grid.flat(self.start(c));
        Ok(self.cube_of_cell(target, cell))
    }

    pub fn navigate(&self, c: CubeId, dir: Direction) -> Result<Vec<CubeId>> {
        match dir {
            Direction::Parent => self.parent(c).map(|p| vec![p]),
            Direction::Children => self.children(c),
            Direction::Ancestor(k) => self.ancestor(c, k).map(|p| vec![p]),
        }
    }

    /// Periodic ℓ^∞ distance between two cubes (zero if they touch).
    pub fn distance(&self, a: CubeId, b: CubeId) -> f64 {
        let side = self.grid.side();
        let (sa, la) = (self.start(a), self.lens(a));
        let (sb, lb) = (self.start(b), self.lens(b));
        (0..self.grid.dim)
            .map(|ax| arc_gap(sa[ax], la[ax], sb[ax], lb[ax], side))
            .max()
            .unwrap_or(0) as f64
            * self.grid.cell_len()
    }

    pub fn is_good(&self, c: CubeId) -> bool {
        self.badness[c.level as usize][c.flat()].is_none()
    }

    /// `None` when good, otherwise a coarser cube witnessing badness.
    pub fn bad_witness(&self, c: CubeId) -> Option<CubeId> {
        self.badness[c.level as usize][c.flat()]
    }

    pub fn good_count(&self, level: u32) -> usize {
        self.badness[level as usize].iter().filter(|w| w.is_none()).count()
    }

    pub fn check_cube(&self, c: CubeId) -> Result<()> {
        let per_axis = 1u32 << c.level;
        if c.level > self.depth() || c.index[..self.dim()].iter().any(|&i| i >= per_axis) {
            return Err(param("cube", format!("{c} is not a cube of this lattice")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GoodnessParams {
        GoodnessParams::new(1, 0.25).unwrap()
    }

    #[test]
    fn shifted_level_one_cubes() {
        let bits = ShiftBits::from_bits(1, vec![[0, 0], [1, 0]]).unwrap();
        let lat = ShiftedLattice::from_bits(bits, params()).unwrap();
        // [1/4, 3/4) and [3/4, 5/4)
        assert_eq!(lat.start(CubeId { level: 1, index: [0, 0] }), [1, 0]);
        assert_eq!(lat.start(CubeId { level: 1, index: [1, 0] }), [3, 0]);
        // level-2 cube holding 0.3 has ancestor [1/4, 3/4)
        let c = lat.cube_of_point(2, &[0.3, 0.0]);
        let a = lat.ancestor(c, 1).unwrap();
        assert_eq!(lat.start(a), [1, 0]);
        assert_eq!(lat.ancestor(c, 0).unwrap(), c);
        assert!(lat.ancestor(c, 3).is_err());
    }

    #[test]
    fn unshifted_parent() {
        let lat = ShiftedLattice::unshifted(1, 3, params()).unwrap();
        let c = CubeId { level: 2, index: [0, 0] };
        assert_eq!(lat.parent(c).unwrap(), CubeId { level: 1, index: [0, 0] });
    }

    #[test]
    fn nestedness_exhaustive() {
        for dim in 1..=2usize {
            let depth = if dim == 1 { 6 } else { 3 };
            for seed in 0..8u64 {
                let lat = ShiftedLattice::build(dim, depth, seed, 1, 0.25).unwrap();
                for level in 0..depth {
                    for c in lat.cubes_at(level) {
                        let kids = lat.children(c).unwrap();
                        assert_eq!(kids.len(), 1 << dim);
                        let mut cells: Vec<usize> =
                            kids.iter().flat_map(|k| lat.cells(*k)).collect();
                        cells.sort();
                        let mut own = lat.cells(c);
                        own.sort();
                        assert_eq!(cells, own, "children partition {c}");
                        for k in kids {
                            assert_eq!(lat.parent(k).unwrap(), c);
                        }
                    }
                    for c in lat.cubes_at(level + 1) {
                        let holders = lat
                            .cubes_at(level)
                            .filter(|p| lat.cells(c).iter().all(|&x| lat.contains_cell(*p, x)))
                            .count();
                        assert_eq!(holders, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn distance_between_cubes() {
        let lat = ShiftedLattice::unshifted(1, 3, params()).unwrap();
        let a = CubeId { level: 3, index: [0, 0] };
        let b = CubeId { level: 3, index: [3, 0] };
        assert!((lat.distance(a, b) - 0.25).abs() < 1e-15);
        let c = CubeId { level: 3, index: [7, 0] };
        assert_eq!(lat.distance(a, c), 0.0);
    }
}
