use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::MAX_DIM;

/// Random shift bits `β^1 … β^L`, one `{0,1}^n` vector per scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftBits {
    pub dim: usize,
    /// `bits[j - 1]` is `β^j`; unused coordinates are zero.
    pub bits: Vec<[u8; MAX_DIM]>,
    pub seed: Option<u64>,
}

impl ShiftBits {
    pub fn zero(dim: usize, depth: u32) -> Self {
        Self {
            dim,
            bits: vec![[0; MAX_DIM]; depth as usize],
            seed: None,
        }
    }

    pub fn random(dim: usize, depth: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..depth)
            .map(|_| {
                let mut b = [0u8; MAX_DIM];
                for v in b.iter_mut().take(dim) {
                    *v = rng.random_range(0..=1);
                }
                b
            })
            .collect();
        Self {
            dim,
            bits,
            seed: Some(seed),
        }
    }

    pub fn from_bits(dim: usize, bits: Vec<[u8; MAX_DIM]>) -> Result<Self> {
        for b in &bits {
            if b.iter().any(|&v| v > 1) || b[dim..].iter().any(|&v| v != 0) {
                return Err(param("bits", "each component must be 0 or 1"));
            }
        }
        Ok(Self {
            dim,
            bits,
            seed: None,
        })
    }

    /// Decodes configuration number `code` of the `2^{depth·dim}` possible
    /// ones: bit `(j-1)·dim + a` of `code` is `β^j_a`.
    pub fn from_code(dim: usize, depth: u32, code: u64) -> Self {
        let bits = (0..depth as usize)
            .map(|j| {
                let mut b = [0u8; MAX_DIM];
                for (a, v) in b.iter_mut().enumerate().take(dim) {
                    *v = ((code >> (j * dim + a)) & 1) as u8;
                }
                b
            })
            .collect();
        Self {
            dim,
            bits,
            seed: None,
        }
    }

    pub fn depth(&self) -> u32 {
        self.bits.len() as u32
    }

    /// `σ_j` per axis in finest-cell units: `Σ_{i>j} 2^{L-i} β^i mod 2^L`,
    /// for `j = 0..=L`.
    pub fn offsets(&self) -> Vec<[usize; MAX_DIM]> {
        let depth = self.depth() as usize;
        let side = 1usize << depth;
        let mut out = vec![[0usize; MAX_DIM]; depth + 1];
        for j in (0..depth).rev() {
            let beta = self.bits[j];
            for a in 0..MAX_DIM {
                out[j][a] = (out[j + 1][a] + ((beta[a] as usize) << (depth - j - 1))) % side;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_formula() {
        // n=1, L=2, β^1 = 0, β^2 = 1 → σ_1 = 1/4, σ_0 = 1/4
        let s = ShiftBits::from_bits(1, vec![[0, 0], [1, 0]]).unwrap();
        assert_eq!(s.offsets(), vec![[1, 0], [1, 0], [0, 0]]);
        let z = ShiftBits::zero(2, 4);
        assert!(z.offsets().iter().all(|o| *o == [0, 0]));
    }

    #[test]
    fn code_round_trip() {
        let s = ShiftBits::from_code(2, 3, 0b10_01_11);
        assert_eq!(s.bits, vec![[1, 1], [1, 0], [0, 1]]);
        assert!(ShiftBits::from_bits(1, vec![[0, 1]]).is_err());
    }
}
