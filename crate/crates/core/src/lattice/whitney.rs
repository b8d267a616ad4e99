use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Log-uniform quadrature for `∫_{ℓ/2}^{ℓ} · dt/t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyNodes {
    pub side: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WhitneyNodes {
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes `t_g = ℓ·2^{-(g-1/2)/G}` with equal weights `log 2 / G`.
pub fn whitney_nodes(side: f64, g: usize) -> Result<WhitneyNodes> {
    if g == 0 {
        return Err(param("G", "at least one node per Whitney slab"));
    }
    let nodes = (1..=g)
        .map(|k| side * (-((k as f64 - 0.5) / g as f64)).exp2())
        .collect();
    Ok(WhitneyNodes {
        side,
        nodes,
        weights: vec![LN_2 / g as f64; g],
    })
}

/// Whitney quadrature for a cube at `level` (side `2^{-level}`).
pub fn whitney_quadrature(level: u32, g: usize) -> Result<WhitneyNodes> {
    whitney_nodes((0.5f64).powi(level as i32), g)
}
