use num_complex::Complex64;

use crate::error::{param, Result};
use crate::haar::{HaarIndex, HaarSystem};
use crate::lattice::CubeId;

#[derive(Debug, Clone)]
pub struct XiDecomposition {
    pub cube: CubeId,
    pub k: u32,
    pub ancestor: CubeId,
    pub inner: CubeId,
    /// `ξ` per finest cell.
    pub xi: Vec<Complex64>,
    /// `⟨φ_{I^{(k)}}⟩_{I^{(k−1)}}`.
    pub average: Complex64,
    /// `sup|ξ| · μ(I^{(k)})^{1/2}`.
    pub sup_constant: f64,
}

/// `ξ_I^k = −⟨φ⟩_{I^{(k−1)}}·1_{(I^{(k−1)})^c} + φ·1_{I^{(k)} \ I^{(k−1)}}`
/// for `φ = φ_{I^{(k)}, j}`, so that `φ = ξ + ⟨φ⟩_{I^{(k−1)}}` everywhere.
pub fn xi_decomposition(sys: &HaarSystem, cube: CubeId, k: u32, j: usize) -> Result<XiDecomposition> {
    if k == 0 {
        return Err(param("k", "must be at least 1"));
    }
    let lat = sys.lattice();
    let ancestor = lat.ancestor(cube, k)?;
    let inner = lat.ancestor(cube, k - 1)?;
    let index = HaarIndex { cube: ancestor, child: j };
    let phi = sys
        .function(index)
        .ok_or_else(|| param("j", format!("no Haar function {index}")))?
        .dense(lat);
    let w = sys.weights();
    let inside = lat.cells(inner);
    let mass: f64 = inside.iter().map(|&i| w[i]).sum();
    // φ is constant on I^{(k−1)}, so the value there is the average
    let average = if mass > 0.0 {
        inside.iter().map(|&i| phi[i] * w[i]).sum::<Complex64>() / mass
    } else {
        phi[inside[0]]
    };
    let mut xi: Vec<Complex64> = phi.iter().map(|v| v - average).collect();
    for &i in &inside {
        xi[i] = Complex64::new(0.0, 0.0);
    }
    let big: f64 = lat.cells(ancestor).iter().map(|&i| w[i]).sum();
    let sup = xi
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(v, _)| v.norm())
        .fold(0.0, f64::max);
    Ok(XiDecomposition {
        cube,
        k,
        ancestor,
        inner,
        xi,
        average,
        sup_constant: sup * big.sqrt(),
    })
}
