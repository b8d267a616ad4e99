use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::haar::HaarSystem;
use crate::lattice::{GoodnessParams, ShiftedLattice};
use crate::measure::{verify_pseudo_accretive, AccretiveFunction, FactorMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const EMPTY: Range = Range {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };

    pub fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    pub fn merge(&mut self, o: Range) {
        self.min = self.min.min(o.min);
        self.max = self.max.max(o.max);
    }

    pub fn contains(&self, v: f64, rel: f64) -> bool {
        v >= self.min * (1.0 - rel) && v <= self.max * (1.0 + rel)
    }
}

/// Ranges of `‖φ‖_p / μ(I_j)^{1/p−1/2}` for `p = 1, 2, ∞`, and of the
/// pointwise ratio `|φ| / (μ(I_j)^{1/2}/|b(piece)|)` on μ-charged cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub l1: Range,
    pub l2: Range,
    pub linf: Range,
    pub pointwise: Range,
}

impl Envelope {
    pub fn empty() -> Self {
        Self {
            l1: Range::EMPTY,
            l2: Range::EMPTY,
            linf: Range::EMPTY,
            pointwise: Range::EMPTY,
        }
    }

    pub fn merge(&mut self, o: &Envelope) {
        self.l1.merge(o.l1);
        self.l2.merge(o.l2);
        self.linf.merge(o.linf);
        self.pointwise.merge(o.pointwise);
    }
}

pub fn haar_envelope(sys: &HaarSystem) -> Envelope {
    let lat = sys.lattice();
    let w = sys.weights();
    let mut env = Envelope::empty();
    for f in sys.functions().iter().filter(|f| !f.index.is_scaling()) {
        let ord = sys.ordering(f.index.cube).expect("ordering of a Haar cube");
        let j = f.index.child;
        let mu_j: f64 = lat.cells(ord.children[j - 1]).iter().map(|&i| w[i]).sum();
        let (mut n1, mut n2, mut ninf) = (0.0, 0.0, 0.0f64);
        for (p, &(c, v)) in f.pieces.iter().enumerate() {
            let mass: f64 = lat.cells(c).iter().map(|&i| w[i]).sum();
            if mass == 0.0 {
                continue;
            }
            n1 += v.norm() * mass;
            n2 += v.norm_sqr() * mass;
            ninf = ninf.max(v.norm());
            let b = if p == 0 { ord.masses[j - 1] } else { ord.tails[j] };
            env.pointwise.push(v.norm() * b.norm() / mu_j.sqrt());
        }
        env.l1.push(n1 / mu_j.sqrt());
        env.l2.push(n2.sqrt());
        env.linf.push(ninf * mu_j.sqrt());
    }
    env
}

/// Extremizes [`haar_envelope`] over every measure with cell masses in
/// `masses` and every `b` with cell values in `values` on the unshifted
/// depth-`depth` grid, keeping pairs whose accretivity constant is at least
/// `delta`.
pub fn calibrate_envelope(
    dim: usize,
    depth: u32,
    masses: &[f64],
    values: &[Complex64],
    delta: f64,
) -> Result<(Envelope, usize)> {
    let params = GoodnessParams::new(1, 0.25)?;
    let lat = ShiftedLattice::unshifted(dim, depth, params)?;
    let cells = lat.grid().len();
    let mut env = Envelope::empty();
    let mut used = 0;
    for ws in (0..cells).map(|_| masses.iter().copied()).multi_cartesian_product() {
        let Ok(m) = FactorMeasure::new(dim, depth, ws) else {
            continue;
        };
        for bs in (0..cells).map(|_| values.iter().copied()).multi_cartesian_product() {
            let b = AccretiveFunction::new(bs);
            let rep = verify_pseudo_accretive(&b, &m, delta)?;
            if rep.worst_ratio < delta {
                continue;
            }
            let mut b = b;
            b.accretivity_constant = Some(rep.worst_ratio);
            if let Ok(sys) = HaarSystem::build(&m, &b, &lat) {
                env.merge(&haar_envelope(&sys));
                used += 1;
            }
        }
    }
    Ok((env, used))
}
