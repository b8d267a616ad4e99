use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::schur::scale_decay;
use super::{cube_masses, packing_sums, CubeSequence};
use crate::error::{param, Error, Result};
use crate::gfunction::truncated_nodes;
use crate::grid::torus_distance;
use crate::haar::{xi_decomposition, HaarIndex, HaarSystem};
use crate::kernel::{weight_field, KernelSpec, ThetaBank};
use crate::lattice::{whitney_quadrature, CubeId, ShiftedLattice};
use crate::measure::{DominatingFunction, FactorMeasure};

/// `t^e / (t^e λ(x,t) + d^e λ(x,d))` and its numerator-free denominator.
fn denominator(lambda: &DominatingFunction, x: &[f64; 2], e: f64, t: f64, d: f64) -> f64 {
    t.powf(e) * lambda.eval(x, t) + d.powf(e) * lambda.eval(x, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FAlphaValue {
    /// `max_{x1 ∈ I2, t1 ∈ W_{I2}} ∫_{I1} |y − c_{I1}|^α / (…) dμ(y)`.
    pub lhs: f64,
    /// `A_{I1 I2} μ(I1)^{-1/2} μ(I2)^{-1/2}`.
    pub rhs: f64,
    pub ratio: f64,
}

/// The scale-decay integral of a smaller cube `I1` seen from `x1 ∈ I2`,
/// against the Schur coefficient of the pair.
#[allow(clippy::too_many_arguments)]
pub fn f_alpha_pair(
    alpha: f64,
    lambda: &DominatingFunction,
    m: &FactorMeasure,
    lat: &ShiftedLattice,
    i1: CubeId,
    i2: CubeId,
    g: usize,
) -> Result<FAlphaValue> {
    if i1.level <= i2.level {
        return Err(param("I1", format!("{i1} must be strictly smaller than {i2}")));
    }
    let grid = m.grid();
    let w = m.weights();
    let (c1, c2) = (lat.cells(i1), lat.cells(i2));
    let centre = lat.center(i1);
    let q = whitney_quadrature(i2.level, g)?;
    let mut lhs = 0.0f64;
    for &x in &c2 {
        let xc = grid.center(x);
        for &t in &q.nodes {
            let v: f64 = c1
                .iter()
                .map(|&y| {
                    let yc = grid.center(y);
                    torus_distance(&yc, &centre).powf(alpha) * w[y]
                        / denominator(lambda, &xc, alpha, t, torus_distance(&xc, &yc))
                })
                .sum();
            lhs = lhs.max(v);
        }
    }
    let rhs = scale_decay(alpha, lambda, lat, i1, i2, &c1, &c2);
    Ok(FAlphaValue {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Which tail integral a [`DecayProfile`] follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    /// First factor, expected rate `2^{-αk/2}`.
    Fk,
    /// Second factor, expected rate `2^{-βi}`.
    Gi,
}

impl DecayKind {
    fn rate(self, exponent: f64, k: u32) -> f64 {
        match self {
            DecayKind::Fk => (-exponent * k as f64 / 2.0).exp2(),
            DecayKind::Gi => (-exponent * k as f64).exp2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub kind: DecayKind,
    pub cube: CubeId,
    /// Tail integral for `k = 1..=k_max`, maximized over `x ∈ I`, `t ∈ W_I`.
    pub values: Vec<f64>,
    /// `(value_k / rate_k) / (value_1 / rate_1)`; zero when `value_1 = 0`.
    pub normalized: Vec<f64>,
    pub max_normalized: f64,
}

/// `max_{x ∈ I, t ∈ W_I} ∫_{(I^{(k−1)})^c} t^e / (t^e λ(x,t) + |x−y|^e λ(x,|x−y|)) dμ(y)`
/// for a good cube `I` and `k = 1..=k_max`.
#[allow(clippy::too_many_arguments)]
pub fn decay_profile(
    kind: DecayKind,
    exponent: f64,
    lambda: &DominatingFunction,
    m: &FactorMeasure,
    lat: &ShiftedLattice,
    cube: CubeId,
    k_max: u32,
    g: usize,
) -> Result<DecayProfile> {
    lat.check_cube(cube)?;
    if let Some(witness) = lat.bad_witness(cube) {
        return Err(Error::BadCube { cube, witness });
    }
    if k_max == 0 || k_max > cube.level + 1 {
        return Err(param("k_max", format!("needs 1 ≤ k_max ≤ {}", cube.level + 1)));
    }
    let grid = m.grid();
    let w = m.weights();
    let q = whitney_quadrature(cube.level, g)?;
    let inside = lat.cells(cube);
    let mut values = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let outer = lat.ancestor(cube, k - 1)?;
        let tail: Vec<usize> = (0..grid.len()).filter(|&y| !lat.contains_cell(outer, y)).collect();
        let mut best = 0.0f64;
        for &x in &inside {
            let xc = grid.center(x);
            for &t in &q.nodes {
                let te = t.powf(exponent);
                let v: f64 = tail
                    .iter()
                    .map(|&y| {
                        let yc = grid.center(y);
                        te * w[y] / denominator(lambda, &xc, exponent, t, torus_distance(&xc, &yc))
                    })
                    .sum();
                best = best.max(v);
            }
        }
        values.push(best);
    }
    let base = values[0] / kind.rate(exponent, 1);
    let normalized: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, v)| if base > 0.0 { v / kind.rate(exponent, k as u32 + 1) / base } else { 0.0 })
        .collect();
    Ok(DecayProfile {
        kind,
        cube,
        max_normalized: normalized.iter().copied().fold(0.0, f64::max),
        values,
        normalized,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    /// The sequence at the free variables attaining the worst ratio.
    pub sequence: CubeSequence,
    /// Its Carleson sums `Σ_{Q'⊂Q} a_{Q'}`.
    pub carleson_sums: CubeSequence,
    /// Largest single term over all free variables.
    pub max_term: f64,
    /// `max Σ_{Q'⊂Q} a_{Q'} / bound(Q)` over cubes and free variables.
    pub max_ratio: f64,
    pub worst_cube: Option<CubeId>,
    /// Number of `(x, t)` pairs the other factor was sampled at.
    pub free_points: usize,
}

/// `energy[level][[x, f]]`: Whitney energy density at cell `x` of the
/// sequence factor for free point `f`; sums it into cubes and compares the
/// Carleson sums against `bound`.
fn summarize(lat: &ShiftedLattice, energy: &[Array2<f64>], bound: impl Fn(CubeId) -> f64) -> Result<SequenceReport> {
    let free = energy[0].ncols();
    let cells: Vec<(CubeId, Vec<usize>)> = lat.all_cubes().map(|c| (c, lat.cells(c))).collect();
    let mut best: Option<(f64, CubeSequence, CubeSequence, Option<CubeId>)> = None;
    let mut max_term = 0.0f64;
    for f in 0..free {
        let mut a = CubeSequence::zeros(lat.dim(), lat.depth());
        for (c, cs) in &cells {
            let v: f64 = cs.iter().map(|&x| energy[c.level as usize][[x, f]]).sum();
            max_term = max_term.max(v);
            a.set(*c, v);
        }
        let sums = packing_sums(&a, lat)?;
        let mut ratio = 0.0f64;
        let mut worst = None;
        for (c, _) in &cells {
            let (s, b) = (sums.get(*c), bound(*c));
            let r = if b > 0.0 {
                s / b
            } else if s > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if r > ratio || worst.is_none() {
                ratio = ratio.max(r);
                worst = Some(*c);
            }
        }
        if best.as_ref().is_none_or(|b| ratio > b.0) {
            best = Some((ratio, a, sums, worst));
        }
    }
    let (max_ratio, sequence, carleson_sums, worst_cube) =
        best.ok_or_else(|| param("free points", "none to evaluate"))?;
    Ok(SequenceReport {
        sequence,
        carleson_sums,
        max_term,
        max_ratio,
        worst_cube,
        free_points: free,
    })
}

fn check_pair(k: &KernelSpec, mn: &FactorMeasure, mm: &FactorMeasure, sn: &ShiftedLattice, sm: &ShiftedLattice) -> Result<()> {
    if k.grid_n != mn.grid() || k.grid_m != mm.grid() || sn.grid() != mn.grid() || sm.grid() != mm.grid() {
        return Err(Error::Shape("kernel, measures and lattices disagree".into()));
    }
    Ok(())
}

/// `a_I = ∬_{W_I} |Θ_{t1,t2}(b1 ⊗ b2ψ_{J1})(x)|² dμ_n(x1) dt1/t1` for every
/// `I`, with `(x2, t2)` ranging over `J2 × W_{J2}` nodes; bound
/// `(A_{J1J2} μ_m(J2)^{-1/2})² μ_n(I)` uses `β` and `λ_m`.
#[allow(clippy::too_many_arguments)]
pub fn a_i_sequence(
    k: &KernelSpec,
    b1: &[Complex64],
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    sys_m: &HaarSystem,
    j1: CubeId,
    j2: CubeId,
    g: usize,
) -> Result<SequenceReport> {
    let lat_m = sys_m.lattice();
    check_pair(k, mn, mm, lat_n, lat_m)?;
    if j1.level <= j2.level {
        return Err(param("J1", format!("{j1} must be strictly smaller than {j2}")));
    }
    let psi = sys_m
        .function(HaarIndex { cube: j1, child: 1 })
        .ok_or_else(|| param("J1", format!("no Haar function on {j1}")))?
        .dense(lat_m);
    let b2 = sys_m.b();
    let f = Array2::from_shape_fn((b1.len(), b2.len()), |(x1, x2)| b1[x1] * b2[x2] * psi[x2]);
    let fw = weight_field(&f, mn.weights(), mm.weights());
    let n1 = truncated_nodes(lat_n.depth() + 1, g)?;
    let t1: Vec<f64> = n1.iter().map(|n| n.t).collect();
    let q2 = whitney_quadrature(j2.level, g)?;
    let bank = ThetaBank::new(k, &t1, &q2.nodes);
    let x2s = lat_m.cells(j2);
    let wn = mn.weights();
    let nn = wn.len();
    let free = x2s.len() * q2.len();
    let mut energy = vec![Array2::<f64>::zeros((nn, free)); lat_n.depth() as usize + 1];
    for (a, node) in n1.iter().enumerate() {
        for b in 0..q2.len() {
            let theta = bank.apply_weighted(&fw, a, b);
            let e = &mut energy[node.level as usize];
            for (s, &x2) in x2s.iter().enumerate() {
                let col = b * x2s.len() + s;
                for x1 in 0..nn {
                    e[[x1, col]] += node.weight * theta[[x1, x2]].norm_sqr() * wn[x1];
                }
            }
        }
    }
    let cm = cube_masses(mm, lat_m);
    let coeff = scale_decay(k.beta, &k.lambda_m, lat_m, j1, j2, &lat_m.cells(j1), &x2s)
        * cm.get(j1).sqrt();
    let masses = cube_masses(mn, lat_n);
    summarize(lat_n, &energy, |c| coeff * coeff * masses.get(c))
}

/// `a_J = ∬_{W_J} |Θ_{t1,t2}((b1 ξ_I^k) ⊗ b2)(x)|² dμ_m(x2) dt2/t2` for every
/// `J`, with `(x1, t1)` ranging over `I × W_I` nodes; bound
/// `2^{-αk} μ_n(I^{(k)})^{-1} μ_m(J)`.
#[allow(clippy::too_many_arguments)]
pub fn a_j_sequence(
    k: &KernelSpec,
    b2: &[Complex64],
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    sys_n: &HaarSystem,
    lat_m: &ShiftedLattice,
    cube: CubeId,
    level_up: u32,
    g: usize,
) -> Result<SequenceReport> {
    let lat_n = sys_n.lattice();
    check_pair(k, mn, mm, lat_n, lat_m)?;
    if let Some(witness) = lat_n.bad_witness(cube) {
        return Err(Error::BadCube { cube, witness });
    }
    let xi = xi_decomposition(sys_n, cube, level_up, 1)?;
    let b1 = sys_n.b();
    let f = Array2::from_shape_fn((b1.len(), b2.len()), |(x1, x2)| b1[x1] * xi.xi[x1] * b2[x2]);
    let fw = weight_field(&f, mn.weights(), mm.weights());
    let q1 = whitney_quadrature(cube.level, g)?;
    let n2 = truncated_nodes(lat_m.depth() + 1, g)?;
    let t2: Vec<f64> = n2.iter().map(|n| n.t).collect();
    let bank = ThetaBank::new(k, &q1.nodes, &t2);
    let x1s = lat_n.cells(cube);
    let wm = mm.weights();
    let nm = wm.len();
    let free = x1s.len() * q1.len();
    let mut energy = vec![Array2::<f64>::zeros((nm, free)); lat_m.depth() as usize + 1];
    for a in 0..q1.len() {
        for (b, node) in n2.iter().enumerate() {
            let theta = bank.apply_weighted(&fw, a, b);
            let e = &mut energy[node.level as usize];
            for (s, &x1) in x1s.iter().enumerate() {
                let col = a * x1s.len() + s;
                for x2 in 0..nm {
                    e[[x2, col]] += node.weight * theta[[x1, x2]].norm_sqr() * wm[x2];
                }
            }
        }
    }
    let big = cube_masses(mn, lat_n).get(xi.ancestor);
    let scale = (-k.alpha * level_up as f64).exp2() / big;
    let masses = cube_masses(mm, lat_m);
    summarize(lat_m, &energy, |c| scale * masses.get(c))
}
