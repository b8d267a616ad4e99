use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{cube_masses, CubeSequence};
use crate::error::{param, Error, Result};
use crate::lattice::{CubeId, ShiftedLattice};
use crate::measure::FactorMeasure;

/// `Σ_{Q' ⊂ Q} a_{Q'}` for every `Q`, accumulated bottom-up.
pub fn packing_sums(a: &CubeSequence, lat: &ShiftedLattice) -> Result<CubeSequence> {
    if a.dim != lat.dim() || a.depth != lat.depth() {
        return Err(Error::Shape("sequence does not match the lattice".into()));
    }
    let mut s = a.clone();
    for level in (0..lat.depth()).rev() {
        for c in lat.cubes_at(level) {
            let below: f64 = lat.children(c)?.into_iter().map(|ch| s.get(ch)).sum();
            s.set(c, s.get(c) + below);
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// Cubes with `Σ_{Q'⊂Q} a_{Q'} > ν(Q)`, with both sides.
    pub packing_violations: Vec<(CubeId, f64, f64)>,
    /// `Σ_Q a_Q |⟨f⟩_Q^ν|²`.
    pub lhs: f64,
    /// `‖f‖²_{L²(ν)}`.
    pub norm_sq: f64,
    /// `lhs / norm_sq`; `None` when the packing condition fails.
    pub ratio: Option<f64>,
    pub pass: bool,
}

const EMBEDDING_CONSTANT: f64 = 4.0;

/// Validates the packing condition, then compares the embedded sum against
/// `4‖f‖²_{L²(ν)}`.
pub fn carleson_embedding_check(
    a: &CubeSequence,
    nu: &FactorMeasure,
    lat: &ShiftedLattice,
    f: &[f64],
) -> Result<EmbeddingReport> {
    if lat.grid() != nu.grid() || f.len() != nu.weights().len() {
        return Err(Error::Shape("measure, lattice and f disagree".into()));
    }
    if let Some(v) = a.values.iter().flatten().find(|v| !(**v >= 0.0)) {
        return Err(param("a", format!("{v} is not non-negative")));
    }
    let sums = packing_sums(a, lat)?;
    let masses = cube_masses(nu, lat);
    let w = nu.weights();
    let mut packing_violations = Vec::new();
    let mut lhs = 0.0;
    for c in lat.all_cubes() {
        let (s, m) = (sums.get(c), masses.get(c));
        if s > m * (1.0 + 1e-12) + 1e-300 {
            packing_violations.push((c, s, m));
        }
        let aq = a.get(c);
        if aq > 0.0 && m > 0.0 {
            let avg: f64 = lat.cells(c).iter().map(|&x| f[x] * w[x]).sum::<f64>() / m;
            lhs += aq * avg * avg;
        }
    }
    let norm_sq: f64 = f.iter().zip(w).map(|(v, m)| v * v * m).sum();
    let ratio = packing_violations.is_empty().then(|| if norm_sq > 0.0 { lhs / norm_sq } else { 0.0 });
    Ok(EmbeddingReport {
        pass: ratio.is_some_and(|r| r <= EMBEDDING_CONSTANT),
        packing_violations,
        lhs,
        norm_sq,
        ratio,
    })
}

/// Families of packing-saturating test instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFamily {
    /// Top-down greedy fill with random fractions, completed at the finest
    /// level so that every root-to-leaf chain is saturated.
    Greedy,
    /// All mass on the cubes containing one cell, `a_{Q_k} = ν(Q_k) − ν(Q_{k+1})`,
    /// with `f` growing like `ν(Q_k)^{-s}` towards that cell.
    Chain,
    /// `a_root = ν(root)` and constant `f`.
    RootMass,
}

#[derive(Debug, Clone)]
pub struct EmbeddingInstance {
    pub family: EmbeddingFamily,
    pub measure: FactorMeasure,
    pub lattice: ShiftedLattice,
    pub a: CubeSequence,
    pub f: Vec<f64>,
}

fn random_measure(rng: &mut ChaCha8Rng, dim: usize, depth: u32) -> Result<FactorMeasure> {
    let n = 1usize << (dim * depth as usize);
    let spread: f64 = rng.random_range(0.0..3.0);
    let w: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            (spread * z).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    FactorMeasure::new(dim, depth, w.into_iter().map(|v| v / s).collect())
}

/// Builds one instance; dimension and depth are drawn from the seed
/// (`n = 1`, `L ≤ 6` or `n = 2`, `L ≤ 3`).
pub fn embedding_instance(family: EmbeddingFamily, seed: u64) -> Result<EmbeddingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = if family == EmbeddingFamily::Chain || rng.random_bool(0.6) { 1 } else { 2 };
    let depth = if dim == 1 { rng.random_range(1..=6) } else { rng.random_range(1..=3) };
    let measure = random_measure(&mut rng, dim, depth)?;
    let lattice = ShiftedLattice::build(dim, depth, rng.random(), 1, 0.25)?;
    let masses = cube_masses(&measure, &lattice);
    let n = measure.weights().len();
    let mut a = CubeSequence::zeros(dim, depth);
    let f = match family {
        EmbeddingFamily::Greedy => {
            let mut remaining = masses.clone();
            for c in lattice.all_cubes() {
                let chain: Vec<CubeId> = (0..=c.level).map(|k| lattice.ancestor(c, k)).collect::<Result<_>>()?;
                let room = chain.iter().map(|&p| remaining.get(p)).fold(f64::INFINITY, f64::min).max(0.0);
                let u: f64 = if c.level == depth { 1.0 } else { rng.random_range(0.0..1.0f64).powi(2) };
                let v = u * room;
                a.set(c, v);
                for p in chain {
                    remaining.set(p, remaining.get(p) - v);
                }
            }
            (0..n)
                .map(|_| {
                    let e: f64 = Exp1.sample(&mut rng);
                    let sign = if rng.random_bool(0.8) { 1.0 } else { -1.0 };
                    sign * e.powf(rng.random_range(0.5..3.0))
                })
                .collect()
        }
        EmbeddingFamily::Chain => {
            let x0 = rng.random_range(0..n);
            let s: f64 = rng.random_range(0.2..0.49);
            let chain: Vec<CubeId> = (0..=depth).map(|l| lattice.cube_of_cell(l, x0)).collect();
            for (l, &q) in chain.iter().enumerate() {
                let below = chain.get(l + 1).map_or(0.0, |&c| masses.get(c));
                a.set(q, (masses.get(q) - below).max(0.0));
            }
            (0..n)
                .map(|x| {
                    let deepest = chain.iter().rev().find(|&&q| lattice.contains_cell(q, x)).expect("root holds x");
                    masses.get(*deepest).powf(-s)
                })
                .collect()
        }
        EmbeddingFamily::RootMass => {
            a.set(CubeId::ROOT, masses.get(CubeId::ROOT));
            vec![rng.random_range(-2.0..2.0); n]
        }
    };
    Ok(EmbeddingInstance {
        family,
        measure,
        lattice,
        a,
        f,
    })
}
