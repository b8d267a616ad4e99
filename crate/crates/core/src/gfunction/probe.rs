use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunction::truncated_nodes;
use crate::kernel::{KernelBody, KernelSpec};
use crate::measure::FactorMeasure;
use crate::seed::derive_index;

/// `Σ_t w_t D Aₜ* D Aₜ D` with `D = diag(μ)`.
fn factor_form(mats: &[(Array2<Complex64>, f64)], mu: &[f64]) -> Array2<Complex64> {
    let n = mu.len();
    let mut q = Array2::zeros((n, n));
    for (a, w) in mats {
        // D A
        let da = Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] * mu[i]);
        let prod = a.t().mapv(|v| v.conj()).dot(&da);
        q.zip_mut_with(&prod, |s, p| *s += *p * *w);
    }
    for ((i, j), v) in q.indexed_iter_mut() {
        *v *= mu[i] * mu[j];
    }
    q
}

/// Largest generalized eigenvalue of `(Q, diag d)` restricted to `d > 0`,
/// by coordinate ascent from random starts: each step maximizes the
/// Rayleigh quotient exactly over `span{u, e_i}`.
pub fn rayleigh_max(q: &Array2<Complex64>, d: &[f64], starts: usize, seed: u64) -> f64 {
    let keep: Vec<usize> = (0..d.len()).filter(|&i| d[i] > 0.0).collect();
    let n = keep.len();
    if n == 0 {
        return 0.0;
    }
    let m = Array2::from_shape_fn((n, n), |(a, b)| {
        let (i, j) = (keep[a], keep[b]);
        q[[i, j]] / (d[i] * d[j]).sqrt()
    });
    let mut best = 0.0f64;
    for s in 0..starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_index(seed, s as u64));
        let mut u: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        u.iter_mut().for_each(|v| *v /= norm);
        let mut mu: Vec<Complex64> = (0..n).map(|i| (0..n).map(|k| m[[i, k]] * u[k]).sum()).collect();
        let mut value = rayleigh(&u, &mu);
        for _ in 0..500 {
            let before = value;
            for i in 0..n {
                let p = u.iter().map(|v| v.norm_sqr()).sum::<f64>();
                let a = u.iter().zip(&mu).map(|(x, y)| x.conj() * y).sum::<Complex64>().re;
                let b = mu[i].conj();
                let c = m[[i, i]].re;
                let qq = u[i].conj();
                let lead = p - qq.norm_sqr();
                if lead <= 1e-14 * p {
                    continue;
                }
                let mid = a + c * p - 2.0 * (b * qq.conj()).re;
                let tail = a * c - b.norm_sqr();
                let disc = (mid * mid - 4.0 * lead * tail).max(0.0);
                let lam = (mid + disc.sqrt()) / (2.0 * lead);
                let first = (-(b - qq * lam), Complex64::new(a - lam * p, 0.0));
                let second = (Complex64::new(c - lam, 0.0), -(b.conj() - qq.conj() * lam));
                let z = if first.0.norm_sqr() + first.1.norm_sqr() >= second.0.norm_sqr() + second.1.norm_sqr() {
                    first
                } else {
                    second
                };
                if z.0.norm() == 0.0 && z.1.norm() == 0.0 {
                    continue;
                }
                for k in 0..n {
                    u[k] *= z.0;
                    mu[k] = mu[k] * z.0 + m[[k, i]] * z.1;
                }
                u[i] += z.1;
                let norm = u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    break;
                }
                u.iter_mut().for_each(|v| *v /= norm);
                mu.iter_mut().for_each(|v| *v /= norm);
            }
            value = rayleigh(&u, &mu);
            if value - before <= 1e-14 * value.abs().max(1e-300) {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

fn rayleigh(u: &[Complex64], mu: &[Complex64]) -> f64 {
    let num: f64 = u.iter().zip(mu).map(|(x, y)| x.conj() * y).sum::<Complex64>().re;
    let den: f64 = u.iter().map(|v| v.norm_sqr()).sum();
    num / den
}

/// Estimate of `sup ‖g(f)‖ / ‖f‖` over the truncated `t`-range.
pub fn operator_norm_estimate(
    k: &KernelSpec,
    wn: &[f64],
    wm: &[f64],
    g: usize,
    starts: usize,
    seed: u64,
) -> Result<f64> {
    let n1 = truncated_nodes(k.grid_n.depth, g)?;
    let n2 = truncated_nodes(k.grid_m.depth, g)?;
    let value = match &k.body {
        KernelBody::Factorized { scale, first, second } => {
            let m1: Vec<_> = n1.iter().map(|n| (first.matrix(k.grid_n, n.t), n.weight)).collect();
            let m2: Vec<_> = n2.iter().map(|n| (second.matrix(k.grid_m, n.t), n.weight)).collect();
            let q1 = factor_form(&m1, wn);
            let q2 = factor_form(&m2, wm);
            scale.norm_sqr()
                * rayleigh_max(&q1, wn, starts, derive_index(seed, 1))
                * rayleigh_max(&q2, wm, starts, derive_index(seed, 2))
        }
        KernelBody::Tabulated(tab) => {
            let n = wn.len() * wm.len();
            if n > 1024 {
                return Err(Error::CostGuard {
                    bits: n as u32,
                    limit: 1024,
                });
            }
            let mu: Vec<f64> = (0..n).map(|y| wn[y % wn.len()] * wm[y / wn.len()]).collect();
            let w: f64 = n1.iter().map(|a| a.weight).sum::<f64>() * n2.iter().map(|b| b.weight).sum::<f64>();
            let a = tab.mapv(|v| Complex64::new(v, 0.0));
            let q = factor_form(&[(a, w)], &mu);
            rayleigh_max(&q, &mu, starts, seed)
        }
    };
    Ok(value.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub depths: Vec<u32>,
    pub estimates: Vec<f64>,
    /// `estimate[i+1] / estimate[i]`.
    pub ratios: Vec<f64>,
}

/// Operator-norm estimates for the configurations produced by `build` at
/// each depth.
pub fn boundedness_probe(
    build: impl Fn(u32) -> Result<(KernelSpec, FactorMeasure, FactorMeasure)>,
    depths: &[u32],
    g: usize,
    starts: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let mut estimates = Vec::with_capacity(depths.len());
    for &d in depths {
        let (k, mn, mm) = build(d)?;
        estimates.push(operator_norm_estimate(&k, mn.weights(), mm.weights(), g, starts, seed)?);
    }
    let ratios = estimates.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ProbeReport {
        depths: depths.to_vec(),
        estimates,
        ratios,
    })
}
