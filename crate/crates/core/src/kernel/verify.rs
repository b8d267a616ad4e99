use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{torus_distance, CellGrid};
use crate::kernel::{holder_profile, size_profile, KernelSpec};
use crate::lattice::{whitney_quadrature, CubeId, ShiftedLattice};
use crate::measure::{AccretiveFunction, FactorMeasure};
use crate::report::{VerificationReport, Witness};
use crate::seed::derive_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    Size,
    Holder,
    MixedY2,
    MixedY1,
}

impl EstimateMode {
    pub const ALL: [EstimateMode; 4] = [
        EstimateMode::Size,
        EstimateMode::Holder,
        EstimateMode::MixedY2,
        EstimateMode::MixedY1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimateMode::Size => "size",
            EstimateMode::Holder => "holder",
            EstimateMode::MixedY2 => "mixed_y2",
            EstimateMode::MixedY1 => "mixed_y1",
        }
    }

    fn perturbs(self) -> (bool, bool) {
        match self {
            EstimateMode::Size => (false, false),
            EstimateMode::Holder => (true, true),
            EstimateMode::MixedY2 => (false, true),
            EstimateMode::MixedY1 => (true, false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: usize,
    pub seed: u64,
}

/// `t = 2^{-depth·u}` with `u` uniform in `[0, 1)`: log-uniform on `(2^{-depth}, 1]`.
fn draw_t(rng: &mut ChaCha8Rng, depth: u32) -> f64 {
    (-(depth as f64) * rng.random::<f64>()).exp2()
}

fn draw_cell(rng: &mut ChaCha8Rng, grid: CellGrid) -> usize {
    rng.random_range(0..grid.len())
}

/// A cell within `t/2` of `y` per axis; `None` when the draw lands on `y`
/// or outside the admissible range.
fn draw_near(rng: &mut ChaCha8Rng, grid: CellGrid, y: usize, t: f64) -> Option<usize> {
    let side = grid.side() as i64;
    let reach = ((0.5 * t) / grid.cell_len()).floor() as i64;
    let mut c = grid.coords(y);
    for v in c.iter_mut().take(grid.dim) {
        let off = rng.random_range(-reach..=reach);
        *v = (*v as i64 + off).rem_euclid(side) as usize;
    }
    let z = grid.flat(c);
    let d = torus_distance(&grid.center(y), &grid.center(z));
    (z != y && d < 0.5 * t).then_some(z)
}

struct Sample {
    ratio: f64,
    x: [usize; 2],
    y: [usize; 2],
    yp: [usize; 2],
    t: [f64; 2],
}

fn draw_sample(k: &KernelSpec, mode: EstimateMode, seed: u64) -> Option<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (gn, gm) = (k.grid_n, k.grid_m);
    let x = [draw_cell(&mut rng, gn), draw_cell(&mut rng, gm)];
    let y = [draw_cell(&mut rng, gn), draw_cell(&mut rng, gm)];
    let t = [draw_t(&mut rng, gn.depth), draw_t(&mut rng, gm.depth)];
    let (p1, p2) = mode.perturbs();
    let yp = [
        if p1 { draw_near(&mut rng, gn, y[0], t[0])? } else { y[0] },
        if p2 { draw_near(&mut rng, gm, y[1], t[1])? } else { y[1] },
    ];
    let kv = |a: usize, b: usize| k.eval(x, [a, b], t[0], t[1]);
    let lhs = match mode {
        EstimateMode::Size => kv(y[0], y[1]),
        EstimateMode::Holder => kv(y[0], y[1]) - kv(y[0], yp[1]) - kv(yp[0], y[1]) + kv(yp[0], yp[1]),
        EstimateMode::MixedY2 => kv(y[0], y[1]) - kv(y[0], yp[1]),
        EstimateMode::MixedY1 => kv(y[0], y[1]) - kv(yp[0], y[1]),
    };
    let d1 = torus_distance(&gn.center(x[0]), &gn.center(y[0]));
    let d2 = torus_distance(&gm.center(x[1]), &gm.center(y[1]));
    let e1 = torus_distance(&gn.center(y[0]), &gn.center(yp[0]));
    let e2 = torus_distance(&gm.center(y[1]), &gm.center(yp[1]));
    let f1 = if p1 {
        holder_profile(&k.lambda_n, gn, x[0], k.alpha, t[0], d1, e1)
    } else {
        size_profile(&k.lambda_n, gn, x[0], k.alpha, t[0], d1)
    };
    let f2 = if p2 {
        holder_profile(&k.lambda_m, gm, x[1], k.beta, t[1], d2, e2)
    } else {
        size_profile(&k.lambda_m, gm, x[1], k.beta, t[1], d2)
    };
    Some(Sample {
        ratio: lhs.norm() / (f1 * f2),
        x,
        y,
        yp,
        t,
    })
}

/// Sampled worst ratio of a kernel estimate against its product bound.
pub fn verify_estimates(k: &KernelSpec, mode: EstimateMode, plan: SamplePlan, threshold: f64) -> VerificationReport {
    let draws: Vec<Option<Sample>> = (0..plan.samples as u64)
        .into_par_iter()
        .map(|i| draw_sample(k, mode, derive_index(plan.seed, i)))
        .collect();
    let mut report = VerificationReport::new(format!("kernel_{}", mode.name()), threshold);
    report.worst_ratio = 0.0;
    for d in draws {
        let Some(s) = d else {
            report.skipped += 1;
            continue;
        };
        report.observe(s.ratio, || {
            Witness::new("kernel sample")
                .with("x1", s.x[0] as f64)
                .with("x2", s.x[1] as f64)
                .with("y1", s.y[0] as f64)
                .with("y2", s.y[1] as f64)
                .with("y1p", s.yp[0] as f64)
                .with("y2p", s.yp[1] as f64)
                .with("t1", s.t[0])
                .with("t2", s.t[1])
        });
    }
    report.finish_upper()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlesonMode {
    Size,
    Holder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Carleson box over a cube of the first factor.
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonPlan {
    /// Exterior argument draws per test cube.
    pub exterior_samples: usize,
    /// Quadrature nodes per Whitney slab.
    pub nodes: usize,
    pub seed: u64,
}

/// Exterior arguments: the free point, the free `y`, its perturbation
/// (equal to `y` in size mode) and the free `t`, all in the other factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exterior {
    pub x: usize,
    pub y: usize,
    pub yp: usize,
    pub t: f64,
}

/// `t` nodes covering `(2^{-depth}, ℓ(I)]`, one Whitney slab per level.
pub fn carleson_box_nodes(level: u32, depth: u32, g: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for l in level..depth {
        out.extend(whitney_quadrature(l, g)?.iter());
    }
    Ok(out)
}

/// `( ∬_{Î} |∫_I b(y) [K(…y…) − K(…y'…)] dμ(y)|² dμ(x) dt/t )^{1/2}` with the
/// box over `cube` in the chosen factor; in size mode the bracket is `K`.
#[allow(clippy::too_many_arguments)]
pub fn carleson_box_lhs(
    k: &KernelSpec,
    b: &AccretiveFunction,
    m: &FactorMeasure,
    lattice: &ShiftedLattice,
    orientation: Orientation,
    cube: CubeId,
    ext: Exterior,
    nodes: &[(f64, f64)],
) -> f64 {
    let cells = lattice.cells(cube);
    let w = m.weights();
    let holder = ext.yp != ext.y;
    let eval = |xi: usize, yi: usize, t: f64, yo: usize| match orientation {
        Orientation::First => k.eval([xi, ext.x], [yi, yo], t, ext.t),
        Orientation::Second => k.eval([ext.x, xi], [yo, yi], ext.t, t),
    };
    let mut total = 0.0;
    for &xi in &cells {
        if w[xi] == 0.0 {
            continue;
        }
        for &(t, wt) in nodes {
            let inner: Complex64 = cells
                .iter()
                .map(|&yi| {
                    let mut kv = eval(xi, yi, t, ext.y);
                    if holder {
                        kv -= eval(xi, yi, t, ext.yp);
                    }
                    b.values[yi] * kv * w[yi]
                })
                .sum();
            total += w[xi] * wt * inner.norm_sqr();
        }
    }
    total.sqrt()
}

/// Worst ratio of the Carleson-box estimates over every cube of both
/// lattices (levels below the finest) and sampled exterior arguments,
/// covering both orientations.
#[allow(clippy::too_many_arguments)]
pub fn verify_carleson_assumptions(
    k: &KernelSpec,
    b1: &AccretiveFunction,
    b2: &AccretiveFunction,
    mn: &FactorMeasure,
    mm: &FactorMeasure,
    lat_n: &ShiftedLattice,
    lat_m: &ShiftedLattice,
    mode: CarlesonMode,
    plan: CarlesonPlan,
    threshold: f64,
) -> Result<VerificationReport> {
    let name = match mode {
        CarlesonMode::Size => "carleson_size",
        CarlesonMode::Holder => "carleson_holder",
    };
    let mut report = VerificationReport::new(name, threshold);
    report.worst_ratio = 0.0;
    let mut tasks = Vec::new();
    for (orientation, lat) in [(Orientation::First, lat_n), (Orientation::Second, lat_m)] {
        for level in 0..lat.depth() {
            for cube in lat.cubes_at(level) {
                for s in 0..plan.exterior_samples {
                    tasks.push((orientation, cube, s));
                }
            }
        }
    }
    let results: Vec<Option<(f64, Orientation, CubeId, Exterior)>> = tasks
        .par_iter()
        .enumerate()
        .map(|(i, &(orientation, cube, _))| -> Result<_> {
            let (own_m, own_b, own_lat, other_grid, other_lambda, other_e) = match orientation {
                Orientation::First => (mn, b1, lat_n, k.grid_m, &k.lambda_m, k.beta),
                Orientation::Second => (mm, b2, lat_m, k.grid_n, &k.lambda_n, k.alpha),
            };
            let mass: f64 = own_lat.cells(cube).iter().map(|&c| own_m.weights()[c]).sum();
            if mass == 0.0 {
                return Ok(None);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_index(plan.seed, i as u64));
            let x = draw_cell(&mut rng, other_grid);
            let y = draw_cell(&mut rng, other_grid);
            let t = draw_t(&mut rng, other_grid.depth);
            let yp = match mode {
                CarlesonMode::Size => y,
                CarlesonMode::Holder => match draw_near(&mut rng, other_grid, y, t) {
                    Some(z) => z,
                    None => return Ok(None),
                },
            };
            let ext = Exterior { x, y, yp, t };
            let nodes = carleson_box_nodes(cube.level, own_lat.depth(), plan.nodes)?;
            let lhs = carleson_box_lhs(k, own_b, own_m, own_lat, orientation, cube, ext, &nodes);
            let d = torus_distance(&other_grid.center(x), &other_grid.center(y));
            let profile = match mode {
                CarlesonMode::Size => size_profile(other_lambda, other_grid, x, other_e, t, d),
                CarlesonMode::Holder => {
                    let e = torus_distance(&other_grid.center(y), &other_grid.center(yp));
                    holder_profile(other_lambda, other_grid, x, other_e, t, d, e)
                }
            };
            Ok(Some((lhs / (profile * mass.sqrt()), orientation, cube, ext)))
        })
        .collect::<Result<_>>()?;
    for r in results {
        let Some((ratio, orientation, cube, ext)) = r else {
            report.skipped += 1;
            continue;
        };
        report.observe(ratio, || {
            Witness::new(format!("{orientation:?} box over {cube}"))
                .with("level", cube.level as f64)
                .with("index", cube.flat() as f64)
                .with("x", ext.x as f64)
                .with("y", ext.y as f64)
                .with("yp", ext.yp as f64)
                .with("t", ext.t)
        });
    }
    Ok(report.finish_upper())
}
