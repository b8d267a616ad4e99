//! The acceptance battery run by `dyadica suite` and by the `acceptance`
//! integration test. Every criterion takes the master seed only; its
//! parameters and tolerances are fixed here.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::emit::{emit, CheckResult, Format, RunReport};
use crate::carleson::{
    biparameter_carleson_check, calibrate_schur, carleson_embedding_check, carleson_table, decay_profile,
    embedding_instance, schur_check, DecayKind, EmbeddingFamily, OmegaPlan, SchurMatrix,
};
use crate::error::Result;
use crate::gfunction::{averaging_identity_check, boundedness_probe, AveragingMode, AveragingReport};
use crate::haar::{forward_transform, reconstruct, relative_l2_error, HaarSystem};
use crate::kernel::{
    make_builtin, verify_carleson_assumptions, verify_estimates, BuiltinKind, BuiltinParams, CarlesonMode,
    CarlesonPlan, EstimateMode, KernelSpec, SamplePlan,
};
use crate::lattice::{
    bad_witness_by_enumeration, pi_table, CubeId, GoodnessParams, PiMode, ShiftedLattice,
};
use crate::measure::io::{FunctionPreset, MeasurePreset};
use crate::measure::{
    verify_pseudo_accretive, verify_upper_doubling, AccretiveFunction, DominatingFunction, FactorMeasure,
};
use crate::report::Witness;
use crate::seed::{derive, derive_index};

/// Names of the ten criteria, in order.
pub const CRITERIA: [&str; 10] = [
    "haar_suite",
    "parseval_degeneration",
    "carleson_embedding",
    "averaging_identity",
    "goodness_and_pi",
    "geometric_decay",
    "schur_bound",
    "carleson_discrimination",
    "stability_probe",
    "determinism",
];

fn name(id: usize) -> String {
    format!("criterion_{id:02}_{}", CRITERIA[id - 1])
}

fn timed(budget: f64, f: impl FnOnce() -> CheckResult) -> CheckResult {
    let start = Instant::now();
    let mut c = f();
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > budget {
        c.pass = false;
        let msg = format!("runtime budget of {budget} s exceeded");
        c.note = Some(c.note.map_or(msg.clone(), |n| format!("{n}; {msg}")));
        c.witness.get_or_insert_with(|| Witness::new(msg));
    }
    c.elapsed_seconds = Some(elapsed);
    c
}

fn random_field(n: usize, m: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, m), |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn cube_mass(lat: &ShiftedLattice, w: &[f64], c: CubeId) -> f64 {
    lat.cells(c).iter().map(|&x| w[x]).sum()
}

fn standard_kernel(mn: &FactorMeasure, mm: &FactorMeasure, lambda: &DominatingFunction) -> Result<KernelSpec> {
    make_builtin(
        BuiltinKind::StandardProduct { c: 0.5, oscillate: true },
        BuiltinParams {
            alpha: 1.0,
            beta: 1.0,
            measure_n: mn,
            measure_m: mm,
            lambda_n: lambda.clone(),
            lambda_m: lambda.clone(),
            b1: None,
        },
    )
}

struct HaarCase {
    mn: FactorMeasure,
    mm: FactorMeasure,
    sn: HaarSystem,
    sm: HaarSystem,
    f: Array2<Complex64>,
}

fn haar_case(s: u64, random_b: bool) -> Result<HaarCase> {
    let mn = MeasurePreset::RandomDirichlet(derive_index(s, 0)).build(1, 4)?;
    let mm = MeasurePreset::RandomDirichlet(derive_index(s, 1)).build(1, 4)?;
    let b = |seed: u64, m: &FactorMeasure| {
        if random_b {
            FunctionPreset::RandomComplex { seed, amp: 0.4 }.build(m.grid())
        } else {
            AccretiveFunction::constant(m.grid(), 1.0)
        }
    };
    let (bn, bm) = (b(derive_index(s, 2), &mn), b(derive_index(s, 3), &mm));
    let ln = ShiftedLattice::build(1, 4, derive_index(s, 4), 1, 0.25)?;
    let lm = ShiftedLattice::build(1, 4, derive_index(s, 5), 1, 0.25)?;
    let sn = HaarSystem::build(&mn, &bn, &ln)?;
    let sm = HaarSystem::build(&mm, &bm, &lm)?;
    let f = random_field(16, 16, derive_index(s, 6));
    Ok(HaarCase { mn, mm, sn, sm, f })
}

/// Cancellation, biorthogonality and reconstruction on 50 random `(μ, b)`.
pub fn criterion_haar(seed: u64) -> CheckResult {
    timed(10.0, || {
        let run = || -> Result<CheckResult> {
            let base = derive(seed, "haar_suite");
            let (mut canc, mut bio, mut rec) = (0.0f64, 0.0f64, 0.0f64);
            let mut worst = Witness::new("largest deviations");
            for case in 0..50u64 {
                let h = haar_case(derive_index(base, case), true)?;
                for sys in [&h.sn, &h.sm] {
                    let idx = sys.indices();
                    let sup = sys.b().iter().map(|v| v.norm()).fold(0.0, f64::max);
                    for (k, i) in idx.iter().enumerate().filter(|(_, i)| !i.is_scaling()) {
                        let r = sys.cancellation(k).norm() / (sup * cube_mass(sys.lattice(), sys.weights(), i.cube));
                        if r > canc {
                            canc = r;
                            worst = worst.clone().with("cancellation_case", case as f64);
                        }
                    }
                    let g = sys.gram();
                    for ((a, b), v) in g.indexed_iter() {
                        let want = if a == b { 1.0 } else { 0.0 };
                        bio = bio.max((v - want).norm());
                    }
                }
                let c = forward_transform(&h.f, &h.sn, &h.sm)?;
                let back = reconstruct(&c, &h.sn, &h.sm)?;
                rec = rec.max(relative_l2_error(&h.f, &back, h.mn.weights(), h.mm.weights()));
            }
            let pass = canc <= 1e-12 && bio <= 1e-10 && rec <= 1e-10;
            let mut c = CheckResult::new(name(1), pass)
                .value("cases", 50.0)
                .value("max_cancellation_ratio", canc)
                .value("max_biorthogonality_deviation", bio)
                .value("max_reconstruction_error", rec);
            if !pass {
                c = c.witness(worst);
            }
            Ok(c)
        };
        run().unwrap_or_else(|e| CheckResult::failed(name(1), e))
    })
}

/// `Σ|f_{I1J1}|² = ‖f‖²` for `b ≡ 1` on 20 random `(μ, f)`.
pub fn criterion_parseval(seed: u64) -> CheckResult {
    let run = || -> Result<CheckResult> {
        let base = derive(seed, "parseval");
        let mut worst = 0.0f64;
        let mut at = 0;
        for case in 0..20u64 {
            let h = haar_case(derive_index(base, case), false)?;
            let c = forward_transform(&h.f, &h.sn, &h.sm)?;
            let energy: f64 = c.values.iter().map(|v| v.norm_sqr()).sum();
            let (wn, wm) = (h.mn.weights(), h.mm.weights());
            let norm: f64 = h.f.indexed_iter().map(|((a, b), v)| v.norm_sqr() * wn[a] * wm[b]).sum();
            let dev = (energy - norm).abs() / norm;
            if dev > worst {
                worst = dev;
                at = case;
            }
        }
        let pass = worst <= 1e-10;
        let mut c = CheckResult::new(name(2), pass)
            .value("cases", 20.0)
            .value("max_relative_deviation", worst);
        if !pass {
            c = c.witness(Witness::new("largest deviation").with("case", at as f64));
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| CheckResult::failed(name(2), e))
}

/// 1000 packing-saturating instances: ratio ≤ 4 everywhere, some ratio ≥ 1.
pub fn criterion_embedding(seed: u64) -> CheckResult {
    timed(30.0, || {
        let run = || -> Result<CheckResult> {
            let base = derive(seed, "embedding");
            let families = [EmbeddingFamily::Greedy, EmbeddingFamily::Chain, EmbeddingFamily::RootMass];
            let (mut max, mut bad) = (0.0f64, 0usize);
            let mut witness = None;
            for i in 0..1000u64 {
                let family = families[i as usize % 3];
                let inst = embedding_instance(family, derive_index(base, i))?;
                let r = carleson_embedding_check(&inst.a, &inst.measure, &inst.lattice, &inst.f)?;
                let ratio = r.ratio.unwrap_or(f64::INFINITY);
                if !r.pass {
                    bad += 1;
                    witness.get_or_insert_with(|| {
                        Witness::new(format!("{family:?} instance"))
                            .with("instance", i as f64)
                            .with("ratio", ratio)
                            .with("packing_violations", r.packing_violations.len() as f64)
                    });
                }
                max = max.max(ratio);
            }
            let pass = bad == 0 && max >= 1.0;
            let mut c = CheckResult::new(name(3), pass)
                .value("instances", 1000.0)
                .value("max_ratio", max)
                .value("failures", bad as f64);
            if !pass {
                c = c.witness(witness.unwrap_or_else(|| Witness::new("no instance reached ratio 1")));
            }
            Ok(c)
        };
        run().unwrap_or_else(|e| CheckResult::failed(name(3), e))
    })
}

fn averaging_runs(
    base: u64,
    depth: u32,
    params: GoodnessParams,
    mode: AveragingMode,
    fields: u64,
) -> Result<Vec<AveragingReport>> {
    let m = FactorMeasure::uniform(1, depth)?;
    let lambda = DominatingFunction::power_law(2.0, 1.0)?;
    let k = standard_kernel(&m, &m, &lambda)?;
    let n = m.weights().len();
    (0..fields)
        .map(|i| {
            let f = random_field(n, n, derive_index(base, i));
            averaging_identity_check(&k, &f, m.weights(), m.weights(), 2, params, params, mode, 1e-10)
        })
        .collect()
}

/// Exact shift averaging at `L = 3, r = 1, γ = 1/4` and Monte Carlo at `L = 6`.
///
/// With `r = 1` every cube below level 1 is bad, so the π-weighted estimator
/// is undefined there and the check fails with that error. The supplementary
/// values rerun both halves at `r = 4, γ = 0.45`, `L = 6`, where goodness is
/// non-degenerate.
pub fn criterion_averaging(seed: u64) -> CheckResult {
    timed(120.0, || {
        let base = derive(seed, "averaging");
        let mc = AveragingMode::MonteCarlo {
            trials: 200,
            seed: derive(base, "mc"),
        };
        let strict = GoodnessParams::new(1, 0.25).and_then(|p| {
            let exact = averaging_runs(derive(base, "exact"), 3, p, AveragingMode::Exact, 5)?;
            let mc = averaging_runs(derive(base, "mc_fields"), 6, p, mc, 1)?;
            Ok((exact, mc))
        });
        let supplementary = GoodnessParams::new(4, 0.45).and_then(|p| {
            let exact = averaging_runs(derive(base, "exact"), 6, p, AveragingMode::Exact, 5)?;
            let mc = averaging_runs(derive(base, "mc_fields"), 6, p, mc, 1)?;
            Ok((exact, mc))
        });
        let summarize = |exact: &[AveragingReport], mc: &[AveragingReport]| {
            let disc = exact.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
            let z = mc
                .iter()
                .map(|r| {
                    let se = r.std_error.unwrap_or(0.0);
                    if se > 0.0 {
                        (r.estimate - r.g_norm_sq).abs() / se
                    } else if r.estimate == r.g_norm_sq {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0, f64::max);
            (disc, z)
        };
        let mut c = match &strict {
            Ok((exact, mc)) => {
                let (disc, z) = summarize(exact, mc);
                let pass = disc <= 1e-10 && z <= 3.0;
                let c = CheckResult::new(name(4), pass)
                    .value("exact_max_discrepancy", disc)
                    .value("mc_max_standard_errors", z);
                if pass {
                    c
                } else {
                    c.witness(Witness::new("identity off").with("discrepancy", disc).with("z", z))
                }
            }
            Err(e) => CheckResult::failed(name(4), format!("r = 1, γ = 1/4: {e}")),
        };
        match &supplementary {
            Ok((exact, mc)) => {
                let (disc, z) = summarize(exact, mc);
                c = c
                    .value("supplementary_exact_max_discrepancy", disc)
                    .value("supplementary_mc_max_standard_errors", z)
                    .value("supplementary_exact_configurations", exact[0].configurations as f64);
            }
            Err(e) => {
                let n = c.note.take().unwrap_or_default();
                c = c.note(format!("{n}; supplementary run failed: {e}"));
            }
        }
        c
    })
}

/// Fast classifier against the enumeration oracle on every cube at `L ≤ 5`,
/// exact vs Monte Carlo `π_good`, and `π = 1` when `r > L`.
pub fn criterion_goodness(seed: u64) -> CheckResult {
    let run = || -> Result<CheckResult> {
        let base = derive(seed, "goodness");
        let mut cubes = 0usize;
        let mut mismatches = Vec::new();
        let params = [(1u32, 0.25), (2, 0.3), (3, 0.45), (4, 0.45)];
        for dim in 1..=2usize {
            for depth in 1..=5u32 {
                for (p, &(r, gamma)) in params.iter().enumerate() {
                    let copies = if dim == 2 && depth == 5 { 1 } else { 3 };
                    for copy in 0..copies {
                        let s = derive_index(base, ((dim as u64 * 8 + depth as u64) * 8 + p as u64) * 4 + copy);
                        let lat = ShiftedLattice::build(dim, depth, s, r, gamma)?;
                        for c in lat.all_cubes() {
                            cubes += 1;
                            if lat.is_good(c) != bad_witness_by_enumeration(&lat, c).is_none() {
                                mismatches.push((dim, depth, r, gamma, c));
                            }
                        }
                    }
                }
            }
        }
        let mut max_z = 0.0f64;
        let mut pi_fail = None;
        for (dim, depth, r, gamma) in [(1usize, 6u32, 4u32, 0.45), (2, 4, 2, 0.3), (1, 5, 2, 0.25)] {
            let p = GoodnessParams::new(r, gamma)?;
            let exact = pi_table(dim, depth, p, PiMode::Exact)?;
            let mc = pi_table(
                dim,
                depth,
                p,
                PiMode::MonteCarlo {
                    trials: 10_000,
                    seed: derive(base, &format!("pi {dim} {depth}")),
                },
            )?;
            for (e, m) in exact.iter().zip(&mc) {
                let se = m.std_error.unwrap_or(0.0);
                let gap = (e.value - m.value).abs();
                let z = if se > 0.0 {
                    gap / se
                } else if gap == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                max_z = max_z.max(z);
                if z > 3.0 && pi_fail.is_none() {
                    pi_fail = Some((dim, depth, e.level, e.value, m.value));
                }
            }
        }
        let mut ones = true;
        for (dim, depth) in [(1usize, 5u32), (2, 3)] {
            let p = GoodnessParams::new(depth + 1, 0.25)?;
            let exact = pi_table(dim, depth, p, PiMode::Exact)?;
            let mc = pi_table(dim, depth, p, PiMode::MonteCarlo { trials: 1000, seed: base })?;
            ones &= exact.iter().chain(&mc).all(|e| e.value == 1.0);
        }
        let pass = mismatches.is_empty() && pi_fail.is_none() && ones;
        let mut c = CheckResult::new(name(5), pass)
            .value("cubes_compared", cubes as f64)
            .value("oracle_mismatches", mismatches.len() as f64)
            .value("pi_max_standard_errors", max_z)
            .value("pi_one_beyond_depth", if ones { 1.0 } else { 0.0 });
        if let Some(&(dim, depth, r, gamma, cube)) = mismatches.first() {
            c = c.witness(
                Witness::new(format!("oracle disagrees on {cube}"))
                    .with("dim", dim as f64)
                    .with("depth", depth as f64)
                    .with("r", r as f64)
                    .with("gamma", gamma),
            );
        } else if let Some((dim, depth, level, e, m)) = pi_fail {
            c = c.witness(
                Witness::new("exact and Monte Carlo π disagree")
                    .with("dim", dim as f64)
                    .with("depth", depth as f64)
                    .with("level", level as f64)
                    .with("exact", e)
                    .with("mc", m),
            );
        } else if !ones {
            c = c.witness(Witness::new("π below 1 with r > L"));
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| CheckResult::failed(name(5), e))
}

/// Normalized tail integrals on 20 random good cubes (levels 5..=8 of
/// random lattices with `n = 1`, `L = 8`, `r = 4`, `γ = 0.45`), uniform `μ`,
/// `λ(x, r) = 2r`, `α = β = 1`, `k, i ≤ 5`. Passes iff every normalized
/// value lies in `[1/4, 4]`.
pub fn criterion_decay(seed: u64) -> CheckResult {
    let run = || -> Result<CheckResult> {
        let base = derive(seed, "decay");
        let m = FactorMeasure::uniform(1, 8)?;
        let lambda = DominatingFunction::power_law(2.0, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(base);
        let (mut f_hi, mut f_lo, mut g_hi, mut g_lo) = (0.0f64, f64::INFINITY, 0.0f64, f64::INFINITY);
        let mut worst: Option<Witness> = None;
        let mut picked = 0;
        let mut attempt = 0u64;
        while picked < 20 {
            attempt += 1;
            let lat = ShiftedLattice::build(1, 8, derive_index(base, attempt), 4, 0.45)?;
            let level = rng.random_range(5..=8u32);
            let good: Vec<CubeId> = lat.cubes_at(level).filter(|&c| lat.is_good(c)).collect();
            if good.is_empty() {
                continue;
            }
            let cube = good[rng.random_range(0..good.len())];
            picked += 1;
            for (kind, is_f) in [(DecayKind::Fk, true), (DecayKind::Gi, false)] {
                let p = decay_profile(kind, 1.0, &lambda, &m, &lat, cube, 5, 2)?;
                let hi = p.normalized.iter().copied().fold(0.0, f64::max);
                let lo = p.normalized.iter().copied().fold(f64::INFINITY, f64::min);
                let (h, l) = if is_f { (&mut f_hi, &mut f_lo) } else { (&mut g_hi, &mut g_lo) };
                if (hi > 4.0 || lo < 0.25) && worst.is_none() {
                    worst = Some(
                        Witness::new(format!("{kind:?} on {cube}"))
                            .with("lattice_attempt", attempt as f64)
                            .with("max_normalized", hi)
                            .with("min_normalized", lo),
                    );
                }
                *h = h.max(hi);
                *l = l.min(lo);
            }
        }
        let pass = f_hi <= 4.0 && f_lo >= 0.25 && g_hi <= 4.0 && g_lo >= 0.25;
        let mut c = CheckResult::new(name(6), pass)
            .value("cubes", 20.0)
            .value("f_max_normalized", f_hi)
            .value("f_min_normalized", f_lo)
            .value("g_max_normalized", g_hi)
            .value("g_min_normalized", g_lo);
        if let Some(w) = worst {
            c = c.witness(w);
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| CheckResult::failed(name(6), e))
}

/// `C_S` from ascent at `L ≤ 3`, then 200 random non-negative `(x, y)` on
/// random measures at `L ≤ 5` must satisfy ratio ≤ `C_S`.
pub fn criterion_schur(seed: u64) -> CheckResult {
    let run = || -> Result<CheckResult> {
        let base = derive(seed, "schur");
        let cal = calibrate_schur(1.0, 3, 3, derive(base, "calibration"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive(base, "pairs"));
        let mut worst = 0.0f64;
        let mut witness = None;
        for inst in 0..20u64 {
            let dim = if rng.random_bool(0.7) { 1 } else { 2 };
            let depth = if dim == 1 { rng.random_range(1..=5) } else { rng.random_range(1..=3) };
            let n = 1usize << (dim * depth as usize);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0f64).powi(3)).collect();
            let s: f64 = w.iter().sum();
            let m = FactorMeasure::new(dim, depth, w.into_iter().map(|v| v / s).collect())?;
            let lambda = DominatingFunction::from_ball_masses(&m)?;
            let lat = ShiftedLattice::build(dim, depth, rng.random(), 1, 0.25)?;
            let a = SchurMatrix::build(1.0, &lambda, &m, &lat)?;
            for pair in 0..10 {
                let sparse = rng.random_range(0.0..1.0f64);
                let mut draw = || -> Vec<f64> {
                    (0..a.len())
                        .map(|_| if rng.random_bool(sparse) { 0.0 } else { rng.random_range(0.0..1.0) })
                        .collect()
                };
                let (x, y) = (draw(), draw());
                let r = schur_check(&a, &x, &y)?;
                if r > worst {
                    worst = r;
                    if r > cal.constant {
                        witness.get_or_insert_with(|| {
                            Witness::new("ratio above C_S")
                                .with("instance", inst as f64)
                                .with("pair", pair as f64)
                                .with("dim", dim as f64)
                                .with("depth", depth as f64)
                        });
                    }
                }
            }
        }
        let pass = worst <= cal.constant;
        let mut c = CheckResult::new(name(7), pass)
            .value("schur_constant", cal.constant)
            .value("calibration_cases", cal.cases.len() as f64)
            .value("pairs", 200.0)
            .value("max_ratio", worst);
        if let Some(w) = witness {
            c = c.witness(w);
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| CheckResult::failed(name(7), e))
}

/// Annihilating kernel: every Ω-ratio vanishes (up to `1e-24`, the
/// rounding floor of the cancelled integrals). Violator at `L = 4`: the
/// full-square ratio is `25 (log 2)²` within 1%, and the check fails at
/// every tested constant below that value.
pub fn criterion_discrimination(seed: u64) -> CheckResult {
    let run = || -> Result<CheckResult> {
        let base = derive(seed, "discrimination");
        let m = FactorMeasure::uniform(1, 4)?;
        let lambda = DominatingFunction::from_ball_masses(&m)?;
        let one = AccretiveFunction::constant(m.grid(), 1.0);
        let b1 = FunctionPreset::RandomReal {
            seed: derive(base, "b1"),
            amp: 0.5,
        }
        .build(m.grid());
        let ln = ShiftedLattice::build(1, 4, derive(base, "lattice_n"), 1, 0.25)?;
        let lm = ShiftedLattice::build(1, 4, derive(base, "lattice_m"), 1, 0.25)?;
        let plan = OmegaPlan {
            count: 64,
            max_rectangles: 4,
            min_level: 0,
            max_level: 4,
            seed: derive(base, "omegas"),
        };
        let build = |kind, b: &AccretiveFunction| {
            make_builtin(
                kind,
                BuiltinParams {
                    alpha: 1.0,
                    beta: 1.0,
                    measure_n: &m,
                    measure_m: &m,
                    lambda_n: lambda.clone(),
                    lambda_m: lambda.clone(),
                    b1: Some(b),
                },
            )
        };
        let ann = build(BuiltinKind::BAnnihilating, &b1)?;
        let t = carleson_table(&ann, &b1, &one, &m, &m, &ln, &lm, 2)?;
        let ann_check = biparameter_carleson_check(&t, &ln, &lm, &m, &m, &plan, 1.0)?;
        let ann_ratio = ann_check.report.worst_ratio;

        let vio = build(BuiltinKind::Violator, &one)?;
        let t = carleson_table(&vio, &one, &one, &m, &m, &ln, &lm, 2)?;
        let closed = 25.0 * std::f64::consts::LN_2 * std::f64::consts::LN_2;
        let full = biparameter_carleson_check(&t, &ln, &lm, &m, &m, &plan, closed)?.full_square_ratio;
        let mut flagged = true;
        for k in 1..=9 {
            let constant = closed * (1.0 - (10f64).powi(-k));
            flagged &= !biparameter_carleson_check(&t, &ln, &lm, &m, &m, &plan, constant)?.report.pass;
        }
        let rel = (full - closed).abs() / closed;
        let pass = ann_check.report.pass && ann_ratio <= 1e-24 && rel <= 0.01 && flagged;
        let mut c = CheckResult::new(name(8), pass)
            .value("annihilating_max_ratio", ann_ratio)
            .value("violator_full_square_ratio", full)
            .value("closed_form", closed)
            .value("relative_gap", rel)
            .value("flagged_below_closed_form", if flagged { 1.0 } else { 0.0 });
        if !pass {
            c = c.witness(
                Witness::new("discrimination failed")
                    .with("annihilating_max_ratio", ann_ratio)
                    .with("violator_full_square_ratio", full),
            );
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| CheckResult::failed(name(8), e))
}

/// Constant for the kernel and Carleson-box assumption verifiers in the
/// stability probe.
pub const PROBE_ASSUMPTION_CONSTANT: f64 = 16.0;

/// The standard product kernel (uniform `μ`, `λ(x, r) = 2r`, `c = 1/2`,
/// oscillating) passes every assumption verifier at `L = 4` and `L = 6`;
/// then the operator-norm estimate at `L = 6` over `L = 4` must lie in
/// `[1/2, 2]`.
pub fn criterion_probe(seed: u64) -> CheckResult {
    timed(300.0, || {
        let run = || -> Result<CheckResult> {
            let base = derive(seed, "probe");
            let lambda = DominatingFunction::power_law(2.0, 1.0)?;
            let mut assumptions_ok = true;
            let mut worst_assumption = 0.0f64;
            let mut failed_check = None;
            for depth in [4u32, 6] {
                let m = FactorMeasure::uniform(1, depth)?;
                let one = AccretiveFunction::constant(m.grid(), 1.0);
                let k = standard_kernel(&m, &m, &lambda)?;
                let mut reports = vec![
                    verify_upper_doubling(&m, &lambda),
                    verify_pseudo_accretive(&one, &m, 0.5)?,
                ];
                for mode in EstimateMode::ALL {
                    let plan = SamplePlan {
                        samples: 2000,
                        seed: derive(base, mode.name()),
                    };
                    let r = verify_estimates(&k, mode, plan, PROBE_ASSUMPTION_CONSTANT);
                    worst_assumption = worst_assumption.max(r.worst_ratio);
                    reports.push(r);
                }
                let ln = ShiftedLattice::build(1, depth, derive(base, "lattice_n"), 1, 0.25)?;
                let lm = ShiftedLattice::build(1, depth, derive(base, "lattice_m"), 1, 0.25)?;
                for mode in [CarlesonMode::Size, CarlesonMode::Holder] {
                    let plan = CarlesonPlan {
                        exterior_samples: 4,
                        nodes: 2,
                        seed: derive(base, "carleson"),
                    };
                    let r = verify_carleson_assumptions(
                        &k,
                        &one,
                        &one,
                        &m,
                        &m,
                        &ln,
                        &lm,
                        mode,
                        plan,
                        PROBE_ASSUMPTION_CONSTANT,
                    )?;
                    worst_assumption = worst_assumption.max(r.worst_ratio);
                    reports.push(r);
                }
                for r in reports {
                    if !r.pass {
                        assumptions_ok = false;
                        failed_check.get_or_insert((depth, r.check.clone(), r.worst_ratio));
                    }
                }
            }
            let build = |depth| {
                let mn = FactorMeasure::uniform(1, depth)?;
                let mm = FactorMeasure::uniform(1, depth)?;
                let k = standard_kernel(&mn, &mm, &lambda)?;
                Ok((k, mn, mm))
            };
            let probe = boundedness_probe(build, &[4, 6], 2, 4, derive(base, "starts"))?;
            let ratio = probe.ratios[0];
            let in_band = (0.5..=2.0).contains(&ratio);
            let pass = assumptions_ok && in_band;
            let mut c = CheckResult::new(name(9), pass)
                .value("estimate_l4", probe.estimates[0])
                .value("estimate_l6", probe.estimates[1])
                .value("ratio", ratio)
                .value("worst_assumption_ratio", worst_assumption)
                .value("assumption_constant", PROBE_ASSUMPTION_CONSTANT);
            if let Some((depth, check, r)) = failed_check {
                c = c.witness(
                    Witness::new(format!("assumption {check} failed"))
                        .with("depth", depth as f64)
                        .with("ratio", r),
                );
            } else if !in_band {
                c = c.witness(Witness::new("ratio outside [1/2, 2]").with("ratio", ratio));
            }
            Ok(c)
        };
        run().unwrap_or_else(|e| CheckResult::failed(name(9), e))
    })
}

/// Criteria 1–9 in order.
pub fn battery(seed: u64) -> Vec<CheckResult> {
    vec![
        criterion_haar(seed),
        criterion_parseval(seed),
        criterion_embedding(seed),
        criterion_averaging(seed),
        criterion_goodness(seed),
        criterion_decay(seed),
        criterion_schur(seed),
        criterion_discrimination(seed),
        criterion_probe(seed),
    ]
}

fn battery_bytes(seed: u64, checks: &[CheckResult]) -> Result<Vec<u8>> {
    let mut r = RunReport::new("suite", seed, serde_json::Value::Null);
    for c in checks {
        r.push(c.clone());
    }
    emit(&r, Format::Json)
}

/// Criterion 10: a second run of the battery emits the same bytes.
pub fn criterion_determinism(seed: u64, first: &[CheckResult]) -> CheckResult {
    let run = || -> Result<CheckResult> {
        let a = battery_bytes(seed, first)?;
        let b = battery_bytes(seed, &battery(seed))?;
        let same = a == b;
        let mut c = CheckResult::new(name(10), same).value("report_bytes", a.len() as f64);
        if !same {
            let at = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
            c = c.witness(Witness::new("reports differ").with("first_differing_byte", at as f64));
        }
        Ok(c)
    };
    run().unwrap_or_else(|e| CheckResult::failed(name(10), e))
}

/// All ten criteria.
pub fn run_acceptance(seed: u64) -> Vec<CheckResult> {
    let mut checks = battery(seed);
    let det = criterion_determinism(seed, &checks);
    checks.push(det);
    checks
}

/// `criterion N PASS|FAIL name key=value …`
pub fn criterion_line(c: &CheckResult) -> String {
    let id = c.name.get(10..12).unwrap_or("??");
    let mut s = format!(
        "criterion {id} {} {}",
        if c.pass { "PASS" } else { "FAIL" },
        c.name
    );
    for (k, v) in &c.values {
        s.push_str(&format!(" {k}={}", super::emit::format_float(*v)));
    }
    if let Some(t) = c.elapsed_seconds {
        s.push_str(&format!(" elapsed_s={t:.2}"));
    }
    if let Some(n) = &c.note {
        s.push_str(&format!(" | {n}"));
    }
    s
}
