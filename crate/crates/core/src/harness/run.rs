use std::fs::File;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::acceptance::run_acceptance;
use super::config::{ExperimentConfig, Factor, SamplingMode, Setup};
use super::emit::{CheckResult, RunReport};
use crate::carleson::{biparameter_carleson_check, carleson_table, OmegaPlan};
use crate::error::{Error, Result};
use crate::gfunction::{
    averaging_identity_check, boundedness_probe, level_pis, sigma_good, slab_energies, split_sigma, AveragingMode,
    Weighting,
};
use crate::haar::{forward_transform, reconstruct, relative_l2_error, HaarSystem};
use crate::kernel::{verify_carleson_assumptions, verify_estimates, CarlesonMode, CarlesonPlan, EstimateMode, SamplePlan};
use crate::lattice::{pi_table, PiMode};
use crate::measure::{symmetrize_dominating, verify_pseudo_accretive, verify_upper_doubling};
use crate::report::Witness;
use crate::seed::{derive, derive_index};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyMeasure,
    VerifyKernel,
    VerifyHaar,
    Gnorm,
    Avgid,
    Carleson,
    Pigood,
    Probe,
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyMeasure => "verify-measure",
            Command::VerifyKernel => "verify-kernel",
            Command::VerifyHaar => "verify-haar",
            Command::Gnorm => "gnorm",
            Command::Avgid => "avgid",
            Command::Carleson => "carleson",
            Command::Pigood => "pigood",
            Command::Probe => "probe",
            Command::Suite => "suite",
        }
    }
}

fn random_field(n: usize, m: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, m), |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn field_for(cfg: &ExperimentConfig, s: &Setup, i: u64) -> Array2<Complex64> {
    random_field(
        s.measure_n.weights().len(),
        s.measure_m.weights().len(),
        derive_index(derive(cfg.seed, "field"), i),
    )
}

/// Runs a validated configuration. Errors are input errors (unreadable
/// files, inconsistent data); failed checks are reported, not returned.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let echo = serde_json::to_value(cfg).map_err(|e| Error::Parse(e.to_string()))?;
    let mut report = RunReport::new(command.name(), cfg.seed, echo);
    match command {
        Command::Suite => {
            for c in run_acceptance(cfg.seed) {
                report.push(c);
            }
        }
        Command::Pigood => pigood(cfg, &mut report)?,
        Command::Probe => probe(cfg, &mut report)?,
        _ => {
            let s = cfg.setup()?;
            match command {
                Command::VerifyMeasure => verify_measure(cfg, &s, &mut report)?,
                Command::VerifyKernel => verify_kernel(cfg, &s, &mut report),
                Command::VerifyHaar => verify_haar(cfg, &s, &mut report),
                Command::Gnorm => gnorm(cfg, &s, &mut report),
                Command::Avgid => avgid(cfg, &s, &mut report),
                Command::Carleson => carleson(cfg, &s, &mut report)?,
                _ => unreachable!("handled above"),
            }
        }
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn verify_measure(cfg: &ExperimentConfig, s: &Setup, report: &mut RunReport) -> Result<()> {
    for (label, m, lambda, b) in [
        ("n", &s.measure_n, &s.lambda_n, &s.b_n),
        ("m", &s.measure_m, &s.lambda_m, &s.b_m),
    ] {
        let mut r = CheckResult::from_report(&verify_upper_doubling(m, lambda));
        r.name = format!("upper_doubling_{label}");
        report.push(r);
        let mut r = CheckResult::from_report(&verify_pseudo_accretive(b, m, cfg.tolerances.accretivity)?);
        r.name = format!("pseudo_accretive_{label}");
        report.push(r);
        let sym = symmetrize_dominating(lambda, m);
        let mut r = CheckResult::from_report(&sym.report);
        r.name = format!("symmetrize_{label}");
        report.push(r);
    }
    Ok(())
}

fn verify_kernel(cfg: &ExperimentConfig, s: &Setup, report: &mut RunReport) {
    let t = &cfg.tolerances;
    for mode in EstimateMode::ALL {
        let plan = SamplePlan {
            samples: cfg.verify.samples,
            seed: derive(cfg.seed, mode.name()),
        };
        report.push(CheckResult::from_report(&verify_estimates(&s.kernel, mode, plan, t.kernel_estimate)));
    }
    for mode in [CarlesonMode::Size, CarlesonMode::Holder] {
        let plan = CarlesonPlan {
            exterior_samples: cfg.verify.exterior_samples,
            nodes: cfg.quadrature,
            seed: derive(cfg.seed, "carleson_assumptions"),
        };
        let c = verify_carleson_assumptions(
            &s.kernel,
            &s.b_n,
            &s.b_m,
            &s.measure_n,
            &s.measure_m,
            &s.lattice_n,
            &s.lattice_m,
            mode,
            plan,
            t.carleson_assumption,
        )
        .map(|r| CheckResult::from_report(&r))
        .unwrap_or_else(|e| CheckResult::failed(format!("carleson_{mode:?}").to_lowercase(), e));
        report.push(c);
    }
}

fn haar_systems(s: &Setup) -> Result<(HaarSystem, HaarSystem)> {
    Ok((
        HaarSystem::build(&s.measure_n, &s.b_n, &s.lattice_n)?,
        HaarSystem::build(&s.measure_m, &s.b_m, &s.lattice_m)?,
    ))
}

fn verify_haar(cfg: &ExperimentConfig, s: &Setup, report: &mut RunReport) {
    let t = &cfg.tolerances;
    let (sn, sm) = match haar_systems(s) {
        Ok(v) => v,
        Err(e) => {
            report.push(CheckResult::failed("haar_build", e));
            return;
        }
    };
    for (label, sys) in [("n", &sn), ("m", &sm)] {
        let sup = sys.b().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = (0.0f64, None);
        for (k, i) in sys.indices().iter().enumerate().filter(|(_, i)| !i.is_scaling()) {
            let mass: f64 = sys.lattice().cells(i.cube).iter().map(|&x| sys.weights()[x]).sum();
            let r = sys.cancellation(k).norm() / (sup * mass);
            if r > worst.0 {
                worst = (r, Some(*i));
            }
        }
        let mut c = CheckResult::new(format!("cancellation_{label}"), worst.0 <= t.cancellation)
            .value("max_ratio", worst.0)
            .value("threshold", t.cancellation);
        if !c.pass {
            c = c.witness(Witness::new(format!("Haar function {}", worst.1.expect("set when positive"))));
        }
        report.push(c);
        let g = sys.gram();
        let mut dev = (0.0f64, (0, 0));
        for ((a, b), v) in g.indexed_iter() {
            let d = (v - if a == b { 1.0 } else { 0.0 }).norm();
            if d > dev.0 {
                dev = (d, (a, b));
            }
        }
        let mut c = CheckResult::new(format!("biorthogonality_{label}"), dev.0 <= t.biorthogonality)
            .value("max_deviation", dev.0)
            .value("threshold", t.biorthogonality)
            .value("dropped", sys.dropped().len() as f64);
        if !c.pass {
            c = c.witness(
                Witness::new("Gram entry")
                    .with("row", dev.1 .0 as f64)
                    .with("col", dev.1 .1 as f64),
            );
        }
        report.push(c);
    }
    let mut worst = (0.0f64, 0);
    for i in 0..cfg.verify.fields as u64 {
        let f = field_for(cfg, s, i);
        let err = forward_transform(&f, &sn, &sm)
            .and_then(|c| reconstruct(&c, &sn, &sm))
            .map(|g| relative_l2_error(&f, &g, s.measure_n.weights(), s.measure_m.weights()));
        match err {
            Ok(e) if e > worst.0 => worst = (e, i),
            Ok(_) => {}
            Err(e) => {
                report.push(CheckResult::failed("reconstruction", e));
                return;
            }
        }
    }
    let mut c = CheckResult::new("reconstruction", worst.0 <= t.reconstruction)
        .value("max_relative_error", worst.0)
        .value("threshold", t.reconstruction)
        .value("fields", cfg.verify.fields as f64);
    if !c.pass {
        c = c.witness(Witness::new("random field").with("field", worst.1 as f64));
    }
    report.push(c);
}

fn gnorm(cfg: &ExperimentConfig, s: &Setup, report: &mut RunReport) {
    let f = field_for(cfg, s, 0);
    let (wn, wm) = (s.measure_n.weights(), s.measure_m.weights());
    let energies = match slab_energies(&s.kernel, &f, wn, wm, cfg.quadrature) {
        Ok(e) => e,
        Err(e) => {
            report.push(CheckResult::failed("gnorm", e));
            return;
        }
    };
    let g_norm_sq = energies.total();
    report.result("g_norm_sq", g_norm_sq);
    let (ln, lm) = (s.lattice_n.depth(), s.lattice_m.depth());
    let pis = level_pis(s.lattice_n.dim(), ln, s.lattice_n.params(), ln, Some((10_000, derive(cfg.seed, "pi_n"))))
        .and_then(|a| {
            let b = level_pis(s.lattice_m.dim(), lm, s.lattice_m.params(), lm, Some((10_000, derive(cfg.seed, "pi_m"))))?;
            Ok((a, b))
        });
    if let Ok((a, b)) = &pis {
        report.result("per_level_pi", json!({ "n": a, "m": b }));
    }
    let mut c = CheckResult::new("gnorm", true).value("g_norm_sq", g_norm_sq);
    match sigma_good(&energies, &s.lattice_n, &s.lattice_m, Weighting::PiWeighted) {
        Ok(sig) => {
            report.result("sigma", sig.sigma);
            report.result("c_mn", &sig.c_mn);
            c = c.value("sigma", sig.sigma);
        }
        Err(e) => {
            // π vanishes at some level; fall back to the unweighted sum
            let plain = sigma_good(&energies, &s.lattice_n, &s.lattice_m, Weighting::Plain);
            if let Ok(sig) = plain {
                report.result("sigma", sig.sigma);
                report.result("c_mn", &sig.c_mn);
                c = c.value("sigma", sig.sigma);
            }
            c = c.note(format!("π-weighting unavailable ({e}); sigma is unweighted"));
        }
    }
    match haar_systems(s).and_then(|(sn, sm)| split_sigma(&s.kernel, &f, &sn, &sm, cfg.quadrature)) {
        Ok(split) => {
            report.result("pieces", split.pieces);
            report.result("subsplit", split.subsplit);
            c.pass = split.bound_holds && split.subsplit.bound_holds && split.subsplit.conserved;
            c = c
                .value("pieces_sum", split.pieces.sum())
                .value("split_sigma", split.sigma);
            if !c.pass {
                c = c.witness(
                    Witness::new("split bound violated")
                        .with("sigma", split.sigma)
                        .with("pieces_sum", split.pieces.sum()),
                );
            }
        }
        Err(e) => {
            c.pass = false;
            c = c.witness(Witness::new(e.to_string()));
        }
    }
    report.push(c);
}

fn avgid(cfg: &ExperimentConfig, s: &Setup, report: &mut RunReport) {
    let mode = match cfg.avgid.mode {
        SamplingMode::Exact => AveragingMode::Exact,
        SamplingMode::Mc => AveragingMode::MonteCarlo {
            trials: cfg.avgid.trials,
            seed: derive(cfg.seed, "avgid"),
        },
    };
    let mut rows = Vec::new();
    for i in 0..cfg.avgid.fields as u64 {
        let f = field_for(cfg, s, i);
        let r = averaging_identity_check(
            &s.kernel,
            &f,
            s.measure_n.weights(),
            s.measure_m.weights(),
            cfg.quadrature,
            s.lattice_n.params(),
            s.lattice_m.params(),
            mode,
            cfg.tolerances.averaging,
        );
        match r {
            Ok(r) => {
                let mut c = CheckResult::new(format!("averaging_identity_{i}"), r.pass)
                    .value("g_norm_sq", r.g_norm_sq)
                    .value("estimate", r.estimate)
                    .value("discrepancy", r.discrepancy)
                    .value("configurations", r.configurations as f64);
                if let Some(se) = r.std_error {
                    c = c.value("std_error", se);
                }
                if !r.pass {
                    c = c.witness(Witness::new("identity off").with("field", i as f64));
                }
                rows.push(r);
                report.push(c);
            }
            Err(e) => report.push(CheckResult::failed(format!("averaging_identity_{i}"), e)),
        }
    }
    report.result("runs", rows);
}

fn carleson(cfg: &ExperimentConfig, s: &Setup, report: &mut RunReport) -> Result<()> {
    let table = carleson_table(
        &s.kernel,
        &s.b_n,
        &s.b_m,
        &s.measure_n,
        &s.measure_m,
        &s.lattice_n,
        &s.lattice_m,
        cfg.quadrature,
    )?;
    if let Some(path) = &cfg.carleson.table_csv {
        table.write_csv(File::create(path)?)?;
    }
    let o = &cfg.carleson;
    let plan = OmegaPlan {
        count: o.omegas,
        max_rectangles: o.max_rectangles,
        min_level: o.min_level,
        max_level: o.max_level.unwrap_or(s.lattice_n.depth().min(s.lattice_m.depth())),
        seed: derive(cfg.seed, "omegas"),
    };
    let check = biparameter_carleson_check(
        &table,
        &s.lattice_n,
        &s.lattice_m,
        &s.measure_n,
        &s.measure_m,
        &plan,
        cfg.tolerances.carleson_constant,
    )?;
    report.result("max_ratio", check.report.worst_ratio);
    report.result("worst_omega", &check.worst_omega);
    report.result("pass", check.report.pass);
    report.result("full_square_ratio", check.full_square_ratio);
    report.push(CheckResult::from_report(&check.report));
    report.table = Some(table);
    Ok(())
}

fn pigood(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let m = cfg.build_measure(Factor::N, None)?;
    let lambda = cfg.build_lambda(Factor::N, &m)?;
    let params = cfg.goodness(Factor::N, &lambda)?;
    let mode = match cfg.pigood.mode {
        SamplingMode::Exact => PiMode::Exact,
        SamplingMode::Mc => PiMode::MonteCarlo {
            trials: cfg.pigood.trials,
            seed: derive(cfg.seed, "pigood"),
        },
    };
    match pi_table(m.dim(), m.depth(), params, mode) {
        Ok(t) => {
            let in_range = t.iter().all(|e| (0.0..=1.0).contains(&e.value));
            let ones = params.r <= m.depth() || t.iter().all(|e| e.value == 1.0);
            let mut c = CheckResult::new("pi_good", in_range && ones)
                .value("r", params.r as f64)
                .value("gamma", params.gamma);
            for e in &t {
                c = c.value(&format!("level_{:02}", e.level), e.value);
            }
            if !c.pass {
                c = c.witness(Witness::new("π outside [0, 1] or below 1 with r > L"));
            }
            report.result("pi", &t);
            report.push(c);
        }
        Err(e) => report.push(CheckResult::failed("pi_good", e)),
    }
    Ok(())
}

fn probe(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let build = |depth: u32| {
        let mn = cfg.build_measure(Factor::N, Some(depth))?;
        let mm = cfg.build_measure(Factor::M, Some(depth))?;
        let ln = cfg.build_lambda(Factor::N, &mn)?;
        let lm = cfg.build_lambda(Factor::M, &mm)?;
        let b = cfg.build_b(Factor::N, mn.grid())?;
        let k = cfg.build_kernel(&mn, &mm, &ln, &lm, &b)?;
        Ok((k, mn, mm))
    };
    let p = &cfg.probe;
    match boundedness_probe(build, &p.depths, cfg.quadrature, p.starts, derive(cfg.seed, "probe")) {
        Ok(r) => {
            let in_band = r.ratios.iter().all(|q| (p.band[0]..=p.band[1]).contains(q));
            let mut c = CheckResult::new("boundedness_probe", in_band);
            for (d, e) in r.depths.iter().zip(&r.estimates) {
                c = c.value(&format!("estimate_l{d}"), *e);
            }
            if let Some((i, q)) = r.ratios.iter().enumerate().find(|(_, q)| !(p.band[0]..=p.band[1]).contains(*q)) {
                c = c.witness(
                    Witness::new("ratio outside band")
                        .with("from_depth", r.depths[i] as f64)
                        .with("to_depth", r.depths[i + 1] as f64)
                        .with("ratio", *q),
                );
            }
            report.result("probe", &r);
            report.push(c);
        }
        Err(e) => report.push(CheckResult::failed("boundedness_probe", e)),
    }
    Ok(())
}
