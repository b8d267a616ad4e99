//! Experiment configuration: one TOML document, every section optional.
//!
//! The documented schema with defaults lives in `schema.toml` at the crate
//! root and is printed by `dyadica schema`.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellGrid;
use crate::kernel::{make_builtin, read_tabulated, tabulated_kernel, BuiltinKind, BuiltinParams, KernelSpec};
use crate::lattice::{default_r, gamma_from, GoodnessParams, ShiftBits, ShiftedLattice};
use crate::measure::io::{function_from_csv, measure_from_csv, FunctionPreset, MeasurePreset};
use crate::measure::{AccretiveFunction, DominatingFunction, FactorMeasure};
use crate::seed::derive;

/// Cells per factor are capped at `2^MAX_BITS`.
pub const MAX_BITS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; component seeds are derived from it by label.
    pub seed: u64,
    /// Nodes `G` per Whitney slab.
    pub quadrature: usize,
    pub measure_n: MeasureSpec,
    pub measure_m: MeasureSpec,
    pub b_n: FunctionSpec,
    pub b_m: FunctionSpec,
    pub lattice_n: LatticeSpec,
    pub lattice_m: LatticeSpec,
    pub kernel: KernelConfig,
    pub tolerances: Tolerances,
    pub verify: VerifyOptions,
    pub avgid: AvgidOptions,
    pub carleson: CarlesonOptions,
    pub pigood: PigoodOptions,
    pub probe: ProbeOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            quadrature: 2,
            measure_n: MeasureSpec::default(),
            measure_m: MeasureSpec::default(),
            b_n: FunctionSpec::default(),
            b_m: FunctionSpec::default(),
            lattice_n: LatticeSpec::default(),
            lattice_m: LatticeSpec::default(),
            kernel: KernelConfig::default(),
            tolerances: Tolerances::default(),
            verify: VerifyOptions::default(),
            avgid: AvgidOptions::default(),
            carleson: CarlesonOptions::default(),
            pigood: PigoodOptions::default(),
            probe: ProbeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    Uniform,
    TwoCell,
    RandomDirichlet,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaSpec {
    /// `λ(x, r) = μ(B(x, r))`, tabulated.
    BallMasses,
    PowerLaw { scale: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSpec {
    pub dim: usize,
    pub depth: u32,
    pub preset: MeasureKind,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
    pub lambda: LambdaSpec,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            depth: 4,
            preset: MeasureKind::Uniform,
            seed: None,
            path: None,
            lambda: LambdaSpec::BallMasses,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    One,
    RandomReal,
    RandomComplex,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionSpec {
    pub preset: FunctionKind,
    pub amp: f64,
    pub seed: Option<u64>,
    pub path: Option<PathBuf>,
}

impl Default for FunctionSpec {
    fn default() -> Self {
        Self {
            preset: FunctionKind::One,
            amp: 0.4,
            seed: None,
            path: None,
        }
    }
}

/// A number in `(0, 1/2)`, or `"auto"` / `"auto(α)"` for `γ = α/(2(d_λ+α))`
/// with `d_λ` from the factor's dominating function (`α` defaults to the
/// kernel exponent of that factor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Value(f64),
    Auto(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Random,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    /// Must match the measure when given.
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub depth: Option<u32>,
    pub seed: Option<u64>,
    /// Defaults to the smallest `r` with `2^{-rγ} < 1/2`.
    pub r: Option<u32>,
    pub gamma: GammaSpec,
    pub shift: ShiftKind,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            n: None,
            depth: None,
            seed: None,
            r: None,
            gamma: GammaSpec::Value(0.25),
            shift: ShiftKind::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Zero,
    StandardProduct,
    BAnnihilating,
    Violator,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub alpha: f64,
    pub beta: f64,
    /// Amplitude of the standard product kernel.
    pub c: f64,
    pub oscillate: bool,
    /// Binary table for `tabulated`.
    pub path: Option<PathBuf>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: KernelKind::StandardProduct,
            alpha: 1.0,
            beta: 1.0,
            c: 0.5,
            oscillate: true,
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Lower bound for `|∫_I b dμ| / μ(I)`.
    pub accretivity: f64,
    /// Relative to `‖b‖∞ μ(I)`.
    pub cancellation: f64,
    pub biorthogonality: f64,
    pub reconstruction: f64,
    /// Relative discrepancy in exact averaging mode.
    pub averaging: f64,
    /// Upper bound on kernel-estimate ratios.
    pub kernel_estimate: f64,
    pub carleson_assumption: f64,
    /// The constant of the bi-parameter Carleson condition.
    pub carleson_constant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            accretivity: 0.05,
            cancellation: 1e-12,
            biorthogonality: 1e-10,
            reconstruction: 1e-10,
            averaging: 1e-10,
            kernel_estimate: 16.0,
            carleson_assumption: 16.0,
            carleson_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub samples: usize,
    pub exterior_samples: usize,
    /// Random fields for reconstruction and `gnorm`.
    pub fields: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            exterior_samples: 4,
            fields: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AvgidOptions {
    pub mode: SamplingMode,
    pub trials: u64,
    pub fields: usize,
}

impl Default for AvgidOptions {
    fn default() -> Self {
        Self {
            mode: SamplingMode::Exact,
            trials: 200,
            fields: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlesonOptions {
    pub omegas: usize,
    pub max_rectangles: usize,
    pub min_level: u32,
    /// Defaults to the finest level.
    pub max_level: Option<u32>,
    /// Also write the coefficient table here as CSV.
    pub table_csv: Option<PathBuf>,
}

impl Default for CarlesonOptions {
    fn default() -> Self {
        Self {
            omegas: 32,
            max_rectangles: 4,
            min_level: 0,
            max_level: None,
            table_csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PigoodOptions {
    pub mode: SamplingMode,
    pub trials: u64,
}

impl Default for PigoodOptions {
    fn default() -> Self {
        Self {
            mode: SamplingMode::Exact,
            trials: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeOptions {
    pub depths: Vec<u32>,
    pub starts: usize,
    /// Allowed range of consecutive estimate ratios.
    pub band: [f64; 2],
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            depths: vec![4, 6],
            starts: 4,
            band: [0.5, 2.0],
        }
    }
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn check(ok: bool, path: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_error(path, message))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Range and consistency checks the type system does not express.
    pub fn validate(&self) -> Result<()> {
        check(self.quadrature >= 1, "quadrature", "must be at least 1")?;
        for (name, m) in [("measure_n", &self.measure_n), ("measure_m", &self.measure_m)] {
            check((1..=2).contains(&m.dim), &format!("{name}.dim"), "must be 1 or 2")?;
            check(m.depth >= 1, &format!("{name}.depth"), "must be at least 1")?;
            check(
                m.depth * m.dim as u32 <= MAX_BITS,
                &format!("{name}.depth"),
                format!("at most 2^{MAX_BITS} cells per factor"),
            )?;
            check(
                m.preset != MeasureKind::Csv || m.path.is_some(),
                &format!("{name}.path"),
                "required by the csv preset",
            )?;
            if let LambdaSpec::PowerLaw { scale, exponent } = m.lambda {
                check(scale > 0.0 && exponent >= 0.0, &format!("{name}.lambda"), "needs scale > 0, exponent ≥ 0")?;
            }
        }
        for (name, b) in [("b_n", &self.b_n), ("b_m", &self.b_m)] {
            check(b.amp >= 0.0 && b.amp < 1.0, &format!("{name}.amp"), "must lie in [0, 1)")?;
            check(
                b.preset != FunctionKind::Csv || b.path.is_some(),
                &format!("{name}.path"),
                "required by the csv preset",
            )?;
        }
        for (name, l, m) in [
            ("lattice_n", &self.lattice_n, &self.measure_n),
            ("lattice_m", &self.lattice_m, &self.measure_m),
        ] {
            check(l.n.is_none_or(|n| n == m.dim), &format!("{name}.n"), "differs from the measure dimension")?;
            check(l.depth.is_none_or(|d| d == m.depth), &format!("{name}.L"), "differs from the measure depth")?;
            check(l.r.is_none_or(|r| r >= 1), &format!("{name}.r"), "must be at least 1")?;
            match &l.gamma {
                GammaSpec::Value(g) => check(*g > 0.0 && *g < 0.5, &format!("{name}.gamma"), "must lie in (0, 1/2)")?,
                GammaSpec::Auto(s) => {
                    parse_auto(s).map_err(|m| config_error(format!("{name}.gamma"), m))?;
                }
            }
        }
        let k = &self.kernel;
        check(k.alpha > 0.0, "kernel.alpha", "must be positive")?;
        check(k.beta > 0.0, "kernel.beta", "must be positive")?;
        check(k.c.is_finite(), "kernel.c", "must be finite")?;
        check(
            k.kind != KernelKind::Tabulated || k.path.is_some(),
            "kernel.path",
            "required by the tabulated kernel",
        )?;
        let t = &self.tolerances;
        for (name, v) in [
            ("accretivity", t.accretivity),
            ("cancellation", t.cancellation),
            ("biorthogonality", t.biorthogonality),
            ("reconstruction", t.reconstruction),
            ("averaging", t.averaging),
            ("kernel_estimate", t.kernel_estimate),
            ("carleson_assumption", t.carleson_assumption),
            ("carleson_constant", t.carleson_constant),
        ] {
            check(v > 0.0 && v.is_finite(), &format!("tolerances.{name}"), "must be positive")?;
        }
        check(self.verify.samples >= 1, "verify.samples", "must be at least 1")?;
        check(self.avgid.trials >= 1, "avgid.trials", "must be at least 1")?;
        check(self.avgid.fields >= 1, "avgid.fields", "must be at least 1")?;
        check(self.pigood.trials >= 1, "pigood.trials", "must be at least 1")?;
        let c = &self.carleson;
        check(c.max_rectangles >= 1, "carleson.max_rectangles", "must be at least 1")?;
        let depth = self.measure_n.depth.min(self.measure_m.depth);
        let max = c.max_level.unwrap_or(depth);
        check(max <= depth, "carleson.max_level", "exceeds the lattice depth")?;
        check(c.min_level <= max, "carleson.min_level", "exceeds max_level")?;
        let p = &self.probe;
        check(!p.depths.is_empty(), "probe.depths", "must not be empty")?;
        check(
            p.depths.iter().all(|&d| d >= 1 && d * self.measure_n.dim.max(self.measure_m.dim) as u32 <= MAX_BITS),
            "probe.depths",
            "depths must lie in 1..=cap",
        )?;
        check(p.band[0] > 0.0 && p.band[0] <= p.band[1], "probe.band", "needs 0 < low ≤ high")?;
        Ok(())
    }

    /// Seed of a named component: the explicit one or `derive(master, label)`.
    pub fn component_seed(&self, explicit: Option<u64>, label: &str) -> u64 {
        explicit.unwrap_or_else(|| derive(self.seed, label))
    }
}

/// `"auto"` → `None`; `"auto(α)"` → `Some(α)`.
fn parse_auto(s: &str) -> std::result::Result<Option<f64>, String> {
    let s = s.trim();
    if s == "auto" {
        return Ok(None);
    }
    let inner = s
        .strip_prefix("auto(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| format!("expected a number, \"auto\" or \"auto(alpha)\", got {s:?}"))?;
    let a: f64 = inner.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
    if a > 0.0 {
        Ok(Some(a))
    } else {
        Err(format!("exponent in {s:?} must be positive"))
    }
}

/// Which factor a builder works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    N,
    M,
}

impl Factor {
    fn label(self) -> &'static str {
        match self {
            Factor::N => "n",
            Factor::M => "m",
        }
    }
}

/// Every object a command needs, built from a validated config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub measure_n: FactorMeasure,
    pub measure_m: FactorMeasure,
    pub lambda_n: DominatingFunction,
    pub lambda_m: DominatingFunction,
    pub b_n: AccretiveFunction,
    pub b_m: AccretiveFunction,
    pub lattice_n: ShiftedLattice,
    pub lattice_m: ShiftedLattice,
    pub kernel: KernelSpec,
}

impl ExperimentConfig {
    fn measure_spec(&self, f: Factor) -> &MeasureSpec {
        match f {
            Factor::N => &self.measure_n,
            Factor::M => &self.measure_m,
        }
    }

    /// The factor measure at its configured depth, or at `depth` when given
    /// (presets only).
    pub fn build_measure(&self, f: Factor, depth: Option<u32>) -> Result<FactorMeasure> {
        let spec = self.measure_spec(f);
        let depth = depth.unwrap_or(spec.depth);
        let seed = self.component_seed(spec.seed, &format!("measure_{}", f.label()));
        match spec.preset {
            MeasureKind::Uniform => MeasurePreset::Uniform.build(spec.dim, depth),
            MeasureKind::TwoCell => MeasurePreset::TwoCell.build(spec.dim, depth),
            MeasureKind::RandomDirichlet => MeasurePreset::RandomDirichlet(seed).build(spec.dim, depth),
            MeasureKind::Csv => {
                let path = spec.path.as_ref().expect("validated");
                let m = measure_from_csv(File::open(path)?)?;
                if m.dim() != spec.dim || m.depth() != depth {
                    return Err(config_error(
                        format!("measure_{}.path", f.label()),
                        format!("file holds n={} L={}", m.dim(), m.depth()),
                    ));
                }
                Ok(m)
            }
        }
    }

    pub fn build_lambda(&self, f: Factor, m: &FactorMeasure) -> Result<DominatingFunction> {
        match self.measure_spec(f).lambda {
            LambdaSpec::BallMasses => DominatingFunction::from_ball_masses(m),
            LambdaSpec::PowerLaw { scale, exponent } => DominatingFunction::power_law(scale, exponent),
        }
    }

    pub fn build_b(&self, f: Factor, grid: CellGrid) -> Result<AccretiveFunction> {
        let spec = match f {
            Factor::N => &self.b_n,
            Factor::M => &self.b_m,
        };
        let seed = self.component_seed(spec.seed, &format!("b_{}", f.label()));
        Ok(match spec.preset {
            FunctionKind::One => FunctionPreset::One.build(grid),
            FunctionKind::RandomReal => FunctionPreset::RandomReal { seed, amp: spec.amp }.build(grid),
            FunctionKind::RandomComplex => FunctionPreset::RandomComplex { seed, amp: spec.amp }.build(grid),
            FunctionKind::Csv => function_from_csv(File::open(spec.path.as_ref().expect("validated"))?, grid)?,
        })
    }

    pub fn goodness(&self, f: Factor, lambda: &DominatingFunction) -> Result<GoodnessParams> {
        let (spec, exponent) = match f {
            Factor::N => (&self.lattice_n, self.kernel.alpha),
            Factor::M => (&self.lattice_m, self.kernel.beta),
        };
        let gamma = match &spec.gamma {
            GammaSpec::Value(g) => *g,
            GammaSpec::Auto(s) => {
                let a = parse_auto(s).map_err(|m| config_error("gamma", m))?.unwrap_or(exponent);
                gamma_from(a, lambda.d_lambda())?
            }
        };
        GoodnessParams::new(spec.r.unwrap_or_else(|| default_r(gamma)), gamma)
    }

    pub fn build_lattice(&self, f: Factor, m: &FactorMeasure, lambda: &DominatingFunction) -> Result<ShiftedLattice> {
        let spec = match f {
            Factor::N => &self.lattice_n,
            Factor::M => &self.lattice_m,
        };
        let params = self.goodness(f, lambda)?;
        let bits = match spec.shift {
            ShiftKind::Zero => ShiftBits::zero(m.dim(), m.depth()),
            ShiftKind::Random => ShiftBits::random(
                m.dim(),
                m.depth(),
                self.component_seed(spec.seed, &format!("lattice_{}", f.label())),
            ),
        };
        ShiftedLattice::from_bits(bits, params)
    }

    pub fn build_kernel(
        &self,
        mn: &FactorMeasure,
        mm: &FactorMeasure,
        lambda_n: &DominatingFunction,
        lambda_m: &DominatingFunction,
        b_n: &AccretiveFunction,
    ) -> Result<KernelSpec> {
        let k = &self.kernel;
        let kind = match k.kind {
            KernelKind::Zero => BuiltinKind::Zero,
            KernelKind::StandardProduct => BuiltinKind::StandardProduct {
                c: k.c,
                oscillate: k.oscillate,
            },
            KernelKind::BAnnihilating => BuiltinKind::BAnnihilating,
            KernelKind::Violator => BuiltinKind::Violator,
            KernelKind::Tabulated => {
                let table = read_tabulated(File::open(k.path.as_ref().expect("validated"))?)?;
                return tabulated_kernel(
                    table,
                    mn.grid(),
                    mm.grid(),
                    k.alpha,
                    k.beta,
                    lambda_n.clone(),
                    lambda_m.clone(),
                );
            }
        };
        make_builtin(
            kind,
            BuiltinParams {
                alpha: k.alpha,
                beta: k.beta,
                measure_n: mn,
                measure_m: mm,
                lambda_n: lambda_n.clone(),
                lambda_m: lambda_m.clone(),
                b1: Some(b_n),
            },
        )
    }

    pub fn setup(&self) -> Result<Setup> {
        let measure_n = self.build_measure(Factor::N, None)?;
        let measure_m = self.build_measure(Factor::M, None)?;
        let lambda_n = self.build_lambda(Factor::N, &measure_n)?;
        let lambda_m = self.build_lambda(Factor::M, &measure_m)?;
        let b_n = self.build_b(Factor::N, measure_n.grid())?;
        let b_m = self.build_b(Factor::M, measure_m.grid())?;
        let lattice_n = self.build_lattice(Factor::N, &measure_n, &lambda_n)?;
        let lattice_m = self.build_lattice(Factor::M, &measure_m, &lambda_m)?;
        let kernel = self.build_kernel(&measure_n, &measure_m, &lambda_n, &lambda_m, &b_n)?;
        Ok(Setup {
            measure_n,
            measure_m,
            lambda_n,
            lambda_m,
            b_n,
            b_m,
            lattice_n,
            lattice_m,
            kernel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml_str("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_field_reports_its_path() {
        let err = ExperimentConfig::from_toml_str("[kernel]\nalpah = 1.0\n").unwrap_err();
        match err {
            Error::Config { path, .. } => assert!(path.starts_with("kernel"), "{path}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn range_violation_reports_its_path() {
        let err = ExperimentConfig::from_toml_str("[lattice_m]\ngamma = 0.7\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "lattice_m.gamma"), "{err}");
    }

    #[test]
    fn auto_gamma_forms() {
        assert_eq!(parse_auto("auto"), Ok(None));
        assert_eq!(parse_auto("auto(2.5)"), Ok(Some(2.5)));
        assert!(parse_auto("auto(-1)").is_err());
        assert!(parse_auto("half").is_err());
        let cfg = ExperimentConfig::from_toml_str("[lattice_n]\ngamma = \"auto(1)\"\n[measure_n]\nlambda = { kind = \"power_law\", scale = 2.0, exponent = 1.0 }\n").unwrap();
        let m = cfg.build_measure(Factor::N, None).unwrap();
        let l = cfg.build_lambda(Factor::N, &m).unwrap();
        assert_eq!(cfg.goodness(Factor::N, &l).unwrap().gamma, 0.25);
    }

    #[test]
    fn component_seeds_follow_the_master() {
        let mut a = ExperimentConfig::default();
        let b = a.clone();
        assert_eq!(a.component_seed(None, "x"), b.component_seed(None, "x"));
        a.seed = 2;
        assert_ne!(a.component_seed(None, "x"), b.component_seed(None, "x"));
        assert_eq!(a.component_seed(Some(9), "x"), 9);
    }
}
