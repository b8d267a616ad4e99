//! Dominating functions `λ(x, r)` for upper doubling measures.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid::{torus_distance, CellGrid, Point};
use crate::measure::FactorMeasure;
use crate::report::{VerificationReport, Witness};

/// Values of `λ` on (cell centre, dyadic radius) pairs.
///
/// Radii are `2^{-depth}, 2^{-depth+1}, …, 1`. Between radii the table is
/// interpolated linearly; below the first radius it is extended by
/// `r^{d_λ}`, above the last it is held constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaTable {
    pub dim: usize,
    pub depth: u32,
    pub radii: Vec<f64>,
    /// Row-major: `values[cell * radii.len() + k]`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DominatingFamily {
    /// `λ(x, r) = scale · r^exponent`.
    PowerLaw { scale: f64, exponent: f64 },
    Tabulated(LambdaTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatingFunction {
    pub family: DominatingFamily,
    /// `C_λ`; `d_λ = log2 C_λ`.
    pub doubling_constant: f64,
}

pub fn dyadic_radii(depth: u32) -> Vec<f64> {
    (0..=depth).rev().map(|k| (0.5f64).powi(k as i32)).collect()
}

impl DominatingFunction {
    pub fn power_law(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(param("scale", format!("{scale} must be positive")));
        }
        if !(exponent > 0.0) {
            return Err(param("exponent", format!("{exponent} must be positive")));
        }
        Ok(Self {
            family: DominatingFamily::PowerLaw { scale, exponent },
            doubling_constant: exponent.exp2(),
        })
    }

    /// Samples `f` at every cell centre and dyadic radius of `grid`.
    /// `C_λ` is the largest doubling ratio found in the table (at least 1).
    pub fn tabulate(grid: CellGrid, f: impl Fn(&Point, f64) -> f64) -> Result<Self> {
        let radii = dyadic_radii(grid.depth);
        let mut values = Vec::with_capacity(grid.len() * radii.len());
        for cell in 0..grid.len() {
            let x = grid.center(cell);
            for &r in &radii {
                values.push(f(&x, r));
            }
        }
        Self::from_table(LambdaTable {
            dim: grid.dim,
            depth: grid.depth,
            radii,
            values,
        })
    }

    pub fn from_table(table: LambdaTable) -> Result<Self> {
        let nr = table.radii.len();
        let grid = CellGrid::new(table.dim, table.depth)?;
        if nr == 0 || table.values.len() != grid.len() * nr {
            return Err(param("values", "table shape does not match grid and radii"));
        }
        if let Some(v) = table.values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(param("values", format!("{v} is not a positive finite value")));
        }
        let mut c = 1.0f64;
        for row in table.values.chunks(nr) {
            for k in 0..nr - 1 {
                if row[k + 1] < row[k] {
                    return Err(param("values", "λ(x, ·) must be non-decreasing"));
                }
                c = c.max(row[k + 1] / row[k]);
            }
        }
        Ok(Self {
            family: DominatingFamily::Tabulated(table),
            doubling_constant: c,
        })
    }

    /// `λ(x, r) = μ(B(x, min(r, 1/2)))` sampled on the grid of `m`: the
    /// least dominating function there. Fails if some smallest ball is empty.
    pub fn from_ball_masses(m: &FactorMeasure) -> Result<Self> {
        Self::tabulate(m.grid(), |x, r| m.ball_mass(x, r.min(0.5)).unwrap_or(0.0))
    }

    pub fn d_lambda(&self) -> f64 {
        self.doubling_constant.log2()
    }

    pub fn eval(&self, x: &Point, r: f64) -> f64 {
        match &self.family {
            DominatingFamily::PowerLaw { scale, exponent } => {
                if r <= 0.0 {
                    0.0
                } else {
                    scale * r.powf(*exponent)
                }
            }
            DominatingFamily::Tabulated(t) => {
                let grid = CellGrid {
                    dim: t.dim,
                    depth: t.depth,
                };
                let nr = t.radii.len();
                let row = &t.values[grid.cell_of(x) * nr..][..nr];
                if r <= 0.0 {
                    return 0.0;
                }
                if r <= t.radii[0] {
                    return row[0] * (r / t.radii[0]).powf(self.d_lambda());
                }
                if r >= t.radii[nr - 1] {
                    return row[nr - 1];
                }
                let k = t.radii.partition_point(|&q| q <= r) - 1;
                let (r0, r1) = (t.radii[k], t.radii[k + 1]);
                let s = (r - r0) / (r1 - r0);
                row[k] + s * (row[k + 1] - row[k])
            }
        }
    }
}

/// Compares `μ(B(x,r))` against `λ(x,r)` over cell centres × dyadic radii
/// `2^{-L} … 1/2`. Passes iff every ratio is at most 1.
pub fn verify_upper_doubling(m: &FactorMeasure, lambda: &DominatingFunction) -> VerificationReport {
    let mut report = VerificationReport::new("upper_doubling", 1.0);
    let grid = m.grid();
    let mut doubling = 1.0f64;
    for cell in 0..grid.len() {
        let x = grid.center(cell);
        for k in 1..=grid.depth {
            let r = (0.5f64).powi(k as i32);
            let mass = m.ball_mass(&x, r).expect("radius within (0, 1/2]");
            let bound = lambda.eval(&x, r);
            report.observe(mass / bound, || {
                Witness::new("ball")
                    .with("x0", x[0])
                    .with("x1", x[1])
                    .with("r", r)
                    .with("mass", mass)
                    .with("lambda", bound)
            });
            doubling = doubling.max(lambda.eval(&x, 2.0 * r) / bound);
        }
    }
    report.extra("empirical_doubling", doubling);
    report.extra("empirical_d_lambda", doubling.log2());
    let mut report = report.finish_upper();
    if !report.pass {
        let w = report.worst_ratio;
        report.extra("min_rescale", w);
    }
    report
}

/// `min_z λ(z, r + |x−z|)` over cell centres `z` of `grid`, at any point `x`.
pub fn symmetric_envelope(lambda: &DominatingFunction, grid: CellGrid, x: &Point, r: f64) -> f64 {
    let centers: Vec<Point> = (0..grid.len()).map(|i| grid.center(i)).collect();
    envelope_at(lambda, &centers, x, r)
}

fn envelope_at(lambda: &DominatingFunction, centers: &[Point], x: &Point, r: f64) -> f64 {
    centers
        .iter()
        .map(|z| lambda.eval(z, r + torus_distance(x, z)))
        .fold(f64::INFINITY, f64::min)
}

/// Output of [`symmetrize_dominating`].
#[derive(Debug, Clone)]
pub struct Symmetrized {
    pub lambda: DominatingFunction,
    pub report: VerificationReport,
}

/// `Λ(x,r) = min_z λ(z, r + |x−z|)` over cell centres `z`, tabulated on
/// the measure's grid. The report covers `Λ ≤ λ`, monotonicity in `r`,
/// doubling, and `Λ(x,r) ≤ C_λ Λ(y,r)` for `|x−y| ≤ r`.
pub fn symmetrize_dominating(lambda: &DominatingFunction, m: &FactorMeasure) -> Symmetrized {
    let grid = m.grid();
    let radii = dyadic_radii(grid.depth);
    let nr = radii.len();
    let n = grid.len();
    let centers: Vec<Point> = (0..n).map(|i| grid.center(i)).collect();
    let mut values = vec![0.0; n * nr];
    for (i, x) in centers.iter().enumerate() {
        for (k, &r) in radii.iter().enumerate() {
            values[i * nr + k] = envelope_at(lambda, &centers, x, r);
        }
    }
    let c = lambda.doubling_constant;
    let mut report = VerificationReport::new("symmetrize", 1.0);
    let mut worst_le = 0.0f64;
    let mut worst_mono = 0.0f64;
    let mut worst_doubling = 0.0f64;
    let mut worst_sym = 0.0f64;
    for (i, x) in centers.iter().enumerate() {
        for (k, &r) in radii.iter().enumerate() {
            let v = values[i * nr + k];
            let le = v / lambda.eval(x, r);
            report.observe(le, || Witness::new("Λ ≤ λ").with("cell", i as f64).with("r", r));
            worst_le = worst_le.max(le);
            if k + 1 < nr {
                let next = values[i * nr + k + 1];
                worst_mono = worst_mono.max(v / next);
                worst_doubling = worst_doubling.max(next / (c * v));
            }
            for (j, y) in centers.iter().enumerate() {
                if torus_distance(x, y) <= r {
                    let s = v / (c * values[j * nr + k]);
                    if s > worst_sym {
                        worst_sym = s;
                    }
                    report.observe(s, || {
                        Witness::new("Λ(x,r) ≤ C Λ(y,r)")
                            .with("x_cell", i as f64)
                            .with("y_cell", j as f64)
                            .with("r", r)
                    });
                }
            }
        }
    }
    report.observe(worst_mono, || Witness::new("monotone in r"));
    report.observe(worst_doubling, || Witness::new("doubling"));
    report.extra("max_lambda_ratio", worst_le);
    report.extra("max_monotone_ratio", worst_mono);
    report.extra("max_doubling_ratio", worst_doubling);
    report.extra("max_symmetry_ratio", worst_sym);
    report.threshold = 1.0 + 1e-12;
    let report = report.finish_upper();
    let table = LambdaTable {
        dim: grid.dim,
        depth: grid.depth,
        radii,
        values,
    };
    let measured = DominatingFunction::from_table(table.clone())
        .map(|d| d.doubling_constant)
        .unwrap_or(c);
    Symmetrized {
        lambda: DominatingFunction {
            family: DominatingFamily::Tabulated(table),
            doubling_constant: measured.max(1.0),
        },
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_doubling() {
        let l = DominatingFunction::power_law(2.0, 1.0).unwrap();
        assert_eq!(l.doubling_constant, 2.0);
        assert_eq!(l.eval(&[0.3, 0.0], 0.25), 0.5);
        assert!(DominatingFunction::power_law(0.0, 1.0).is_err());
    }

    #[test]
    fn uniform_upper_doubling_passes() {
        let m = FactorMeasure::uniform(1, 4).unwrap();
        let l = DominatingFunction::power_law(2.0, 1.0).unwrap();
        let rep = verify_upper_doubling(&m, &l);
        assert!(rep.pass, "{rep:?}");
        assert!((rep.worst_ratio - 1.0).abs() < 1e-12);
        assert!((rep.extras["empirical_doubling"] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_undersized_lambda_fails() {
        let m = FactorMeasure::uniform(1, 4).unwrap();
        let l = DominatingFunction::power_law(0.5, 1.0).unwrap();
        let rep = verify_upper_doubling(&m, &l);
        assert!(!rep.pass);
        assert!((rep.extras["min_rescale"] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_cell_matches_exhaustive_scan() {
        let m = FactorMeasure::new(1, 1, vec![0.75, 0.25]).unwrap();
        let l = DominatingFunction::power_law(2.0, 1.0).unwrap();
        let rep = verify_upper_doubling(&m, &l);
        // Only r = 1/2 at centres 1/4, 3/4: the ball is the whole circle.
        // μ(B) = 1 for both, λ = 1 → ratio exactly 1.
        assert_eq!(rep.samples, 2);
        assert!((rep.worst_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetrize_x_independent_is_identity() {
        let m = FactorMeasure::uniform(1, 3).unwrap();
        let l = DominatingFunction::power_law(2.0, 1.0).unwrap();
        let s = symmetrize_dominating(&l, &m);
        assert!(s.report.pass, "{:?}", s.report);
        for cell in 0..8 {
            let x = m.grid().center(cell);
            for r in dyadic_radii(3) {
                assert_eq!(s.lambda.eval(&x, r), l.eval(&x, r));
            }
        }
        // sub-grid radii follow r^{d_λ}
        assert!((s.lambda.eval(&[0.1, 0.0], 0.01) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn symmetrize_affine_example() {
        let depth = 3;
        let m = FactorMeasure::uniform(1, depth).unwrap();
        let f = |x: &Point, r: f64| 2.0 * r * (1.0 + x[0]);
        let l = DominatingFunction::tabulate(m.grid(), f).unwrap();
        let s = symmetrize_dominating(&l, &m);
        assert!(s.report.pass, "{:?}", s.report);
        // brute-force min over cell centres z of 2(1/4+|x−z|)(1+z)
        let oracle = |x: f64| {
            (0..8)
                .map(|i| {
                    let z = (i as f64 + 0.5) / 8.0;
                    let d = (x - z).abs().min(1.0 - (x - z).abs());
                    2.0 * (0.25 + d) * (1.0 + z)
                })
                .fold(f64::INFINITY, f64::min)
        };
        let at_half = symmetric_envelope(&l, m.grid(), &[0.5, 0.0], 0.25);
        assert!((at_half - oracle(0.5)).abs() < 1e-14);
        // the table stores Λ at the centre of the cell holding x
        let c = 9.0 / 16.0;
        assert!((s.lambda.eval(&[0.5, 0.0], 0.25) - oracle(c)).abs() < 1e-14);
        assert!(s.lambda.eval(&[c, 0.0], 0.25) <= l.eval(&[c, 0.0], 0.25));
    }
}
