use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellGrid;
use crate::measure::FactorMeasure;
use crate::report::{VerificationReport, Witness};

/// A bounded function per finest cell, the factor `b_i` of `b = b1 ⊗ b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccretiveFunction {
    pub values: Vec<Complex64>,
    pub sup_norm: f64,
    /// Smallest `|∫_I b dμ| / μ(I)` over dyadic cubes; set by [`validate`].
    ///
    /// [`validate`]: AccretiveFunction::validate
    pub accretivity_constant: Option<f64>,
}

impl AccretiveFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        let sup_norm = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Self {
            values,
            sup_norm,
            accretivity_constant: None,
        }
    }

    pub fn real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(grid: CellGrid, c: f64) -> Self {
        Self::real(&vec![c; grid.len()])
    }

    /// Runs [`verify_pseudo_accretive`] and stores the constant when it passes.
    pub fn validate(mut self, m: &FactorMeasure, threshold: f64) -> Result<(Self, VerificationReport)> {
        let report = verify_pseudo_accretive(&self, m, threshold)?;
        if report.pass {
            self.accretivity_constant = Some(report.worst_ratio);
        }
        Ok((self, report))
    }

    pub fn integral(&self, m: &FactorMeasure) -> Complex64 {
        self.values
            .iter()
            .zip(m.weights())
            .map(|(v, w)| v * *w)
            .sum()
    }
}

/// Minimum of `|∫_I b dμ| / μ(I)` over every dyadic cube of every level
/// whose corner lies on the finest grid. This covers every cube of every
/// shifted lattice built on the same grid. `worst_ratio` holds the minimum;
/// the check passes iff it exceeds `threshold`. Zero-mass cubes are skipped.
pub fn verify_pseudo_accretive(
    b: &AccretiveFunction,
    m: &FactorMeasure,
    threshold: f64,
) -> Result<VerificationReport> {
    let grid = m.grid();
    if b.values.len() != grid.len() {
        return Err(Error::Shape(format!(
            "b has {} values, measure has {} cells",
            b.values.len(),
            grid.len()
        )));
    }
    let prefix = m.weighted_prefix(&b.values);
    let side = grid.side();
    let mut report = VerificationReport::new("pseudo_accretive", threshold);
    let mut min = f64::INFINITY;
    for level in 0..=grid.depth {
        let len = 1usize << (grid.depth - level);
        // the root has one position only
        let positions = if level == 0 { 1 } else { side };
        let n1 = if grid.dim == 2 { positions } else { 1 };
        for s1 in 0..n1 {
            for s0 in 0..positions {
                let start = [s0, s1];
                let lens = [len, len];
                let mass = m.box_mass(start, lens);
                if mass <= 0.0 {
                    report.skipped += 1;
                    continue;
                }
                let avg = prefix.box_sum(start, lens).norm() / mass;
                report.samples += 1;
                if avg < min {
                    min = avg;
                    report.witness = Some(
                        Witness::new("cube")
                            .with("level", level as f64)
                            .with("start0", s0 as f64)
                            .with("start1", s1 as f64)
                            .with("average", avg),
                    );
                }
            }
        }
    }
    report.worst_ratio = min;
    report.pass = min > threshold;
    report.extra("sup_norm", b.sup_norm);
    Ok(report)
}
