//! CSV loading and named presets for measures and `b` factors.

use std::io::{BufRead, BufReader, Read};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::grid::CellGrid;
use crate::measure::{AccretiveFunction, FactorMeasure};

/// Parses `# n=<n> L=<L>` followed by one value per line. Lines may hold
/// `re` or `re,im`; measures take the real part only.
pub fn read_cells<R: Read>(reader: R) -> Result<(usize, u32, Vec<Complex64>)> {
    let mut reader = BufReader::new(reader);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let (dim, depth) = parse_header(&header)?;
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut values = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("0")
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", values.len() + 2)))
        };
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        values.push(Complex64::new(field(0)?, if rec.len() > 1 { field(1)? } else { 0.0 }));
    }
    Ok((dim, depth, values))
}

fn parse_header(line: &str) -> Result<(usize, u32)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("expected `# n=<n> L=<L>`, got `{}`", line.trim())))?;
    let mut dim = None;
    let mut depth = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            dim = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("L=") {
            depth = v.parse().ok();
        }
    }
    match (dim, depth) {
        (Some(n), Some(l)) => Ok((n, l)),
        _ => Err(Error::Parse(format!("bad header `{}`", line.trim()))),
    }
}

pub fn measure_from_csv<R: Read>(reader: R) -> Result<FactorMeasure> {
    let (dim, depth, values) = read_cells(reader)?;
    FactorMeasure::new(dim, depth, values.iter().map(|v| v.re).collect())
}

pub fn function_from_csv<R: Read>(reader: R, grid: CellGrid) -> Result<AccretiveFunction> {
    let (dim, depth, values) = read_cells(reader)?;
    if dim != grid.dim || depth != grid.depth || values.len() != grid.len() {
        return Err(Error::Shape(format!(
            "function is n={dim} L={depth} with {} values; measure grid is n={} L={}",
            values.len(),
            grid.dim,
            grid.depth
        )));
    }
    Ok(AccretiveFunction::new(values))
}

pub fn write_cells<W: std::io::Write>(mut w: W, grid: CellGrid, values: &[f64]) -> Result<()> {
    writeln!(w, "# n={} L={}", grid.dim, grid.depth)?;
    for v in values {
        writeln!(w, "{v:.17e}")?;
    }
    Ok(())
}

/// Named measure presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurePreset {
    Uniform,
    /// Mass 3/4 on the first half of axis 0, 1/4 on the second.
    TwoCell,
    /// Dirichlet(1) cell weights.
    RandomDirichlet(u64),
}

impl MeasurePreset {
    pub fn build(self, dim: usize, depth: u32) -> Result<FactorMeasure> {
        let grid = CellGrid::new(dim, depth)?;
        let n = grid.len();
        let weights = match self {
            MeasurePreset::Uniform => vec![1.0 / n as f64; n],
            MeasurePreset::TwoCell => {
                let half = grid.side() / 2;
                (0..n)
                    .map(|i| {
                        let share = if grid.coords(i)[0] < half { 0.75 } else { 0.25 };
                        share / (n / 2) as f64
                    })
                    .collect()
            }
            MeasurePreset::RandomDirichlet(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|w: f64| w / s).collect()
            }
        };
        FactorMeasure::new(dim, depth, weights)
    }
}

/// Named presets for `b` factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionPreset {
    One,
    /// `1 + amp · u`, `u` uniform in `[-1, 1]` per cell (real, positive for amp < 1).
    RandomReal { seed: u64, amp: f64 },
    /// `1 + amp · e^{iθ}` with uniform `θ` per cell.
    RandomComplex { seed: u64, amp: f64 },
}

impl FunctionPreset {
    pub fn build(self, grid: CellGrid) -> AccretiveFunction {
        let n = grid.len();
        match self {
            FunctionPreset::One => AccretiveFunction::constant(grid, 1.0),
            FunctionPreset::RandomReal { seed, amp } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v: Vec<f64> = (0..n).map(|_| 1.0 + amp * rng.random_range(-1.0..=1.0)).collect();
                AccretiveFunction::real(&v)
            }
            FunctionPreset::RandomComplex { seed, amp } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = (0..n)
                    .map(|_| {
                        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                        Complex64::new(1.0, 0.0) + Complex64::from_polar(amp, th)
                    })
                    .collect();
                AccretiveFunction::new(v)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = MeasurePreset::RandomDirichlet(3).build(1, 3).unwrap();
        let mut buf = Vec::new();
        write_cells(&mut buf, m.grid(), m.weights()).unwrap();
        let back = measure_from_csv(&buf[..]).unwrap();
        assert_eq!(back.weights(), m.weights());
    }

    #[test]
    fn csv_complex_and_errors() {
        let text = "# n=1 L=1\n1.0, 0.5\n2.0\n";
        let (n, l, v) = read_cells(text.as_bytes()).unwrap();
        assert_eq!((n, l), (1, 1));
        assert_eq!(v, vec![Complex64::new(1.0, 0.5), Complex64::new(2.0, 0.0)]);
        assert!(read_cells("n=1\n1\n".as_bytes()).is_err());
        assert!(measure_from_csv("# n=1 L=1\n1\n-1\n".as_bytes()).is_err());
    }

    #[test]
    fn two_cell_preset() {
        let m = MeasurePreset::TwoCell.build(1, 1).unwrap();
        assert_eq!(m.weights(), &[0.75, 0.25]);
        let m = MeasurePreset::TwoCell.build(2, 2).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
    }
}
