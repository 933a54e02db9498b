use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iga::export::fmt;
use crate::iga::metrics::lshape_grid;
use crate::iga::{solve_heat_problem, HeatProblem};

/// `count` evenly spaced values on `(lo, hi]`.
pub fn n_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| lo + (hi - lo) * k as f64 / count as f64).collect()
}

/// Seeded stratified split of `values` into `(train, test)`.
///
/// The interior values are cut into `test_count` contiguous strata and one
/// value is drawn from each, never the last of a stratum, so every held-out
/// value has training neighbours on both sides. The smallest and largest
/// values always train. Both halves keep ascending order.
pub fn split_train_test(values: &[f64], test_count: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if test_count == 0 || values.len() < 2 * test_count + 2 {
        return Err(Error::Config(format!("cannot hold out {test_count} of {} values", values.len())));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let interior = sorted.len() - 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let test_idx: Vec<usize> = (0..test_count)
        .map(|s| {
            let lo = 1 + s * interior / test_count;
            let hi = 1 + (s + 1) * interior / test_count;
            rng.gen_range(lo..hi - 1)
        })
        .collect();
    let test = test_idx.iter().map(|&i| sorted[i]).collect();
    let train = (0..sorted.len()).filter(|i| !test_idx.contains(i)).map(|i| sorted[i]).collect();
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSample {
    pub n: f64,
    pub coefficients: Vec<f64>,
}

/// Solver coefficients for a sequence of heating parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffDataset {
    pub problem: HeatProblem,
    pub samples: Vec<CoeffSample>,
}

pub fn generate_coeff_dataset(problem: &HeatProblem, n_values: &[f64]) -> Result<CoeffDataset> {
    problem.validate()?;
    let samples = n_values
        .iter()
        .map(|&n| {
            let field = solve_heat_problem(&problem.with_n(n))
                .map_err(|e| Error::SolveFailed { n, source: Box::new(e) })?;
            Ok(CoeffSample { n, coefficients: field.coefficients().to_vec() })
        })
        .collect::<Result<_>>()?;
    Ok(CoeffDataset { problem: *problem, samples })
}

impl CoeffDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn coefficient_count(&self) -> usize {
        self.problem.dof_count()
    }

    pub fn n_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.n).collect()
    }

    /// `n,u_0,...,u_{K-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["n".to_string()];
        header.extend((0..self.coefficient_count()).map(|k| format!("u_{k}")));
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![fmt(s.n)];
            row.extend(s.coefficients.iter().map(|v| fmt(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(problem: HeatProblem, input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let expected = problem.dof_count();
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != expected + 1 {
                return Err(Error::Dimension(format!("row with {} coefficients, expected {expected}", vals.len() - 1)));
            }
            samples.push(CoeffSample { n: vals[0], coefficients: vals[1..].to_vec() });
        }
        Ok(Self { problem, samples })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectSample {
    pub n: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
}

/// Pointwise solution values `((n, x, y), u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectDataset {
    pub samples: Vec<DirectSample>,
}

/// Solve for each `n` and sample the solution on the L-shape part of a
/// `grid x grid` lattice.
pub fn generate_direct_dataset(problem: &HeatProblem, n_values: &[f64], grid: usize) -> Result<DirectDataset> {
    problem.validate()?;
    let pts = lshape_grid(grid, grid);
    let mut samples = Vec::with_capacity(pts.len() * n_values.len());
    for &n in n_values {
        let field =
            solve_heat_problem(&problem.with_n(n)).map_err(|e| Error::SolveFailed { n, source: Box::new(e) })?;
        for &(x, y) in &pts {
            samples.push(DirectSample { n, x, y, u: field.eval(x, y)? });
        }
    }
    Ok(DirectDataset { samples })
}

impl DirectDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `n,x,y,u`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "x", "y", "u"])?;
        for s in &self.samples {
            w.write_record([fmt(s.n), fmt(s.x), fmt(s.y), fmt(s.u)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let samples = r.deserialize().collect::<std::result::Result<Vec<DirectSample>, _>>()?;
        Ok(Self { samples })
    }
}
