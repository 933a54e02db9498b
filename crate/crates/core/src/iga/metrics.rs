use crate::bspline::{linspace, SplineField2D};
use crate::error::{Error, Result};

use super::heat::{in_removed_quarter, DOMAIN_LENGTH};

/// Anything that can be sampled pointwise on the parametric square.
pub trait ScalarField {
    fn value(&self, x: f64, y: f64) -> Result<f64>;
}

impl ScalarField for SplineField2D {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(x, y)
    }
}

impl<F: Fn(f64, f64) -> f64> ScalarField for F {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self(x, y))
    }
}

/// Uniform `nx x ny` grid on `[0,2]^2` with the removed quarter left out.
pub fn lshape_grid(nx: usize, ny: usize) -> Vec<(f64, f64)> {
    let xs = linspace(0.0, DOMAIN_LENGTH, nx);
    let ys = linspace(0.0, DOMAIN_LENGTH, ny);
    let mut pts = Vec::with_capacity(nx * ny);
    for &x in &xs {
        for &y in &ys {
            if !in_removed_quarter(x, y) {
                pts.push((x, y));
            }
        }
    }
    pts
}

/// Mean squared difference of two fields over the L-shape grid.
pub fn pointwise_mse<A, B>(a: &A, b: &B, nx: usize, ny: usize) -> Result<f64>
where
    A: ScalarField + ?Sized,
    B: ScalarField + ?Sized,
{
    let pts = lshape_grid(nx, ny);
    if pts.is_empty() {
        return Err(Error::Dimension(format!("empty {nx}x{ny} evaluation grid")));
    }
    let mut sum = 0.0;
    for &(x, y) in &pts {
        let d = a.value(x, y)? - b.value(x, y)?;
        sum += d * d;
    }
    Ok(sum / pts.len() as f64)
}

/// Mean squared difference of two equally long vectors.
pub fn vector_mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension(format!("mse of lengths {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}
