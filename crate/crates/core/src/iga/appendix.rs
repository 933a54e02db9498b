//! The one-element quadratic problem `-u'' = f`, `f_n(x) = sin(n pi x)`.

use std::f64::consts::PI;

use crate::bspline::KnotVector;
use crate::error::{Error, Result};

use super::assembly::{load_vector_1d, mass_matrix_1d, stiffness_matrix_1d};
use super::linalg::{lu_solve, DenseMatrix};

/// Bernstein quadratic basis `[0,0,0,1,1,1]`.
pub fn appendix_basis() -> KnotVector {
    KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).expect("valid Bernstein knots")
}

/// The exact `3x3` Bernstein Gram matrix.
pub fn appendix_mass_matrix() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        vec![1.0 / 5.0, 1.0 / 10.0, 1.0 / 30.0],
        vec![1.0 / 10.0, 2.0 / 15.0, 1.0 / 10.0],
        vec![1.0 / 30.0, 1.0 / 10.0, 1.0 / 5.0],
    ])
    .expect("square")
}

/// Closed-form `int_0^1 sin(n pi x) B_i(x) dx` for the three Bernstein functions.
pub fn appendix_rhs(n: f64) -> [f64; 3] {
    let pn = PI * n;
    let d = PI * PI * PI * n * n * n;
    [
        (pn * pn + 2.0 * pn.cos() - 2.0) / d,
        (-2.0 * pn * pn.sin() - 4.0 * pn.cos() + 4.0) / d,
        ((2.0 - pn * pn) * pn.cos() + 2.0 * pn * pn.sin() - 2.0) / d,
    ]
}

fn check_n(n: f64) -> Result<()> {
    if !(n > 0.0 && n <= 1.0) {
        return Err(Error::InvalidProblem(format!("1D family index must lie in (0, 1], got {n}")));
    }
    Ok(())
}

/// L2 projection of `sin(n pi x)` onto the Bernstein basis on `[0,1]`.
pub fn solve_1d_appendix(n: f64) -> Result<[f64; 3]> {
    check_n(n)?;
    let u = lu_solve(&appendix_mass_matrix(), &appendix_rhs(n))?;
    Ok([u[0], u[1], u[2]])
}

/// Same projection assembled by quadrature instead of closed forms.
pub fn solve_1d_appendix_assembled(n: f64) -> Result<[f64; 3]> {
    check_n(n)?;
    let kv = appendix_basis();
    let m = mass_matrix_1d(&kv)?;
    let rhs = load_vector_1d(&kv, |x| (n * PI * x).sin(), 12)?;
    let u = lu_solve(&m, &rhs)?;
    Ok([u[0], u[1], u[2]])
}

/// Galerkin solve of `-u'' = n^2 pi^2 sin(n pi x)` on `(0, 0.5)` with
/// `u(0) = 0` and `u'(0.5) = n pi cos(n pi / 2)`, using the quadratic
/// Bernstein basis mapped onto `[0, 0.5]`.
pub fn solve_1d_weak_form(n: f64) -> Result<[f64; 3]> {
    check_n(n)?;
    let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5], 2)?;
    let mut k = stiffness_matrix_1d(&kv)?;
    let mut rhs = load_vector_1d(&kv, |x| n * n * PI * PI * (n * PI * x).sin(), 12)?;
    rhs[2] += n * PI * (n * PI * 0.5).cos();
    let row = k.row_mut(0);
    row.fill(0.0);
    row[0] = 1.0;
    rhs[0] = 0.0;
    let u = lu_solve(&k, &rhs)?;
    Ok([0.0, u[1], u[2]])
}

/// `u1 (1-x)^2 + u2 2x(1-x) + u3 x^2`.
pub fn bernstein_combination(u: &[f64; 3], x: f64) -> f64 {
    u[0] * (1.0 - x) * (1.0 - x) + u[1] * 2.0 * x * (1.0 - x) + u[2] * x * x
}

/// One dataset row: `n` and the three projection coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixSample {
    pub n: f64,
    pub u: [f64; 3],
}

/// `n = 0.01, 0.02, ..., 0.5` with their projection coefficients.
pub fn appendix_dataset() -> Result<Vec<AppendixSample>> {
    (1..=50)
        .map(|k| {
            let n = k as f64 / 100.0;
            Ok(AppendixSample { n, u: solve_1d_appendix(n)? })
        })
        .collect()
}
