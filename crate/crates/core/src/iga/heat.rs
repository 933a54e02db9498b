//! The L-shaped heat problem: `Laplace(u) = 0` on `[0,2]^2` minus the lower-left
//! quarter, `u = 0` on the two re-entrant edges and `du/dv = g` on the outer edges.
//!
//! The removed quarter is realised by constraining every basis product that is
//! nonzero somewhere in the open quarter `(0,1)^2`. Since the knot `1.0` is
//! repeated `p` times the basis is only `C^0` across the corner lines, and the
//! remaining products all vanish on the closed quarter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bspline::{KnotVector, SplineField2D};
use crate::error::{Error, Result};

use super::assembly::{assemble_boundary_load, assemble_stiffness, DofMap, LinearSystem};
use super::linalg::lu_solve;

/// Side length of the parametric square.
pub const DOMAIN_LENGTH: f64 = 2.0;
/// Coordinate of the re-entrant corner lines.
pub const CORNER: f64 = 1.0;

/// Heating flux on an outer edge, in coordinates centred on the square (`[-1,1]^2`).
///
/// `g = v_i 2 pi n cos(2 pi n x_i) sin(2 pi n x_j)` where `i` is the axis of the
/// outward normal `v` and `j` the other axis.
pub fn heating_g(n: f64, x: f64, y: f64, normal: [f64; 2]) -> Result<f64> {
    let k = 2.0 * PI * n;
    match normal {
        [v, w] if w == 0.0 && v.abs() == 1.0 => Ok(v * k * (k * x).cos() * (k * y).sin()),
        [w, v] if w == 0.0 && v.abs() == 1.0 => Ok(v * k * (k * y).cos() * (k * x).sin()),
        [a, b] => Err(Error::InvalidNormal(a, b)),
    }
}

/// Parameters of one heat solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatProblem {
    /// Heating frequency parameter.
    pub n: f64,
    /// Elements per direction; even so that the corner line is a mesh line.
    pub mesh: usize,
    pub degree: usize,
}

impl HeatProblem {
    pub fn new(n: f64, mesh: usize, degree: usize) -> Result<Self> {
        let p = Self { n, mesh, degree };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidProblem(format!("heating parameter n = {} must be > 0", self.n)));
        }
        if self.mesh < 2 || self.mesh % 2 != 0 {
            return Err(Error::InvalidProblem(format!("mesh = {} must be even and >= 2", self.mesh)));
        }
        if self.degree == 0 {
            return Err(Error::InvalidProblem("degree must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_n(&self, n: f64) -> Self {
        Self { n, ..*self }
    }

    /// Open uniform knots on `[0,2]` with the corner knot repeated `degree` times.
    pub fn knot_vector(&self) -> Result<KnotVector> {
        lshape_knot_vector(self.mesh, self.degree)
    }

    pub fn basis_count(&self) -> usize {
        self.mesh + 2 * self.degree - 1
    }

    pub fn dof_count(&self) -> usize {
        self.basis_count().pow(2)
    }

    /// Flat indices of the constrained basis products.
    pub fn dirichlet_dofs(&self) -> Result<Vec<usize>> {
        let kv = self.knot_vector()?;
        Ok(dirichlet_dofs(&kv, &kv))
    }
}

pub fn lshape_knot_vector(mesh: usize, degree: usize) -> Result<KnotVector> {
    if mesh < 2 || mesh % 2 != 0 {
        return Err(Error::InvalidProblem(format!("mesh = {mesh} must be even and >= 2")));
    }
    let mut knots = vec![0.0; degree + 1];
    for k in 1..mesh {
        let t = DOMAIN_LENGTH * k as f64 / mesh as f64;
        let reps = if 2 * k == mesh { degree } else { 1 };
        knots.extend(std::iter::repeat(t).take(reps));
    }
    knots.extend(std::iter::repeat(DOMAIN_LENGTH).take(degree + 1));
    KnotVector::new(knots, degree)
}

/// Basis products nonzero somewhere in the open lower-left quarter.
pub fn dirichlet_dofs(bx: &KnotVector, by: &KnotVector) -> Vec<usize> {
    let dofs = DofMap::for_bases(bx, by);
    let cx = bx.domain().0 + 0.5 * (bx.domain().1 - bx.domain().0);
    let cy = by.domain().0 + 0.5 * (by.domain().1 - by.domain().0);
    let in_x: Vec<usize> = (0..bx.basis_count()).filter(|&i| bx.support(i).0 < cx).collect();
    let in_y: Vec<usize> = (0..by.basis_count()).filter(|&j| by.support(j).0 < cy).collect();
    let mut out = Vec::with_capacity(in_x.len() * in_y.len());
    for &i in &in_x {
        for &j in &in_y {
            out.push(dofs.index(i, j));
        }
    }
    out
}

/// True for points of the removed (open) lower-left quarter.
pub fn in_removed_quarter(x: f64, y: f64) -> bool {
    x < CORNER && y < CORNER
}

/// Default Gauss points per edge span for the Neumann load.
///
/// `g` oscillates with wavenumber `2 pi n`; `p + 6` points keep the load within
/// 1e-10 of the doubled rule for `n <= 2` on meshes of 10 elements or finer.
pub fn neumann_points(degree: usize) -> usize {
    degree + 6
}

/// Neumann load `int_{dOmega} g B_ij dS` for heating parameter `n`.
pub fn assemble_neumann_load(bx: &KnotVector, by: &KnotVector, n: f64) -> Result<Vec<f64>> {
    let points = neumann_points(bx.degree().max(by.degree()));
    assemble_neumann_load_with(bx, by, n, points)
}

pub fn assemble_neumann_load_with(
    bx: &KnotVector,
    by: &KnotVector,
    n: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let (cx, cy) = (centre(bx), centre(by));
    assemble_boundary_load(bx, by, |x, y, v| heating_g(n, x - cx, y - cy, v), points)
}

fn centre(kv: &KnotVector) -> f64 {
    let (a, b) = kv.domain();
    0.5 * (a + b)
}

/// Overwrite constrained rows with identity rows and zero right-hand side.
pub fn apply_dirichlet(system: &mut LinearSystem, constrained: &[usize]) {
    for &k in constrained {
        let row = system.matrix.row_mut(k);
        row.fill(0.0);
        row[k] = 1.0;
        system.rhs[k] = 0.0;
    }
}

/// Constrain every dof of `problem` that reaches into the removed quarter.
pub fn apply_dirichlet_lshape(system: &mut LinearSystem, problem: &HeatProblem) -> Result<()> {
    let kv = problem.knot_vector()?;
    if system.dof_map.len() != kv.basis_count() * kv.basis_count() {
        return Err(Error::Dimension(format!(
            "system has {} dofs, problem has {}",
            system.dof_map.len(),
            kv.basis_count() * kv.basis_count()
        )));
    }
    apply_dirichlet(system, &dirichlet_dofs(&kv, &kv));
    Ok(())
}

/// Stiffness + Neumann load + Dirichlet rows for the given problem.
pub fn assemble_heat_system(problem: &HeatProblem) -> Result<LinearSystem> {
    problem.validate()?;
    let kv = problem.knot_vector()?;
    let mut system = assemble_stiffness(&kv, &kv)?;
    system.rhs = assemble_neumann_load(&kv, &kv, problem.n)?;
    apply_dirichlet_lshape(&mut system, problem)?;
    Ok(system)
}

/// Dense direct solve of an assembled system.
pub fn solve_system(system: &LinearSystem) -> Result<Vec<f64>> {
    lu_solve(&system.matrix, &system.rhs)
}

/// Solve the heat problem and return the spline solution.
pub fn solve_heat_problem(problem: &HeatProblem) -> Result<SplineField2D> {
    let system = assemble_heat_system(problem)?;
    let mut u = solve_system(&system)?;
    // constrained rows read u_k = 0; store that exactly rather than the LU round-off
    let kv = problem.knot_vector()?;
    for k in dirichlet_dofs(&kv, &kv) {
        u[k] = 0.0;
    }
    SplineField2D::new(kv.clone(), kv, u)
}
