//! Galerkin assembly over tensor-product B-spline bases.
//!
//! Degrees of freedom are numbered `i * N_y + j` for the product `B_i(x) B_j(y)`.

use crate::bspline::KnotVector;
use crate::error::Result;
use crate::quadrature::{gauss_legendre, integrate_edge_2d, Axis, BoundaryEdge, QuadRule};

use super::linalg::DenseMatrix;

/// Bijection between `(i, j)` basis products and flat row indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub nx: usize,
    pub ny: usize,
}

impl DofMap {
    pub fn for_bases(bx: &KnotVector, by: &KnotVector) -> Self {
        Self { nx: bx.basis_count(), ny: by.basis_count() }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    #[inline]
    pub fn pair(&self, k: usize) -> (usize, usize) {
        (k / self.ny, k % self.ny)
    }
}

/// Galerkin matrix, right-hand side and dof numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
}

/// Basis data at one quadrature point along one axis.
struct AxisPoint {
    weight: f64,
    coord: f64,
    first: usize,
    values: Vec<f64>,
    ders: Vec<f64>,
}

fn axis_points(kv: &KnotVector, rule: &QuadRule) -> Result<Vec<Vec<AxisPoint>>> {
    let order = kv.degree().min(1);
    kv.spans()
        .map(|s| {
            let (a, b) = kv.span_bounds(s);
            rule.mapped(a, b)
                .map(|(x, w)| {
                    let e = kv.eval_basis_derivatives(x, order)?;
                    let ders =
                        if order == 1 { e.order(1).to_vec() } else { vec![0.0; e.values.len()] };
                    Ok(AxisPoint { weight: w, coord: x, first: e.first_index(), values: e.values, ders })
                })
                .collect()
        })
        .collect()
}

/// 1D mass matrix `int B_i B_k` with `p+1` Gauss points per span.
pub fn mass_matrix_1d(kv: &KnotVector) -> Result<DenseMatrix> {
    let rule = gauss_legendre(kv.degree() + 1)?;
    let mut m = DenseMatrix::zeros(kv.basis_count());
    for span in axis_points(kv, &rule)? {
        for pt in &span {
            for (a, va) in pt.values.iter().enumerate() {
                for (b, vb) in pt.values.iter().enumerate() {
                    m.add(pt.first + a, pt.first + b, pt.weight * va * vb);
                }
            }
        }
    }
    Ok(m)
}

/// 1D stiffness matrix `int B_i' B_k'`.
pub fn stiffness_matrix_1d(kv: &KnotVector) -> Result<DenseMatrix> {
    let rule = gauss_legendre(kv.degree().max(1))?;
    let mut k = DenseMatrix::zeros(kv.basis_count());
    for span in axis_points(kv, &rule)? {
        for pt in &span {
            for (a, da) in pt.ders.iter().enumerate() {
                for (b, db) in pt.ders.iter().enumerate() {
                    k.add(pt.first + a, pt.first + b, pt.weight * da * db);
                }
            }
        }
    }
    Ok(k)
}

/// 1D load `int f B_i` with `points` Gauss points per span.
pub fn load_vector_1d<F: Fn(f64) -> f64>(kv: &KnotVector, f: F, points: usize) -> Result<Vec<f64>> {
    let rule = gauss_legendre(points)?;
    let mut out = vec![0.0; kv.basis_count()];
    for span in axis_points(kv, &rule)? {
        for pt in &span {
            let fx = f(pt.coord);
            for (a, va) in pt.values.iter().enumerate() {
                out[pt.first + a] += pt.weight * fx * va;
            }
        }
    }
    Ok(out)
}

/// Gram system of the L2 projection of `f` onto the product space.
///
/// The matrix uses `(p+1)` points per span and direction (exact for products
/// of degree-`p` splines); the right-hand side uses `p+3` to absorb
/// non-polynomial targets.
pub fn assemble_l2_projection<F: Fn(f64, f64) -> f64>(
    bx: &KnotVector,
    by: &KnotVector,
    f: F,
) -> Result<LinearSystem> {
    let dofs = DofMap::for_bases(bx, by);
    let mut matrix = DenseMatrix::zeros(dofs.len());
    let mut rhs = vec![0.0; dofs.len()];

    let mx = axis_points(bx, &gauss_legendre(bx.degree() + 1)?)?;
    let my = axis_points(by, &gauss_legendre(by.degree() + 1)?)?;
    for sx in &mx {
        for sy in &my {
            for px in sx {
                for py in sy {
                    let w = px.weight * py.weight;
                    for (a, vxa) in px.values.iter().enumerate() {
                        for (b, vyb) in py.values.iter().enumerate() {
                            let row = dofs.index(px.first + a, py.first + b);
                            let wr = w * vxa * vyb;
                            for (c, vxc) in px.values.iter().enumerate() {
                                for (d, vyd) in py.values.iter().enumerate() {
                                    let col = dofs.index(px.first + c, py.first + d);
                                    matrix.add(row, col, wr * vxc * vyd);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let rx = axis_points(bx, &gauss_legendre(bx.degree() + 3)?)?;
    let ry = axis_points(by, &gauss_legendre(by.degree() + 3)?)?;
    for sx in &rx {
        for sy in &ry {
            for px in sx {
                for py in sy {
                    let wf = px.weight * py.weight * f(px.coord, py.coord);
                    for (a, vxa) in px.values.iter().enumerate() {
                        for (b, vyb) in py.values.iter().enumerate() {
                            rhs[dofs.index(px.first + a, py.first + b)] += wf * vxa * vyb;
                        }
                    }
                }
            }
        }
    }
    Ok(LinearSystem { matrix, rhs, dof_map: dofs })
}

/// Stiffness system `b(B_ij, B_kl) = int grad(B_ij) . grad(B_kl)`; rhs is zero.
pub fn assemble_stiffness(bx: &KnotVector, by: &KnotVector) -> Result<LinearSystem> {
    let dofs = DofMap::for_bases(bx, by);
    let mut matrix = DenseMatrix::zeros(dofs.len());
    let mx = axis_points(bx, &gauss_legendre(bx.degree() + 1)?)?;
    let my = axis_points(by, &gauss_legendre(by.degree() + 1)?)?;
    let px_len = bx.degree() + 1;
    let py_len = by.degree() + 1;
    let nloc = px_len * py_len;
    let mut gx = vec![0.0; nloc];
    let mut gy = vec![0.0; nloc];
    let mut idx = vec![0usize; nloc];
    for sx in &mx {
        for sy in &my {
            for px in sx {
                for py in sy {
                    let w = px.weight * py.weight;
                    for a in 0..px_len {
                        for b in 0..py_len {
                            let l = a * py_len + b;
                            gx[l] = px.ders[a] * py.values[b];
                            gy[l] = px.values[a] * py.ders[b];
                            idx[l] = dofs.index(px.first + a, py.first + b);
                        }
                    }
                    for r in 0..nloc {
                        let row = matrix.row_mut(idx[r]);
                        let (wx, wy) = (w * gx[r], w * gy[r]);
                        for c in 0..nloc {
                            row[idx[c]] += wx * gx[c] + wy * gy[c];
                        }
                    }
                }
            }
        }
    }
    Ok(LinearSystem { matrix, rhs: vec![0.0; dofs.len()], dof_map: dofs })
}

/// Boundary load `int_{dOmega} g B_ij dS` summed over the four outer edges.
///
/// `g(x, y, normal)` receives parametric coordinates and the outward normal.
/// `points` Gauss points are used on every span of each edge.
pub fn assemble_boundary_load<G>(
    bx: &KnotVector,
    by: &KnotVector,
    g: G,
    points: usize,
) -> Result<Vec<f64>>
where
    G: Fn(f64, f64, [f64; 2]) -> Result<f64>,
{
    let dofs = DofMap::for_bases(bx, by);
    let rule = gauss_legendre(points)?;
    let mut load = vec![0.0; dofs.len()];
    for edge in BoundaryEdge::rectangle(bx.domain(), by.domain()) {
        let (tangent, normal_kv) = match edge.fixed_axis {
            Axis::X => (by, bx),
            Axis::Y => (bx, by),
        };
        let normal = edge.outward_normal(normal_kv.domain())?;
        let fixed = normal_kv.eval_basis(edge.coordinate)?;
        for s in tangent.spans() {
            let (lo, hi) = tangent.span_bounds(s);
            for (t, w) in rule.mapped(lo, hi) {
                let (x, y) = edge.point(t);
                let gw = w * g(x, y, normal)?;
                let tb = tangent.eval_basis(t)?;
                for (a, va) in fixed.values.iter().enumerate() {
                    let fa = fixed.first_index() + a;
                    for (b, vb) in tb.values.iter().enumerate() {
                        let tbi = tb.first_index() + b;
                        let k = match edge.fixed_axis {
                            Axis::X => dofs.index(fa, tbi),
                            Axis::Y => dofs.index(tbi, fa),
                        };
                        load[k] += gw * va * vb;
                    }
                }
            }
        }
    }
    Ok(load)
}

/// `int_{dOmega} f dS` along the outer boundary (used to check load sums).
pub fn boundary_integral<F: Fn(f64, f64, [f64; 2]) -> f64>(
    bx: &KnotVector,
    by: &KnotVector,
    f: F,
    points: usize,
) -> Result<f64> {
    let rule = gauss_legendre(points)?;
    let mut total = 0.0;
    for edge in BoundaryEdge::rectangle(bx.domain(), by.domain()) {
        let (tangent, normal_kv) = match edge.fixed_axis {
            Axis::X => (by, bx),
            Axis::Y => (bx, by),
        };
        let normal = edge.outward_normal(normal_kv.domain())?;
        total += integrate_edge_2d(tangent, normal_kv, edge, |x, y| f(x, y, normal), &rule)?;
    }
    Ok(total)
}
