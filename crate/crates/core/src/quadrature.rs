//! Gauss–Legendre rules and composite integration over knot spans.

use crate::bspline::KnotVector;
use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 16;

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `npoints`-point Gauss–Legendre rule, exact for polynomials of degree `2 npoints - 1`.
pub fn gauss_legendre(npoints: usize) -> Result<QuadRule> {
    if !(1..=MAX_POINTS).contains(&npoints) {
        return Err(Error::QuadraturePoints(npoints));
    }
    let n = npoints;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        if 2 * i + 1 == n {
            x = 0.0;
            let (_, dp) = legendre(n, 0.0);
            nodes[i] = 0.0;
            weights[i] = 2.0 / (dp * dp);
            continue;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadRule { nodes, weights })
}

/// Sum of the rule mapped onto every nonempty span of `kv`.
pub fn integrate_spans<F: FnMut(f64) -> f64>(kv: &KnotVector, mut f: F, rule: &QuadRule) -> f64 {
    kv.spans()
        .map(|s| {
            let (a, b) = kv.span_bounds(s);
            rule.integrate(a, b, &mut f)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// A straight edge `{fixed_axis = coordinate}` of a parametric rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub fixed_axis: Axis,
    pub coordinate: f64,
}

impl BoundaryEdge {
    pub fn new(fixed_axis: Axis, coordinate: f64) -> Self {
        Self { fixed_axis, coordinate }
    }

    /// The four outer edges of `[x0, x1] x [y0, y1]`: left, right, bottom, top.
    pub fn rectangle(dx: (f64, f64), dy: (f64, f64)) -> [BoundaryEdge; 4] {
        [
            Self::new(Axis::X, dx.0),
            Self::new(Axis::X, dx.1),
            Self::new(Axis::Y, dy.0),
            Self::new(Axis::Y, dy.1),
        ]
    }

    /// Outward unit normal relative to the rectangle whose normal-axis domain is `normal_domain`.
    pub fn outward_normal(&self, normal_domain: (f64, f64)) -> Result<[f64; 2]> {
        let sign = if self.coordinate == normal_domain.0 {
            -1.0
        } else if self.coordinate == normal_domain.1 {
            1.0
        } else {
            return Err(Error::InvalidEdge(format!(
                "{:?} = {} is not on the boundary [{}, {}]",
                self.fixed_axis, self.coordinate, normal_domain.0, normal_domain.1
            )));
        };
        Ok(match self.fixed_axis {
            Axis::X => [sign, 0.0],
            Axis::Y => [0.0, sign],
        })
    }

    /// Point on the edge at tangential parameter `t`.
    pub fn point(&self, t: f64) -> (f64, f64) {
        match self.fixed_axis {
            Axis::X => (self.coordinate, t),
            Axis::Y => (t, self.coordinate),
        }
    }
}

/// Composite Gauss integral of `f(x, y)` along an outer edge.
///
/// `kv_tangent` supplies the spans along the edge; `kv_normal` is the basis in
/// the fixed direction and is only used to check that the edge is on the boundary.
pub fn integrate_edge_2d<F: FnMut(f64, f64) -> f64>(
    kv_tangent: &KnotVector,
    kv_normal: &KnotVector,
    edge: BoundaryEdge,
    mut f: F,
    rule: &QuadRule,
) -> Result<f64> {
    edge.outward_normal(kv_normal.domain())?;
    Ok(integrate_spans(
        kv_tangent,
        |t| {
            let (x, y) = edge.point(t);
            f(x, y)
        },
        rule,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Classical tabulated rules used as cross-checks for the Newton solve.
    fn tabulated(n: usize) -> (Vec<f64>, Vec<f64>) {
        match n {
            1 => (vec![0.0], vec![2.0]),
            2 => {
                let a = 1.0 / 3f64.sqrt();
                (vec![-a, a], vec![1.0, 1.0])
            }
            3 => {
                let a = (3.0f64 / 5.0).sqrt();
                (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            4 => {
                let s = (6.0f64 / 5.0).sqrt();
                let a = ((3.0 - 2.0 * s) / 7.0).sqrt();
                let b = ((3.0 + 2.0 * s) / 7.0).sqrt();
                let wa = (18.0 + 30f64.sqrt()) / 36.0;
                let wb = (18.0 - 30f64.sqrt()) / 36.0;
                (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
            }
            5 => {
                let s = 2.0 * (10.0f64 / 7.0).sqrt();
                let a = (5.0 - s).sqrt() / 3.0;
                let b = (5.0 + s).sqrt() / 3.0;
                let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
                let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
                (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn matches_tabulated_rules() {
        for n in 1..=5 {
            let rule = gauss_legendre(n).unwrap();
            let (x, w) = tabulated(n);
            for k in 0..n {
                assert!((rule.nodes[k] - x[k]).abs() < 1e-15, "n={n} node {k}");
                assert!((rule.weights[k] - w[k]).abs() < 1e-15, "n={n} weight {k}");
            }
        }
    }

    #[test]
    fn weights_sum_and_symmetry() {
        for n in 1..=MAX_POINTS {
            let r = gauss_legendre(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            assert!(r.weights.iter().all(|w| *w > 0.0));
            for k in 0..n {
                assert_eq!(r.nodes[k], -r.nodes[n - 1 - k]);
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        for n in 1..=MAX_POINTS {
            let r = gauss_legendre(n).unwrap();
            for deg in 0..=(2 * n - 1) {
                let got = r.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn three_point_quartic() {
        let r = gauss_legendre(3).unwrap();
        assert!((r.integrate(-1.0, 1.0, |x| x.powi(4)) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn out_of_range() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(17).is_err());
    }

    #[test]
    fn span_integration() {
        let kv = KnotVector::new(vec![0., 0., 0., 1., 1., 1.], 2).unwrap();
        let r = gauss_legendre(3).unwrap();
        assert!((integrate_spans(&kv, |_| 1.0, &r) - 1.0).abs() < 1e-15);
        assert!((integrate_spans(&kv, |x| (1.0 - x).powi(4), &r) - 0.2).abs() < 1e-12);

        let n = 0.25;
        let pi = std::f64::consts::PI;
        let r8 = gauss_legendre(12).unwrap();
        let got = integrate_spans(&kv, |x| (n * pi * x).sin() * (1.0 - x).powi(2), &r8);
        let expect = (pi * pi * n * n + 2.0 * (pi * n).cos() - 2.0) / (pi * pi * pi * n * n * n);
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn composite_is_additive() {
        let kv = KnotVector::open_uniform(0.0, 2.0, 5, 2).unwrap();
        let r = gauss_legendre(6).unwrap();
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let whole = integrate_spans(&kv, f, &r);
        let parts: f64 = kv
            .spans()
            .map(|s| {
                let (a, b) = kv.span_bounds(s);
                r.integrate(a, b, f)
            })
            .sum();
        assert!((whole - parts).abs() < 1e-14);
    }

    #[test]
    fn edge_integrals() {
        let kv = KnotVector::open_uniform(0.0, 2.0, 4, 2).unwrap();
        let r = gauss_legendre(3).unwrap();
        for edge in BoundaryEdge::rectangle(kv.domain(), kv.domain()) {
            let v = integrate_edge_2d(&kv, &kv, edge, |_, _| 1.0, &r).unwrap();
            assert!((v - 2.0).abs() < 1e-14);
        }
        let bad = BoundaryEdge::new(Axis::X, 0.5);
        assert!(matches!(
            integrate_edge_2d(&kv, &kv, bad, |_, _| 1.0, &r),
            Err(Error::InvalidEdge(_))
        ));
    }

    #[test]
    fn edge_reduces_to_one_dimension() {
        let kv = KnotVector::open_uniform(0.0, 2.0, 4, 2).unwrap();
        let r = gauss_legendre(3).unwrap();
        let basis = |i: usize, t: f64| kv.eval_basis(t).unwrap().to_dense(kv.basis_count(), 0)[i];
        for i in 0..kv.basis_count() {
            let edge = BoundaryEdge::new(Axis::Y, 0.0);
            let v = integrate_edge_2d(&kv, &kv, edge, |x, _| basis(i, x), &r).unwrap();
            let w = integrate_spans(&kv, |t| basis(i, t), &r);
            assert!((v - w).abs() < 1e-15);
        }
    }
}
