//! 1D B-spline bases and tensor-product spline fields.
//!
//! Basis evaluation uses the local Cox–de Boor triangle: at a parameter `x`
//! inside knot span `[t_s, t_{s+1})` only `B_{s-p}, ..., B_s` are nonzero,
//! and all `p+1` of them (and their derivatives) are produced in `O(p^2)`.
//! The last nonempty span is treated as closed, so the right end of the
//! domain evaluates like every other point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-decreasing knot sequence together with the polynomial degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots is too short for degree {degree} (need at least {})",
                knots.len(),
                2 * (degree + 1)
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }
        if let Some(w) = knots.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots(format!(
                "knots decrease at position {}: {} > {}",
                w + 1,
                knots[w],
                knots[w + 1]
            )));
        }
        let mut run = 1;
        for w in knots.windows(2) {
            run = if w[0] == w[1] { run + 1 } else { 1 };
            if run > degree + 1 {
                return Err(Error::InvalidKnots(format!(
                    "knot {} has multiplicity above degree + 1 = {}",
                    w[0],
                    degree + 1
                )));
            }
        }
        let kv = Self { knots, degree };
        let (lo, hi) = kv.domain();
        if !(hi > lo) {
            return Err(Error::InvalidKnots("empty parametric domain".into()));
        }
        Ok(kv)
    }

    /// Open uniform knot vector on `[a, b]` with `elements` equal spans.
    pub fn open_uniform(a: f64, b: f64, elements: usize, degree: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidKnots("need at least one element".into()));
        }
        let mut knots = vec![a; degree + 1];
        let h = (b - a) / elements as f64;
        knots.extend((1..elements).map(|e| a + h * e as f64));
        knots.extend(std::iter::repeat(b).take(degree + 1));
        Self::new(knots, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `len - p - 1`.
    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Parametric domain `[t_p, t_N]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.basis_count()])
    }

    /// Support interval `[t_i, t_{i+p+1}]` of basis function `i`.
    pub fn support(&self, i: usize) -> (f64, f64) {
        (self.knots[i], self.knots[i + self.degree + 1])
    }

    /// Distinct nonempty spans `(t_s, t_{s+1})` inside the domain, as knot indices `s`.
    pub fn spans(&self) -> impl Iterator<Item = usize> + '_ {
        (self.degree..self.basis_count()).filter(move |&s| self.knots[s] < self.knots[s + 1])
    }

    pub fn span_bounds(&self, span: usize) -> (f64, f64) {
        (self.knots[span], self.knots[span + 1])
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::OutsideDomain { value: x, lo, hi })
        }
    }

    /// Index `s` of the span containing `x`, with the last span closed on the right.
    pub fn find_span(&self, x: f64) -> Result<usize> {
        self.check_domain(x)?;
        let n = self.basis_count();
        let p = self.degree;
        if x >= self.knots[n] {
            // right end: last nonempty span
            let mut s = n - 1;
            while self.knots[s] == self.knots[s + 1] {
                s -= 1;
            }
            return Ok(s);
        }
        let (mut lo, mut hi) = (p, n);
        // invariant: knots[lo] <= x < knots[hi]
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(lo)
    }

    /// The `p+1` nonzero basis values at `x`.
    pub fn eval_basis(&self, x: f64) -> Result<BasisEval> {
        let span = self.find_span(x)?;
        Ok(BasisEval {
            span,
            degree: self.degree,
            values: self.basis_on_span(span, x),
            derivatives: Vec::new(),
        })
    }

    /// Nonzero basis values and derivatives of orders `1..=max_order` at `x`.
    pub fn eval_basis_derivatives(&self, x: f64, max_order: usize) -> Result<BasisEval> {
        if max_order > self.degree {
            return Err(Error::DerivativeOrder { order: max_order, degree: self.degree });
        }
        let span = self.find_span(x)?;
        let mut ders = self.ders_on_span(span, x, max_order);
        let values = ders.remove(0);
        Ok(BasisEval { span, degree: self.degree, values, derivatives: ders })
    }

    fn basis_on_span(&self, span: usize, x: f64) -> Vec<f64> {
        let p = self.degree;
        let t = &self.knots;
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Rows `0..=order` of the derivative table, each of length `p+1`.
    fn ders_on_span(&self, span: usize, x: f64, order: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let t = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                // lower triangle holds knot differences
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=order {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for k in 1..=order {
            for v in ders[k].iter_mut() {
                *v *= factor;
            }
            factor *= (p - k) as f64;
        }
        ders
    }
}

/// Nonzero basis values (and optionally derivatives) at one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub span: usize,
    pub degree: usize,
    /// `values[j]` is `B_{span-p+j}(x)`.
    pub values: Vec<f64>,
    /// `derivatives[k-1][j]` is the `k`-th derivative of `B_{span-p+j}` at `x`.
    pub derivatives: Vec<Vec<f64>>,
}

impl BasisEval {
    /// Global index of the first nonzero basis function.
    pub fn first_index(&self) -> usize {
        self.span - self.degree
    }

    /// Derivative row of the given order; order 0 is the values.
    pub fn order(&self, k: usize) -> &[f64] {
        if k == 0 {
            &self.values
        } else {
            &self.derivatives[k - 1]
        }
    }

    /// Dense length-`n` vector of all basis values (zeros outside the active window).
    pub fn to_dense(&self, n: usize, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (j, v) in self.order(k).iter().enumerate() {
            out[self.first_index() + j] = *v;
        }
        out
    }
}

/// `u(x, y) = sum_ij u_ij B_i(x) B_j(y)` over a tensor-product basis.
///
/// Coefficients are stored row-major: `coefficients[i * N_y + j] = u_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineField2D {
    basis_x: KnotVector,
    basis_y: KnotVector,
    coefficients: Vec<f64>,
}

impl SplineField2D {
    pub fn new(basis_x: KnotVector, basis_y: KnotVector, coefficients: Vec<f64>) -> Result<Self> {
        let expected = basis_x.basis_count() * basis_y.basis_count();
        if coefficients.len() != expected {
            return Err(Error::Dimension(format!(
                "{} coefficients for a {}x{} basis",
                coefficients.len(),
                basis_x.basis_count(),
                basis_y.basis_count()
            )));
        }
        Ok(Self { basis_x, basis_y, coefficients })
    }

    pub fn constant(basis_x: KnotVector, basis_y: KnotVector, value: f64) -> Self {
        let n = basis_x.basis_count() * basis_y.basis_count();
        Self { basis_x, basis_y, coefficients: vec![value; n] }
    }

    pub fn basis_x(&self) -> &KnotVector {
        &self.basis_x
    }

    pub fn basis_y(&self) -> &KnotVector {
        &self.basis_y
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.coefficients[i * self.basis_y.basis_count() + j]
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let bx = self.basis_x.eval_basis(x)?;
        let by = self.basis_y.eval_basis(y)?;
        let ny = self.basis_y.basis_count();
        let (i0, j0) = (bx.first_index(), by.first_index());
        let mut sum = 0.0;
        for (a, vx) in bx.values.iter().enumerate() {
            let row = (i0 + a) * ny + j0;
            let inner: f64 =
                by.values.iter().zip(&self.coefficients[row..]).map(|(vy, c)| vy * c).sum();
            sum += vx * inner;
        }
        Ok(sum)
    }

    /// Value and gradient `(u, du/dx, du/dy)`.
    pub fn eval_with_gradient(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        let order_x = self.basis_x.degree().min(1);
        let order_y = self.basis_y.degree().min(1);
        let bx = self.basis_x.eval_basis_derivatives(x, order_x)?;
        let by = self.basis_y.eval_basis_derivatives(y, order_y)?;
        let ny = self.basis_y.basis_count();
        let zeros = vec![0.0; bx.values.len().max(by.values.len())];
        let dx = if order_x == 1 { bx.order(1) } else { &zeros[..bx.values.len()] };
        let dy = if order_y == 1 { by.order(1) } else { &zeros[..by.values.len()] };
        let (mut u, mut ux, mut uy) = (0.0, 0.0, 0.0);
        for a in 0..bx.values.len() {
            for b in 0..by.values.len() {
                let c = self.coefficients[(bx.first_index() + a) * ny + by.first_index() + b];
                u += c * bx.values[a] * by.values[b];
                ux += c * dx[a] * by.values[b];
                uy += c * bx.values[a] * dy[b];
            }
        }
        Ok((u, ux, uy))
    }

    pub fn sample_grid(&self, nx: usize, ny: usize) -> Result<FieldGrid> {
        FieldGrid::sample(self.basis_x.domain(), self.basis_y.domain(), nx, ny, |x, y| {
            self.eval(x, y)
        })
    }
}

/// `n` equispaced points from `a` to `b`, with both ends hit exactly.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Values of a field on a uniform tensor grid; `values[i * ys.len() + j] = u(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl FieldGrid {
    pub fn sample<F>(dx: (f64, f64), dy: (f64, f64), nx: usize, ny: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        if nx < 2 || ny < 2 {
            return Err(Error::Dimension(format!("grid {nx}x{ny} needs at least 2 points per axis")));
        }
        let xs = linspace(dx.0, dx.1, nx);
        let ys = linspace(dy.0, dy.1, ny);
        let mut values = Vec::with_capacity(nx * ny);
        for &x in &xs {
            for &y in &ys {
                values.push(f(x, y)?);
            }
        }
        Ok(Self { xs, ys, values })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    /// `(x, y, u)` triples in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let ny = self.ys.len();
        self.values.iter().enumerate().map(move |(k, &u)| (self.xs[k / ny], self.ys[k % ny], u))
    }
}
