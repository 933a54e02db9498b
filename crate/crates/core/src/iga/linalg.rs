use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `||A u - b||_inf / ||b||_inf`, or the absolute residual when `b = 0`.
pub fn relative_residual(a: &DenseMatrix, u: &[f64], b: &[f64]) -> f64 {
    let au = a.mul_vec(u);
    let r = au.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

/// Gaussian elimination with partial pivoting.
///
/// Rows track their last nonzero column, and zero multipliers are skipped, so
/// banded Galerkin matrices cost about `O(n * bandwidth^2)` instead of `O(n^3)`.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.size();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} for a {n}x{n} matrix", b.len())));
    }
    let scale = a.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tiny = scale * 1e-14;
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    let mut row_end: Vec<usize> = (0..n)
        .map(|i| m[i * n..(i + 1) * n].iter().rposition(|v| *v != 0.0).unwrap_or(0))
        .collect();

    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for i in (k + 1)..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if !(best > tiny) {
            return Err(Error::SingularMatrix { pivot: k });
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            rhs.swap(k, piv);
            row_end.swap(k, piv);
        }
        let end = row_end[k];
        let pivot = m[k * n + k];
        let (upper, lower) = m.split_at_mut((k + 1) * n);
        let prow = &upper[k * n..(k + 1) * n];
        for i in (k + 1)..n {
            let row = &mut lower[(i - k - 1) * n..(i - k) * n];
            let aik = row[k];
            if aik == 0.0 {
                continue;
            }
            let l = aik / pivot;
            row[k] = 0.0;
            for j in (k + 1)..=end {
                row[j] -= l * prow[j];
            }
            rhs[i] -= l * rhs[k];
            if end > row_end[i] {
                row_end[i] = end;
            }
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let row = &m[i * n..(i + 1) * n];
        let mut s = rhs[i];
        for j in (i + 1)..=row_end[i].max(i) {
            s -= row[j] * x[j];
        }
        x[i] = s / row[i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.5, -2.0, 3.25, 0.0];
        assert_eq!(lu_solve(&DenseMatrix::identity(4), &b).unwrap(), b);
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20;
        let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| g[k * n + i] * g[k * n + j]).sum();
                a.add(i, j, s);
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = lu_solve(&a, &b).unwrap();
        assert!(relative_residual(&a, &u, &b) < 1e-10);
    }

    #[test]
    fn needs_pivoting() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn singular_reports_pivot() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        match lu_solve(&a, &[1.0, 2.0, 3.0]) {
            Err(Error::SingularMatrix { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn banded_matches_dense_behaviour() {
        // tridiagonal with a far fill-in-producing pivot
        let n = 30;
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            a.set(i, i, 0.1 + i as f64 * 0.01);
            if i + 1 < n {
                a.set(i, i + 1, 1.0);
                a.set(i + 1, i, -1.0);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let u = lu_solve(&a, &b).unwrap();
        assert!(relative_residual(&a, &u, &b) < 1e-12);
    }
}
