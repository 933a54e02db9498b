//! Closed-form gradients of the single-neuron sigmoid networks used in the 1D
//! examples, their sequential training loops, and engine-based equivalents.
//!
//! The closed forms are test fixtures: the generic backprop and jet code must
//! reproduce them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::iga::appendix::{appendix_dataset, bernstein_combination, solve_1d_appendix};
use crate::nn::{sgd_step, Activation, JetAdjoint, Mlp};

/// `c * sigmoid(a x + b) + d` as a 1-1-1 network.
pub fn single_sigmoid(params: [f64; 4]) -> Mlp {
    Mlp::from_parts(vec![1, 1, 1], vec![Activation::Sigmoid, Activation::Identity], params.to_vec())
        .expect("1-1-1 layout")
}

/// `c * sigmoid(a1 n + a2 x + b) + d` as a 2-1-1 network.
pub fn two_input_sigmoid(params: [f64; 5]) -> Mlp {
    Mlp::from_parts(vec![2, 1, 1], vec![Activation::Sigmoid, Activation::Identity], params.to_vec())
        .expect("2-1-1 layout")
}

fn to4(p: &[f64]) -> [f64; 4] {
    [p[0], p[1], p[2], p[3]]
}

// ---------------------------------------------------------------------------
// coefficient network ANN_i(n)

/// Partials of `0.5 (ANN(n) - u)^2` with respect to `(a, b, c, d)`.
pub fn oracle_gradients_appendix_a(params: [f64; 4], n: f64, u: f64) -> [f64; 4] {
    let [a, b, c, d] = params;
    let e = (-a * n - b).exp();
    let ann = c / (1.0 + e) + d;
    let r = ann - u;
    [
        c * n * e * r / ((e + 1.0) * (e + 1.0)),
        c * e * r / ((e + 1.0) * (e + 1.0)),
        r / (e + 1.0),
        r,
    ]
}

pub fn engine_gradients_appendix_a(params: [f64; 4], n: f64, u: f64) -> Result<[f64; 4]> {
    let net = single_sigmoid(params);
    let (y, cache) = net.forward(&[n])?;
    Ok(to4(&net.backward(&cache, &[y[0] - u])?))
}

/// Sequential per-parameter updates over the sampled dataset rows, one
/// network per coefficient.
pub fn appendix_a_reference_training(starts: [[f64; 4]; 3], eta: f64, order: &[usize]) -> Result<[[f64; 4]; 3]> {
    let data = appendix_dataset()?;
    let mut p = starts;
    for &i in order {
        let s = &data[i];
        for (k, pk) in p.iter_mut().enumerate() {
            let u = s.u[k];
            let n = s.n;
            let [a, b, c, d] = *pk;
            let ev = c / (1.0 + (-(a * n + b)).exp()) + d;
            let e = (-a * n - b).exp();
            let a = a - eta * c * n * e * (ev - u) / ((e + 1.0) * (e + 1.0));
            let e = (-a * n - b).exp();
            let b = b - eta * c * e * (ev - u) / ((e + 1.0) * (e + 1.0));
            let e = (-a * n - b).exp();
            let c = c - eta * (ev - u) / (e + 1.0);
            let d = d - eta * (ev - u);
            *pk = [a, b, c, d];
        }
    }
    Ok(p)
}

/// Same pass with joint SGD steps through the generic engine.
pub fn appendix_a_engine_training(starts: [[f64; 4]; 3], eta: f64, order: &[usize]) -> Result<[Mlp; 3]> {
    let data = appendix_dataset()?;
    let mut nets = starts.map(single_sigmoid);
    for &i in order {
        let s = &data[i];
        for (k, net) in nets.iter_mut().enumerate() {
            let (y, cache) = net.forward(&[s.n])?;
            let g = net.backward(&cache, &[y[0] - s.u[k]])?;
            sgd_step(net, &g, eta)?;
        }
    }
    Ok(nets)
}

/// Starting points that worked best in the 256-combination sweep.
pub const APPENDIX_A_STARTS: [[f64; 4]; 3] = [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 10.0, -1.0], [3.0, 3.0, 10.0, -1.0]];

// ---------------------------------------------------------------------------
// direct network ANN(n, x)

/// Partials of `0.5 (ANN(n, x) - y)^2` with respect to `(a1, a2, b, c, d)`.
pub fn oracle_gradients_appendix_b(params: [f64; 5], n: f64, x: f64, y: f64) -> [f64; 5] {
    let [a1, a2, b, c, d] = params;
    let e = (-a1 * n - a2 * x - b).exp();
    let r = c / (e + 1.0) + d - y;
    let q = (e + 1.0) * (e + 1.0);
    [c * n * e * r / q, c * x * e * r / q, c * e * r / q, r / (e + 1.0), r]
}

pub fn engine_gradients_appendix_b(params: [f64; 5], n: f64, x: f64, y: f64) -> Result<[f64; 5]> {
    let net = two_input_sigmoid(params);
    let (out, cache) = net.forward(&[n, x])?;
    let g = net.backward(&cache, &[out[0] - y])?;
    Ok([g[0], g[1], g[2], g[3], g[4]])
}

/// `(n, x, y)` rows with `n, x` on `0.01, 0.011, ..., 0.5`.
pub fn appendix_b_dataset() -> Result<Vec<[f64; 3]>> {
    let grid: Vec<f64> = (10..=500).map(|k| k as f64 / 1000.0).collect();
    let mut rows = Vec::with_capacity(grid.len() * grid.len());
    for &n in &grid {
        let u = solve_1d_appendix(n)?;
        for &x in &grid {
            rows.push([n, x, bernstein_combination(&u, x)]);
        }
    }
    Ok(rows)
}

/// Sequential per-parameter updates over the sampled rows.
pub fn appendix_b_reference_training(start: [f64; 5], eta: f64, data: &[[f64; 3]], order: &[usize]) -> [f64; 5] {
    let [mut a1, mut a2, mut b, mut c, mut d] = start;
    for &i in order {
        let [n, x, y] = data[i];
        let ex = |a1: f64, a2: f64, b: f64| (-a1 * n - a2 * x - b).exp();
        let e = ex(a1, a2, b);
        a1 -= eta * c * n * e * (c / (e + 1.0) + d - y) / ((e + 1.0) * (e + 1.0));
        let e = ex(a1, a2, b);
        a2 -= eta * c * x * e * (c / (e + 1.0) + d - y) / ((e + 1.0) * (e + 1.0));
        let e = ex(a1, a2, b);
        b -= eta * c * e * (c / (e + 1.0) + d - y) / ((e + 1.0) * (e + 1.0));
        let e = ex(a1, a2, b);
        c -= eta * (c / (e + 1.0) + d - y) / (e + 1.0);
        d -= eta * (c / (e + 1.0) + d - y);
    }
    [a1, a2, b, c, d]
}

// ---------------------------------------------------------------------------
// 1D physics-informed network

/// Loss terms of the 1D physics-informed network and their partials with
/// respect to `(a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinnTerms1d {
    /// `0.5 (u''(x) + n^2 pi^2 sin(n pi x))^2`.
    pub error1: f64,
    /// `0.5 u(0)^2`.
    pub error2: f64,
    /// `0.5 (u'(0.5) - n pi cos(n pi / 2))^2`.
    pub error3: f64,
    pub d_error1: [f64; 4],
    pub d_error2: [f64; 4],
    pub d_error3: [f64; 4],
}

pub fn oracle_gradients_appendix_c(params: [f64; 4], x: f64, n: f64) -> PinnTerms1d {
    let [a, b, c, d] = params;
    let e = (-a * x - b).exp();
    let e2 = (-2.0 * a * x - 2.0 * b).exp();
    let e3 = (-3.0 * a * x - 3.0 * b).exp();
    let q = e + 1.0;
    let shape = 2.0 * a * a * e2 / q.powi(3) - a * a * e / q.powi(2);
    let pxx = c * shape;
    let f = pxx + n * n * PI * PI * (n * PI * x).sin();
    let dpxx_da = c
        * (a * a * x * e / q.powi(2) - 6.0 * a * a * x * e2 / q.powi(3) + 6.0 * a * a * x * e3 / q.powi(4)
            - 2.0 * a * e / q.powi(2)
            + 4.0 * a * e2 / q.powi(3));
    let ep = (a * x + b).exp();
    let dpxx_db = c * (a * a * ep * (-4.0 * ep + (2.0 * a * x + 2.0 * b).exp() + 1.0) / (ep + 1.0).powi(4));
    let dpxx_dc = shape;

    let p0 = c / (1.0 + (-b).exp()) + d;
    let dp0_db = (-b).exp() * c / ((-b).exp() + 1.0).powi(2);
    let dp0_dc = 1.0 / ((-b).exp() + 1.0);

    let eh = (-0.5 * a - b).exp();
    let p1 = a * c * eh / (eh + 1.0).powi(2);
    let g = p1 - n * PI * (n * PI * 0.5).cos();
    let dp1_da = c * (b - a).exp() * ((1.0 - 0.5 * a) * (2.0 * a + b).exp() + (0.5 * a + 1.0) * (1.5 * a).exp())
        / ((0.5 * a + b).exp() + 1.0).powi(3);
    let dp1_db =
        a * c * (b - 0.5 * a).exp() * (a.exp() - (1.5 * a + b).exp()) / ((0.5 * a + b).exp() + 1.0).powi(3);
    let dp1_dc = a * eh / (eh + 1.0).powi(2);

    PinnTerms1d {
        error1: 0.5 * f * f,
        error2: 0.5 * p0 * p0,
        error3: 0.5 * g * g,
        d_error1: [f * dpxx_da, f * dpxx_db, f * dpxx_dc, 0.0],
        d_error2: [0.0, p0 * dp0_db, p0 * dp0_dc, p0],
        d_error3: [g * dp1_da, g * dp1_db, g * dp1_dc, 0.0],
    }
}

/// Gradients of the three terms through the generic jet engine.
pub fn engine_gradients_appendix_c(params: [f64; 4], x: f64, n: f64) -> Result<PinnTerms1d> {
    let net = single_sigmoid(params);
    let (e1, g1) = pinn_1d_term_pde(&net, x, n)?;
    let (e2, g2) = pinn_1d_term_left(&net)?;
    let (e3, g3) = pinn_1d_term_right(&net, n)?;
    Ok(PinnTerms1d {
        error1: e1,
        error2: e2,
        error3: e3,
        d_error1: to4(&g1),
        d_error2: to4(&g2),
        d_error3: to4(&g3),
    })
}

fn pinn_1d_term_pde(net: &Mlp, x: f64, n: f64) -> Result<(f64, Vec<f64>)> {
    let jet = net.jet_forward(&[x], 2)?;
    let f = jet.second(0)[0] + n * n * PI * PI * (n * PI * x).sin();
    let mut adj = JetAdjoint::zeros(1, 1);
    adj.second[0] = f;
    let mut g = vec![0.0; net.param_count()];
    net.jet_backward(&jet, &adj, &mut g)?;
    Ok((0.5 * f * f, g))
}

fn pinn_1d_term_left(net: &Mlp) -> Result<(f64, Vec<f64>)> {
    let (u, cache) = net.forward(&[0.0])?;
    Ok((0.5 * u[0] * u[0], net.backward(&cache, &[u[0]])?))
}

fn pinn_1d_term_right(net: &Mlp, n: f64) -> Result<(f64, Vec<f64>)> {
    let jet = net.jet_forward(&[0.5], 1)?;
    let r = jet.first(0)[0] - n * PI * (n * PI * 0.5).cos();
    let mut adj = JetAdjoint::zeros(1, 1);
    adj.first[0] = r;
    let mut g = vec![0.0; net.param_count()];
    net.jet_backward(&jet, &adj, &mut g)?;
    Ok((0.5 * r * r, g))
}

/// Start point of the 1D physics-informed run.
pub const APPENDIX_C_START: [f64; 4] = [1.0, 1.0, 3.0, 1.0];

/// Collocation points `0.01, 0.02, ..., 0.5`.
pub fn appendix_c_points() -> Vec<f64> {
    (1..=50).map(|k| k as f64 / 100.0).collect()
}

/// `count` uniformly drawn dataset indices.
pub fn sample_indices(count: usize, len: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..len)).collect()
}

/// Sequential per-parameter updates for the three terms at each sampled point,
/// written out with the closed-form partials.
pub fn appendix_c_reference_training(start: [f64; 4], n: f64, eta: f64, order: &[usize]) -> [f64; 4] {
    let xs = appendix_c_points();
    let mut p = start;
    for &i in order {
        let x = xs[i];
        for k in 0..4 {
            let t = oracle_gradients_appendix_c(p, x, n);
            p[k] -= eta * t.d_error1[k];
        }
        for k in 0..4 {
            let t = oracle_gradients_appendix_c(p, x, n);
            p[k] -= eta * t.d_error2[k];
        }
        for k in 0..4 {
            let t = oracle_gradients_appendix_c(p, x, n);
            p[k] -= eta * t.d_error3[k];
        }
    }
    p
}

/// The same loop on the generic network, one joint SGD step per term.
pub fn appendix_c_engine_training(start: [f64; 4], n: f64, eta: f64, order: &[usize]) -> Result<Mlp> {
    let xs = appendix_c_points();
    let mut net = single_sigmoid(start);
    for &i in order {
        let (_, g) = pinn_1d_term_pde(&net, xs[i], n)?;
        sgd_step(&mut net, &g, eta)?;
        let (_, g) = pinn_1d_term_left(&net)?;
        sgd_step(&mut net, &g, eta)?;
        let (_, g) = pinn_1d_term_right(&net, n)?;
        sgd_step(&mut net, &g, eta)?;
    }
    Ok(net)
}

/// `max |f(x) - sin(n pi x)|` over `x = 0, 0.01, ..., 0.5`.
pub fn max_deviation_from_sine<F: Fn(f64) -> f64>(f: F, n: f64) -> f64 {
    (0..=50)
        .map(|k| {
            let x = k as f64 / 100.0;
            (f(x) - (n * PI * x).sin()).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest gap `|oracle - engine| / (1 + |oracle|)` over `draws` random
/// parameter sets, for the closed forms of the three worked examples.
pub fn oracle_discrepancy(draws: usize, seed: u64) -> Result<[f64; 3]> {
    fn gap(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs() / (1.0 + x.abs())).fold(0.0, f64::max)
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 3];
    for _ in 0..draws {
        let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let q: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let n = rng.gen_range(0.0..1.0);
        let x = rng.gen_range(0.0..1.0);
        let u = rng.gen_range(-1.0..1.0);
        worst[0] = worst[0].max(gap(&oracle_gradients_appendix_a(p, n, u), &engine_gradients_appendix_a(p, n, u)?));
        worst[1] = worst[1].max(gap(&oracle_gradients_appendix_b(q, n, x, u), &engine_gradients_appendix_b(q, n, x, u)?));
        let o = oracle_gradients_appendix_c(p, 0.5 * x, n);
        let e = engine_gradients_appendix_c(p, 0.5 * x, n)?;
        let terms = gap(&[o.error1, o.error2, o.error3], &[e.error1, e.error2, e.error3]);
        let partials = [(o.d_error1, e.d_error1), (o.d_error2, e.d_error2), (o.d_error3, e.d_error3)]
            .iter()
            .map(|(a, b)| gap(a, b))
            .fold(terms, f64::max);
        worst[2] = worst[2].max(partials);
    }
    Ok(worst)
}
