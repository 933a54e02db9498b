//! One-dimensional worked examples, run end to end with agreement checks.

use anyhow::{bail, Result};
use splinenet::iga::appendix::{appendix_basis, appendix_dataset, appendix_mass_matrix, appendix_rhs, solve_1d_appendix_assembled};
use splinenet::iga::assembly::{load_vector_1d, mass_matrix_1d};
use splinenet::training::appendix::{
    appendix_a_reference_training, appendix_b_dataset, appendix_b_reference_training, appendix_c_engine_training,
    appendix_c_reference_training, max_deviation_from_sine, oracle_discrepancy, sample_indices, single_sigmoid,
    two_input_sigmoid, APPENDIX_A_STARTS, APPENDIX_C_START,
};

const DRAWS: usize = 1000;
const GRADIENT_TOL: f64 = 1e-12;

fn check(label: &str, value: f64, tol: f64) -> Result<()> {
    let verdict = if value < tol { "ok" } else { "FAILED" };
    println!("{label}: {value:.3e} (tolerance {tol:e}) {verdict}");
    if value >= tol {
        bail!("{label} = {value:e} exceeds {tol:e}");
    }
    Ok(())
}

pub fn run_a() -> Result<()> {
    let kv = appendix_basis();
    let m = mass_matrix_1d(&kv)?;
    println!("mass matrix on knots {:?}:", kv.knots());
    for i in 0..3 {
        println!("  [{:.15} {:.15} {:.15}]", m.get(i, 0), m.get(i, 1), m.get(i, 2));
    }
    check("mass matrix vs [1/5 1/10 1/30; 1/10 2/15 1/10; 1/30 1/10 1/5]", m.max_abs_diff(&appendix_mass_matrix()), 1e-12)?;

    let mut rhs_gap = 0.0f64;
    for k in 1..=10 {
        let n = 0.05 * k as f64 - 0.01;
        let exact = appendix_rhs(n);
        let quad = load_vector_1d(&kv, |x| (n * std::f64::consts::PI * x).sin(), 12)?;
        rhs_gap = exact.iter().zip(&quad).map(|(a, b)| (a - b).abs()).fold(rhs_gap, f64::max);
    }
    check("quadrature rhs vs closed forms (10 values of n)", rhs_gap, 1e-10)?;

    let data = appendix_dataset()?;
    println!("dataset: {} samples, n = {} .. {}", data.len(), data[0].n, data[data.len() - 1].n);
    println!("  n,u1,u2,u3");
    for s in data.iter().step_by(7) {
        println!("  {},{:.12},{:.12},{:.12}", s.n, s.u[0], s.u[1], s.u[2]);
    }
    let mut solve_gap = 0.0f64;
    for s in &data {
        let q = solve_1d_appendix_assembled(s.n)?;
        solve_gap = s.u.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(solve_gap, f64::max);
    }
    check("closed-form vs assembled solve", solve_gap, 1e-10)?;
    check("closed-form vs engine gradients (4 partials)", oracle_discrepancy(DRAWS, 11)?[0], GRADIENT_TOL)?;

    let order = sample_indices(50, data.len(), 0);
    let trained = appendix_a_reference_training(APPENDIX_A_STARTS, 0.1, &order)?;
    for (k, p) in trained.iter().enumerate() {
        let net = single_sigmoid(*p);
        let mse = data.iter().map(|s| (net.predict(&[s.n]).map(|v| v[0]).unwrap_or(f64::NAN) - s.u[k]).powi(2)).sum::<f64>()
            / data.len() as f64;
        println!("coefficient {}: trained (a, b, c, d) = {:.6?}, dataset mse {mse:.3e}", k + 1, p);
    }
    Ok(())
}

pub fn run_b() -> Result<()> {
    check("closed-form vs engine gradients (5 partials)", oracle_discrepancy(DRAWS, 12)?[1], GRADIENT_TOL)?;
    let data = appendix_b_dataset()?;
    println!("dataset: {} rows of (n, x, u)", data.len());
    let order = sample_indices(20_000, data.len(), 0);
    let start = [1.0, 1.0, 1.0, 1.0, 0.0];
    let p = appendix_b_reference_training(start, 0.1, &data, &order);
    let net = two_input_sigmoid(p);
    let probe = sample_indices(5_000, data.len(), 1);
    let mut mse = 0.0;
    for &i in &probe {
        let [n, x, y] = data[i];
        mse += (net.predict(&[n, x])?[0] - y).powi(2);
    }
    mse /= probe.len() as f64;
    println!("trained (a1, a2, b, c, d) = {p:.6?} after {} sequential updates", order.len());
    println!("mse on 5000 probe rows: {mse:.3e}");
    Ok(())
}

pub fn run_c() -> Result<()> {
    check("closed-form vs engine loss terms and 12 partials", oracle_discrepancy(DRAWS, 13)?[2], GRADIENT_TOL)?;
    let n = 0.333;
    let order = sample_indices(50, 50, 0);
    let p = appendix_c_reference_training(APPENDIX_C_START, n, 0.1, &order);
    let reference = single_sigmoid(p);
    let dev_ref = max_deviation_from_sine(|x| reference.predict(&[x]).map_or(f64::NAN, |v| v[0]), n);
    let net = appendix_c_engine_training(APPENDIX_C_START, n, 0.1, &order)?;
    let dev_engine = max_deviation_from_sine(|x| net.predict(&[x]).map_or(f64::NAN, |v| v[0]), n);
    println!("start (a, b, c, d) = {APPENDIX_C_START:?}, n = {n}, learning rate 0.1, {} samples", order.len());
    println!("closed-form loop: (a, b, c, d) = {p:.6?}");
    println!("engine loop:      (a, b, c, d) = {:.6?}", net.params());
    println!("  x,sin(n pi x),closed-form,engine");
    for k in (0..=50).step_by(10) {
        let x = k as f64 / 100.0;
        println!(
            "  {x:.2},{:.6},{:.6},{:.6}",
            (n * std::f64::consts::PI * x).sin(),
            reference.predict(&[x])?[0],
            net.predict(&[x])?[0]
        );
    }
    check("closed-form loop max |u - sin(n pi x)| on [0, 0.5]", dev_ref, 0.05)?;
    check("engine loop max |u - sin(n pi x)| on [0, 0.5]", dev_engine, 0.05)?;
    Ok(())
}
