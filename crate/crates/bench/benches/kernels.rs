use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use splinenet::iga::{assemble_heat_system, solve_heat_problem, solve_system};
use splinenet::training::pinn_loss_gradient;
use splinenet::KnotVector;
use splinenet_bench::{field_network, grid_points, heat_problem, pinn_problem};

fn basis(c: &mut Criterion) {
    let kv = KnotVector::open_uniform(0.0, 2.0, 10, 3).unwrap();
    let xs: Vec<f64> = (0..1000).map(|k| 2.0 * k as f64 / 999.0).collect();
    c.bench_function("basis_values_1000_points", |b| {
        b.iter(|| xs.iter().map(|&x| kv.eval_basis(black_box(x)).unwrap().values[0]).sum::<f64>())
    });
    c.bench_function("basis_second_derivatives_1000_points", |b| {
        b.iter(|| xs.iter().map(|&x| kv.eval_basis_derivatives(black_box(x), 2).unwrap().order(2)[0]).sum::<f64>())
    });
}

fn solver(c: &mut Criterion) {
    let problem = heat_problem();
    let system = assemble_heat_system(&problem).unwrap();
    c.bench_function("assemble_mesh10", |b| b.iter(|| assemble_heat_system(black_box(&problem)).unwrap()));
    c.bench_function("solve_mesh10", |b| b.iter(|| solve_system(black_box(&system)).unwrap()));
    c.bench_function("assemble_and_solve_mesh10", |b| b.iter(|| solve_heat_problem(black_box(&problem)).unwrap()));
}

fn network(c: &mut Criterion) {
    let net = field_network(&[100, 100]);
    let x = grid_points(256);
    c.bench_function("forward_backward_single_point", |b| {
        b.iter(|| {
            let (_, cache) = net.forward(black_box(&x[..2])).unwrap();
            net.backward(&cache, &[1.0]).unwrap()
        })
    });
    c.bench_function("predict_batch_256", |b| b.iter(|| net.predict_batch(black_box(&x)).unwrap()));
    c.bench_function("second_order_jets_batch_256", |b| b.iter(|| net.forward_batch(black_box(&x), 2).unwrap()));

    let small = field_network(&[50, 50]);
    let problem = pinn_problem();
    c.bench_function("pinn_loss_gradient_default_collocation", |b| {
        b.iter(|| pinn_loss_gradient(black_box(&small), &problem).unwrap())
    });
}

criterion_group!(benches, basis, solver, network);
criterion_main!(benches);
