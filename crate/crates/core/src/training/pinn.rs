//! Physics-informed network for the L-shaped heat problem at fixed `n`.
//!
//! The loss penalizes the Laplacian at interior points, the value on the two
//! re-entrant edges and the normal-derivative mismatch `du/dv - g` on the four
//! outer edges. No solver data enters the training.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iga::heat::{heating_g, in_removed_quarter, CORNER, DOMAIN_LENGTH};
use crate::iga::metrics::ScalarField;
use crate::nn::{plateau_step, BatchAdjoint, Mlp, OptimizerKind};

use super::fit::{fold_input_map, Affine, TrainConfig, TrainReport};

/// Collocation point counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollocationCounts {
    pub interior: usize,
    pub per_outer_edge: usize,
    pub per_inner_edge: usize,
}

impl Default for CollocationCounts {
    fn default() -> Self {
        Self { interior: 1000, per_outer_edge: 200, per_inner_edge: 200 }
    }
}

/// Weights of the three loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnWeights {
    pub pde: f64,
    pub dirichlet: f64,
    pub neumann: f64,
}

impl Default for PinnWeights {
    fn default() -> Self {
        Self { pde: 1.0, dirichlet: 1.0, neumann: 1.0 }
    }
}

/// A point on an outer edge with its outward normal and prescribed flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannPoint {
    pub x: f64,
    pub y: f64,
    pub normal: [f64; 2],
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnProblem {
    pub n: f64,
    pub interior: Vec<[f64; 2]>,
    pub dirichlet: Vec<[f64; 2]>,
    pub neumann: Vec<NeumannPoint>,
    pub weights: PinnWeights,
}

/// A physics-informed network viewed as a field on the L-shape.
pub struct PinnField<'a>(pub &'a Mlp);

impl ScalarField for PinnField<'_> {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.0.predict(&[x, y])?[0])
    }
}

/// Loss terms; `total` is the weighted sum of the three means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinnLoss {
    pub total: f64,
    pub pde: f64,
    pub dirichlet: f64,
    pub neumann: f64,
}

/// Outer edges as `(fixed axis, coordinate, range along the edge, outward normal)`.
fn outer_edges() -> [(usize, f64, (f64, f64), [f64; 2]); 4] {
    [
        (0, DOMAIN_LENGTH, (0.0, DOMAIN_LENGTH), [1.0, 0.0]),
        (1, DOMAIN_LENGTH, (0.0, DOMAIN_LENGTH), [0.0, 1.0]),
        (0, 0.0, (CORNER, DOMAIN_LENGTH), [-1.0, 0.0]),
        (1, 0.0, (CORNER, DOMAIN_LENGTH), [0.0, -1.0]),
    ]
}

fn edge_point(axis: usize, at: f64, t: f64) -> [f64; 2] {
    if axis == 0 {
        [at, t]
    } else {
        [t, at]
    }
}

impl PinnProblem {
    /// The same problem with every point moved by `d` along both axes.
    fn translated(&self, d: f64) -> Self {
        let mv = |p: &[f64; 2]| [p[0] + d, p[1] + d];
        Self {
            n: self.n,
            interior: self.interior.iter().map(mv).collect(),
            dirichlet: self.dirichlet.iter().map(mv).collect(),
            neumann: self.neumann.iter().map(|q| NeumannPoint { x: q.x + d, y: q.y + d, ..*q }).collect(),
            weights: self.weights,
        }
    }

    /// Fixed seeded uniform collocation on the L-shape.
    pub fn sample(n: f64, counts: CollocationCounts, weights: PinnWeights, seed: u64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidProblem(format!("heating parameter n = {n} must be > 0")));
        }
        if counts.interior == 0 || counts.per_outer_edge == 0 || counts.per_inner_edge == 0 {
            return Err(Error::Config("every collocation set needs at least one point".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut interior = Vec::with_capacity(counts.interior);
        while interior.len() < counts.interior {
            let p = [rng.gen_range(0.0..DOMAIN_LENGTH), rng.gen_range(0.0..DOMAIN_LENGTH)];
            if !in_removed_quarter(p[0], p[1]) {
                interior.push(p);
            }
        }
        let centre = 0.5 * DOMAIN_LENGTH;
        let mut neumann = Vec::with_capacity(4 * counts.per_outer_edge);
        for (axis, at, (lo, hi), normal) in outer_edges() {
            for _ in 0..counts.per_outer_edge {
                let [x, y] = edge_point(axis, at, rng.gen_range(lo..hi));
                let g = heating_g(n, x - centre, y - centre, normal)?;
                neumann.push(NeumannPoint { x, y, normal, g });
            }
        }
        let mut dirichlet = Vec::with_capacity(2 * counts.per_inner_edge);
        for axis in 0..2 {
            for _ in 0..counts.per_inner_edge {
                dirichlet.push(edge_point(axis, CORNER, rng.gen_range(0.0..CORNER)));
            }
        }
        Ok(Self { n, interior, dirichlet, neumann, weights })
    }

    pub fn point_count(&self) -> usize {
        self.interior.len() + self.dirichlet.len() + self.neumann.len()
    }
}

fn check_network(net: &Mlp) -> Result<()> {
    if net.input_dim() != 2 || net.output_dim() != 1 {
        return Err(Error::Dimension(format!(
            "physics-informed network must map 2 -> 1, got {} -> {}",
            net.input_dim(),
            net.output_dim()
        )));
    }
    net.check_order(2)
}

/// Per-set sums of squared errors over the selected points, with their
/// parameter gradient scaled by `scale[set]` accumulated into `grad`.
struct TermSums {
    pde: f64,
    dirichlet: f64,
    neumann: f64,
}

fn accumulate(
    net: &Mlp,
    problem: &PinnProblem,
    (interior, dirichlet, neumann): (&[usize], &[usize], &[usize]),
    scale: [f64; 3],
    mut grad: Option<&mut [f64]>,
) -> Result<TermSums> {
    let mut sums = TermSums { pde: 0.0, dirichlet: 0.0, neumann: 0.0 };
    if !interior.is_empty() {
        let x: Vec<f64> = interior.iter().flat_map(|&i| problem.interior[i]).collect();
        let jets = net.forward_batch(&x, 2)?;
        let rows = interior.len();
        let mut adj = BatchAdjoint::zeros(rows, 1, 2, 2);
        for r in 0..rows {
            let res = jets.second(0)[r] + jets.second(1)[r];
            sums.pde += res * res;
            adj.second[r] = 2.0 * res * scale[0];
            adj.second[rows + r] = 2.0 * res * scale[0];
        }
        if let Some(g) = grad.as_deref_mut() {
            net.backward_batch(&jets, &adj, g)?;
        }
    }
    if !dirichlet.is_empty() {
        let x: Vec<f64> = dirichlet.iter().flat_map(|&i| problem.dirichlet[i]).collect();
        let jets = net.forward_batch(&x, 0)?;
        let mut adj = BatchAdjoint::zeros(dirichlet.len(), 1, 2, 0);
        for (r, u) in jets.value().iter().enumerate() {
            sums.dirichlet += u * u;
            adj.value[r] = 2.0 * u * scale[1];
        }
        if let Some(g) = grad.as_deref_mut() {
            net.backward_batch(&jets, &adj, g)?;
        }
    }
    if !neumann.is_empty() {
        let x: Vec<f64> = neumann.iter().flat_map(|&i| [problem.neumann[i].x, problem.neumann[i].y]).collect();
        let jets = net.forward_batch(&x, 1)?;
        let rows = neumann.len();
        let mut adj = BatchAdjoint::zeros(rows, 1, 2, 1);
        for (r, &i) in neumann.iter().enumerate() {
            let p = &problem.neumann[i];
            let du = p.normal[0] * jets.first(0)[r] + p.normal[1] * jets.first(1)[r];
            let e = du - p.g;
            sums.neumann += e * e;
            adj.first[r] = 2.0 * e * p.normal[0] * scale[2];
            adj.first[rows + r] = 2.0 * e * p.normal[1] * scale[2];
        }
        if let Some(g) = grad.as_deref_mut() {
            net.backward_batch(&jets, &adj, g)?;
        }
    }
    Ok(sums)
}

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// The three loss terms and their weighted total over every collocation point.
pub fn pinn_loss(net: &Mlp, problem: &PinnProblem) -> Result<PinnLoss> {
    check_network(net)?;
    let (i, d, n) = (all(problem.interior.len()), all(problem.dirichlet.len()), all(problem.neumann.len()));
    let s = accumulate(net, problem, (&i, &d, &n), [0.0; 3], None)?;
    Ok(combine(problem, &s))
}

fn combine(problem: &PinnProblem, s: &TermSums) -> PinnLoss {
    let pde = s.pde / problem.interior.len() as f64;
    let dirichlet = s.dirichlet / problem.dirichlet.len() as f64;
    let neumann = s.neumann / problem.neumann.len() as f64;
    let w = problem.weights;
    PinnLoss { total: w.pde * pde + w.dirichlet * dirichlet + w.neumann * neumann, pde, dirichlet, neumann }
}

/// Loss over every point and its exact parameter gradient.
pub fn pinn_loss_gradient(net: &Mlp, problem: &PinnProblem) -> Result<(PinnLoss, Vec<f64>)> {
    check_network(net)?;
    let (i, d, n) = (all(problem.interior.len()), all(problem.dirichlet.len()), all(problem.neumann.len()));
    let w = problem.weights;
    let scale = [
        w.pde / problem.interior.len() as f64,
        w.dirichlet / problem.dirichlet.len() as f64,
        w.neumann / problem.neumann.len() as f64,
    ];
    let mut grad = vec![0.0; net.param_count()];
    let s = accumulate(net, problem, (&i, &d, &n), scale, Some(&mut grad))?;
    Ok((combine(problem, &s), grad))
}

/// Minimize [`pinn_loss`] with the configured optimizer and plateau schedule.
///
/// A minibatch draws points from the pooled collocation sets. Each set's
/// squared errors are rescaled by `total points / set size`, so the mean over
/// a batch is an unbiased estimate of the full loss and the full batch
/// reproduces it exactly. `final_train_mse` holds the final full loss.
///
/// Training runs in coordinates centred on the re-entrant corner, so the
/// initial hidden units cut through the domain; the shift is folded into the
/// first layer of the returned network.
pub fn train_pinn(problem: &PinnProblem, config: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    config.validate()?;
    let start = Instant::now();
    let centred = problem.translated(-CORNER);
    let net = config.init_network(2, 1)?;
    check_network(&net)?;
    let (mut net, report) = if config.optimizer == OptimizerKind::Lbfgs {
        train_pinn_lbfgs(&centred, config, net, start)?
    } else {
        train_pinn_adam(&centred, config, net, start)?
    };
    fold_input_map(&mut net, &corner_shift());
    Ok((net, report))
}

/// The network [`train_pinn`] starts from, in raw coordinates.
pub fn initial_network(config: &TrainConfig) -> Result<Mlp> {
    let mut net = config.init_network(2, 1)?;
    fold_input_map(&mut net, &corner_shift());
    Ok(net)
}

fn corner_shift() -> Affine {
    Affine { shift: vec![CORNER; 2], scale: vec![1.0; 2] }
}

fn train_pinn_adam(problem: &PinnProblem, config: &TrainConfig, mut net: Mlp, start: Instant) -> Result<(Mlp, TrainReport)> {
    let mut opt = config.optimizer(net.param_count());
    let mut sched = config.scheduler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37);
    let (ni, nd, nn) = (problem.interior.len(), problem.dirichlet.len(), problem.neumann.len());
    let total = ni + nd + nn;
    let batch = if config.batch_size == 0 { total } else { config.batch_size.min(total) };
    let w = problem.weights;
    let per_point = [
        w.pde * total as f64 / ni as f64,
        w.dirichlet * total as f64 / nd as f64,
        w.neumann * total as f64 / nn as f64,
    ];
    let mut order: Vec<usize> = (0..total).collect();
    let mut grad = vec![0.0; net.param_count()];
    let mut losses = Vec::with_capacity(config.epochs);
    let mut lrs = Vec::with_capacity(config.epochs);
    let (mut bi, mut bd, mut bn) = (Vec::new(), Vec::new(), Vec::new());

    for _ in 0..config.epochs {
        if batch < total {
            order.shuffle(&mut rng);
        }
        let mut epoch_sum = 0.0;
        for chunk in order.chunks(batch) {
            bi.clear();
            bd.clear();
            bn.clear();
            for &k in chunk {
                if k < ni {
                    bi.push(k);
                } else if k < ni + nd {
                    bd.push(k - ni);
                } else {
                    bn.push(k - ni - nd);
                }
            }
            let b = chunk.len() as f64;
            let scale = [per_point[0] / b, per_point[1] / b, per_point[2] / b];
            grad.fill(0.0);
            let s = accumulate(&net, problem, (&bi, &bd, &bn), scale, Some(&mut grad))?;
            epoch_sum += per_point[0] * s.pde + per_point[1] * s.dirichlet + per_point[2] * s.neumann;
            opt.apply(&mut net, &grad)?;
        }
        let epoch_loss = epoch_sum / total as f64;
        losses.push(epoch_loss);
        lrs.push(opt.learning_rate);
        plateau_step(&mut sched, &mut opt, epoch_loss)?;
    }
    let final_loss = pinn_loss(&net, problem)?.total;
    if !final_loss.is_finite() {
        return Err(Error::Diverged { epoch: config.epochs, loss: final_loss });
    }
    let report = TrainReport {
        method: "pinn".into(),
        epoch_losses: losses,
        learning_rates: lrs,
        final_train_mse: final_loss,
        final_test_mse: None,
        train_seconds: start.elapsed().as_secs_f64(),
        epochs_run: config.epochs,
        final_lr: opt.learning_rate,
        seed: config.seed,
    };
    Ok((net, report))
}

/// Full-batch L-BFGS variant of [`train_pinn`]. One epoch is one quasi-Newton
/// iteration; the learning-rate columns carry the configured value, which the
/// line search does not use.
fn train_pinn_lbfgs(problem: &PinnProblem, config: &TrainConfig, mut net: Mlp, start: Instant) -> Result<(Mlp, TrainReport)> {
    let losses = super::lbfgs::minimize(&mut net, config.epochs, |m| {
        let (loss, grad) = pinn_loss_gradient(m, problem)?;
        Ok((loss.total, grad))
    })?;
    let final_loss = pinn_loss(&net, problem)?.total;
    if !final_loss.is_finite() {
        return Err(Error::Diverged { epoch: losses.len(), loss: final_loss });
    }
    let report = TrainReport {
        method: "pinn".into(),
        learning_rates: vec![config.learning_rate; losses.len()],
        epochs_run: losses.len(),
        epoch_losses: losses,
        final_train_mse: final_loss,
        final_test_mse: None,
        train_seconds: start.elapsed().as_secs_f64(),
        final_lr: config.learning_rate,
        seed: config.seed,
    };
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    fn small_problem() -> PinnProblem {
        let counts = CollocationCounts { interior: 30, per_outer_edge: 6, per_inner_edge: 5 };
        PinnProblem::sample(1.0, counts, PinnWeights::default(), 7).unwrap()
    }

    fn config(epochs: usize, activation: Activation) -> TrainConfig {
        TrainConfig {
            hidden: vec![6, 5],
            activation,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: 10,
            min_lr: 1e-6,
            epochs,
            batch_size: 16,
            seed: 2,
        }
    }

    #[test]
    fn collocation_lies_on_the_right_sets() {
        let p = PinnProblem::sample(1.0, CollocationCounts::default(), PinnWeights::default(), 1).unwrap();
        assert_eq!((p.interior.len(), p.dirichlet.len(), p.neumann.len()), (1000, 400, 800));
        assert!(p.interior.iter().all(|q| !in_removed_quarter(q[0], q[1])));
        assert!(p.dirichlet.iter().all(|q| (q[0] == 1.0 && q[1] <= 1.0) || (q[1] == 1.0 && q[0] <= 1.0)));
        for q in &p.neumann {
            let on_edge = if q.normal == [1.0, 0.0] {
                q.x == 2.0
            } else if q.normal == [-1.0, 0.0] {
                q.x == 0.0 && q.y >= 1.0
            } else if q.normal == [0.0, 1.0] {
                q.y == 2.0
            } else {
                q.normal == [0.0, -1.0] && q.y == 0.0 && q.x >= 1.0
            };
            assert!(on_edge, "{q:?}");
        }
        assert_eq!(p, PinnProblem::sample(1.0, CollocationCounts::default(), PinnWeights::default(), 1).unwrap());
    }

    #[test]
    fn decomposition_and_weight_linearity() {
        let mut p = small_problem();
        let net = config(0, Activation::Tanh).init_network(2, 1).unwrap();
        let l = pinn_loss(&net, &p).unwrap();
        assert_eq!(l.total, l.pde + l.dirichlet + l.neumann);
        p.weights = PinnWeights { pde: 2.0, dirichlet: 2.0, neumann: 2.0 };
        let l2 = pinn_loss(&net, &p).unwrap();
        assert!((l2.total - 2.0 * l.total).abs() <= 1e-14 * l.total);
    }

    #[test]
    fn zero_field_has_zero_pde_and_dirichlet() {
        let p = small_problem();
        let net = Mlp::from_parts(vec![2, 3, 1], vec![Activation::Tanh, Activation::Identity], vec![0.0; 13]).unwrap();
        let l = pinn_loss(&net, &p).unwrap();
        assert_eq!((l.pde, l.dirichlet), (0.0, 0.0));
        let mean_g2 = p.neumann.iter().map(|q| q.g * q.g).sum::<f64>() / p.neumann.len() as f64;
        assert!((l.neumann - mean_g2).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut p = small_problem();
        p.weights = PinnWeights { pde: 0.7, dirichlet: 1.3, neumann: 0.4 };
        let net = config(0, Activation::Tanh).init_network(2, 1).unwrap();
        let (_, grad) = pinn_loss_gradient(&net, &p).unwrap();
        let h = 1e-6;
        for k in (0..net.param_count()).step_by(3) {
            let mut plus = net.clone();
            plus.params_mut()[k] += h;
            let mut minus = net.clone();
            minus.params_mut()[k] -= h;
            let fd = (pinn_loss(&plus, &p).unwrap().total - pinn_loss(&minus, &p).unwrap().total) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-6 * (1.0 + fd.abs()), "param {k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn relu_is_rejected() {
        let p = small_problem();
        assert!(train_pinn(&p, &config(1, Activation::Relu)).is_err());
        let net = config(0, Activation::Relu).init_network(2, 1).unwrap();
        assert!(pinn_loss(&net, &p).is_err());
    }

    #[test]
    fn zero_epochs_returns_initial_network() {
        let p = small_problem();
        let cfg = config(0, Activation::Tanh);
        let (net, report) = train_pinn(&p, &cfg).unwrap();
        assert_eq!(net, initial_network(&cfg).unwrap());
        assert!(report.epoch_losses.is_empty());
    }

    #[test]
    fn training_reduces_loss_deterministically() {
        let p = small_problem();
        let mut cfg = config(150, Activation::Tanh);
        cfg.learning_rate = 1e-2;
        let (a, ra) = train_pinn(&p, &cfg).unwrap();
        let (b, rb) = train_pinn(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.without_timing(), rb.without_timing());
        let initial = pinn_loss(&initial_network(&cfg).unwrap(), &p).unwrap().total;
        assert!(ra.final_train_mse < 0.75 * initial, "{} vs {initial}", ra.final_train_mse);
    }

    #[test]
    fn full_batch_epoch_loss_is_exact() {
        let p = small_problem();
        let mut cfg = config(1, Activation::Sigmoid);
        cfg.batch_size = 0;
        let (_, report) = train_pinn(&p, &cfg).unwrap();
        let initial = pinn_loss(&initial_network(&cfg).unwrap(), &p).unwrap().total;
        assert!((report.epoch_losses[0] - initial).abs() < 1e-12 * initial);
    }
}
