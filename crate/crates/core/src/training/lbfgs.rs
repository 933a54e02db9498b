//! Full-batch L-BFGS over network parameters, driven by `argmin`.

use std::cell::RefCell;
use std::rc::Rc;

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Executor, Gradient, IterState, State, KV};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;

use crate::error::{Error, Result};
use crate::nn::Mlp;

/// Curvature pairs kept by the two-loop recursion.
pub const HISTORY: usize = 20;

type Evaluated = (Vec<f64>, f64, Vec<f64>);

/// Loss and gradient with a one-entry cache: the line search asks for the
/// cost and the gradient of the same point separately.
struct Objective<'a, F> {
    net: RefCell<Mlp>,
    loss_grad: &'a F,
    last: RefCell<Option<Evaluated>>,
}

impl<F: Fn(&Mlp) -> Result<(f64, Vec<f64>)>> Objective<'_, F> {
    fn eval(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        if let Some((q, loss, grad)) = self.last.borrow().as_ref() {
            if q.as_slice() == p {
                return Ok((*loss, grad.clone()));
            }
        }
        let mut net = self.net.borrow_mut();
        net.params_mut().copy_from_slice(p);
        let (loss, grad) = (self.loss_grad)(&net)?;
        *self.last.borrow_mut() = Some((p.to_vec(), loss, grad.clone()));
        Ok((loss, grad))
    }
}

impl<F: Fn(&Mlp) -> Result<(f64, Vec<f64>)>> CostFunction for Objective<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(p)?.0)
    }
}

impl<F: Fn(&Mlp) -> Result<(f64, Vec<f64>)>> Gradient for Objective<'_, F> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.eval(p)?.1)
    }
}

struct CostTrace(Rc<RefCell<Vec<f64>>>);

impl Observe<IterState<Vec<f64>, Vec<f64>, (), (), (), f64>> for CostTrace {
    fn observe_iter(&mut self, state: &IterState<Vec<f64>, Vec<f64>, (), (), (), f64>, _kv: &KV) -> std::result::Result<(), argmin::core::Error> {
        self.0.borrow_mut().push(state.get_cost());
        Ok(())
    }
}

/// Run up to `iterations` L-BFGS steps from `net`, leaving the best iterate in
/// it. Returns the loss after each iteration; the run may stop early once the
/// gradient or the loss change falls below machine precision.
pub fn minimize<F>(net: &mut Mlp, iterations: usize, loss_grad: F) -> Result<Vec<f64>>
where
    F: Fn(&Mlp) -> Result<(f64, Vec<f64>)>,
{
    if iterations == 0 {
        return Ok(Vec::new());
    }
    let objective = Objective { net: RefCell::new(net.clone()), loss_grad: &loss_grad, last: RefCell::new(None) };
    let trace = Rc::new(RefCell::new(Vec::with_capacity(iterations)));
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), HISTORY);
    let start = net.params().to_vec();
    let result = Executor::new(objective, solver)
        .configure(|s| s.param(start).max_iters(iterations as u64))
        .add_observer(CostTrace(Rc::clone(&trace)), ObserverMode::Always)
        .run()
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let best = result
        .state()
        .get_best_param()
        .ok_or_else(|| Error::Optimizer("lbfgs finished without an iterate".into()))?;
    net.params_mut().copy_from_slice(best);
    let losses = trace.borrow().clone();
    Ok(losses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    #[test]
    fn fits_a_linear_map_exactly() {
        let mut net = Mlp::init(&[1, 1], &[Activation::Identity], 3).unwrap();
        let xs = [-1.0, 0.0, 0.5, 2.0];
        let loss_grad = |m: &Mlp| {
            let mut grad = vec![0.0; m.param_count()];
            let mut loss = 0.0;
            for &x in &xs {
                let (out, cache) = m.forward(&[x])?;
                let e = out[0] - (3.0 * x - 1.0);
                loss += e * e / xs.len() as f64;
                m.backward_into(&cache, &[2.0 * e / xs.len() as f64], &mut grad)?;
            }
            Ok((loss, grad))
        };
        let losses = minimize(&mut net, 50, loss_grad).unwrap();
        assert!(!losses.is_empty() && losses.len() <= 50);
        assert!((net.predict(&[1.0]).unwrap()[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn zero_iterations_leave_the_network() {
        let mut net = Mlp::init(&[2, 3, 1], &[Activation::Tanh, Activation::Identity], 1).unwrap();
        let before = net.clone();
        assert!(minimize(&mut net, 0, |_| unreachable!()).unwrap().is_empty());
        assert_eq!(net, before);
    }
}
