//! Accelerated projected gradient restricted to a fixed index set.

use crate::counter::{Eval, Evaluator};
use crate::sets::{project_onto_support, SupportSet};

/// Backtracking steps allowed per iteration.
pub const MAX_BACKTRACK: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct FistaResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    /// Final Lipschitz estimate.
    pub l: f64,
    pub iters: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimises `f` over `{x ∈ C : I₁(x) ⊆ support}` starting from the
/// projection of `start`. The objective is kept nonincreasing by dropping
/// the momentum whenever a step would increase it. Stops after `max_iter`
/// iterations or once the decrease falls below `rel_tol·(1 + |f|)`.
pub fn fista_restricted(
    ev: &mut Evaluator<'_>,
    start: &[f64],
    support: &SupportSet,
    l0: f64,
    max_iter: usize,
    rel_tol: f64,
) -> Eval<FistaResult> {
    let set = ev.problem.set;
    let mut w = match project_onto_support(start, &set, support) {
        Ok(p) => p,
        Err(_) => start.to_vec(),
    };
    let (mut fw, mut gw) = ev.value_grad(&w)?;
    let mut l = l0.max(f64::MIN_POSITIVE);
    let mut v = w.clone();
    let mut t = 1.0f64;
    let mut iters = 0;
    let step_from = |p: &[f64], g: &[f64], l: f64| -> Vec<f64> {
        let trial: Vec<f64> = p.iter().zip(g).map(|(a, b)| a - b / l).collect();
        project_onto_support(&trial, &set, support).unwrap_or_else(|_| p.to_vec())
    };

    if step_from(&w, &gw, l) == w {
        return Ok(FistaResult { x: w, f: fw, g: gw, l, iters });
    }

    while iters < max_iter {
        iters += 1;
        let (fv, gv) = ev.value_grad(&v)?;
        let mut w_new = step_from(&v, &gv, l);
        let mut f_new = ev.value(&w_new)?;
        for _ in 0..MAX_BACKTRACK {
            let mut lin = 0.0;
            let mut sq = 0.0;
            for i in support.iter() {
                let d = w_new[i] - v[i];
                lin += gv[i] * d;
                sq += d * d;
            }
            if f_new <= fv + lin + 0.5 * l * sq + 1e-12 * fv.abs() {
                break;
            }
            l *= 2.0;
            w_new = step_from(&v, &gv, l);
            f_new = ev.value(&w_new)?;
        }
        if !(f_new <= fw) {
            if v == w {
                // The model test passed without a decrease: only roundoff is left.
                break;
            }
            v = w.clone();
            t = 1.0;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        let step: Vec<f64> = w_new.iter().zip(&w).map(|(a, b)| a - b).collect();
        v = w_new.iter().zip(&step).map(|(a, d)| a + beta * d).collect();
        let decrease = fw - f_new;
        let moved = inf_norm(&step);
        w = w_new;
        fw = f_new;
        t = t_new;
        if moved <= 1e-15 * (1.0 + inf_norm(&w)) || decrease <= rel_tol * (1.0 + fw.abs()) {
            break;
        }
    }
    gw = ev.gradient(&w)?;
    Ok(FistaResult { x: w, f: fw, g: gw, l, iters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::problem::{ProblemInstance, SeparableQuadratic};
    use crate::sets::SetDescriptor;
    use std::sync::Arc;

    fn problem(a: Vec<f64>, c: Vec<f64>, set: SetDescriptor, s: usize, x0: Vec<f64>) -> ProblemInstance {
        ProblemInstance::new("t", set, s, x0, Arc::new(SeparableQuadratic { a, c })).unwrap()
    }

    #[test]
    fn one_coordinate_quadratic() {
        // f = ½·3·x₀² - 2x₀ (+ others): minimiser 2/3 on coordinate 0.
        let p = problem(vec![3.0, 1.0], vec![-2.0, 5.0], SetDescriptor::full_space(), 1, vec![0.0, 0.0]);
        let cfg = SolverConfig::default();
        let mut ev = Evaluator::new(&p, &cfg);
        let sup = SupportSet::new(vec![0], 2).unwrap();
        let r = fista_restricted(&mut ev, &p.x0, &sup, 1.0, 30, 0.0).unwrap();
        assert!((r.x[0] - 2.0 / 3.0).abs() <= 1e-8, "{:?}", r.x);
        assert_eq!(r.x[1], 0.0);
    }

    #[test]
    fn zero_gradient_returns_at_once() {
        let p = problem(vec![1.0, 1.0], vec![-1.0, 0.0], SetDescriptor::full_space(), 1, vec![1.0, 0.0]);
        let cfg = SolverConfig::default();
        let mut ev = Evaluator::new(&p, &cfg);
        let sup = SupportSet::new(vec![0], 2).unwrap();
        let r = fista_restricted(&mut ev, &p.x0, &sup, 1.0, 30, 0.0).unwrap();
        assert_eq!(r.iters, 0);
        assert_eq!(r.x, vec![1.0, 0.0]);
        assert_eq!(ev.nf2g(), 3);
    }

    #[test]
    fn monotone_on_simplex() {
        let a = vec![4.0, 1.0, 9.0, 2.0];
        let c = vec![-1.0, 0.5, -3.0, 0.0];
        let p = problem(a, c, SetDescriptor::simplex(), 3, vec![1.0, 0.0, 0.0, 0.0]);
        let cfg = SolverConfig::default();
        let sup = SupportSet::new(vec![0, 1, 2], 4).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let mut ev = Evaluator::new(&p, &cfg);
            let r = fista_restricted(&mut ev, &p.x0, &sup, 1.0, k, 0.0).unwrap();
            assert!(r.f <= prev + 1e-15);
            assert!(p.is_feasible(&r.x));
            prev = r.f;
        }
    }

    #[test]
    fn converged_run_keeps_its_lipschitz_estimate() {
        // A long run past convergence must not inflate L on roundoff.
        let p = problem(vec![2.0, 7.0, 1.0], vec![-1.3, 0.7, 0.2], SetDescriptor::full_space(), 2, vec![0.0; 3]);
        let cfg = SolverConfig::default();
        let mut ev = Evaluator::new(&p, &cfg);
        let sup = SupportSet::new(vec![0, 1], 3).unwrap();
        let r = fista_restricted(&mut ev, &p.x0, &sup, 1.0, 500, 0.0).unwrap();
        assert!((r.x[0] - 0.65).abs() <= 1e-7 && (r.x[1] + 0.1).abs() <= 1e-7, "{:?}", r.x);
        assert!(r.l <= 64.0, "L = {}", r.l);
    }
}
