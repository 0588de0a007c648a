//! Iterative hard thresholding with an adaptive Lipschitz estimate.

use crate::config::SolverConfig;
use crate::counter::{Eval, Evaluator};
use crate::penalty::{update_lipschitz, EPS_MACHINE};
use crate::problem::ProblemInstance;
use crate::record::{RunRecord, Termination};
use crate::sets::{sparse_project, SetDescriptor};

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// One thresholded gradient step `P_{C∩Σ_s}(x - g/L)`.
pub fn iht_step(x: &[f64], g: &[f64], l: f64, set: &SetDescriptor, s: usize) -> Vec<f64> {
    let trial: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b / l).collect();
    sparse_project(&trial, set, s).expect("s validated by the problem")
}

pub fn iht(problem: &ProblemInstance, cfg: &SolverConfig) -> RunRecord {
    let mut ev = Evaluator::new(problem, cfg);
    let term = run(&mut ev).unwrap_or_else(Termination::from);
    ev.finish("iht", term)
}

fn run(ev: &mut Evaluator<'_>) -> Eval<Termination> {
    let (set, s) = (ev.problem.set, ev.problem.s);
    let mut x = ev.problem.x0.clone();
    let (mut f, mut g) = ev.value_grad(&x)?;
    if ev.observe(&x, f, &g) {
        return Ok(Termination::Converged);
    }
    let mut l = 1.0f64;
    loop {
        let xn = iht_step(&x, &g, l, &set, s);
        let moved = xn.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if moved <= 1e-15 * (1.0 + inf_norm(&x)) {
            return Ok(Termination::Stagnation);
        }
        let fnew = ev.value(&xn)?;
        let l_new = update_lipschitz(l, fnew, f, &xn, EPS_MACHINE);
        if !(fnew < f) {
            l = l_new.max(2.0 * l);
            continue;
        }
        l = l_new;
        let gnew = ev.gradient(&xn)?;
        x = xn;
        f = fnew;
        g = gnew;
        if ev.observe(&x, f, &g) {
            return Ok(Termination::Converged);
        }
    }
}
