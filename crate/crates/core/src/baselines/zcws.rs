//! Basic-feasible search followed by swap trials: the best predicted swaps
//! are each polished on their new support, and the first that lowers the
//! objective restarts the search.

use crate::baselines::bfs::bfs_search;
use crate::baselines::fista::fista_restricted;
use crate::baselines::simplex::{ranked_swaps, Step};
use crate::config::SolverConfig;
use crate::counter::{Eval, Evaluator};
use crate::problem::ProblemInstance;
use crate::record::{RunRecord, Termination};

/// Swap candidates polished per round.
pub const SWAP_TRIALS: usize = 10;

pub fn zcws(problem: &ProblemInstance, cfg: &SolverConfig) -> RunRecord {
    let mut ev = Evaluator::new(problem, cfg);
    let term = run(&mut ev, cfg).unwrap_or_else(Termination::from);
    ev.finish("zcws", term)
}

fn run(ev: &mut Evaluator<'_>, cfg: &SolverConfig) -> Eval<Termination> {
    let x = ev.problem.x0.clone();
    let (f, g) = ev.value_grad(&x)?;
    if ev.observe(&x, f, &g) {
        return Ok(Termination::Converged);
    }
    let mut l = 1.0;
    let mut cur = Step { x, f, g };
    loop {
        let (next, conv) = bfs_search(ev, cur, &mut l, None, cfg)?;
        if conv {
            return Ok(Termination::Converged);
        }
        cur = next;
        let swaps = ranked_swaps(&cur.x, &cur.g, &ev.problem.set, ev.problem.s, l);
        let mut accepted = None;
        for (trial, support) in swaps.into_iter().take(SWAP_TRIALS) {
            let r = fista_restricted(ev, &trial, &support, l, cfg.fista_max_iter, cfg.bfs_tol)?;
            if r.f < cur.f {
                l = r.l;
                accepted = Some(Step { x: r.x, f: r.f, g: r.g });
                break;
            }
        }
        let Some(step) = accepted else { return Ok(Termination::Stagnation) };
        cur = step;
        if ev.observe(&cur.x, cur.f, &cur.g) {
            return Ok(Termination::Converged);
        }
    }
}
