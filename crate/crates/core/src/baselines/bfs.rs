//! Basic-feasible search: restricted minimisation on the best super-support,
//! repeated until the support settles.

use crate::baselines::fista::fista_restricted;
use crate::baselines::simplex::Step;
use crate::config::SolverConfig;
use crate::counter::{Eval, Evaluator};
use crate::problem::ProblemInstance;
use crate::record::{RunRecord, Termination};
use crate::sets::SupportSet;
use crate::stationarity::bf_super_support;

/// Returns the final point and whether the target accuracy was reached.
/// `max_iter = None` runs until the support and value stop changing.
pub fn bfs_search(
    ev: &mut Evaluator<'_>,
    start: Step,
    l: &mut f64,
    max_iter: Option<usize>,
    cfg: &SolverConfig,
) -> Eval<(Step, bool)> {
    let sym = ev.problem.set.symmetry();
    let s = ev.problem.s;
    let mut cur = start;
    let mut k = 0;
    while max_iter.is_none_or(|m| k < m) {
        k += 1;
        let t = bf_super_support(&cur.x, &cur.g, sym, s);
        let r = fista_restricted(ev, &cur.x, &t, *l, cfg.fista_max_iter, cfg.bfs_tol)?;
        *l = r.l;
        let same = SupportSet::of(&r.x) == SupportSet::of(&cur.x);
        let settled = same && (cur.f - r.f).abs() < cfg.bfs_tol * (1.0 + cur.f.abs());
        let improved = r.f <= cur.f;
        if improved {
            cur = Step { x: r.x, f: r.f, g: r.g };
            if ev.observe(&cur.x, cur.f, &cur.g) {
                return Ok((cur, true));
            }
        }
        if settled || !improved || (same && r.iters == 0) {
            break;
        }
    }
    Ok((cur, false))
}

pub fn bfs(problem: &ProblemInstance, cfg: &SolverConfig) -> RunRecord {
    let mut ev = Evaluator::new(problem, cfg);
    let term = (|| -> Eval<Termination> {
        let x = problem.x0.clone();
        let (f, g) = ev.value_grad(&x)?;
        if ev.observe(&x, f, &g) {
            return Ok(Termination::Converged);
        }
        let mut l = 1.0;
        let (_, conv) = bfs_search(&mut ev, Step { x, f, g }, &mut l, None, cfg)?;
        Ok(if conv { Termination::Converged } else { Termination::Stagnation })
    })()
    .unwrap_or_else(Termination::from);
    ev.finish("bfs", term)
}
