//! Quasi-Newton penalty decomposition.
//!
//! The outer loop keeps a diagonal quadratic model of `f` around the last
//! primal iterate and alternates, in the inner loop, between the closed-form
//! x-minimiser of the penalty model and a sparse projection for y restricted
//! to a selected super-support. Two safeguards (model descent against Υ and
//! primal-dual agreement) reset the y start point. The inner loop never calls
//! the objective; each outer step costs one value and gradient at x and one
//! at y.

use crate::baselines::bfs::bfs_search;
use crate::baselines::fista::fista_restricted;
use crate::baselines::simplex::{ranked_swaps, simplex_search, SimplexSearch, Step};
use crate::baselines::zcws::SWAP_TRIALS;
use crate::config::SolverConfig;
use crate::counter::{Eval, Evaluator};
use crate::hessian::{diag_update, CurvatureMemory};
use crate::linesearch;
use crate::penalty::PenaltyModel;
use crate::problem::ProblemInstance;
use crate::record::{RunRecord, Termination};
use crate::sets::{project_onto_support, select_super_support, sq_dist, SetDescriptor, SupportSet};
use crate::stationarity::bf_super_support;

/// `‖y_j - y_{j-1}‖` below this triggers the recovery step.
pub const STAGNATION_TOL: f64 = 1e-10;
/// Outer iterations without a relative decrease of `STALL_DECREASE` in f(y)
/// that also count as stagnation.
pub const STALL_WINDOW: usize = 50;
pub const STALL_DECREASE: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct OuterSnapshot<'a> {
    pub j: usize,
    pub rho: f64,
    pub d: &'a [f64],
    pub upsilon: f64,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub restart: bool,
}

/// Observation hooks, used by tests and diagnostics.
pub trait Monitor {
    /// Model value `Φ(x_l, y_l)` after inner step `l` of outer iteration `j`.
    fn inner_step(&mut self, _j: usize, _l: usize, _phi: f64) {}
    fn outer_step(&mut self, _snap: &OuterSnapshot<'_>) {}
    /// A y accepted by the inner loop.
    fn accepted_y(&mut self, _y: &[f64]) {}
}

pub struct NoMonitor;
impl Monitor for NoMonitor {}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    /// The iteration cap was reached before the stopping test passed.
    pub capped: bool,
}

pub struct InnerParams<'a> {
    pub set: &'a SetDescriptor,
    pub s: usize,
    pub eps: f64,
    pub max_iter: usize,
    pub linesearch: bool,
    pub varrho: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Restricted y-update: the nearest point to `x` among feasible points
/// supported on `l_swap` or on `l_keep` (which contains the support of the
/// previous y, so the model never increases).
fn y_update(x: &[f64], set: &SetDescriptor, l_swap: &SupportSet, l_keep: &SupportSet) -> Vec<f64> {
    let keep = project_onto_support(x, set, l_keep).expect("super-support has size s");
    if l_swap == l_keep {
        return keep;
    }
    let swap = project_onto_support(x, set, l_swap).expect("super-support has size s");
    if sq_dist(&swap, x) < sq_dist(&keep, x) {
        swap
    } else {
        keep
    }
}

/// Alternating minimisation of the penalty model from `(x_start, y0)` until
/// `‖∇ₓΦ(x, y)‖ ≤ eps`. `on_step(l, Φ)` sees every inner iterate.
pub fn inner_loop(
    m: &PenaltyModel,
    x_start: &[f64],
    y0: &[f64],
    p: &InnerParams<'_>,
    mut on_step: impl FnMut(usize, f64),
) -> InnerResult {
    let sym = p.set.symmetry();
    let mut x = x_start.to_vec();
    let mut y = y0.to_vec();
    for l in 1..=p.max_iter {
        let star = m.solve_x(&y);
        x = if p.linesearch {
            linesearch::search(m, &x, &y, &star, p.varrho).x
        } else {
            star
        };
        // First-order estimate of ∇f at y from the model.
        let score: Vec<f64> = (0..m.dim()).map(|i| m.g_z[i] + m.h[i] * (y[i] - m.z[i])).collect();
        let l_swap = select_super_support(&y, &score, p.s, sym).expect("y is s-sparse");
        let l_keep = bf_super_support(&y, &score, sym, p.s);
        y = y_update(&x, p.set, &l_swap, &l_keep);
        on_step(l, m.value(&x, &y));
        if norm2(&m.grad_x(&x, &y)) <= p.eps {
            return InnerResult { x, y, iterations: l, capped: false };
        }
    }
    InnerResult {
        x,
        y,
        iterations: p.max_iter,
        capped: true,
    }
}

/// `ρ ← max(ρ_min, min(r·ρ, ρ_max))`.
pub fn next_rho(rho: f64, cfg: &SolverConfig) -> f64 {
    (cfg.r * rho).min(cfg.rho_max).max(cfg.rho_min)
}

/// The agreement safeguard fails when `‖x - y‖ > τΔ + η`.
pub fn agreement_violated(gap: f64, delta: f64, tau: f64, eta: f64) -> bool {
    gap > tau * delta + eta
}

pub fn solve(problem: &ProblemInstance, cfg: &SolverConfig) -> RunRecord {
    solve_monitored(problem, cfg, &mut NoMonitor)
}

pub fn solve_monitored(problem: &ProblemInstance, cfg: &SolverConfig, mon: &mut dyn Monitor) -> RunRecord {
    let mut ev = Evaluator::new(problem, cfg);
    let term = run(&mut ev, cfg, mon).unwrap_or_else(Termination::from);
    ev.finish(&format!("pd-{}", cfg.hessian), term)
}

fn run(ev: &mut Evaluator<'_>, cfg: &SolverConfig, mon: &mut dyn Monitor) -> Eval<Termination> {
    let set = ev.problem.set;
    let s = ev.problem.s;
    let n = ev.problem.n;

    // Warm start: a short basic-feasible search, then a restricted polish.
    let x = ev.problem.x0.clone();
    let (f, g) = ev.value_grad(&x)?;
    if ev.observe(&x, f, &g) {
        return Ok(Termination::Converged);
    }
    let mut l_est = 1.0;
    let (warm, conv) = bfs_search(ev, Step { x, f, g }, &mut l_est, Some(cfg.bfs_max_iter), cfg)?;
    if conv {
        return Ok(Termination::Converged);
    }
    let support = if SupportSet::of(&warm.x).len() == s {
        SupportSet::of(&warm.x)
    } else {
        bf_super_support(&warm.x, &warm.g, set.symmetry(), s)
    };
    let r = fista_restricted(ev, &warm.x, &support, l_est, cfg.fista_max_iter, cfg.bfs_tol)?;
    l_est = r.l;
    let start = if r.f <= warm.f { Step { x: r.x, f: r.f, g: r.g } } else { warm };
    if ev.observe(&start.x, start.f, &start.g) {
        return Ok(Termination::Converged);
    }

    let mut anchor = start.x.clone();
    let mut anchor_g = start.g.clone();
    let mut x_prev = start.x.clone();
    let mut g_prev = start.g.clone();
    let mut y_prev = start.x.clone();
    let mut y0 = start.x.clone();
    let mut f_ref = start.f;
    let mut rho = cfg.rho0;
    let mut d = vec![cfg.mu.clamp(cfg.lambda_min, cfg.lambda_max); n];
    let mut mem = CurvatureMemory::new(cfg.memory, cfg.varrho);
    let mut upsilon = {
        let m = PenaltyModel::new(x_prev.clone(), g_prev.clone(), d.clone(), rho);
        start.f.max(m.min_value(&y0)).max(cfg.c_hat)
    };
    let mut delta = 0.0;
    let mut f_window = start.f;
    let mut since_progress = 0usize;

    let mut j = 0usize;
    loop {
        j += 1;
        let (eps_prev, _) = cfg.tolerances(j - 1);
        let (_, eta) = cfg.tolerances(j);
        let model = PenaltyModel::new(x_prev.clone(), g_prev.clone(), d.clone(), rho);
        let params = InnerParams {
            set: &set,
            s,
            eps: eps_prev,
            max_iter: cfg.inner_max_iter,
            linesearch: cfg.linesearch,
            varrho: cfg.varrho,
        };
        let inner = inner_loop(&model, &x_prev, &y0, &params, |l, phi| mon.inner_step(j, l, phi));
        mon.accepted_y(&inner.y);

        rho = next_rho(rho, cfg);
        let (fx, gx) = ev.value_grad(&inner.x)?;
        let (fy, gy) = ev.value_grad(&inner.y)?;
        if ev.observe(&inner.y, fy, &gy) {
            return Ok(Termination::Converged);
        }
        if inner.capped {
            return Ok(Termination::Stagnation);
        }

        let next = PenaltyModel::new(inner.x.clone(), gx.clone(), d.clone(), rho);
        let gap = sq_dist(&inner.x, &inner.y).sqrt();
        let restart = next.min_value(&inner.y) > upsilon || agreement_violated(gap, delta, cfg.tau, eta);
        y0 = if restart { anchor.clone() } else { inner.y.clone() };
        upsilon = upsilon.max(fx).max(next.min_value(&y0));
        delta = gap;
        mem.update(&inner.x, &x_prev, &gx, &g_prev);
        d = diag_update(cfg.hessian, &mem, &d, cfg.lambda_min, cfg.lambda_max);
        mon.outer_step(&OuterSnapshot {
            j,
            rho,
            d: &d,
            upsilon,
            x: &inner.x,
            y: &inner.y,
            restart,
        });

        if fy < f_window - STALL_DECREASE * (1.0 + f_window.abs()) {
            f_window = fy;
            since_progress = 0;
        } else {
            since_progress += 1;
        }
        let stalled = sq_dist(&inner.y, &y_prev).sqrt() < STAGNATION_TOL || since_progress >= STALL_WINDOW;
        y_prev = inner.y.clone();
        x_prev = inner.x;
        g_prev = gx;
        if stalled {
            // Recover from whichever of y and the anchor is lower.
            let base = if fy < f_ref {
                Step { x: inner.y, f: fy, g: gy }
            } else {
                Step { x: anchor.clone(), f: f_ref, g: anchor_g.clone() }
            };
            match recover(ev, base, f_ref, &mut l_est, cfg)? {
                Recovery::Converged => return Ok(Termination::Converged),
                Recovery::Stuck => return Ok(Termination::Stagnation),
                Recovery::Moved(p) => {
                    // Restart the decomposition at the improved point.
                    f_ref = p.f;
                    anchor = p.x.clone();
                    anchor_g = p.g.clone();
                    y0 = p.x.clone();
                    y_prev = p.x.clone();
                    x_prev = p.x;
                    g_prev = p.g;
                    delta = 0.0;
                    f_window = f_ref;
                    since_progress = 0;
                }
            }
        }
    }
}

enum Recovery {
    Converged,
    Stuck,
    Moved(Step),
}

/// Restricted polish of the stalled y followed by a few sparse-simplex
/// moves. Succeeds when the objective drops below `f_ref`.
fn recover(ev: &mut Evaluator<'_>, base: Step, f_ref: f64, l: &mut f64, cfg: &SolverConfig) -> Eval<Recovery> {
    let s = ev.problem.s;
    let support = if SupportSet::of(&base.x).len() == s {
        SupportSet::of(&base.x)
    } else {
        bf_super_support(&base.x, &base.g, ev.problem.set.symmetry(), s)
    };
    let r = fista_restricted(ev, &base.x, &support, *l, cfg.fista_max_iter, cfg.bfs_tol)?;
    *l = r.l;
    let start = if r.f < base.f { Step { x: r.x, f: r.f, g: r.g } } else { base };
    if ev.observe(&start.x, start.f, &start.g) {
        return Ok(Recovery::Converged);
    }
    let opts = SimplexSearch {
        greedy: true,
        max_iter: Some(cfg.pss_max_iter),
        tol: Some(cfg.pss_tol),
    };
    let mut l_moves = 1.0;
    let (out, end) = simplex_search(ev, start, &opts, &mut l_moves)?;
    if end == crate::baselines::simplex::SearchEnd::Converged {
        return Ok(Recovery::Converged);
    }
    let slack = 1e-15 * (1.0 + f_ref.abs());
    if out.f < f_ref - slack {
        return Ok(Recovery::Moved(out));
    }
    // Single moves failed: polish the best predicted swaps on their supports.
    let swaps = ranked_swaps(&out.x, &out.g, &ev.problem.set, s, *l);
    for (trial, support) in swaps.into_iter().take(SWAP_TRIALS) {
        let r = fista_restricted(ev, &trial, &support, *l, cfg.fista_max_iter, cfg.bfs_tol)?;
        if r.f < f_ref - slack {
            *l = r.l;
            return Ok(Recovery::Moved(Step { x: r.x, f: r.f, g: r.g }));
        }
    }
    Ok(Recovery::Stuck)
}
