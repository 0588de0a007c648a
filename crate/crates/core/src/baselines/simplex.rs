//! Sparse-simplex style coordinate search (PSS and GSS).
//!
//! Candidate moves change one coordinate (or, on sets with a sum
//! constraint, transfer mass between two coordinates), optionally swapping an
//! active index out. Each candidate is scored by the decrease of the upper
//! quadratic model `g·d + L/2‖d‖²`; the chosen move is then minimised along
//! its line with a few projected-gradient steps on the true objective.

use crate::config::SolverConfig;
use crate::counter::{Eval, Evaluator};
use crate::sets::{SetDescriptor, SetKind, SupportSet};

/// Line refinements after the first improving trial.
pub const LINE_ITERS: usize = 5;
pub const LINE_BACKTRACK: usize = 5;
/// Failed executions per sweep before the moves are rescored.
const MAX_ATTEMPTS: usize = 20;
/// Lower bound for the curvature used to score moves.
const L_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Move coordinate `j` alone.
    Coord { j: usize },
    /// Shift mass from `i` to `j` along `e_j - e_i`.
    Pair { i: usize, j: usize },
    /// Zero out active `i` and activate `j`.
    Swap { i: usize, j: usize },
}

/// A move as `x + δ + t·d` with `t ∈ [lo, hi]`; at most two entries each.
#[derive(Debug, Clone, Copy)]
struct Line {
    delta: [(usize, f64); 2],
    n_delta: usize,
    dir: [(usize, f64); 2],
    n_dir: usize,
    lo: f64,
    hi: f64,
}

impl Line {
    fn point(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut p = x.to_vec();
        for &(k, v) in &self.delta[..self.n_delta] {
            p[k] += v;
        }
        for &(k, v) in &self.dir[..self.n_dir] {
            p[k] += t * v;
        }
        for &(k, _) in self.delta[..self.n_delta].iter().chain(&self.dir[..self.n_dir]) {
            if p[k].abs() < 1e-300 {
                p[k] = 0.0;
            }
        }
        p
    }

    fn slope(&self, g: &[f64]) -> f64 {
        self.dir[..self.n_dir].iter().map(|&(k, v)| g[k] * v).sum()
    }

    fn dd(&self) -> f64 {
        self.dir[..self.n_dir].iter().map(|&(_, v)| v * v).sum()
    }

    /// Minimiser and value of the upper model along the line.
    fn predict(&self, g: &[f64], l: f64) -> (f64, f64) {
        let a: f64 = self.delta[..self.n_delta].iter().map(|&(k, v)| g[k] * v).sum();
        let c: f64 = self.delta[..self.n_delta].iter().map(|&(_, v)| v * v).sum();
        let mut e = 0.0;
        for &(k, v) in &self.delta[..self.n_delta] {
            for &(kk, w) in &self.dir[..self.n_dir] {
                if k == kk {
                    e += v * w;
                }
            }
        }
        let b = self.slope(g);
        let dd = self.dd();
        let t = if dd > 0.0 {
            (-(b + l * e) / (l * dd)).clamp(self.lo, self.hi)
        } else {
            0.0
        };
        (t, a + b * t + 0.5 * l * (c + 2.0 * e * t + dd * t * t))
    }
}

struct Geometry<'a> {
    x: &'a [f64],
    set: SetDescriptor,
    /// `Σ|x_k|^p` for finite-p balls.
    pow_sum: f64,
}

impl<'a> Geometry<'a> {
    fn new(x: &'a [f64], set: SetDescriptor) -> Self {
        let pow_sum = match set.kind() {
            SetKind::LpBall { p, .. } if p.is_finite() => x.iter().map(|v| v.abs().powf(p)).sum(),
            _ => 0.0,
        };
        Self { x, set, pow_sum }
    }

    /// Feasible displacement interval for coordinate `j` whose base value is
    /// `b`, when the coordinates listed in `removed` are zero.
    fn range(&self, j: usize, b: f64, removed: Option<usize>) -> Option<(f64, f64)> {
        match self.set.kind() {
            SetKind::FullSpace => Some((f64::NEG_INFINITY, f64::INFINITY)),
            SetKind::NonnegOrthant => Some((-b, f64::INFINITY)),
            SetKind::Box { lower, upper } => Some((lower - b, upper - b)),
            SetKind::LpBall { p, radius } => {
                let r = if p.is_infinite() {
                    radius
                } else {
                    let mut rest = self.pow_sum - self.x[j].abs().powf(p);
                    if let Some(i) = removed {
                        rest -= self.x[i].abs().powf(p);
                    }
                    let rem = radius.powf(p) - rest.max(0.0);
                    if rem <= 0.0 {
                        return None;
                    }
                    rem.powf(1.0 / p)
                };
                Some((-r - b, r - b))
            }
            SetKind::Simplex | SetKind::UnitSum => None,
        }
    }

    fn line(&self, mv: Move) -> Option<Line> {
        let x = self.x;
        let sum = self.set.has_sum_constraint();
        let empty = [(0usize, 0.0f64); 2];
        match mv {
            Move::Coord { j } if !sum => {
                let (lo, hi) = self.range(j, x[j], None)?;
                Some(Line {
                    delta: empty,
                    n_delta: 0,
                    dir: [(j, 1.0), (0, 0.0)],
                    n_dir: 1,
                    lo,
                    hi,
                })
            }
            Move::Swap { i, j } if !sum => {
                let (lo, hi) = self.range(j, 0.0, Some(i))?;
                Some(Line {
                    delta: [(i, -x[i]), (0, 0.0)],
                    n_delta: 1,
                    dir: [(j, 1.0), (0, 0.0)],
                    n_dir: 1,
                    lo,
                    hi,
                })
            }
            Move::Pair { i, j } if sum => {
                let (lo, hi) = if matches!(self.set.kind(), SetKind::Simplex) {
                    (-x[j], x[i])
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                };
                Some(Line {
                    delta: empty,
                    n_delta: 0,
                    dir: [(j, 1.0), (i, -1.0)],
                    n_dir: 2,
                    lo,
                    hi,
                })
            }
            Move::Swap { i, j } if sum => Some(Line {
                delta: [(i, -x[i]), (j, x[i])],
                n_delta: 2,
                dir: empty,
                n_dir: 0,
                lo: 0.0,
                hi: 0.0,
            }),
            _ => None,
        }
    }
}

/// All candidate moves at `x`, in a fixed order.
pub fn candidate_moves(x: &[f64], set: &SetDescriptor, s: usize) -> Vec<Move> {
    let n = x.len();
    let active = SupportSet::of(x);
    let full = active.len() >= s;
    let mut out = Vec::new();
    if set.has_sum_constraint() {
        for i in active.iter() {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let j_active = x[j] != 0.0;
                if j_active && j < i {
                    // (j, i) already covers this pair with both signs of t.
                    continue;
                }
                if j_active || !full {
                    out.push(Move::Pair { i, j });
                }
            }
        }
    } else {
        for j in 0..n {
            if x[j] != 0.0 || !full {
                out.push(Move::Coord { j });
            }
        }
    }
    if full {
        for i in active.iter() {
            for j in (0..n).filter(|&j| x[j] == 0.0) {
                out.push(Move::Swap { i, j });
            }
        }
    }
    out
}

/// Swap moves at a full-support `x`, best predicted first, as the trial
/// point at the model minimiser together with its support.
pub(crate) fn ranked_swaps(x: &[f64], g: &[f64], set: &SetDescriptor, s: usize, l: f64) -> Vec<(Vec<f64>, SupportSet)> {
    let geo = Geometry::new(x, *set);
    let mut scored: Vec<(f64, Vec<f64>, SupportSet)> = candidate_moves(x, set, s)
        .into_iter()
        .filter_map(|mv| {
            let Move::Swap { i, j } = mv else { return None };
            let line = geo.line(mv)?;
            let (t, q) = line.predict(g, l);
            let mut idx: Vec<usize> = SupportSet::of(x).iter().filter(|&k| k != i).collect();
            idx.push(j);
            let support = SupportSet::new(idx, x.len()).ok()?;
            Some((q, line.point(x, t), support))
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.into_iter().map(|(_, p, sup)| (p, sup)).collect()
}

pub struct Step {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

/// Tries `line` from `x`. Returns the improved point, or `None` when no
/// trial beat `fx`.
fn execute(ev: &mut Evaluator<'_>, x: &[f64], fx: f64, line: &Line, t_star: f64, l: f64) -> Eval<Option<Step>> {
    let dd = line.dd();
    let mut t = t_star;
    let mut found = None;
    for _ in 0..=LINE_BACKTRACK {
        let p = line.point(x, t);
        let fp = ev.value(&p)?;
        if fp < fx {
            found = Some((p, fp));
            break;
        }
        if dd == 0.0 || t == 0.0 {
            break;
        }
        t *= 0.5;
    }
    let Some((mut p, mut fp)) = found else { return Ok(None) };
    let mut gp = ev.gradient(&p)?;
    if dd > 0.0 {
        let mut curv = l * dd;
        for _ in 0..LINE_ITERS {
            let slope = line.slope(&gp);
            let mut moved = false;
            for _ in 0..=LINE_BACKTRACK {
                let tn = (t - slope / curv).clamp(line.lo, line.hi);
                if tn == t {
                    break;
                }
                let pn = line.point(x, tn);
                let fnew = ev.value(&pn)?;
                if fnew < fp {
                    t = tn;
                    p = pn;
                    fp = fnew;
                    moved = true;
                    curv *= 0.5;
                    break;
                }
                curv *= 2.0;
            }
            if !moved {
                break;
            }
            gp = ev.gradient(&p)?;
        }
    }
    Ok(Some(Step { x: p, f: fp, g: gp }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchEnd {
    Converged,
    /// No candidate move improves the objective.
    FixedPoint,
    /// The iteration cap or the relative-decrease tolerance was reached.
    Limit,
}

pub struct SimplexSearch {
    /// Best-improving (GSS) instead of first-improving (PSS).
    pub greedy: bool,
    pub max_iter: Option<usize>,
    /// Stop once one sweep decreases `f` by less than `tol·(1 + |f|)`.
    pub tol: Option<f64>,
}

/// Runs the search from a feasible `start` with known value and gradient.
pub fn simplex_search(
    ev: &mut Evaluator<'_>,
    start: Step,
    opts: &SimplexSearch,
    l: &mut f64,
) -> Eval<(Step, SearchEnd)> {
    let set = ev.problem.set;
    let s = ev.problem.s;
    let mut cur = start;
    let mut it = 0;
    loop {
        if opts.max_iter.is_some_and(|m| it >= m) {
            return Ok((cur, SearchEnd::Limit));
        }
        it += 1;
        let geo = Geometry::new(&cur.x, set);
        let slack = 1e-14 * (1.0 + cur.f.abs());
        let mut scored: Vec<(Move, Line, f64, f64)> = candidate_moves(&cur.x, &set, s)
            .into_iter()
            .filter_map(|mv| {
                let line = geo.line(mv)?;
                let (t, q) = line.predict(&cur.g, *l);
                (q < -slack).then_some((mv, line, t, q))
            })
            .collect();
        if opts.greedy {
            scored.sort_by(|a, b| a.3.total_cmp(&b.3));
        }
        if scored.is_empty() {
            return Ok((cur, SearchEnd::FixedPoint));
        }
        let mut next = None;
        for (_, line, t, _) in scored.iter().take(MAX_ATTEMPTS) {
            match execute(ev, &cur.x, cur.f, line, *t, *l)? {
                Some(step) => {
                    *l = (*l * 0.5).max(L_FLOOR);
                    next = Some(step);
                    break;
                }
                None => *l *= 2.0,
            }
        }
        // Every trial failed: the curvature was underestimated, so rescore.
        let Some(step) = next else { continue };
        let decrease = cur.f - step.f;
        let f_old = cur.f;
        cur = step;
        if ev.observe(&cur.x, cur.f, &cur.g) {
            return Ok((cur, SearchEnd::Converged));
        }
        if opts.tol.is_some_and(|tol| decrease < tol * (1.0 + f_old.abs())) {
            return Ok((cur, SearchEnd::Limit));
        }
    }
}

fn run(problem: &crate::problem::ProblemInstance, cfg: &SolverConfig, greedy: bool, name: &str) -> crate::record::RunRecord {
    use crate::record::Termination;
    let mut ev = Evaluator::new(problem, cfg);
    let mut l = 1.0;
    let outcome = (|| -> Eval<Termination> {
        let x = problem.x0.clone();
        let (f, g) = ev.value_grad(&x)?;
        if ev.observe(&x, f, &g) {
            return Ok(Termination::Converged);
        }
        let opts = SimplexSearch {
            greedy,
            max_iter: None,
            tol: None,
        };
        let (_, end) = simplex_search(&mut ev, Step { x, f, g }, &opts, &mut l)?;
        Ok(match end {
            SearchEnd::Converged => Termination::Converged,
            _ => Termination::Stagnation,
        })
    })();
    let term = outcome.unwrap_or_else(Termination::from);
    ev.finish(name, term)
}

/// Partial sparse-simplex: first improving move each sweep.
pub fn pss(problem: &crate::problem::ProblemInstance, cfg: &SolverConfig) -> crate::record::RunRecord {
    run(problem, cfg, false, "pss")
}

/// Greedy sparse-simplex: best predicted move each sweep.
pub fn gss(problem: &crate::problem::ProblemInstance, cfg: &SolverConfig) -> crate::record::RunRecord {
    run(problem, cfg, true, "gss")
}
