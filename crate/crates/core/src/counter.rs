//! Counted access to the objective, budget enforcement and best-point
//! tracking. Every solver talks to the problem only through [`Evaluator`].

use std::time::Instant;

use crate::config::SolverConfig;
use crate::problem::ProblemInstance;
use crate::record::{RunRecord, Termination, TracePoint};
use crate::stationarity::rg_s;

#[derive(Debug, Clone)]
pub struct EvalCounter {
    pub nf: u64,
    pub ng: u64,
    start: Instant,
}

impl Default for EvalCounter {
    fn default() -> Self {
        Self::new()
    }
}

impl EvalCounter {
    pub fn new() -> Self {
        Self {
            nf: 0,
            ng: 0,
            start: Instant::now(),
        }
    }

    pub fn nf2g(&self) -> u64 {
        self.nf + 2 * self.ng
    }

    pub fn wall_seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Reason a solver must stop immediately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Budget,
    Time,
}

pub type Eval<T> = Result<T, Stop>;

pub struct Evaluator<'a> {
    pub problem: &'a ProblemInstance,
    counter: EvalCounter,
    nf2g_max: u64,
    sec_max: f64,
    eps: f64,
    last_f: Option<(Vec<f64>, f64)>,
    last_g: Option<(Vec<f64>, Vec<f64>)>,
    f_best: f64,
    x_best: Vec<f64>,
    rgs_best: f64,
    trace: Vec<TracePoint>,
    converged: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a ProblemInstance, cfg: &SolverConfig) -> Self {
        Self {
            problem,
            counter: EvalCounter::new(),
            nf2g_max: cfg.nf2g_max,
            sec_max: cfg.sec_max,
            eps: cfg.eps,
            last_f: None,
            last_g: None,
            f_best: f64::INFINITY,
            x_best: problem.x0.clone(),
            rgs_best: f64::INFINITY,
            trace: Vec::new(),
            converged: false,
        }
    }

    pub fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    pub fn nf2g(&self) -> u64 {
        self.counter.nf2g()
    }

    fn admit(&self, cost: u64) -> Eval<()> {
        if self.counter.nf2g() + cost > self.nf2g_max {
            return Err(Stop::Budget);
        }
        if self.sec_max.is_finite() && self.counter.wall_seconds() > self.sec_max {
            return Err(Stop::Time);
        }
        Ok(())
    }

    pub fn value(&mut self, x: &[f64]) -> Eval<f64> {
        if let Some((p, f)) = &self.last_f {
            if p.as_slice() == x {
                return Ok(*f);
            }
        }
        self.admit(1)?;
        self.counter.nf += 1;
        let f = self.problem.objective.value(x);
        self.last_f = Some((x.to_vec(), f));
        Ok(f)
    }

    pub fn gradient(&mut self, x: &[f64]) -> Eval<Vec<f64>> {
        if let Some((p, g)) = &self.last_g {
            if p.as_slice() == x {
                return Ok(g.clone());
            }
        }
        self.admit(2)?;
        self.counter.ng += 1;
        let mut g = vec![0.0; x.len()];
        self.problem.objective.gradient(x, &mut g);
        self.last_g = Some((x.to_vec(), g.clone()));
        Ok(g)
    }

    /// Both values; the budget is checked for the pair before either call.
    pub fn value_grad(&mut self, x: &[f64]) -> Eval<(f64, Vec<f64>)> {
        let f_cached = matches!(&self.last_f, Some((p, _)) if p.as_slice() == x);
        let g_cached = matches!(&self.last_g, Some((p, _)) if p.as_slice() == x);
        let cost = if f_cached { 0 } else { 1 } + if g_cached { 0 } else { 2 };
        self.admit(cost)?;
        let f = self.value(x)?;
        let g = self.gradient(x)?;
        Ok((f, g))
    }

    /// Registers a feasible point with its value and gradient. Returns true
    /// once the residual at this point reaches the target accuracy.
    pub fn observe(&mut self, y: &[f64], f: f64, g: &[f64]) -> bool {
        let r = rg_s(y, g, &self.problem.set, self.problem.s).unwrap_or(f64::INFINITY);
        let mut improved = false;
        if f < self.f_best {
            self.f_best = f;
            self.x_best = y.to_vec();
            improved = true;
        }
        if r < self.rgs_best {
            self.rgs_best = r;
            improved = true;
        }
        if improved {
            self.trace.push(TracePoint {
                nf2g: self.counter.nf2g(),
                sec: self.counter.wall_seconds(),
                f_best: self.f_best,
                rgs_best: self.rgs_best,
            });
        }
        if r <= self.eps {
            self.converged = true;
        }
        r <= self.eps
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn f_best(&self) -> f64 {
        self.f_best
    }

    pub fn x_best(&self) -> &[f64] {
        &self.x_best
    }

    pub fn rgs_best(&self) -> f64 {
        self.rgs_best
    }

    pub fn finish(self, solver: &str, termination: Termination) -> RunRecord {
        let p = self.problem;
        let termination = if self.converged { Termination::Converged } else { termination };
        RunRecord {
            solver: solver.to_string(),
            problem: p.id.clone(),
            family: p.family_name().to_string(),
            n: p.n,
            m: p.m,
            s: p.s,
            f0: p.f0,
            f_best: self.f_best,
            rgs_best: self.rgs_best,
            q: None,
            nf: self.counter.nf,
            ng: self.counter.ng,
            nf2g: self.counter.nf2g(),
            wall_seconds: self.counter.wall_seconds(),
            solved_q6: false,
            solved_q3: false,
            solved_s6: self.rgs_best <= 1e-6,
            solved_s3: self.rgs_best <= 1e-3,
            termination,
            x_best: self.x_best,
            trace: self.trace,
            error: None,
        }
    }
}

impl From<Stop> for Termination {
    fn from(_: Stop) -> Self {
        Termination::Budget
    }
}
