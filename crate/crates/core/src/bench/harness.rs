//! Runs every (solver, problem) pair under the same configuration and fills
//! in the cross-solver quantities (best known value, solved flags).

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::problem::ProblemInstance;
use crate::record::{RunRecord, Termination};
use crate::solver::Solver;

fn failed_record(solver: Solver, p: &ProblemInstance, cfg: &SolverConfig, msg: String) -> RunRecord {
    RunRecord {
        solver: solver.record_name(cfg),
        problem: p.id.clone(),
        family: p.family_name().to_string(),
        n: p.n,
        m: p.m,
        s: p.s,
        f0: p.f0,
        f_best: f64::INFINITY,
        rgs_best: f64::INFINITY,
        q: None,
        nf: 0,
        ng: 0,
        nf2g: 0,
        wall_seconds: 0.0,
        solved_q6: false,
        solved_q3: false,
        solved_s6: false,
        solved_s3: false,
        termination: Termination::Failed,
        x_best: Vec::new(),
        trace: Vec::new(),
        error: Some(msg),
    }
}

/// Runs one pair; a panic inside a solver becomes a failed record.
pub fn run_one(solver: Solver, p: &ProblemInstance, cfg: &SolverConfig) -> RunRecord {
    catch_unwind(AssertUnwindSafe(|| solver.solve(p, cfg))).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "solver panicked".into());
        failed_record(solver, p, cfg, msg)
    })
}

/// Smallest `f_best` per problem across all records.
pub fn best_values(records: &[RunRecord]) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for r in records {
        if r.f_best.is_finite() {
            let e = out.entry(r.problem.clone()).or_insert(f64::INFINITY);
            *e = e.min(r.f_best);
        }
    }
    out
}

/// Records come back problem-major in the given solver order, independent
/// of scheduling.
pub fn run_suite(problems: &[ProblemInstance], solvers: &[Solver], cfg: &SolverConfig) -> Vec<RunRecord> {
    let pairs: Vec<(usize, Solver)> = (0..problems.len()).flat_map(|i| solvers.iter().map(move |&s| (i, s))).collect();
    let mut records: Vec<RunRecord> = pairs.par_iter().map(|&(i, s)| run_one(s, &problems[i], cfg)).collect();
    finalize_all(&mut records, cfg);
    records
}

pub fn finalize_all(records: &mut [RunRecord], cfg: &SolverConfig) {
    let best = best_values(records);
    for r in records.iter_mut() {
        if r.termination == Termination::Failed {
            continue;
        }
        let f_opt = best.get(&r.problem).copied().unwrap_or(r.f_best);
        r.finalize(f_opt, cfg.nf2g_max, cfg.sec_max);
    }
}
