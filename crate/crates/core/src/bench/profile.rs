//! Dolan-Moré performance profiles.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bench::harness::best_values;
use crate::record::RunRecord;
use crate::stationarity::{classify_solved, Criterion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cost {
    Nf2g,
    Sec,
}

impl Cost {
    pub const ALL: [Cost; 2] = [Cost::Nf2g, Cost::Sec];
    pub fn as_str(self) -> &'static str {
        match self {
            Cost::Nf2g => "nf2g",
            Cost::Sec => "sec",
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Step function `τ ↦ ρ(τ)`, listed at its jump points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver: String,
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// `ρ(τ)`.
    pub fn at(&self, tau: f64) -> f64 {
        self.points.iter().take_while(|p| p.0 <= tau).last().map_or(0.0, |p| p.1)
    }
}

/// Cost at which `r` first met the criterion, if within the budget.
pub fn solve_cost(r: &RunRecord, cost: Cost, criterion: Criterion, eps: f64, f_opt: f64, nf2g_max: u64, sec_max: f64) -> Option<f64> {
    let (nf2g, sec) = r.cost_to(criterion, eps, f_opt)?;
    classify_solved(0.0, nf2g, sec, eps, nf2g_max, sec_max).then_some(())?;
    Some(match cost {
        Cost::Nf2g => nf2g as f64,
        Cost::Sec => sec,
    })
}

/// One curve per solver, in order of first appearance.
pub fn performance_profile(
    records: &[RunRecord],
    cost: Cost,
    criterion: Criterion,
    eps: f64,
    nf2g_max: u64,
    sec_max: f64,
) -> Vec<ProfileCurve> {
    let best = best_values(records);
    let mut solvers: Vec<&str> = Vec::new();
    let mut problems: Vec<&str> = Vec::new();
    for r in records {
        if !solvers.contains(&r.solver.as_str()) {
            solvers.push(&r.solver);
        }
        if !problems.contains(&r.problem.as_str()) {
            problems.push(&r.problem);
        }
    }
    let mut costs: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in records {
        let f_opt = best.get(&r.problem).copied().unwrap_or(r.f_best);
        if let Some(c) = solve_cost(r, cost, criterion, eps, f_opt, nf2g_max, sec_max) {
            costs.insert((r.solver.as_str(), r.problem.as_str()), c.max(f64::MIN_POSITIVE));
        }
    }
    let total = problems.len().max(1) as f64;
    let min_cost: BTreeMap<&str, f64> = problems
        .iter()
        .filter_map(|&p| {
            let m = solvers.iter().filter_map(|&s| costs.get(&(s, p))).copied().fold(f64::INFINITY, f64::min);
            m.is_finite().then_some((p, m))
        })
        .collect();
    solvers
        .iter()
        .map(|&s| {
            let mut ratios: Vec<f64> = problems
                .iter()
                .filter_map(|&p| Some(costs.get(&(s, p))? / min_cost.get(p)?))
                .collect();
            ratios.sort_by(f64::total_cmp);
            let mut points = vec![(1.0, ratios.iter().filter(|&&r| r <= 1.0).count() as f64 / total)];
            for (k, &r) in ratios.iter().enumerate() {
                let frac = (k + 1) as f64 / total;
                if r <= 1.0 {
                    continue;
                }
                match points.last_mut() {
                    Some(last) if last.0 == r => last.1 = frac,
                    _ => points.push((r, frac)),
                }
            }
            ProfileCurve {
                solver: s.to_string(),
                points,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{Termination, TracePoint};

    fn rec(solver: &str, problem: &str, nf2g: Option<u64>) -> RunRecord {
        let trace = nf2g
            .map(|c| vec![TracePoint { nf2g: c, sec: c as f64 * 1e-3, f_best: 0.0, rgs_best: 0.0 }])
            .unwrap_or_default();
        RunRecord {
            solver: solver.into(),
            problem: problem.into(),
            family: "f".into(),
            n: 2,
            m: 1,
            s: 1,
            f0: 1.0,
            f_best: if nf2g.is_some() { 0.0 } else { 1.0 },
            rgs_best: if nf2g.is_some() { 0.0 } else { 1.0 },
            q: None,
            nf: 0,
            ng: 0,
            nf2g: nf2g.unwrap_or(20_000),
            wall_seconds: 0.0,
            solved_q6: false,
            solved_q3: false,
            solved_s6: false,
            solved_s3: false,
            termination: Termination::Budget,
            x_best: vec![],
            trace,
            error: None,
        }
    }

    fn profile(recs: &[RunRecord]) -> Vec<ProfileCurve> {
        performance_profile(recs, Cost::Nf2g, Criterion::Strong, 1e-6, 20_000, f64::INFINITY)
    }

    #[test]
    fn crossing_costs() {
        let recs = vec![rec("a", "p1", Some(10)), rec("a", "p2", Some(20)), rec("b", "p1", Some(20)), rec("b", "p2", Some(10))];
        for c in profile(&recs) {
            assert_eq!(c.at(1.0), 0.5);
            assert_eq!(c.at(2.0), 1.0);
            assert_eq!(c.at(1.5), 0.5);
        }
    }

    #[test]
    fn single_solver_and_nothing_solved() {
        let recs = vec![rec("a", "p1", Some(5)), rec("a", "p2", None), rec("z", "p1", None), rec("z", "p2", None)];
        let curves = profile(&recs);
        assert_eq!(curves[0].points, vec![(1.0, 0.5)]);
        assert_eq!(curves[1].points, vec![(1.0, 0.0)]);
        assert_eq!(curves[1].at(1e9), 0.0);
    }

    #[test]
    fn budget_overrun_counts_as_unsolved() {
        let recs = vec![rec("a", "p1", Some(30_000))];
        assert_eq!(profile(&recs)[0].at(f64::INFINITY), 0.0);
    }
}
